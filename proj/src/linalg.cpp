#include "d2dsgd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "d2dsgd/errors.hpp"

namespace d2dsgd {

double dot(const Vec& x, const Vec& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double squared_norm(const Vec& x) { return dot(x, x); }

double norm2(const Vec& x) { return std::sqrt(squared_norm(x)); }

void axpy(double alpha, const Vec& x, Vec& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vec matvec(const Mat& m, const Vec& x) {
    if (static_cast<int>(x.size()) != m.cols) throw NumericError("matvec: dimension mismatch");
    Vec out(m.rows, 0.0);
    for (int r = 0; r < m.rows; ++r) {
        const double* row = m.a.data() + static_cast<std::size_t>(r) * m.cols;
        double s = 0.0;
        for (int c = 0; c < m.cols; ++c) s += row[c] * x[c];
        out[r] = s;
    }
    return out;
}

Vec matvec_transposed(const Mat& m, const Vec& x) {
    if (static_cast<int>(x.size()) != m.rows) throw NumericError("matvec_transposed: dimension mismatch");
    Vec out(m.cols, 0.0);
    for (int r = 0; r < m.rows; ++r) {
        const double* row = m.a.data() + static_cast<std::size_t>(r) * m.cols;
        const double xr = x[r];
        for (int c = 0; c < m.cols; ++c) out[c] += row[c] * xr;
    }
    return out;
}

namespace {

double offdiag_norm(const Mat& a) {
    double s = 0.0;
    for (int r = 0; r < a.rows; ++r)
        for (int c = 0; c < a.cols; ++c)
            if (r != c) s += a(r, c) * a(r, c);
    return std::sqrt(s);
}

}  // namespace

SymEigen jacobi_eigen(Mat a, double tol, int max_sweeps) {
    if (a.rows != a.cols || a.rows == 0) throw NumericError("jacobi_eigen: matrix must be square");
    const int n = a.rows;
    for (int r = 0; r < n; ++r)
        for (int c = r + 1; c < n; ++c)
            if (std::abs(a(r, c) - a(c, r)) > 1e-12 * (1.0 + std::abs(a(r, c))))
                throw NumericError("jacobi_eigen: matrix is not symmetric");

    Mat v(n, n);
    for (int i = 0; i < n; ++i) v(i, i) = 1.0;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (offdiag_norm(a) < tol) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) > a(j, j); });

    SymEigen out;
    out.values.resize(n);
    out.vectors = Mat(n, n);
    for (int k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (int r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
    }
    return out;
}

bool solve_spd(Mat a, Vec b, Vec& x) {
    if (a.rows != a.cols || static_cast<int>(b.size()) != a.rows) return false;
    const int n = a.rows;

    // In-place Cholesky, lower triangle.
    for (int j = 0; j < n; ++j) {
        double d = a(j, j);
        for (int k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        const double ljj = std::sqrt(d);
        a(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (int k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / ljj;
        }
    }

    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= a(i, k) * b[k];
        b[i] = s / a(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int k = i + 1; k < n; ++k) s -= a(k, i) * b[k];
        b[i] = s / a(i, i);
    }
    x = std::move(b);
    return true;
}

double largest_eigenvalue_ata(const Mat& a, int max_iters, double tol) {
    if (a.rows == 0 || a.cols == 0) throw NumericError("largest_eigenvalue_ata: empty matrix");
    Vec v(a.cols, 1.0 / std::sqrt(static_cast<double>(a.cols)));
    double lambda = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        Vec w = matvec_transposed(a, matvec(a, v));
        const double nw = norm2(w);
        if (!(nw > 0.0) || !std::isfinite(nw)) return 0.0;
        const double next = nw;  // v is unit, so |A^T A v| estimates lambda_max
        for (std::size_t i = 0; i < w.size(); ++i) w[i] /= nw;
        v = std::move(w);
        if (it > 0 && std::abs(next - lambda) <= tol * std::max(1.0, next)) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return lambda;
}

}  // namespace d2dsgd
