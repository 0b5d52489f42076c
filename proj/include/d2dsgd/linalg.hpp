#pragma once

#include <vector>

namespace d2dsgd {

using Vec = std::vector<double>;

// Dense row-major matrix. Sized for device-count and sketch-dimension scale
// work, not large-scale numerics.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
};

double dot(const Vec& x, const Vec& y);
double squared_norm(const Vec& x);
double norm2(const Vec& x);
void axpy(double alpha, const Vec& x, Vec& y);  // y += alpha * x

Vec matvec(const Mat& m, const Vec& x);
Vec matvec_transposed(const Mat& m, const Vec& x);  // m^T x

struct SymEigen {
    Vec values;   // descending
    Mat vectors;  // column k pairs with values[k]
};

// Cyclic Jacobi for symmetric matrices. Converges when the off-diagonal
// Frobenius norm drops below tol.
SymEigen jacobi_eigen(Mat a, double tol = 1e-10, int max_sweeps = 100);

// Cholesky solve for symmetric positive definite systems. Returns false when
// factorization hits a non-positive pivot.
bool solve_spd(Mat a, Vec b, Vec& x);

// Largest eigenvalue of a^T a by power iteration.
double largest_eigenvalue_ata(const Mat& a, int max_iters = 300, double tol = 1e-10);

}  // namespace d2dsgd
