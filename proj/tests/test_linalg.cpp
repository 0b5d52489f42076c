#include "doctest.h"

#include "d2dsgd/errors.hpp"
#include "d2dsgd/linalg.hpp"
#include "d2dsgd/rng.hpp"

#include <cmath>

using namespace d2dsgd;

namespace {

Mat path3_laplacian() {
    Mat l(3, 3);
    l(0, 0) = 1;  l(0, 1) = -1; l(0, 2) = 0;
    l(1, 0) = -1; l(1, 1) = 2;  l(1, 2) = -1;
    l(2, 0) = 0;  l(2, 1) = -1; l(2, 2) = 1;
    return l;
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("dot, norms and axpy behave") {
    Vec a{1, 2, 3}, b{4, -5, 6};
    CHECK(dot(a, b) == doctest::Approx(12.0));
    CHECK(squared_norm(a) == doctest::Approx(14.0));
    CHECK(norm2(b) == doctest::Approx(std::sqrt(77.0)));
    axpy(2.0, a, b);
    CHECK(b[0] == doctest::Approx(6.0));
    CHECK(b[1] == doctest::Approx(-1.0));
    CHECK(b[2] == doctest::Approx(12.0));
}

TEST_CASE("matvec and its transpose agree with manual products") {
    Mat m(2, 3);
    m(0, 0) = 1; m(0, 1) = 2; m(0, 2) = 3;
    m(1, 0) = 4; m(1, 1) = 5; m(1, 2) = 6;
    Vec x{1, 1, 1};
    Vec y = matvec(m, x);
    CHECK(y[0] == doctest::Approx(6.0));
    CHECK(y[1] == doctest::Approx(15.0));
    Vec z = matvec_transposed(m, Vec{1, 1});
    CHECK(z[0] == doctest::Approx(5.0));
    CHECK(z[1] == doctest::Approx(7.0));
    CHECK(z[2] == doctest::Approx(9.0));
    CHECK_THROWS_AS(matvec(m, Vec{1, 2}), NumericError);
}

TEST_CASE("eigendecomposition of a path laplacian gives 3, 1, 0") {
    auto eig = jacobi_eigen(path3_laplacian());
    REQUIRE(eig.values.size() == 3);
    CHECK(eig.values[0] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(eig.values[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(eig.values[2] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("eigenvectors satisfy the eigen equation") {
    Mat m(3, 3);
    m(0, 0) = 2; m(0, 1) = 1; m(0, 2) = 0;
    m(1, 0) = 1; m(1, 1) = 2; m(1, 2) = 1;
    m(2, 0) = 0; m(2, 1) = 1; m(2, 2) = 2;
    auto eig = jacobi_eigen(m);
    CHECK(eig.values[0] == doctest::Approx(2.0 + std::sqrt(2.0)).epsilon(1e-9));
    CHECK(eig.values[1] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(eig.values[2] == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-9));
    for (int k = 0; k < 3; ++k) {
        Vec v(3);
        for (int i = 0; i < 3; ++i) v[i] = eig.vectors(i, k);
        Vec mv = matvec(m, v);
        for (int i = 0; i < 3; ++i) {
            CHECK(mv[i] == doctest::Approx(eig.values[k] * v[i]).epsilon(1e-8));
        }
    }
}

TEST_CASE("asymmetric input to the eigensolver is rejected") {
    Mat m(2, 2);
    m(0, 0) = 1; m(0, 1) = 2;
    m(1, 0) = 3; m(1, 1) = 1;
    CHECK_THROWS_AS(jacobi_eigen(m), NumericError);
}

TEST_CASE("spd solve reproduces a known solution") {
    Rng r(3);
    const int n = 8;
    Mat b(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) b(i, j) = r.normal();
    Mat a(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double s = 0;
            for (int k = 0; k < n; ++k) s += b(k, i) * b(k, j);
            a(i, j) = s + (i == j ? 1.0 : 0.0);
        }
    }
    Vec x_true(n);
    for (int i = 0; i < n; ++i) x_true[i] = r.normal();
    Vec rhs = matvec(a, x_true);
    Vec x;
    REQUIRE(solve_spd(a, rhs, x));
    for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(x_true[i]).epsilon(1e-8));
}

TEST_CASE("spd solve reports failure on an indefinite matrix") {
    Mat a(2, 2);
    a(0, 0) = 1; a(0, 1) = 2;
    a(1, 0) = 2; a(1, 1) = 1;
    Vec x;
    CHECK_FALSE(solve_spd(a, Vec{1, 1}, x));
}

TEST_CASE("power iteration matches the eigensolver on gram matrices") {
    Rng r(17);
    Mat a(6, 4);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 4; ++j) a(i, j) = r.normal();
    Mat gram(4, 4);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            double s = 0;
            for (int k = 0; k < 6; ++k) s += a(k, i) * a(k, j);
            gram(i, j) = s;
        }
    }
    auto eig = jacobi_eigen(gram);
    CHECK(largest_eigenvalue_ata(a) == doctest::Approx(eig.values[0]).epsilon(1e-6));
}

}
