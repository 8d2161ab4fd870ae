#include <cmath>
#include <limits>

#include "doctest.h"
#include "letc/errors.hpp"
#include "letc/linalg.hpp"
#include "letc/rng.hpp"

using namespace letc;

namespace {

Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(rows.size(), rows.begin()->size());
    std::size_t i = 0;
    for (const auto& row : rows) {
        std::size_t j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

Matrix random_symmetric(std::size_t n, Rng& rng) {
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) a(i, j) = a(j, i) = rng.normal();
    return a;
}

// SPD matrix with prescribed condition number via Q diag(lambda) Q'
Matrix random_spd(std::size_t n, double condition, Rng& rng) {
    const SymmetricEigen basis = symmetric_eigen(random_symmetric(n, rng));
    Matrix a(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = n == 1 ? 0.0 : static_cast<double>(k) / (n - 1);
        const double lam = std::pow(condition, -t);  // 1 down to 1/condition
        Vector q(n);
        for (std::size_t i = 0; i < n; ++i) q[i] = basis.eigenvectors(i, k);
        a = outer_accumulate(a, q, lam);
    }
    return a;
}

Matrix reconstruct(const SymmetricEigen& eig) {
    const std::size_t n = eig.eigenvalues.size();
    Matrix a(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        Vector q(n);
        for (std::size_t i = 0; i < n; ++i) q[i] = eig.eigenvectors(i, k);
        a = outer_accumulate(a, q, eig.eigenvalues[k]);
    }
    return a;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::fabs(a(i, j) - b(i, j)));
    return m;
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("symmetric_eigen closed-form 2x2") {
    const SymmetricEigen eig = symmetric_eigen(from_rows({{2, 1}, {1, 2}}));
    REQUIRE(eig.eigenvalues.size() == 2);
    CHECK(eig.eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(eig.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("symmetric_eigen diagonal case keeps axis eigenvectors") {
    const SymmetricEigen eig = symmetric_eigen(from_rows({{5, 0, 0}, {0, 2, 0}, {0, 0, 0}}));
    CHECK(eig.eigenvalues[0] == doctest::Approx(5.0));
    CHECK(eig.eigenvalues[1] == doctest::Approx(2.0));
    CHECK(eig.eigenvalues[2] == doctest::Approx(0.0));
    for (std::size_t k = 0; k < 3; ++k)
        CHECK(std::fabs(eig.eigenvectors(k, k)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("symmetric_eigen identity") {
    const SymmetricEigen eig = symmetric_eigen(Matrix::identity(6));
    for (double lam : eig.eigenvalues) CHECK(lam == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("symmetric_eigen rejects bad input") {
    CHECK_THROWS_AS(symmetric_eigen(Matrix(2, 3)), std::invalid_argument);
    CHECK_THROWS_AS(symmetric_eigen(from_rows({{1, 2}, {5, 1}})), std::invalid_argument);
    Matrix nan(2, 2);
    nan(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(symmetric_eigen(nan), std::invalid_argument);
}

TEST_CASE("eigen reconstruction and orthonormality on random matrices") {
    Rng rng(101);
    for (std::size_t n : {2u, 5u, 16u, 64u, 128u}) {
        const Matrix a = random_symmetric(n, rng);
        const SymmetricEigen eig = symmetric_eigen(a);
        const double scale = frobenius_norm(a);
        CHECK(max_abs_diff(reconstruct(eig), a) <= 1e-9 * scale);
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p; q < n; ++q) {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    s += eig.eigenvectors(i, p) * eig.eigenvectors(i, q);
                CHECK(std::fabs(s - (p == q ? 1.0 : 0.0)) <= 1e-9);
            }
        }
        for (std::size_t k = 0; k + 1 < n; ++k)
            CHECK(eig.eigenvalues[k] >= eig.eigenvalues[k + 1]);
    }
}

TEST_CASE("solve_spd identity and diagonal") {
    const SpdSolution s1 = solve_spd(Matrix::identity(3), {1, 2, 3});
    CHECK(s1.x[0] == doctest::Approx(1.0));
    CHECK(s1.x[1] == doctest::Approx(2.0));
    CHECK(s1.x[2] == doctest::Approx(3.0));
    CHECK_FALSE(s1.jitter_applied);

    const SpdSolution s2 = solve_spd(from_rows({{4, 0}, {0, 9}}), {4, 18});
    CHECK(s2.x[0] == doctest::Approx(1.0));
    CHECK(s2.x[1] == doctest::Approx(2.0));
}

TEST_CASE("solve_spd flags the rank-deficient inconsistent system") {
    CHECK_THROWS_AS(solve_spd(from_rows({{1, 1}, {1, 1}}), {1, 0}), SingularSystem);
}

TEST_CASE("solve_spd residual bound up to condition 1e8") {
    Rng rng(77);
    for (double condition : {1.0, 1e3, 1e6, 1e8}) {
        for (std::size_t n : {3u, 10u, 40u}) {
            const Matrix a = random_spd(n, condition, rng);
            Vector b(n);
            for (double& v : b) v = rng.normal();
            const SpdSolution sol = solve_spd(a, b);
            const Vector r = matvec(a, sol.x);
            double rn = 0.0;
            for (std::size_t i = 0; i < n; ++i) rn += (r[i] - b[i]) * (r[i] - b[i]);
            rn = std::sqrt(rn);
            CHECK(rn <= 1e-8 * (frobenius_norm(a) * norm2(sol.x) + norm2(b)));
        }
    }
}

TEST_CASE("trace_inverse arithmetic") {
    SymmetricEigen eig;
    eig.eigenvalues = {4, 2, 1};
    CHECK(trace_inverse(eig, 0.0) == doctest::Approx(1.75));

    SymmetricEigen id;
    id.eigenvalues = Vector(7, 1.0);
    CHECK(trace_inverse(id, 0.0) == doctest::Approx(7.0));

    SymmetricEigen floored;
    floored.eigenvalues = {1, 0};
    CHECK(trace_inverse(floored, 0.5) == doctest::Approx(3.0));
    CHECK(std::isinf(trace_inverse(floored, 0.0)));
}

TEST_CASE("trace_inverse matches the basis-solve oracle") {
    Rng rng(5150);
    for (std::size_t n : {4u, 12u}) {
        const Matrix a = random_spd(n, 100.0, rng);
        const SymmetricEigen eig = symmetric_eigen(a);
        double oracle = 0.0;  // diagonal of the explicit inverse, column by column
        for (std::size_t j = 0; j < n; ++j) {
            Vector e(n, 0.0);
            e[j] = 1.0;
            oracle += solve_spd(a, e).x[j];
        }
        CHECK(trace_inverse(eig, 0.0) == doctest::Approx(oracle).epsilon(1e-6));
    }
}

TEST_CASE("outer_accumulate") {
    Matrix acc(2, 2);
    const Matrix r1 = outer_accumulate(acc, {1, 2}, 1.0);
    CHECK(r1(0, 0) == 1.0);
    CHECK(r1(0, 1) == 2.0);
    CHECK(r1(1, 0) == 2.0);
    CHECK(r1(1, 1) == 4.0);

    const Matrix r2 = outer_accumulate(Matrix::identity(2), {0, 0}, 1.0);
    CHECK(max_abs_diff(r2, Matrix::identity(2)) == 0.0);

    const Matrix r3 = outer_accumulate(Matrix(2, 2), {1, 1}, 0.5);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(r3(i, j) == 0.5);

    CHECK_THROWS_AS(outer_accumulate(Matrix(2, 2), {1, 2, 3}, 1.0), std::invalid_argument);
}

}  // TEST_SUITE
