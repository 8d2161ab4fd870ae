#include "letc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "letc/errors.hpp"

namespace letc {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

Vector matvec(const Matrix& a, const Vector& x) {
    if (a.cols() != x.size()) throw std::invalid_argument("matvec: size mismatch");
    Vector y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

double trace(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) s += a(i, i);
    return s;
}

namespace {

void check_finite(const Matrix& a, const char* who) {
    for (double v : a.data())
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(who) + ": non-finite entry");
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double v : a.data()) m = std::max(m, std::fabs(v));
    return m;
}

}  // namespace

SymmetricEigen symmetric_eigen(const Matrix& input) {
    if (!input.square()) throw std::invalid_argument("symmetric_eigen: matrix not square");
    check_finite(input, "symmetric_eigen");
    const std::size_t n = input.rows();

    const double scale = max_abs(input);
    double asym = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            asym = std::max(asym, std::fabs(input(i, j) - input(j, i)));
    if (scale > 0.0 && asym > 1e-9 * scale)
        throw std::invalid_argument("symmetric_eigen: input is not symmetric");

    // work on the symmetrized copy
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (input(i, j) + input(j, i));

    Matrix v = Matrix::identity(n);
    const double stop = 1e-12 * frobenius_norm(a);

    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    for (int sweep = 0; sweep < 100 && off_norm() > stop; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double app = a(p, p), aqq = a(q, q);
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                             : 1.0 / (tau - std::sqrt(1.0 + tau * tau)));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    // sort descending, carrying columns along
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    SymmetricEigen out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.eigenvalues[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
    }
    return out;
}

SpdSolution solve_spd(const Matrix& a, const Vector& b) {
    if (!a.square()) throw std::invalid_argument("solve_spd: matrix not square");
    if (a.rows() != b.size()) throw std::invalid_argument("solve_spd: rhs size mismatch");
    check_finite(a, "solve_spd");
    const std::size_t n = a.rows();
    if (n == 0) return {};

    const double scale = trace(a) / static_cast<double>(n);
    if (!(scale > 0.0)) {
        bool b_zero = true;
        for (double v : b) b_zero = b_zero && v == 0.0;
        if (b_zero) return {Vector(n, 0.0), false, 0.0};
        throw SingularSystem("solve_spd: zero-trace matrix");
    }
    const double pivot_floor = 1e-9 * scale;

    // jitter ladder: 0, then 1e-12*tr/n escalating x10 up to 3 times
    const double jitters[] = {0.0, 1e-12 * scale, 1e-11 * scale, 1e-10 * scale};

    for (double jitter : jitters) {
        Matrix l(n, n);
        bool ok = true;
        for (std::size_t j = 0; j < n && ok; ++j) {
            double diag = a(j, j) + jitter;
            for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
            if (!(diag > pivot_floor)) {
                ok = false;
                break;
            }
            l(j, j) = std::sqrt(diag);
            for (std::size_t i = j + 1; i < n; ++i) {
                double s = 0.5 * (a(i, j) + a(j, i)) + (i == j ? jitter : 0.0);
                for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
                l(i, j) = s / l(j, j);
            }
        }
        if (!ok) continue;

        Vector y(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double s = b[i];
            for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
            y[i] = s / l(i, i);
        }
        Vector x(n, 0.0);
        for (std::size_t ii = n; ii-- > 0;) {
            double s = y[ii];
            for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
            x[ii] = s / l(ii, ii);
        }
        return {std::move(x), jitter > 0.0, jitter};
    }
    throw SingularSystem("solve_spd: factorization failed after max jitter");
}

double trace_inverse(const SymmetricEigen& eig, double floor_value) {
    if (floor_value < 0.0) throw std::invalid_argument("trace_inverse: negative floor");
    const double lam1 = eig.eigenvalues.empty() ? 0.0 : eig.eigenvalues.front();
    double s = 0.0;
    for (double lam : eig.eigenvalues) {
        if (lam < -1e-9 * std::max(lam1, 0.0))
            throw std::invalid_argument("trace_inverse: eigenvalue too negative");
        const double l = std::max(std::max(lam, 0.0), floor_value);
        if (l == 0.0) return std::numeric_limits<double>::infinity();
        s += 1.0 / l;
    }
    return s;
}

Matrix outer_accumulate(const Matrix& acc, const Vector& z, double weight) {
    if (!acc.square() || acc.rows() != z.size())
        throw std::invalid_argument("outer_accumulate: dimension mismatch");
    Matrix out = acc;
    const std::size_t n = z.size();
    for (std::size_t i = 0; i < n; ++i) {
        out(i, i) += weight * z[i] * z[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            out(i, j) += weight * z[i] * z[j];
            out(j, i) = out(i, j);
        }
    }
    return out;
}

}  // namespace letc
