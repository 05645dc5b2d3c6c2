#include "fair/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace fair {

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("multiply: inner dimensions differ");
    }
    DenseMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            double aik = a(i, k);
            if (aik == 0.0) {
                continue;
            }
            auto brow = b.row(k);
            auto orow = out.row(i);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                orow[j] += aik * brow[j];
            }
        }
    }
    return out;
}

namespace {

struct LuFactors {
    DenseMatrix lu;
    std::vector<std::size_t> perm;
};

LuFactors factorize(DenseMatrix a) {
    const std::size_t n = a.rows();
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) {
        perm[i] = i;
    }
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            scale = std::max(scale, std::abs(a(i, j)));
        }
    }
    const double tiny = 1e-14 * (scale > 0.0 ? scale : 1.0);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            double v = std::abs(a(i, k));
            if (v > best) {
                best = v;
                pivot = i;
            }
        }
        if (best <= tiny) {
            throw std::runtime_error("solve: matrix is numerically singular");
        }
        if (pivot != k) {
            auto rk = a.row(k);
            auto rp = a.row(pivot);
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(rk[j], rp[j]);
            }
            std::swap(perm[k], perm[pivot]);
        }
        const double inv = 1.0 / a(k, k);
        auto rk = a.row(k);
        for (std::size_t i = k + 1; i < n; ++i) {
            auto ri = a.row(i);
            double f = ri[k] * inv;
            ri[k] = f;
            if (f == 0.0) {
                continue;
            }
            for (std::size_t j = k + 1; j < n; ++j) {
                ri[j] -= f * rk[j];
            }
        }
    }
    return {std::move(a), std::move(perm)};
}

DenseMatrix substitute(const LuFactors& f, const DenseMatrix& b) {
    const std::size_t n = f.lu.rows();
    const std::size_t m = b.cols();
    DenseMatrix x(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        auto src = b.row(f.perm[i]);
        auto dst = x.row(i);
        for (std::size_t j = 0; j < m; ++j) {
            dst[j] = src[j];
        }
    }
    // forward: L has unit diagonal
    for (std::size_t i = 0; i < n; ++i) {
        auto xi = x.row(i);
        for (std::size_t k = 0; k < i; ++k) {
            double l = f.lu(i, k);
            if (l == 0.0) {
                continue;
            }
            auto xk = x.row(k);
            for (std::size_t j = 0; j < m; ++j) {
                xi[j] -= l * xk[j];
            }
        }
    }
    for (std::size_t ii = n; ii-- > 0;) {
        auto xi = x.row(ii);
        for (std::size_t k = ii + 1; k < n; ++k) {
            double u = f.lu(ii, k);
            if (u == 0.0) {
                continue;
            }
            auto xk = x.row(k);
            for (std::size_t j = 0; j < m; ++j) {
                xi[j] -= u * xk[j];
            }
        }
        const double d = f.lu(ii, ii);
        for (std::size_t j = 0; j < m; ++j) {
            xi[j] /= d;
        }
    }
    return x;
}

} // namespace

DenseMatrix solve(DenseMatrix a, const DenseMatrix& b) {
    if (a.rows() != a.cols() || a.rows() != b.rows()) {
        throw std::invalid_argument("solve: dimension mismatch");
    }
    const DenseMatrix original = a;
    LuFactors f = factorize(std::move(a));
    DenseMatrix x = substitute(f, b);

    // one step of iterative refinement: x += A^-1 (b - A x)
    DenseMatrix ax = multiply(original, x);
    DenseMatrix r(b.rows(), b.cols());
    for (std::size_t i = 0; i < b.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            r(i, j) = b(i, j) - ax(i, j);
        }
    }
    DenseMatrix dx = substitute(f, r);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            x(i, j) += dx(i, j);
        }
    }
    return x;
}

double residual_inf(const DenseMatrix& a, const DenseMatrix& x, const DenseMatrix& b) {
    DenseMatrix ax = multiply(a, x);
    double worst = 0.0;
    for (std::size_t i = 0; i < b.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            worst = std::max(worst, std::abs(ax(i, j) - b(i, j)));
        }
    }
    return worst;
}

} // namespace fair
