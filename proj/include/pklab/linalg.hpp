#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pklab/error.hpp"

namespace pklab {

struct PcgResult {
    bool converged = false;
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Scratch vectors for pcg, sized on first use.
struct PcgWorkspace {
    std::vector<double> r, z, p, q;
    void resize(std::size_t n) {
        r.resize(n);
        z.resize(n);
        p.resize(n);
        q.resize(n);
    }
};

/// Jacobi-preconditioned conjugate gradients for an SPD operator.
/// `apply(x, y)` writes y = A x. `x` holds the initial guess on entry.
template <class Apply>
PcgResult pcg(Apply&& apply, std::span<const double> inv_diag, std::span<const double> b, std::span<double> x,
              double rtol, int max_iter, PcgWorkspace& ws) {
    const std::size_t n = b.size();
    ws.resize(n);
    auto& r = ws.r;
    auto& z = ws.z;
    auto& p = ws.p;
    auto& q = ws.q;

    double bnorm = 0.0;
    for (double v : b) bnorm += v * v;
    bnorm = std::sqrt(bnorm);
    PcgResult res;
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        res.converged = true;
        return res;
    }

    apply(std::span<const double>(x.data(), n), std::span<double>(q));
    double rr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = b[i] - q[i];
        rr += r[i] * r[i];
    }
    double rz = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = inv_diag[i] * r[i];
        p[i] = z[i];
        rz += r[i] * z[i];
    }
    res.relative_residual = std::sqrt(rr) / bnorm;
    while (res.relative_residual > rtol && res.iterations < max_iter) {
        apply(std::span<const double>(p), std::span<double>(q));
        double pq = 0.0;
        for (std::size_t i = 0; i < n; ++i) pq += p[i] * q[i];
        if (!(pq > 0.0) || !std::isfinite(pq)) return res;
        const double alpha = rz / pq;
        rr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
            rr += r[i] * r[i];
        }
        double rz_new = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = inv_diag[i] * r[i];
            rz_new += r[i] * z[i];
        }
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        ++res.iterations;
        res.relative_residual = std::sqrt(rr) / bnorm;
    }
    res.converged = res.relative_residual <= rtol;
    return res;
}

/// Symmetric positive definite band matrix with lower half-bandwidth `bw`,
/// factored in place as L L^T. Row i stores entries (i, i-bw .. i).
class BandedCholesky {
public:
    BandedCholesky() = default;

    /// Assembles the matrix of a linear operator known to have the given
    /// bandwidth by probing with 2*bw+1 interleaved indicator vectors.
    template <class Apply>
    static BandedCholesky from_operator(std::size_t n, std::size_t bw, Apply&& apply) {
        BandedCholesky m(n, bw);
        const std::size_t stride = 2 * bw + 1;
        std::vector<double> e(n), y(n);
        for (std::size_t s = 0; s < std::min(stride, n); ++s) {
            std::fill(e.begin(), e.end(), 0.0);
            for (std::size_t j = s; j < n; j += stride) e[j] = 1.0;
            apply(std::span<const double>(e), std::span<double>(y));
            for (std::size_t j = s; j < n; j += stride) {
                const std::size_t hi = std::min(n - 1, j + bw);
                for (std::size_t i = j; i <= hi; ++i) m.at(i, j) = y[i];
            }
        }
        m.factor();
        return m;
    }

    std::size_t size() const noexcept { return n_; }

    /// Solves A x = b in place.
    void solve(std::span<double> x) const {
        for (std::size_t i = 0; i < n_; ++i) {
            double s = x[i];
            const std::size_t j0 = i > bw_ ? i - bw_ : 0;
            for (std::size_t j = j0; j < i; ++j) s -= get(i, j) * x[j];
            x[i] = s / get(i, i);
        }
        for (std::size_t ii = n_; ii-- > 0;) {
            double s = x[ii];
            const std::size_t hi = std::min(n_ - 1, ii + bw_);
            for (std::size_t j = ii + 1; j <= hi; ++j) s -= get(j, ii) * x[j];
            x[ii] = s / get(ii, ii);
        }
    }

private:
    BandedCholesky(std::size_t n, std::size_t bw) : n_(n), bw_(bw), a_(n * (bw + 1), 0.0) {}

    double& at(std::size_t i, std::size_t j) noexcept { return a_[i * (bw_ + 1) + (j + bw_ - i)]; }
    double get(std::size_t i, std::size_t j) const noexcept { return a_[i * (bw_ + 1) + (j + bw_ - i)]; }

    void factor() {
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t j0 = i > bw_ ? i - bw_ : 0;
            for (std::size_t j = j0; j <= i; ++j) {
                double s = get(i, j);
                const std::size_t k0 = std::max(j0, j > bw_ ? j - bw_ : 0);
                for (std::size_t k = k0; k < j; ++k) s -= get(i, k) * get(j, k);
                if (j == i) {
                    if (!(s > 0.0)) throw NumericError("banded Cholesky: matrix not positive definite at row " + std::to_string(i));
                    at(i, i) = std::sqrt(s);
                } else {
                    at(i, j) = s / get(j, j);
                }
            }
        }
    }

    std::size_t n_ = 0;
    std::size_t bw_ = 0;
    std::vector<double> a_;
};

}  // namespace pklab
