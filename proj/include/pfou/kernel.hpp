#pragma once

#include <cstddef>
#include <vector>

#include "pfou/fgn.hpp"

namespace pfou {

/// Covariance density of the increments of Y_t = \int_0^t e^{-s} dB^H_{a_s},
/// a_s = H e^{s/H}:
///   r_H(w, z) = H(2H-1) H^{2(H-1)} e^{-(1-H)|w-z|/H} / (1 - e^{-|w-z|/H})^{2(1-H)}.
/// Throws DomainError on the diagonal w == z.
double kernel_rH(Hurst H, double w, double z);

/// r_H as a function of the separation d > 0.
double kernel_rH_distance(Hurst H, double d);

/// Smooth factor rho with r_H(d) = d^{2H-2} rho(d); rho(0) = H(2H-1).
double kernel_rH_regular(Hurst H, double d);

/// Exponential decay rate 1/H - 1 of r_H at large separation.
inline double kernel_rH_decay_rate(Hurst H) { return 1.0 / H.value() - 1.0; }

struct LatticeSum {
    double value = 0.0;
    int truncation_order = 0;  ///< terms with |m| <= truncation_order were summed
    double tail_bound = 0.0;   ///< analytic bound on the omitted terms
};

/// Smallest M such that the terms |m| > M of sum_m r_H(x, y + m) are bounded by
/// tol for every x, y in [0, 1].
int lattice_truncation_order(Hurst H, double tol);

/// sum_{m in Z} r_H(x, y + m), truncated by the geometric tail bound.
/// Throws DomainError when x - y is an integer (singular term).
LatticeSum rH_lattice_sum(Hurst H, double x, double y, double tol = 1e-10);

/// Autocovariance of the increments Y_{(k+1)step} - Y_{k step}:
///   c(l) = \int\int_{[0,step]^2} r_H(l step + w - z) dw dz.
/// The diagonal cells (l = 0, 1) carry the integrable |.|^{2H-2} singularity and
/// are integrated with a Gauss–Jacobi rule.
class Y1IncrementCovariance {
public:
    Y1IncrementCovariance(Hurst H, double step);

    double operator()(std::size_t lag) const;

    /// c(0), ..., c(count - 1).
    std::vector<double> table(std::size_t count) const;

    Hurst hurst() const noexcept { return H_; }
    double step() const noexcept { return step_; }

private:
    Hurst H_;
    double step_;
};

}  // namespace pfou
