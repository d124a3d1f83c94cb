#include "pfou/kernel.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "pfou/errors.hpp"
#include "pfou/quadrature.hpp"

namespace pfou {

namespace {

double prefactor(double h) { return h * (2.0 * h - 1.0) * std::pow(h, 2.0 * h - 2.0); }

}  // namespace

double kernel_rH_distance(Hurst H, double d) {
    if (!(d > 0.0)) throw DomainError("kernel_rH: the kernel is singular at zero separation");
    const double h = H.value();
    return prefactor(h) * std::exp(-(1.0 - h) * d / h) * std::pow(-std::expm1(-d / h), 2.0 * h - 2.0);
}

double kernel_rH(Hurst H, double w, double z) { return kernel_rH_distance(H, std::abs(w - z)); }

double kernel_rH_regular(Hurst H, double d) {
    const double h = H.value();
    if (d < 0.0) throw DomainError("kernel_rH_regular: separation must be non-negative");
    if (d == 0.0) return h * (2.0 * h - 1.0);
    const double ratio = d / -std::expm1(-d / h);  // -> h as d -> 0
    return prefactor(h) * std::exp(-(1.0 - h) * d / h) * std::pow(ratio, 2.0 - 2.0 * h);
}

int lattice_truncation_order(Hurst H, double tol) {
    if (!(tol > 0.0)) throw DomainError("lattice sum tolerance must be positive");
    const double h = H.value();
    const double kappa = kernel_rH_decay_rate(H);
    // r_H(u) <= K e^{-kappa u} for u >= 1
    const double k = prefactor(h) * std::pow(-std::expm1(-1.0 / h), 2.0 * h - 2.0);
    const double denom = -std::expm1(-kappa);
    int order = 1;
    // both tails: 2 sum_{m > M} K e^{-kappa (m - 1)} = 2 K e^{-kappa M} / (1 - e^{-kappa})
    while (2.0 * k * std::exp(-kappa * order) / denom >= tol) ++order;
    return order;
}

LatticeSum rH_lattice_sum(Hurst H, double x, double y, double tol) {
    const double d = x - y;
    if (d == std::round(d)) {
        std::ostringstream msg;
        msg << "rH_lattice_sum: x - y = " << d << " is an integer, the m = " << std::round(d)
            << " term is singular";
        throw DomainError(msg.str());
    }
    LatticeSum out;
    out.truncation_order = lattice_truncation_order(H, tol);
    const double h = H.value();
    const double kappa = kernel_rH_decay_rate(H);
    out.tail_bound = 2.0 * prefactor(h) * std::pow(-std::expm1(-1.0 / h), 2.0 * h - 2.0) *
                     std::exp(-kappa * out.truncation_order) / -std::expm1(-kappa);
    // sum from the outside in, so the small tail terms are not lost against the large central ones
    double acc = 0.0;
    for (int m = out.truncation_order; m >= 1; --m) {
        acc += kernel_rH_distance(H, std::abs(d - m));
        acc += kernel_rH_distance(H, std::abs(d + m));
    }
    acc += kernel_rH_distance(H, std::abs(d));
    out.value = acc;
    return out;
}

Y1IncrementCovariance::Y1IncrementCovariance(Hurst H, double step) : H_(H), step_(step) {
    if (!(step > 0.0)) throw DomainError("Y1IncrementCovariance: step must be positive");
}

double Y1IncrementCovariance::operator()(std::size_t lag) const {
    const double beta = H_.kernel_exponent();
    const double s = step_;
    const Hurst H = H_;
    auto rho = [H](double v) { return kernel_rH_regular(H, v); };
    auto r = [H](double v) { return kernel_rH_distance(H, v); };
    if (lag == 0) {
        // 2 \int_0^s (s - v) r(v) dv
        return 2.0 * quad::power_weighted([&](double v) { return (s - v) * rho(v); }, beta, s, 4, 16);
    }
    const double l = static_cast<double>(lag);
    const int panels = lag < 16 ? 4 : 1;  // the singularity at 0 is within a few cells of short lags
    double rising = 0.0;  // \int_{(l-1)s}^{l s} (v - (l-1)s) r(v) dv
    if (lag == 1) {
        rising = quad::power_weighted([&](double v) { return v * rho(v); }, beta, s, 4, 16);
    } else {
        const double lo = (l - 1.0) * s;
        rising = quad::composite_gauss([&](double v) { return (v - lo) * r(v); }, lo, l * s, panels, 16);
    }
    const double hi = (l + 1.0) * s;
    const double falling =
        quad::composite_gauss([&](double v) { return (hi - v) * r(v); }, l * s, hi, panels, 16);
    return rising + falling;
}

std::vector<double> Y1IncrementCovariance::table(std::size_t count) const {
    std::vector<double> out(count, 0.0);
    const double floor = std::numeric_limits<double>::min();
    for (std::size_t k = 0; k < count; ++k) {
        out[k] = (*this)(k);
        // exponential decay: once the values underflow, the rest of the table is zero
        if (k > 2 && out[k] < floor) break;
    }
    return out;
}

}  // namespace pfou
