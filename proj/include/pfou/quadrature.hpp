#pragma once

#include <functional>
#include <vector>

namespace pfou::quad {

/// Nodes and weights on the reference interval [-1, 1].
struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss–Jacobi rule for the weight (1 - x)^a (1 + x)^b on [-1, 1],
/// built by Golub–Welsch from the monic Jacobi recurrence. Requires a, b > -1.
Rule gauss_jacobi(int n, double a, double b);

/// Cached n-point Gauss–Legendre rule. The returned reference stays valid for
/// the lifetime of the program.
const Rule& gauss_legendre(int n);

/// Cached Gauss–Jacobi rule with weight (1 + x)^b, i.e. a left-endpoint power singularity.
const Rule& left_power_rule(int n, double b);

using Integrand = std::function<double(double)>;

/// Composite Gauss–Legendre over [lo, hi] with `panels` equal panels.
double composite_gauss(const Integrand& f, double lo, double hi, int panels = 16, int order = 32);

/// Integral of w^beta * phi(w) over [0, length] for smooth phi and beta > -1.
/// The first panel uses a Gauss–Jacobi rule that absorbs the singular weight
/// exactly; the remaining panels are Gauss–Legendre with the weight folded in.
double power_weighted(const Integrand& phi, double beta, double length, int panels = 64,
                      int order = 16);

}  // namespace pfou::quad
