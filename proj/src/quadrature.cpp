#include "pfou/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "pfou/errors.hpp"

namespace pfou::quad {

Rule gauss_jacobi(int n, double a, double b) {
    if (n < 1) throw DomainError("gauss_jacobi: need at least one node");
    if (a <= -1.0 || b <= -1.0) throw DomainError("gauss_jacobi: exponents must exceed -1");

    Eigen::VectorXd diag(n);
    Eigen::VectorXd offdiag(n > 1 ? n - 1 : 1);
    const double ab = a + b;
    for (int k = 0; k < n; ++k) {
        const double s = 2.0 * k + ab;
        diag(k) = (k == 0) ? (b - a) / (ab + 2.0) : (b * b - a * a) / (s * (s + 2.0));
    }
    for (int k = 1; k < n; ++k) {
        const double s = 2.0 * k + ab;
        double beta = 0.0;
        if (k == 1) {
            beta = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
        } else {
            beta = 4.0 * k * (k + a) * (k + b) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0));
        }
        offdiag(k - 1) = std::sqrt(beta);
    }

    Rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) +
                                std::lgamma(b + 1.0) - std::lgamma(ab + 2.0));
    if (n == 1) {
        rule.nodes[0] = diag(0);
        rule.weights[0] = mu0;
        return rule;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, offdiag, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw NumericalError("gauss_jacobi: eigensolver failed");
    for (int k = 0; k < n; ++k) {
        rule.nodes[k] = solver.eigenvalues()(k);
        const double v0 = solver.eigenvectors()(0, k);
        rule.weights[k] = mu0 * v0 * v0;
    }
    return rule;
}

namespace {

std::mutex cache_mutex;

const Rule& cached(int n, double a, double b) {
    static std::map<std::pair<int, std::pair<double, double>>, std::unique_ptr<Rule>> cache;
    std::lock_guard lock(cache_mutex);
    auto& slot = cache[{n, {a, b}}];
    if (!slot) slot = std::make_unique<Rule>(gauss_jacobi(n, a, b));
    return *slot;
}

}  // namespace

const Rule& gauss_legendre(int n) { return cached(n, 0.0, 0.0); }

const Rule& left_power_rule(int n, double b) { return cached(n, 0.0, b); }

double composite_gauss(const Integrand& f, double lo, double hi, int panels, int order) {
    const Rule& rule = gauss_legendre(order);
    const double width = (hi - lo) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = lo + (p + 0.5) * width;
        double acc = 0.0;
        for (int k = 0; k < order; ++k) acc += rule.weights[k] * f(mid + 0.5 * width * rule.nodes[k]);
        total += 0.5 * width * acc;
    }
    return total;
}

double power_weighted(const Integrand& phi, double beta, double length, int panels, int order) {
    if (beta <= -1.0) throw DomainError("power_weighted: weight exponent must exceed -1");
    if (length <= 0.0) return 0.0;
    const double width = length / panels;

    // First panel: w = width (1 + x) / 2, w^beta dw = (width/2)^(beta+1) (1 + x)^beta dx.
    const Rule& singular = left_power_rule(order, beta);
    double first = 0.0;
    for (int k = 0; k < order; ++k)
        first += singular.weights[k] * phi(0.5 * width * (1.0 + singular.nodes[k]));
    first *= std::pow(0.5 * width, beta + 1.0);

    const Rule& rule = gauss_legendre(order);
    double rest = 0.0;
    for (int p = 1; p < panels; ++p) {
        const double mid = (p + 0.5) * width;
        double acc = 0.0;
        for (int k = 0; k < order; ++k) {
            const double w = mid + 0.5 * width * rule.nodes[k];
            acc += rule.weights[k] * std::pow(w, beta) * phi(w);
        }
        rest += 0.5 * width * acc;
    }
    return first + rest;
}

}  // namespace pfou::quad
