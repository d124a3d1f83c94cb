#include "pfou/estimator.hpp"

#include <cmath>
#include <sstream>

#include "pfou/errors.hpp"

namespace pfou {

namespace {

constexpr double kGammaLimit = 1e12;
constexpr double kCrosscheckTol = 1e-8;

// phi_i(k / m) for k = 0..m-1
Eigen::MatrixXd basis_on_period_grid(const BasisSpec& basis, int m) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(basis.size()), m);
    for (int k = 0; k < m; ++k) out.col(k) = basis.evaluate_all(static_cast<double>(k) / m);
    return out;
}

}  // namespace

const char* to_string(StochasticIntegral s) {
    return s == StochasticIntegral::pathwise ? "pathwise" : "divergence";
}

StochasticIntegral parse_stochastic_integral(const std::string& s) {
    if (s == "pathwise") return StochasticIntegral::pathwise;
    if (s == "divergence") return StochasticIntegral::divergence;
    throw DomainError("unknown integral convention '" + s + "' (expected pathwise or divergence)");
}

Eigen::MatrixXd DesignMatrices::Q() const {
    const Eigen::Index p = G.rows();
    Eigen::MatrixXd q(p + 1, p + 1);
    q.topLeftCorner(p, p) = G;
    q.topRightCorner(p, 1) = -a;
    q.bottomLeftCorner(1, p) = -a.transpose();
    q(p, p) = b;
    return q;
}

Eigen::MatrixXd DesignMatrices::Q_inverse() const {
    const Eigen::Index p = G.rows();
    const Eigen::MatrixXd g_inv = G.llt().solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::VectorXd g_inv_a = g_inv * a;
    const double s = b - a.dot(g_inv_a);
    Eigen::MatrixXd out(p + 1, p + 1);
    out.topLeftCorner(p, p) = g_inv + g_inv_a * g_inv_a.transpose() / s;
    out.topRightCorner(p, 1) = g_inv_a / s;
    out.bottomLeftCorner(1, p) = g_inv_a.transpose() / s;
    out(p, p) = 1.0 / s;
    return out;
}

NoiseCovarianceTable::NoiseCovarianceTable(ModelKind kind, Hurst H, double step, std::size_t count)
    : kind_(kind), H_(H.value()), step_(step), c_(noise_autocovariance(kind, H, step, count)) {}

double NoiseCovarianceTable::trace(double alpha, std::size_t steps) const {
    if (steps > c_.size()) throw DomainError("NoiseCovarianceTable: path longer than the table");
    const double rho = 1.0 - alpha * step_;
    const double n = static_cast<double>(steps);
    double acc = 0.0;
    double pw = 1.0;  // rho^{l-1}
    for (std::size_t l = 1; l < steps; ++l) {
        acc += (n - static_cast<double>(l)) * pw * c_[l];
        pw *= rho;
        if (std::abs(pw) < 1e-17) break;
    }
    return acc;
}

double integrate_against_dx(const SamplePath& path, const std::function<double(double)>& f) {
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < path.x.size(); ++k) acc += f(path.grid.points[k]) * (path.x[k + 1] - path.x[k]);
    return acc;
}

double integrate_x_dx(const SamplePath& path) {
    const double xn = path.x.back();
    return 0.5 * (xn * xn - path.x.front() * path.x.front());
}

double left_sum_x_dx(const SamplePath& path) {
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < path.x.size(); ++k) acc += path.x[k] * (path.x[k + 1] - path.x[k]);
    return acc;
}

DesignMatrices assemble_design(const SamplePath& path, const BasisSpec& basis) {
    path.validate();
    if (path.grid.step) {
        const double expected = 1.0 / path.meta.m;
        if (std::abs(*path.grid.step - expected) > 1e-12 * expected)
            throw DomainError("path grid step does not equal 1/m");
    }
    const int n = path.meta.n;
    const int m = path.meta.m;
    const double dt = 1.0 / m;
    const auto p = static_cast<Eigen::Index>(basis.size());
    const Eigen::MatrixXd phi = basis_on_period_grid(basis, m);

    DesignMatrices d;
    d.n = n;
    d.m = m;
    // trapezoid over whole periods: interior weight dt, end points dt / 2; phi(n) = phi(0)
    d.a = Eigen::VectorXd::Zero(p);
    d.b = 0.0;
    const std::size_t count = path.x.size() - 1;
    for (std::size_t k = 0; k <= count; ++k) {
        const double w = (k == 0 || k == count) ? 0.5 * dt : dt;
        const double x = path.x[k];
        d.a += (w * x) * phi.col(static_cast<Eigen::Index>(k % static_cast<std::size_t>(m)));
        d.b += w * x * x;
    }
    if (basis.exactly_orthonormal()) {
        d.G = static_cast<double>(n) * Eigen::MatrixXd::Identity(p, p);
    } else {
        // periodic trapezoid: every grid point in a period carries weight dt
        d.G = static_cast<double>(n) * dt * phi * phi.transpose();
        const double dev = (d.G / n - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff();
        if (dev > 1e-3) {
            std::ostringstream msg;
            msg << "G/n deviates from the identity by " << dev << " on this grid";
            d.warnings.push_back(msg.str());
        }
    }
    d.Lambda = d.a / n;

    if (d.b == 0.0) throw DomainError("degenerate path (b = 0): gamma undefined");
    Eigen::LLT<Eigen::MatrixXd> llt(d.G);
    if (llt.info() != Eigen::Success) throw NumericalError("G is singular");
    const double s = d.b - d.a.dot(llt.solve(d.a));
    const double gamma = n / s;
    if (!(s > 0.0) || !std::isfinite(gamma) || std::abs(gamma) > kGammaLimit) {
        std::ostringstream msg;
        msg << "Q is numerically singular: Schur complement " << s << ", gamma " << gamma;
        throw NumericalError(msg.str());
    }
    d.gamma = gamma;
    return d;
}

Estimate estimate(const SamplePath& path, const BasisSpec& basis, const EstimatorOptions& options) {
    Estimate est;
    est.design = assemble_design(path, basis);
    est.warnings = est.design.warnings;
    est.integral = options.integral;
    const DesignMatrices& d = est.design;
    const auto p = static_cast<Eigen::Index>(basis.size());
    const int m = d.m;
    const std::size_t steps = path.x.size() - 1;

    Eigen::VectorXd P(p + 1);
    const Eigen::MatrixXd phi = basis_on_period_grid(basis, m);
    P.head(p).setZero();
    for (std::size_t k = 0; k < steps; ++k)
        P.head(p) += (path.x[k + 1] - path.x[k]) * phi.col(static_cast<Eigen::Index>(k % static_cast<std::size_t>(m)));

    const Eigen::MatrixXd q_inv = d.Q_inverse();
    if (options.integral == StochasticIntegral::pathwise) {
        P(p) = -integrate_x_dx(path);
    } else {
        std::shared_ptr<const NoiseCovarianceTable> table = options.noise_table;
        if (!table) {
            table = std::make_shared<NoiseCovarianceTable>(path.meta.kind, Hurst(path.meta.H), 1.0 / m, steps);
        } else if (table->kind() != path.meta.kind || table->hurst() != path.meta.H ||
                   std::abs(table->step() - 1.0 / m) > 1e-15) {
            throw DomainError("noise covariance table does not match the path (kind, H or step)");
        }
        const double left = left_sum_x_dx(path);
        double alpha = 0.0;
        if (options.trace_alpha) {
            alpha = *options.trace_alpha;
        } else {
            // alpha-hat = (r + T(alpha)) / s with r = a^T G^{-1} p - left; solve s alpha - T(alpha) = r
            const Eigen::VectorXd g_inv_a = d.G.llt().solve(d.a);
            const double s = d.b - d.a.dot(g_inv_a);
            const double r = g_inv_a.dot(P.head(p)) - left;
            auto f = [&](double al) { return s * al - table->trace(al, steps) - r; };
            double lo = 0.0;
            double hi = static_cast<double>(m);  // rho = 0
            if (f(lo) > 0.0) {
                est.warnings.push_back("self-consistent trace has no root with alpha > 0; trace evaluated at alpha = 0");
                alpha = 0.0;
            } else if (f(hi) < 0.0) {
                est.warnings.push_back("self-consistent trace has no root below 1/Delta; trace evaluated at alpha = 1/Delta");
                alpha = hi;
            } else {
                for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (f(mid) > 0.0 ? hi : lo) = mid;
                }
                alpha = 0.5 * (lo + hi);
            }
        }
        est.trace_alpha = alpha;
        est.trace = table->trace(alpha, steps);
        P(p) = -(left - est.trace);
    }
    est.P = P;
    est.theta_hat = q_inv * P;

    const Eigen::MatrixXd q = d.Q();
    const Eigen::VectorXd dense = q.partialPivLu().solve(P);
    est.crosscheck = (dense - est.theta_hat).norm() / std::max(est.theta_hat.norm(), 1e-300);
    if (est.crosscheck > kCrosscheckTol) {
        std::ostringstream msg;
        msg << "block-inverse and dense solutions differ by " << est.crosscheck << " (relative)";
        est.warnings.push_back(msg.str());
    }
    if (options.true_theta) {
        if (options.true_theta->size() != p + 1) throw DomainError("true theta has the wrong length");
        est.residual = P - q * *options.true_theta;
    }
    return est;
}

}  // namespace pfou
