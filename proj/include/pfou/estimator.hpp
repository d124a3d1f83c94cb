#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pfou/basis.hpp"
#include "pfou/sde.hpp"

namespace pfou {

/// Observable statistics of a path over [0, n]:
///   G = \int phi phi^T dt, a = \int phi x dt, b = \int x^2 dt,
///   Lambda = a / n, gamma = n / (b - a^T G^{-1} a).
struct DesignMatrices {
    Eigen::MatrixXd G;
    Eigen::VectorXd a;
    double b = 0.0;
    Eigen::VectorXd Lambda;
    double gamma = 0.0;
    int n = 0;
    int m = 0;
    std::vector<std::string> warnings;

    /// Q = [[G, -a], [-a^T, b]]
    Eigen::MatrixXd Q() const;
    /// Closed-form inverse of Q through the Schur complement s = b - a^T G^{-1} a.
    Eigen::MatrixXd Q_inverse() const;
};

/// How the alpha-row integral \int X dX is formed.
///  - pathwise: the Young integral X_n^2 / 2.
///  - divergence: the left-point sum minus its discrete trace
///      T(alpha) = sum_{l=1}^{N-1} (N - l) (1 - alpha Delta)^{l-1} c(l),
///    c = autocovariance of the driving increments. This is the centred
///    (divergence-type) integral the limit theorems are stated for.
enum class StochasticIntegral { pathwise, divergence };

const char* to_string(StochasticIntegral s);
StochasticIntegral parse_stochastic_integral(const std::string& s);

/// Autocovariance c(0..count-1) of the driving increments, shared read-only
/// between estimates of paths with the same (kind, H, Delta).
class NoiseCovarianceTable {
public:
    NoiseCovarianceTable(ModelKind kind, Hurst H, double step, std::size_t count);

    /// T(alpha) for a path with `steps` increments. Requires steps <= count().
    double trace(double alpha, std::size_t steps) const;

    std::size_t count() const noexcept { return c_.size(); }
    ModelKind kind() const noexcept { return kind_; }
    double hurst() const noexcept { return H_; }
    double step() const noexcept { return step_; }
    const std::vector<double>& values() const noexcept { return c_; }

private:
    ModelKind kind_;
    double H_;
    double step_;
    std::vector<double> c_;
};

struct EstimatorOptions {
    StochasticIntegral integral = StochasticIntegral::pathwise;
    /// divergence only: alpha used inside the trace. Unset means self-consistent
    /// (the trace is evaluated at the estimate it produces).
    std::optional<double> trace_alpha;
    /// divergence only: precomputed table; built on demand when absent.
    std::shared_ptr<const NoiseCovarianceTable> noise_table;
    /// When set, the residual R = P - Q theta is reported.
    std::optional<Eigen::VectorXd> true_theta;
};

struct Estimate {
    Eigen::VectorXd theta_hat;
    DesignMatrices design;
    Eigen::VectorXd P;
    std::optional<Eigen::VectorXd> residual;
    StochasticIntegral integral = StochasticIntegral::pathwise;
    double trace = 0.0;        ///< discrete trace subtracted in the alpha row (divergence only)
    double trace_alpha = 0.0;  ///< alpha it was evaluated at
    double crosscheck = 0.0;   ///< relative gap between block-inverse and dense-solve solutions
    std::vector<std::string> warnings;
};

/// Left-point sum sum_k f(t_k) (x_{k+1} - x_k).
double integrate_against_dx(const SamplePath& path, const std::function<double(double)>& f);
/// \int_0^n X dX = X_n^2 / 2 (Young chain rule, X_0 = 0).
double integrate_x_dx(const SamplePath& path);
/// Left-point sum sum_k x_k (x_{k+1} - x_k).
double left_sum_x_dx(const SamplePath& path);

/// Throws DomainError for degenerate paths ("gamma undefined") and NumericalError
/// when the Schur complement is non-positive or gamma exceeds 1e12.
DesignMatrices assemble_design(const SamplePath& path, const BasisSpec& basis);

Estimate estimate(const SamplePath& path, const BasisSpec& basis, const EstimatorOptions& options = {});

}  // namespace pfou
