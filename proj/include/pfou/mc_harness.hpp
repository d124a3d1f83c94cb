#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pfou/asymptotics.hpp"
#include "pfou/estimator.hpp"
#include "pfou/sde.hpp"

namespace pfou {

enum class Scaling { consistency, clt_first, clt_second };

const char* to_string(Scaling s);
Scaling parse_scaling(const std::string& s);

struct ExperimentPlan {
    ModelSpec model;
    std::vector<int> n_list{};
    int m = 50;
    int replications = 200;
    std::uint64_t base_seed = 1;
    Scaling scaling = Scaling::consistency;
    SimulationOptions simulation{};
    /// The alpha row uses the divergence form with the true alpha in the trace
    /// unless `integral` is pathwise. Zero-noise plans always use pathwise.
    StochasticIntegral integral = StochasticIntegral::divergence;
    bool oracle_trace = true;
    /// CLT verdicts
    double relative_tolerance = 0.25;
    double magnitude_filter = 0.10;  ///< fraction of the spectral norm of the theory matrix
    SigmaForm sigma_form = SigmaForm::product_of_means;
    /// second-kind CLT: sigma^2 surrogate
    int sigma2_replications = 500;
    double lattice_tol = 1e-10;
    /// worker cap; results do not depend on it
    int threads = 1;

    /// Throws DomainError on an invalid plan.
    void validate() const;
};

struct ReplicationRow {
    int replication = 0;
    std::uint64_t seed = 0;
    int n = 0;
    Eigen::VectorXd theta_hat;  ///< empty when the estimate failed
    std::string status = "ok";
};

struct HorizonSummary {
    int n = 0;
    double median_error = 0.0;  ///< median of |theta_hat - theta|_inf
    double mean_error = 0.0;
    int failures = 0;
};

struct ComparisonEntry {
    int i = 0;
    int j = 0;
    double empirical = 0.0;
    double theory = 0.0;
    double mc_se = 0.0;            ///< standard error of the empirical entry
    double relative_deviation = 0.0;
    double sigma2_allowance = 0.0;  ///< 3 SE(sigma^2) (M e)_i (M e)_j, second kind
    double tolerance = 0.0;         ///< allowed |empirical - theory|
    bool checked = false;           ///< passes the magnitude filter
    bool pass = true;
};

struct MomentCheck {
    int component = 0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double skewness_band = 0.0;
    double kurtosis_band = 0.0;
    bool checked = false;  ///< theoretical variance is nondegenerate
    bool pass = true;
};

struct NoiseEntry {
    int k = 0;
    int l = 0;
    double empirical = 0.0;
    double mc_se = 0.0;
    double limit = 0.0;    ///< (\int f_k)(\int f_l)
    double exact_n = 0.0;  ///< exact covariance of the discretised functional at horizon n
    double tolerance = 0.0;
    bool pass_strict = false;  ///< |empirical - limit| <= 3 SE
    bool pass = false;         ///< |empirical - limit| <= 3 SE + |exact_n - limit|
};

struct McReport {
    std::string experiment;  ///< consistency | clt | noise_distribution
    std::optional<ExperimentPlan> plan;  /// unset for the noise check
    Eigen::VectorXd theta;
    std::vector<ReplicationRow> rows;
    std::vector<HorizonSummary> horizons;
    int failures = 0;
    // CLT
    double scale = 0.0;  ///< n^{1-H} or sqrt(n)
    Eigen::VectorXd mean;
    Eigen::VectorXd bias;
    Eigen::MatrixXd covariance;
    std::optional<AsymptoticCov> theory;
    std::optional<Sigma2Estimate> sigma2;
    std::vector<ComparisonEntry> comparisons;
    std::vector<MomentCheck> moments;
    double theory_norm = 0.0;
    // noise distribution
    std::vector<std::string> function_names;
    std::vector<NoiseEntry> noise;
    double noise_H = 0.0;
    int noise_n = 0;
    int noise_m = 0;
    int noise_replications = 0;
    std::uint64_t noise_seed = 0;

    bool covariance_pass = false;  ///< CLT: every filtered entry within tolerance
    bool normality_pass = false;   ///< CLT: every checked component within the moment bands
    bool pass = false;
    std::vector<std::string> notes;
    double runtime_seconds = 0.0;  ///< not part of the serialized outputs
};

McReport run_consistency(const ExperimentPlan& plan);
McReport run_clt(const ExperimentPlan& plan);

struct NamedFunction {
    std::string name;
    PeriodicFunction f;
};

/// Empirical covariance of n^{-H} \int_0^n f_k dB^H (left sums on the grid k/m)
/// against (\int f_k)(\int f_l).
McReport run_noise_distribution_check(Hurst H, const std::vector<NamedFunction>& functions, int n, int replications,
                                      std::uint64_t seed, int m = 20, int threads = 1);

/// Dispatches on plan.scaling.
McReport run_experiment(const ExperimentPlan& plan);

}  // namespace pfou
