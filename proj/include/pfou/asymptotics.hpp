#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pfou/basis.hpp"
#include "pfou/sde.hpp"

namespace pfou {

using PeriodicFunction = std::function<double(double)>;

/// H(2H-1) \int_0^1 \int_0^1 f(u) g(v) |v - u|^{2H-2} du dv.
/// Computed on the difference variable w = v - u, where the weight |w|^{2H-2}
/// is absorbed by a Gauss–Jacobi panel and the cross-correlation of f and g is
/// integrated by Gauss–Legendre.
double quad_singular(const PeriodicFunction& f, const PeriodicFunction& g, Hurst H);

/// \int_0^1 \int_0^1 f(x) g(y) sum_{m in Z} r_H(x, y + m) dx dy, with the two
/// singular lattice terms integrated by power-weighted Gauss rules.
double quad_lattice(const PeriodicFunction& f, const PeriodicFunction& g, Hurst H, double tol = 1e-10);

/// alpha^{-2H} H Gamma(2H): limit of (1/n) \int_0^n Z_t^2 dt for the first kind.
double first_kind_stationary_variance(Hurst H, double alpha);

/// (2H-1) H^{2H} / alpha * B((alpha-1)H + 1, 2H - 1): variance of the stationary second-kind Z.
double zbar_variance(Hurst H, double alpha);

/// Limit of n Q_n^{-1}: [[I + g L L^T, g L], [g L^T, g]], with
/// L_i = \int_0^1 phi_i h~ and g = (\int h~^2 + v - |L|^2)^{-1}, v the stationary variance.
struct LimitMatrix {
    Eigen::MatrixXd M;
    Eigen::VectorXd Lambda;
    double gamma = 0.0;           ///< gamma (first kind) or eta (second kind)
    double htilde_sq = 0.0;       ///< \int_0^1 h~^2
    double stationary_var = 0.0;  ///< v
};

LimitMatrix matrix_M(const DriftParams& params, const BasisSpec& spec);
LimitMatrix matrix_M_bar(const DriftParams& params, const BasisSpec& spec);

/// How the h~ entries of the first-kind Sigma are formed.
///  - product_of_means: a_i = (\int phi_i)(\int h~), b = (\int h~)^2, the n^{-2H}
///    covariance limit of \int f dB^H over [0, n].
///  - unit_square_kernel: a_i = quad_singular(phi_i, h~), b = quad_singular(h~, h~).
/// The two coincide when h~ is constant.
enum class SigmaForm { product_of_means, unit_square_kernel };

const char* to_string(SigmaForm f);
SigmaForm parse_sigma_form(const std::string& s);

/// [[G, -a], [-a^T, b]] with G_ij = (\int phi_i)(\int phi_j).
Eigen::MatrixXd matrix_Sigma(const DriftParams& params, const BasisSpec& spec,
                             SigmaForm form = SigmaForm::product_of_means);

/// [[G-bar, -a-bar], [-a-bar^T, b-bar + sigma2]], entries from quad_lattice.
Eigen::MatrixXd matrix_Sigma_bar(const DriftParams& params, const BasisSpec& spec, double sigma2,
                                 double tol = 1e-10);

struct Sigma2Estimate {
    double value = 0.0;  ///< variance of n^{-1/2} \int Z dY at horizon n
    double se = 0.0;     ///< jackknife standard error
    double value_2n = 0.0;
    double se_2n = 0.0;
    int replications = 0;
    int n = 0;
    int m = 0;
    std::uint64_t seed = 0;
    /// |value - value_2n| <= 3 sqrt(se^2 + se_2n^2)
    bool stabilized = false;
};

/// Monte Carlo surrogate for sigma^2: sample variance of n^{-1/2} sum_k Z_k dY_k over
/// mu = 0 second-kind paths. Horizon 2n uses seeds base ^ (replications + r).
/// Requires replications >= 100. `threads` does not affect the result.
Sigma2Estimate estimate_sigma2_mc(Hurst H, double alpha, int replications, int n, int m, std::uint64_t seed,
                                  int threads = 1);

/// Jackknife standard error of the sample variance.
double jackknife_variance_se(const std::vector<double>& xs);

struct AsymptoticCov {
    ModelKind kind = ModelKind::first_kind;
    double H = 0.0;
    Eigen::MatrixXd M;
    Eigen::MatrixXd Sigma;
    Eigen::MatrixXd product;  ///< M^T Sigma M
    Eigen::VectorXd Lambda;
    double gamma = 0.0;  ///< gamma or eta
    double stationary_var = 0.0;
    double quad_tol = 1e-8;
    int truncation_order = 0;  ///< second kind only
    double sigma2 = 0.0;       ///< second kind only
    double sigma2_se = 0.0;
    std::string sigma_form;
    std::vector<std::string> warnings;
};

AsymptoticCov asymptotic_cov_first(const DriftParams& params, const BasisSpec& spec,
                                   SigmaForm form = SigmaForm::product_of_means);
AsymptoticCov asymptotic_cov_second(const DriftParams& params, const BasisSpec& spec, double sigma2,
                                    double sigma2_se, double tol = 1e-10);

}  // namespace pfou
