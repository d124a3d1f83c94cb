#include "pfou/asymptotics.hpp"

#include <cmath>
#include <sstream>

#include "pfou/errors.hpp"
#include "pfou/kernel.hpp"
#include "pfou/parallel.hpp"
#include "pfou/quadrature.hpp"

namespace pfou {

namespace {

constexpr int kPanels = 64;
constexpr int kOrder = 16;

// F_fg(w) + F_gf(w), F_fg(w) = \int_0^{1-w} f(u) g(u + w) du, for w in [0, 1]
double symmetric_correlation(const PeriodicFunction& f, const PeriodicFunction& g, double w) {
    const double len = 1.0 - w;
    if (len <= 0.0) return 0.0;
    return quad::composite_gauss([&](double u) { return f(u) * g(u + w) + g(u) * f(u + w); }, 0.0, len, 4, 16);
}

LimitMatrix limit_matrix(const DriftParams& params, const BasisSpec& spec, double stationary_var,
                         const char* name) {
    params.validate(spec);
    const auto p = static_cast<Eigen::Index>(spec.size());
    LimitMatrix out;
    out.stationary_var = stationary_var;
    out.Lambda = Eigen::VectorXd::Zero(p);
    if (!params.mu.isZero(0.0)) {
        const DriftProfile prof(params, spec);
        for (Eigen::Index i = 0; i < p; ++i)
            out.Lambda(i) = spec.period_integral(
                [&](double t) { return spec.evaluate(static_cast<std::size_t>(i), t) * prof.htilde(t); });
        out.htilde_sq = spec.period_integral([&](double t) { return std::pow(prof.htilde(t), 2); });
    }
    const double bessel_gap = out.htilde_sq - out.Lambda.squaredNorm();
    if (bessel_gap < -1e-10 * std::max(1.0, out.htilde_sq)) {
        std::ostringstream msg;
        msg << name << ": Bessel inequality violated (\\int h~^2 - |Lambda|^2 = " << bessel_gap
            << "); is the basis orthonormal?";
        throw NumericalError(msg.str());
    }
    const double denom = bessel_gap + stationary_var;
    if (!(denom > 0.0)) throw NumericalError(std::string(name) + ": non-positive denominator");
    const double g = 1.0 / denom;
    out.gamma = g;
    out.M.resize(p + 1, p + 1);
    out.M.topLeftCorner(p, p) = Eigen::MatrixXd::Identity(p, p) + g * out.Lambda * out.Lambda.transpose();
    out.M.topRightCorner(p, 1) = g * out.Lambda;
    out.M.bottomLeftCorner(1, p) = g * out.Lambda.transpose();
    out.M(p, p) = g;
    return out;
}

std::vector<PeriodicFunction> basis_functions(const BasisSpec& spec) {
    std::vector<PeriodicFunction> out;
    for (std::size_t i = 0; i < spec.size(); ++i) out.emplace_back([&spec, i](double t) { return spec.evaluate(i, t); });
    return out;
}

void check_psd(const Eigen::MatrixXd& m, const char* name, std::vector<std::string>& warnings) {
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        warnings.push_back(std::string(name) + " is not symmetric to 1e-10");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    const double top = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    if (eig.eigenvalues()(0) < -1e-8 * top) {
        std::ostringstream msg;
        msg << name << " is not positive semidefinite (smallest eigenvalue " << eig.eigenvalues()(0) << ")";
        warnings.push_back(msg.str());
    }
}

}  // namespace

double quad_singular(const PeriodicFunction& f, const PeriodicFunction& g, Hurst H) {
    const double h = H.value();
    const double v = quad::power_weighted([&](double w) { return symmetric_correlation(f, g, w); },
                                          H.kernel_exponent(), 1.0, kPanels, kOrder);
    return h * (2.0 * h - 1.0) * v;
}

double quad_lattice(const PeriodicFunction& f, const PeriodicFunction& g, Hurst H, double tol) {
    const double beta = H.kernel_exponent();
    const int order = lattice_truncation_order(H, tol);
    auto rho = [H](double d) { return kernel_rH_regular(H, d); };
    auto corr = [&](double w) { return symmetric_correlation(f, g, w); };
    // m = 0 term, singular at w = 0
    const double near = quad::power_weighted([&](double w) { return corr(w) * rho(w); }, beta, 1.0, kPanels, kOrder);
    // m = -1 term r(1 - w), singular at w = 1; substitute v = 1 - w
    const double far =
        quad::power_weighted([&](double v) { return corr(1.0 - v) * rho(v); }, beta, 1.0, kPanels, kOrder);
    // remaining terms are smooth on [0, 1]
    auto rest = [&](double w) {
        double acc = 0.0;
        for (int m = order; m >= 1; --m) {
            acc += kernel_rH_distance(H, w + m);
            if (m >= 2) acc += kernel_rH_distance(H, m - w);
        }
        return acc * corr(w);
    };
    const double smooth = quad::composite_gauss(rest, 0.0, 1.0, 8, 16);
    return near + far + smooth;
}

double first_kind_stationary_variance(Hurst H, double alpha) {
    if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
    const double h = H.value();
    return std::pow(alpha, -2.0 * h) * h * std::tgamma(2.0 * h);
}

double zbar_variance(Hurst H, double alpha) {
    if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
    const double h = H.value();
    return (2.0 * h - 1.0) * std::pow(h, 2.0 * h) / alpha * std::beta((alpha - 1.0) * h + 1.0, 2.0 * h - 1.0);
}

LimitMatrix matrix_M(const DriftParams& params, const BasisSpec& spec) {
    return limit_matrix(params, spec, first_kind_stationary_variance(params.H, params.alpha), "matrix_M");
}

LimitMatrix matrix_M_bar(const DriftParams& params, const BasisSpec& spec) {
    return limit_matrix(params, spec, zbar_variance(params.H, params.alpha), "matrix_M_bar");
}

const char* to_string(SigmaForm f) {
    return f == SigmaForm::product_of_means ? "product_of_means" : "unit_square_kernel";
}

SigmaForm parse_sigma_form(const std::string& s) {
    if (s == "product_of_means") return SigmaForm::product_of_means;
    if (s == "unit_square_kernel") return SigmaForm::unit_square_kernel;
    throw DomainError("unknown sigma form '" + s + "' (expected product_of_means or unit_square_kernel)");
}

Eigen::MatrixXd matrix_Sigma(const DriftParams& params, const BasisSpec& spec, SigmaForm form) {
    params.validate(spec);
    const auto p = static_cast<Eigen::Index>(spec.size());
    const auto phi = basis_functions(spec);
    Eigen::VectorXd means(p);
    for (Eigen::Index i = 0; i < p; ++i) means(i) = spec.period_integral(phi[static_cast<std::size_t>(i)]);
    Eigen::VectorXd a = Eigen::VectorXd::Zero(p);
    double b = 0.0;
    if (!params.mu.isZero(0.0)) {
        const DriftProfile prof(params, spec);
        const PeriodicFunction ht = [&prof](double t) { return prof.htilde(t); };
        if (form == SigmaForm::product_of_means) {
            const double hbar = spec.period_integral(ht);
            a = means * hbar;
            b = hbar * hbar;
        } else {
            for (Eigen::Index i = 0; i < p; ++i) a(i) = quad_singular(phi[static_cast<std::size_t>(i)], ht, params.H);
            b = quad_singular(ht, ht, params.H);
        }
    }
    Eigen::MatrixXd S(p + 1, p + 1);
    S.topLeftCorner(p, p) = means * means.transpose();
    S.topRightCorner(p, 1) = -a;
    S.bottomLeftCorner(1, p) = -a.transpose();
    S(p, p) = b;
    return S;
}

Eigen::MatrixXd matrix_Sigma_bar(const DriftParams& params, const BasisSpec& spec, double sigma2, double tol) {
    params.validate(spec);
    if (!(sigma2 >= 0.0)) throw DomainError("sigma2 must be non-negative");
    const auto p = static_cast<Eigen::Index>(spec.size());
    auto fns = basis_functions(spec);
    const bool has_drift = !params.mu.isZero(0.0);
    std::unique_ptr<DriftProfile> prof;
    if (has_drift) {
        prof = std::make_unique<DriftProfile>(params, spec);
        fns.emplace_back([&prof](double t) { return prof->htilde(t); });
    }
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(p + 1, p + 1);
    const auto count = static_cast<Eigen::Index>(fns.size());
    for (Eigen::Index i = 0; i < count; ++i) {
        for (Eigen::Index j = i; j < count; ++j) {
            const double v = quad_lattice(fns[static_cast<std::size_t>(i)], fns[static_cast<std::size_t>(j)], params.H, tol);
            // rows/cols touching h~ carry the minus sign of the alpha row
            const double sign = ((i == p) != (j == p)) ? -1.0 : 1.0;
            S(i, j) = S(j, i) = sign * v;
        }
    }
    S(p, p) += sigma2;
    return S;
}

double jackknife_variance_se(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    if (n < 3) throw DomainError("jackknife needs at least 3 values");
    double sum = 0.0, sum2 = 0.0;
    for (double x : xs) {
        sum += x;
        sum2 += x * x;
    }
    std::vector<double> loo(n);
    double mean_loo = 0.0;
    const double k = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = sum - xs[i];
        const double s2 = sum2 - xs[i] * xs[i];
        loo[i] = (s2 - s * s / k) / (k - 1.0);
        mean_loo += loo[i];
    }
    mean_loo /= static_cast<double>(n);
    double acc = 0.0;
    for (double v : loo) acc += (v - mean_loo) * (v - mean_loo);
    return std::sqrt(k / static_cast<double>(n) * acc);
}

namespace {

std::vector<double> sigma2_samples(Hurst H, double alpha, int replications, int n, int m, std::uint64_t seed,
                                   std::uint64_t offset, int threads) {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(1);
    const ModelSpec model{DriftParams{mu, alpha, H}, BasisSpec::fourier(1), ModelKind::second_kind};
    const PathSimulator sim(model, n, m);
    std::vector<double> out(static_cast<std::size_t>(replications));
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    parallel_for(out.size(), threads, [&](std::size_t r) {
        const SamplePath path = sim.simulate(replication_seed(seed, offset + r));
        double acc = 0.0;
        for (std::size_t k = 0; k < path.noise_increments.size(); ++k) acc += path.x[k] * path.noise_increments[k];
        out[r] = scale * acc;
    });
    return out;
}

double sample_variance(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return acc / static_cast<double>(xs.size() - 1);
}

}  // namespace

Sigma2Estimate estimate_sigma2_mc(Hurst H, double alpha, int replications, int n, int m, std::uint64_t seed,
                                  int threads) {
    if (replications < 100) throw DomainError("estimate_sigma2_mc: need at least 100 replications");
    if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
    Sigma2Estimate est;
    est.replications = replications;
    est.n = n;
    est.m = m;
    est.seed = seed;
    const auto reps = static_cast<std::uint64_t>(replications);
    const auto a = sigma2_samples(H, alpha, replications, n, m, seed, 0, threads);
    const auto b = sigma2_samples(H, alpha, replications, 2 * n, m, seed, reps, threads);
    est.value = sample_variance(a);
    est.se = jackknife_variance_se(a);
    est.value_2n = sample_variance(b);
    est.se_2n = jackknife_variance_se(b);
    est.stabilized = std::abs(est.value - est.value_2n) <= 3.0 * std::hypot(est.se, est.se_2n);
    return est;
}

AsymptoticCov asymptotic_cov_first(const DriftParams& params, const BasisSpec& spec, SigmaForm form) {
    AsymptoticCov out;
    out.kind = ModelKind::first_kind;
    out.H = params.H.value();
    if (out.H >= 0.75)
        out.warnings.push_back("H >= 3/4 lies outside the regime of the first-kind central limit theorem");
    const LimitMatrix lm = matrix_M(params, spec);
    out.M = lm.M;
    out.Lambda = lm.Lambda;
    out.gamma = lm.gamma;
    out.stationary_var = lm.stationary_var;
    out.Sigma = matrix_Sigma(params, spec, form);
    out.sigma_form = to_string(form);
    out.product = out.M.transpose() * out.Sigma * out.M;
    out.product = 0.5 * (out.product + out.product.transpose());
    check_psd(out.Sigma, "Sigma", out.warnings);
    check_psd(out.product, "M^T Sigma M", out.warnings);
    return out;
}

AsymptoticCov asymptotic_cov_second(const DriftParams& params, const BasisSpec& spec, double sigma2,
                                    double sigma2_se, double tol) {
    AsymptoticCov out;
    out.kind = ModelKind::second_kind;
    out.H = params.H.value();
    const LimitMatrix lm = matrix_M_bar(params, spec);
    out.M = lm.M;
    out.Lambda = lm.Lambda;
    out.gamma = lm.gamma;
    out.stationary_var = lm.stationary_var;
    out.Sigma = matrix_Sigma_bar(params, spec, sigma2, tol);
    out.truncation_order = lattice_truncation_order(params.H, tol);
    out.sigma2 = sigma2;
    out.sigma2_se = sigma2_se;
    out.sigma_form = "lattice_kernel";
    out.product = out.M.transpose() * out.Sigma * out.M;
    out.product = 0.5 * (out.product + out.product.transpose());
    check_psd(out.Sigma, "Sigma-bar", out.warnings);
    check_psd(out.product, "M-bar^T Sigma-bar M-bar", out.warnings);
    return out;
}

}  // namespace pfou
