#include "pfou/mc_harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "pfou/errors.hpp"
#include "pfou/parallel.hpp"
#include "pfou/quadrature.hpp"

namespace pfou {

namespace {

constexpr double kMaxFailureRate = 0.01;

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

EstimatorOptions estimator_options(const ExperimentPlan& plan, int n_max) {
    EstimatorOptions opt;
    if (plan.simulation.noise == NoiseMode::off) return opt;  // pathwise
    opt.integral = plan.integral;
    if (plan.integral == StochasticIntegral::divergence) {
        opt.noise_table = std::make_shared<NoiseCovarianceTable>(
            plan.model.kind, plan.model.drift.H, 1.0 / plan.m,
            static_cast<std::size_t>(n_max) * static_cast<std::size_t>(plan.m));
        if (plan.oracle_trace) opt.trace_alpha = plan.model.drift.alpha;
    }
    return opt;
}

// Simulates every replication once at the largest horizon and estimates on prefixes.
std::vector<ReplicationRow> simulate_and_estimate(const ExperimentPlan& plan, const std::vector<int>& horizons) {
    const int n_max = *std::max_element(horizons.begin(), horizons.end());
    const PathSimulator sim(plan.model, n_max, plan.m, plan.simulation);
    const EstimatorOptions opt = estimator_options(plan, n_max);
    const std::size_t h_count = horizons.size();
    std::vector<ReplicationRow> rows(static_cast<std::size_t>(plan.replications) * h_count);
    parallel_for(static_cast<std::size_t>(plan.replications), plan.threads, [&](std::size_t r) {
        const std::uint64_t seed = replication_seed(plan.base_seed, r);
        std::optional<SamplePath> path;
        std::string sim_error;
        try {
            path = sim.simulate(seed);
        } catch (const std::exception& e) {
            sim_error = std::string("simulation failed: ") + e.what();
        }
        for (std::size_t h = 0; h < h_count; ++h) {
            ReplicationRow& row = rows[r * h_count + h];
            row.replication = static_cast<int>(r);
            row.seed = seed;
            row.n = horizons[h];
            if (!path) {
                row.status = sim_error;
                continue;
            }
            try {
                const SamplePath sub = horizons[h] == n_max ? *path : path->prefix(horizons[h]);
                row.theta_hat = estimate(sub, plan.model.basis, opt).theta_hat;
            } catch (const std::exception& e) {
                row.status = std::string("estimate failed: ") + e.what();
            }
        }
    });
    return rows;
}

void check_failures(const McReport& report) {
    const double total = static_cast<double>(report.rows.size());
    if (report.failures > kMaxFailureRate * total) {
        std::ostringstream msg;
        msg << report.failures << " of " << report.rows.size() << " estimates failed (limit 1%)";
        for (const auto& row : report.rows) {
            if (row.status != "ok") {
                msg << "; first failure: replication " << row.replication << " n=" << row.n << ": " << row.status;
                break;
            }
        }
        throw ExperimentError(msg.str());
    }
}

}  // namespace

const char* to_string(Scaling s) {
    switch (s) {
        case Scaling::consistency: return "consistency";
        case Scaling::clt_first: return "clt_first";
        case Scaling::clt_second: return "clt_second";
    }
    return "?";
}

Scaling parse_scaling(const std::string& s) {
    if (s == "consistency") return Scaling::consistency;
    if (s == "clt_first") return Scaling::clt_first;
    if (s == "clt_second") return Scaling::clt_second;
    throw DomainError("unknown scaling '" + s + "' (expected consistency, clt_first or clt_second)");
}

void ExperimentPlan::validate() const {
    model.validate();
    if (replications < 2) throw DomainError("replications must be at least 2");
    if (m < 2) throw DomainError("m must be at least 2");
    if (n_list.empty()) throw DomainError("n_list must not be empty");
    for (int n : n_list)
        if (n < 1) throw DomainError("horizons must be positive whole periods");
    if (!(relative_tolerance > 0.0)) throw DomainError("relative_tolerance must be positive");
    if (!(magnitude_filter >= 0.0 && magnitude_filter < 1.0)) throw DomainError("magnitude_filter must lie in [0, 1)");
    switch (scaling) {
        case Scaling::consistency:
            if (n_list.size() < 2) throw DomainError("a consistency run needs at least two horizons");
            break;
        case Scaling::clt_first:
            if (model.kind != ModelKind::first_kind) throw DomainError("clt_first scaling needs a first-kind model");
            if (n_list.size() != 1) throw DomainError("a CLT run takes exactly one horizon");
            break;
        case Scaling::clt_second:
            if (model.kind != ModelKind::second_kind) throw DomainError("clt_second scaling needs a second-kind model");
            if (n_list.size() != 1) throw DomainError("a CLT run takes exactly one horizon");
            if (sigma2_replications < 100) throw DomainError("sigma2_replications must be at least 100");
            break;
    }
    if (threads < 1) throw DomainError("threads must be at least 1");
}

McReport run_consistency(const ExperimentPlan& plan) {
    const auto start = std::chrono::steady_clock::now();
    plan.validate();
    if (plan.scaling != Scaling::consistency) throw DomainError("run_consistency needs scaling = consistency");
    McReport report;
    report.experiment = "consistency";
    report.plan = plan;
    report.theta = plan.model.drift.theta();
    if (plan.simulation.noise == NoiseMode::off) report.notes.push_back("zero-noise plan: pathwise estimator");
    report.rows = simulate_and_estimate(plan, plan.n_list);

    const std::size_t h_count = plan.n_list.size();
    for (std::size_t h = 0; h < h_count; ++h) {
        HorizonSummary s;
        s.n = plan.n_list[h];
        std::vector<double> errors;
        for (std::size_t r = 0; r < static_cast<std::size_t>(plan.replications); ++r) {
            const ReplicationRow& row = report.rows[r * h_count + h];
            if (row.theta_hat.size() == 0) {
                ++s.failures;
                continue;
            }
            errors.push_back((row.theta_hat - report.theta).cwiseAbs().maxCoeff());
        }
        double sum = 0.0;
        for (double e : errors) sum += e;  // replication order
        s.mean_error = errors.empty() ? std::numeric_limits<double>::quiet_NaN() : sum / errors.size();
        s.median_error = median(errors);
        report.failures += s.failures;
        report.horizons.push_back(s);
    }
    check_failures(report);
    report.pass = true;
    for (std::size_t h = 1; h < h_count; ++h)
        if (!(report.horizons[h].median_error < report.horizons[h - 1].median_error)) report.pass = false;
    report.runtime_seconds = seconds_since(start);
    return report;
}

McReport run_clt(const ExperimentPlan& plan) {
    const auto start = std::chrono::steady_clock::now();
    plan.validate();
    if (plan.scaling == Scaling::consistency) throw DomainError("run_clt needs a CLT scaling");
    McReport report;
    report.experiment = "clt";
    report.plan = plan;
    report.theta = plan.model.drift.theta();
    const DriftParams& params = plan.model.drift;
    const double h = params.H.value();
    const int n = plan.n_list.front();
    const auto dim = report.theta.size();

    if (plan.scaling == Scaling::clt_first) {
        if (h >= 0.75) report.notes.push_back("H >= 3/4: outside the first-kind CLT regime, run anyway");
        report.theory = asymptotic_cov_first(params, plan.model.basis, plan.sigma_form);
        report.scale = std::pow(static_cast<double>(n), 1.0 - h);
    } else {
        const std::uint64_t s2_seed = splitmix64(plan.base_seed + 1);
        report.sigma2 = estimate_sigma2_mc(params.H, params.alpha, plan.sigma2_replications, n, plan.m, s2_seed,
                                           plan.threads);
        report.theory = asymptotic_cov_second(params, plan.model.basis, report.sigma2->value, report.sigma2->se,
                                              plan.lattice_tol);
        report.scale = std::sqrt(static_cast<double>(n));
        if (!report.sigma2->stabilized) report.notes.push_back("sigma2 estimates at n and 2n disagree");
    }
    for (const auto& w : report.theory->warnings) report.notes.push_back(w);

    report.rows = simulate_and_estimate(plan, plan.n_list);
    std::vector<Eigen::VectorXd> scaled;
    for (const auto& row : report.rows) {
        if (row.theta_hat.size() == 0) {
            ++report.failures;
            continue;
        }
        scaled.push_back(report.scale * (row.theta_hat - report.theta));
    }
    check_failures(report);
    if (scaled.size() < 3) throw ExperimentError("too few successful replications for a covariance");
    const double count = static_cast<double>(scaled.size());

    report.mean = Eigen::VectorXd::Zero(dim);
    for (const auto& e : scaled) report.mean += e;
    report.mean /= count;
    report.bias = report.mean / report.scale;
    report.covariance = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& e : scaled) {
        const Eigen::VectorXd c = e - report.mean;
        report.covariance += c * c.transpose();
    }
    report.covariance /= count - 1.0;

    const Eigen::MatrixXd& theory = report.theory->product;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(theory);
    report.theory_norm = svd.singularValues()(0);
    const double threshold = plan.magnitude_filter * report.theory_norm;
    Eigen::VectorXd sigma2_col = Eigen::VectorXd::Zero(dim);
    if (report.sigma2) sigma2_col = report.theory->M.col(dim - 1);

    report.covariance_pass = true;
    report.normality_pass = true;
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = i; j < dim; ++j) {
            ComparisonEntry c;
            c.i = static_cast<int>(i);
            c.j = static_cast<int>(j);
            c.empirical = report.covariance(i, j);
            c.theory = theory(i, j);
            double s = 0.0, s2 = 0.0;
            for (const auto& e : scaled) {
                const double v = (e(i) - report.mean(i)) * (e(j) - report.mean(j));
                s += v;
                s2 += v * v;
            }
            const double mv = s / count;
            c.mc_se = std::sqrt(std::max(0.0, s2 / count - mv * mv) / count);
            const double gap = std::abs(c.empirical - c.theory);
            c.relative_deviation =
                c.theory != 0.0 ? gap / std::abs(c.theory) : std::numeric_limits<double>::infinity();
            if (report.sigma2) c.sigma2_allowance = 3.0 * report.sigma2->se * std::abs(sigma2_col(i) * sigma2_col(j));
            c.tolerance = std::max(plan.relative_tolerance * std::abs(c.theory), 3.0 * c.mc_se) + c.sigma2_allowance;
            c.checked = std::abs(c.theory) > threshold;
            c.pass = !c.checked || gap <= c.tolerance;
            if (!c.pass) report.covariance_pass = false;
            report.comparisons.push_back(c);
        }
    }
    for (Eigen::Index c = 0; c < dim; ++c) {
        MomentCheck mc;
        mc.component = static_cast<int>(c);
        double m2 = 0.0, m3 = 0.0, m4 = 0.0;
        for (const auto& e : scaled) {
            const double d = e(c) - report.mean(c);
            m2 += d * d;
            m3 += d * d * d;
            m4 += d * d * d * d;
        }
        m2 /= count;
        m3 /= count;
        m4 /= count;
        mc.skewness = m3 / std::pow(m2, 1.5);
        mc.excess_kurtosis = m4 / (m2 * m2) - 3.0;
        mc.skewness_band = 3.0 * std::sqrt(6.0 / count);
        mc.kurtosis_band = 3.0 * std::sqrt(24.0 / count);
        mc.checked = theory(c, c) > threshold;
        mc.pass = !mc.checked ||
                  (std::abs(mc.skewness) <= mc.skewness_band && std::abs(mc.excess_kurtosis) <= mc.kurtosis_band);
        if (!mc.pass) report.normality_pass = false;
        report.moments.push_back(mc);
    }
    report.pass = report.covariance_pass && report.normality_pass && (!report.sigma2 || report.sigma2->stabilized);
    report.runtime_seconds = seconds_since(start);
    return report;
}

McReport run_noise_distribution_check(Hurst H, const std::vector<NamedFunction>& functions, int n, int replications,
                                      std::uint64_t seed, int m, int threads) {
    const auto start = std::chrono::steady_clock::now();
    if (functions.empty()) throw DomainError("need at least one function");
    if (n < 1 || m < 2) throw DomainError("need n >= 1 and m >= 2");
    if (replications < 2) throw DomainError("replications must be at least 2");
    McReport report;
    report.experiment = "noise_distribution";
    report.noise_H = H.value();
    report.noise_n = n;
    report.noise_m = m;
    report.noise_replications = replications;
    report.noise_seed = seed;
    const std::size_t k_count = functions.size();
    const std::size_t period = static_cast<std::size_t>(m);
    const std::size_t steps = static_cast<std::size_t>(n) * period;
    const double step = 1.0 / m;
    const double h = H.value();
    const double norm = std::pow(static_cast<double>(n), -h);

    std::vector<std::vector<double>> values(k_count, std::vector<double>(period));
    std::vector<double> means(k_count);
    for (std::size_t k = 0; k < k_count; ++k) {
        report.function_names.push_back(functions[k].name);
        for (std::size_t j = 0; j < period; ++j) values[k][j] = functions[k].f(static_cast<double>(j) * step);
        means[k] = quad::composite_gauss(functions[k].f, 0.0, 1.0, 16, 32);
    }

    const CirculantSampler sampler([H, step](std::size_t lag) { return fgn_autocovariance(H, lag, step); }, steps);
    std::vector<std::vector<double>> y(static_cast<std::size_t>(replications), std::vector<double>(k_count));
    parallel_for(static_cast<std::size_t>(replications), threads, [&](std::size_t r) {
        Rng rng(replication_seed(seed, r));
        const std::vector<double> inc = sampler.sample(rng);
        for (std::size_t k = 0; k < k_count; ++k) {
            double acc = 0.0;
            for (std::size_t j = 0; j < steps; ++j) acc += values[k][j % period] * inc[j];
            y[r][k] = norm * acc;
        }
    });

    std::vector<double> c(steps);
    for (std::size_t d = 0; d < steps; ++d) c[d] = fgn_autocovariance(H, d, step);
    // C_fg(d) = sum_{j=d}^{N-1} f_j g_{j-d} for periodic f, g
    auto cross = [&](const std::vector<double>& f, const std::vector<double>& g) {
        double total = 0.0;
        for (std::size_t s = 0; s < period; ++s) {
            std::vector<double> prefix(2 * period + 1, 0.0);
            for (std::size_t t = 0; t < 2 * period; ++t)
                prefix[t + 1] = prefix[t] + f[t % period] * g[(t + period - s) % period];
            const double full = prefix[period];
            for (std::size_t d = s; d < steps; d += period) {
                const std::size_t len = steps - d;
                const std::size_t q = len / period, rem = len % period;
                total += c[d] * (q * full + (prefix[s + rem] - prefix[s]));
            }
        }
        return total;
    };

    const double rc = static_cast<double>(replications);
    report.pass = true;
    for (std::size_t k = 0; k < k_count; ++k) {
        for (std::size_t l = k; l < k_count; ++l) {
            NoiseEntry e;
            e.k = static_cast<int>(k);
            e.l = static_cast<int>(l);
            double s = 0.0, s2 = 0.0;
            for (const auto& row : y) {
                const double v = row[k] * row[l];
                s += v;
                s2 += v * v;
            }
            e.empirical = s / rc;  // known zero mean
            e.mc_se = std::sqrt(std::max(0.0, s2 / rc - e.empirical * e.empirical) / rc);
            e.limit = means[k] * means[l];
            const double exact = cross(values[k], values[l]) + cross(values[l], values[k]) -
                                 c[0] * [&] {
                                     double diag = 0.0;
                                     for (std::size_t j = 0; j < period; ++j) diag += values[k][j] * values[l][j];
                                     return static_cast<double>(n) * diag;
                                 }();
            e.exact_n = norm * norm * exact;
            const double gap = std::abs(e.empirical - e.limit);
            e.pass_strict = gap <= 3.0 * e.mc_se;
            e.tolerance = 3.0 * e.mc_se + std::abs(e.exact_n - e.limit);
            e.pass = gap <= e.tolerance;
            if (!e.pass) report.pass = false;
            report.noise.push_back(e);
        }
    }
    report.runtime_seconds = seconds_since(start);
    return report;
}

McReport run_experiment(const ExperimentPlan& plan) {
    return plan.scaling == Scaling::consistency ? run_consistency(plan) : run_clt(plan);
}

}  // namespace pfou
