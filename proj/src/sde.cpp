#include "pfou/sde.hpp"

#include <cmath>
#include <sstream>

#include "pfou/errors.hpp"
#include "pfou/kernel.hpp"

namespace pfou {

const char* to_string(ModelKind kind) {
    return kind == ModelKind::first_kind ? "first_kind" : "second_kind";
}

const char* to_string(Y1Method method) {
    return method == Y1Method::time_change ? "time_change" : "stationary_cov";
}

ModelKind parse_model_kind(const std::string& s) {
    if (s == "first_kind" || s == "first") return ModelKind::first_kind;
    if (s == "second_kind" || s == "second") return ModelKind::second_kind;
    throw DomainError("unknown model kind '" + s + "' (expected first_kind or second_kind)");
}

Y1Method parse_y1_method(const std::string& s) {
    if (s == "time_change") return Y1Method::time_change;
    if (s == "stationary_cov") return Y1Method::stationary_cov;
    throw DomainError("unknown Y1 method '" + s + "' (expected time_change or stationary_cov)");
}

void ModelSpec::validate() const {
    drift.validate(basis);
    if (basis.kind() == BasisKind::custom_table) basis.require_orthonormal(1e-8);
}

SamplePath SamplePath::prefix(int periods) const {
    if (periods < 1 || periods > meta.n) throw DomainError("SamplePath::prefix: periods out of range");
    const auto count = static_cast<std::size_t>(periods) * static_cast<std::size_t>(meta.m);
    SamplePath out;
    out.grid.points.assign(grid.points.begin(), grid.points.begin() + static_cast<std::ptrdiff_t>(count + 1));
    out.grid.step = grid.step;
    out.x.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(count + 1));
    out.noise_increments.assign(noise_increments.begin(),
                                noise_increments.begin() + static_cast<std::ptrdiff_t>(
                                                               std::min(count, noise_increments.size())));
    out.meta = meta;
    out.meta.n = periods;
    return out;
}

void SamplePath::validate() const {
    if (meta.m < 2) throw DomainError("path needs at least 2 steps per period");
    if (meta.n < 1) throw DomainError("path needs at least one whole period");
    const std::size_t count = static_cast<std::size_t>(meta.n) * static_cast<std::size_t>(meta.m);
    if (x.size() != count + 1 || grid.size() != count + 1)
        throw DomainError("path length does not cover a whole number of periods");
    if (!noise_increments.empty() && noise_increments.size() != count)
        throw DomainError("noise increments must have one entry per step");
    if (x.front() != 0.0) throw DomainError("path must start at x = 0");
}

std::vector<double> noise_autocovariance(ModelKind kind, Hurst H, double step, std::size_t count) {
    if (kind == ModelKind::first_kind) {
        std::vector<double> out(count);
        for (std::size_t k = 0; k < count; ++k) out[k] = fgn_autocovariance(H, k, step);
        return out;
    }
    return Y1IncrementCovariance(H, step).table(count);
}

Y1Sampler::Y1Sampler(Hurst H, int n, int m, Y1Method method, int substeps)
    : method_(method), substeps_(substeps) {
    if (n < 1 || m < 2) throw DomainError("Y1Sampler: need n >= 1 and m >= 2");
    count_ = static_cast<std::size_t>(n) * static_cast<std::size_t>(m);
    const double step = 1.0 / static_cast<double>(m);
    if (method == Y1Method::stationary_cov) {
        auto cov = std::make_shared<Y1IncrementCovariance>(H, step);
        circulant_ = std::make_unique<CirculantSampler>([cov](std::size_t k) { return (*cov)(k); }, count_);
        return;
    }
    if (substeps < 1) throw DomainError("Y1Sampler: substeps must be >= 1");
    const std::size_t fine = count_ * static_cast<std::size_t>(substeps);
    if (fine + 1 > kCholeskyCap) {
        std::ostringstream msg;
        msg << "time_change sampling needs " << fine + 1 << " fBm points, above the Cholesky cap "
            << kCholeskyCap << "; use stationary_cov";
        throw DomainError(msg.str());
    }
    const double sub = step / static_cast<double>(substeps);
    const double h = H.value();
    TimeGrid grid;
    grid.points.resize(fine + 1);
    for (std::size_t j = 0; j <= fine; ++j) grid.points[j] = h * std::exp(static_cast<double>(j) * sub / h);
    weights_.resize(fine);
    for (std::size_t j = 0; j < fine; ++j) weights_[j] = std::exp(-(static_cast<double>(j) + 0.5) * sub);
    cholesky_ = std::make_unique<NonuniformFbmSampler>(H, grid);
}

std::vector<double> Y1Sampler::sample(Rng& rng) const {
    if (circulant_) return circulant_->sample(rng);
    // increments over [0, a_0] first, then over consecutive a_{s_j}
    const std::vector<double> db = cholesky_->sample_increments(rng);
    std::vector<double> out(count_, 0.0);
    const auto sub = static_cast<std::size_t>(substeps_);
    for (std::size_t k = 0; k < count_; ++k) {
        double acc = 0.0;
        for (std::size_t q = 0; q < sub; ++q) {
            const std::size_t j = k * sub + q;
            acc += weights_[j] * db[j + 1];
        }
        out[k] = acc;
    }
    return out;
}

PathSimulator::PathSimulator(ModelSpec model, int n, int m, SimulationOptions options)
    : model_(std::move(model)), n_(n), m_(m), options_(options) {
    model_.validate();
    if (n < 1) throw DomainError("simulation horizon must be at least one period");
    if (m < 2) throw DomainError("need at least 2 steps per period");
    drift_per_step_.resize(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k)
        drift_per_step_[static_cast<std::size_t>(k)] =
            mean_drift(model_.drift, model_.basis, static_cast<double>(k) / static_cast<double>(m));
    if (options_.noise == NoiseMode::off) return;
    const Hurst H = model_.drift.H;
    const double step = 1.0 / static_cast<double>(m);
    const std::size_t count = static_cast<std::size_t>(n) * static_cast<std::size_t>(m);
    if (model_.kind == ModelKind::first_kind) {
        fgn_ = std::make_unique<CirculantSampler>(
            [H, step](std::size_t k) { return fgn_autocovariance(H, k, step); }, count);
    } else {
        y1_ = std::make_unique<Y1Sampler>(H, n, m, options_.y1_method, options_.y1_substeps);
    }
}

SamplePath PathSimulator::simulate(std::uint64_t seed) const {
    const std::size_t count = static_cast<std::size_t>(n_) * static_cast<std::size_t>(m_);
    std::vector<double> increments;
    if (options_.noise == NoiseMode::off) {
        increments.assign(count, 0.0);
    } else {
        Rng rng(seed);
        increments = fgn_ ? fgn_->sample(rng) : y1_->sample(rng);
    }
    return integrate(std::move(increments), seed);
}

SamplePath PathSimulator::integrate(std::vector<double> increments, std::uint64_t seed) const {
    const std::size_t count = increments.size();
    const double step = 1.0 / static_cast<double>(m_);
    const double alpha = model_.drift.alpha;
    SamplePath path;
    path.grid = TimeGrid::uniform(0.0, step, count + 1);
    path.x.resize(count + 1);
    path.x[0] = 0.0;
    const auto m = static_cast<std::size_t>(m_);
    for (std::size_t k = 0; k < count; ++k) {
        const double drift = drift_per_step_[k % m] - alpha * path.x[k];
        path.x[k + 1] = path.x[k] + drift * step + increments[k];
    }
    path.noise_increments = std::move(increments);

    PathMeta& meta = path.meta;
    meta.kind = model_.kind;
    meta.H = model_.drift.H.value();
    meta.alpha = alpha;
    meta.mu.assign(model_.drift.mu.data(), model_.drift.mu.data() + model_.drift.mu.size());
    meta.basis = model_.basis.kind() == BasisKind::constant_plus_fourier ? "fourier" : "custom";
    meta.seed = seed;
    meta.n = n_;
    meta.m = m_;
    std::string scheme = "euler";
    if (options_.noise == NoiseMode::off) {
        scheme += "+zero_noise";
    } else if (model_.kind == ModelKind::first_kind) {
        scheme += "+fgn_circulant";
    } else {
        scheme += std::string("+y1_") + to_string(options_.y1_method);
    }
    meta.scheme = scheme;
    return path;
}

SamplePath simulate_first_kind(const ModelSpec& model, int n, int m, std::uint64_t seed, NoiseMode noise) {
    if (model.kind != ModelKind::first_kind) throw DomainError("simulate_first_kind: model is not of the first kind");
    return PathSimulator(model, n, m, {noise}).simulate(seed);
}

NoiseIncrements simulate_y1_increments(Hurst H, int n, int m, std::uint64_t seed, Y1Method method, int substeps) {
    Y1Sampler sampler(H, n, m, method, substeps);
    Rng rng(seed);
    NoiseIncrements out;
    out.values = sampler.sample(rng);
    out.grid = TimeGrid::uniform(0.0, 1.0 / static_cast<double>(m), out.values.size() + 1);
    out.seed = seed;
    return out;
}

SamplePath simulate_second_kind(const ModelSpec& model, int n, int m, std::uint64_t seed, NoiseMode noise,
                                Y1Method method) {
    if (model.kind != ModelKind::second_kind)
        throw DomainError("simulate_second_kind: model is not of the second kind");
    return PathSimulator(model, n, m, {noise, method}).simulate(seed);
}

}  // namespace pfou
