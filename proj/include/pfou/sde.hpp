#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pfou/basis.hpp"
#include "pfou/fgn.hpp"

namespace pfou {

enum class ModelKind { first_kind, second_kind };
enum class Y1Method { time_change, stationary_cov };
enum class NoiseMode { on, off };

const char* to_string(ModelKind kind);
const char* to_string(Y1Method method);
ModelKind parse_model_kind(const std::string& s);
Y1Method parse_y1_method(const std::string& s);

/// dX = (sum_i mu_i phi_i(t) - alpha X) dt + dN, X_0 = 0, with N = B^H (first
/// kind) or N = Y^(1) (second kind).
struct ModelSpec {
    DriftParams drift;
    BasisSpec basis;
    ModelKind kind = ModelKind::first_kind;

    void validate() const;
};

/// Provenance of a simulated (or loaded) path.
struct PathMeta {
    ModelKind kind = ModelKind::first_kind;
    double H = 0.0;
    double alpha = 0.0;
    std::vector<double> mu;
    std::string basis = "fourier";
    std::uint64_t seed = 0;
    int n = 0;  ///< whole periods
    int m = 0;  ///< steps per period
    std::string scheme;
};

/// Process values on the uniform grid k / m, k = 0..n m, and the driving increments.
struct SamplePath {
    TimeGrid grid;
    std::vector<double> x;
    std::vector<double> noise_increments;
    PathMeta meta;

    double step() const { return 1.0 / static_cast<double>(meta.m); }
    /// The first `periods` whole periods of the path.
    SamplePath prefix(int periods) const;
    /// Throws DomainError unless the invariants of a uniform whole-period path hold.
    void validate() const;
};

struct SimulationOptions {
    NoiseMode noise = NoiseMode::on;
    Y1Method y1_method = Y1Method::stationary_cov;
    int y1_substeps = 4;  ///< time_change only
};

/// Autocovariance c(0..count-1) of the driving increments on a grid of spacing `step`.
std::vector<double> noise_autocovariance(ModelKind kind, Hurst H, double step, std::size_t count);

/// Samples of the driving increments for the second-kind model.
class Y1Sampler {
public:
    Y1Sampler(Hurst H, int n, int m, Y1Method method, int substeps = 4);
    std::vector<double> sample(Rng& rng) const;
    Y1Method method() const noexcept { return method_; }

private:
    Y1Method method_;
    int substeps_;
    std::size_t count_;
    std::vector<double> weights_;  ///< e^{-s} at substep midpoints (time_change)
    std::unique_ptr<CirculantSampler> circulant_;
    std::unique_ptr<NonuniformFbmSampler> cholesky_;
};

/// Euler–Maruyama simulator for one (model, n, m) configuration. The noise
/// sampler is set up once; `simulate` is const and thread-safe.
class PathSimulator {
public:
    PathSimulator(ModelSpec model, int n, int m, SimulationOptions options = {});

    SamplePath simulate(std::uint64_t seed) const;

    const ModelSpec& model() const noexcept { return model_; }
    int periods() const noexcept { return n_; }
    int steps_per_period() const noexcept { return m_; }

private:
    SamplePath integrate(std::vector<double> increments, std::uint64_t seed) const;

    ModelSpec model_;
    int n_;
    int m_;
    SimulationOptions options_;
    std::vector<double> drift_per_step_;  ///< sum mu_i phi_i(k / m), k = 0..m-1
    std::unique_ptr<CirculantSampler> fgn_;
    std::unique_ptr<Y1Sampler> y1_;
};

SamplePath simulate_first_kind(const ModelSpec& model, int n, int m, std::uint64_t seed,
                               NoiseMode noise = NoiseMode::on);

NoiseIncrements simulate_y1_increments(Hurst H, int n, int m, std::uint64_t seed,
                                       Y1Method method = Y1Method::stationary_cov, int substeps = 4);

SamplePath simulate_second_kind(const ModelSpec& model, int n, int m, std::uint64_t seed,
                                NoiseMode noise = NoiseMode::on,
                                Y1Method method = Y1Method::stationary_cov);

}  // namespace pfou
