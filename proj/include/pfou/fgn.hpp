#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "pfou/rng.hpp"

namespace pfou {

/// Hurst index restricted to the long-memory regime 1/2 < H < 1.
class Hurst {
public:
    explicit Hurst(double value);
    double value() const noexcept { return value_; }
    /// 2H - 2, the exponent of the singular kernel |u - v|^(2H-2).
    double kernel_exponent() const noexcept { return 2.0 * value_ - 2.0; }

private:
    double value_;
};

/// Strictly increasing observation times, with an optional uniform-spacing flag.
struct TimeGrid {
    std::vector<double> points;
    std::optional<double> step;

    static TimeGrid uniform(double start, double step, std::size_t count);
    /// Throws DomainError when the invariants are violated.
    void validate() const;
    std::size_t size() const noexcept { return points.size(); }
};

struct NoiseIncrements {
    std::vector<double> values;  ///< length grid.size() - 1
    TimeGrid grid;
    std::uint64_t seed = 0;
};

/// R_H(t, s) = (t^2H + s^2H - |t - s|^2H) / 2.
double fbm_covariance(Hurst H, double t, double s);

/// Covariance of two fGn increments `lag` steps apart on a grid of spacing `step`.
double fgn_autocovariance(Hurst H, std::size_t lag, double step);

/// Covariance of the fBm increments over [s1, s2] and [t1, t2], evaluated
/// without the catastrophic cancellation of the raw R_H second difference
/// (matters on exponentially stretched grids).
double fbm_increment_covariance(Hurst H, double s1, double s2, double t1, double t2);

/// Exact sampler for a stationary Gaussian sequence via circulant embedding.
/// Construction computes the embedding spectrum once; `sample` is const and
/// may be called concurrently.
class CirculantSampler {
public:
    using Autocovariance = std::function<double(std::size_t)>;

    /// `count` values with covariance autocov(|i - j|). The embedding size
    /// doubles until every eigenvalue is >= -1e-10 * max eigenvalue.
    CirculantSampler(Autocovariance autocov, std::size_t count,
                     std::size_t max_embedding = std::size_t{1} << 26);

    std::vector<double> sample(Rng& rng) const;

    std::size_t count() const noexcept { return count_; }
    std::size_t embedding_size() const noexcept { return sqrt_eigen_.size(); }
    /// Number of eigenvalues that were slightly negative and clamped to zero.
    std::size_t clamped() const noexcept { return clamped_; }

private:
    std::size_t count_;
    std::vector<double> sqrt_eigen_;  ///< sqrt(lambda_k / M)
    std::size_t clamped_ = 0;
};

/// Exact sampler for a Gaussian vector from its covariance matrix. The matrix is
/// equilibrated to unit diagonal before factorization; if that fails a jitter of
/// 1e-12 (relative to the unit diagonal) is added once.
class CholeskySampler {
public:
    explicit CholeskySampler(const Eigen::MatrixXd& covariance);

    std::vector<double> sample(Rng& rng) const;

    std::size_t dimension() const noexcept { return static_cast<std::size_t>(factor_.rows()); }
    bool jittered() const noexcept { return jittered_; }

private:
    Eigen::MatrixXd factor_;  ///< lower triangular, already rescaled
    bool jittered_ = false;
};

/// `count` stationary fGn increments of spacing `step`. Deterministic in all arguments.
NoiseIncrements sample_fgn_uniform(Hurst H, std::size_t count, double step, std::uint64_t seed);

/// Default cap on the number of points for the O(N^3) Cholesky route.
inline constexpr std::size_t kCholeskyCap = 8192;

/// Increments of B^H between consecutive grid points (plus [0, grid[0]] when grid[0] > 0).
class NonuniformFbmSampler {
public:
    NonuniformFbmSampler(Hurst H, const TimeGrid& grid, std::size_t cap = kCholeskyCap);

    /// Increments over [g_0, g_1], [g_1, g_2], ...; a leading [0, g_0] increment
    /// is included when g_0 > 0.
    std::vector<double> sample_increments(Rng& rng) const;
    /// B^H at the grid points.
    std::vector<double> sample_values(Rng& rng) const;

    bool jittered() const noexcept { return sampler_ && sampler_->jittered(); }

private:
    bool leading_ = false;
    std::optional<CholeskySampler> sampler_;  ///< empty for the single-point grid {0}
};

/// B^H at the points of an arbitrary increasing grid, via Cholesky.
std::vector<double> sample_fbm_nonuniform(Hurst H, const TimeGrid& grid, std::uint64_t seed);

}  // namespace pfou
