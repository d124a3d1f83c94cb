#include "pfou/fgn.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <sstream>

#include "pfou/errors.hpp"
#include "pfou/quadrature.hpp"

namespace pfou {

Hurst::Hurst(double value) : value_(value) {
    if (!(value > 0.5 && value < 1.0)) {
        std::ostringstream msg;
        msg << "Hurst index must lie in (1/2, 1), got " << value;
        throw DomainError(msg.str());
    }
}

TimeGrid TimeGrid::uniform(double start, double step, std::size_t count) {
    if (!(step > 0.0)) throw DomainError("TimeGrid::uniform: step must be positive");
    TimeGrid grid;
    grid.points.resize(count);
    for (std::size_t k = 0; k < count; ++k) grid.points[k] = start + static_cast<double>(k) * step;
    grid.step = step;
    return grid;
}

void TimeGrid::validate() const {
    if (points.empty()) throw DomainError("TimeGrid: empty grid");
    if (points.front() < 0.0) throw DomainError("TimeGrid: first point must be >= 0");
    for (std::size_t k = 1; k < points.size(); ++k) {
        if (!(points[k] > points[k - 1])) throw DomainError("TimeGrid: points must be strictly increasing");
    }
    if (step) {
        const double h = *step;
        for (std::size_t k = 0; k < points.size(); ++k) {
            const double expected = points.front() + static_cast<double>(k) * h;
            if (std::abs(points[k] - expected) > 64.0 * 2.2e-16 * std::max(1.0, std::abs(expected)))
                throw DomainError("TimeGrid: points are not uniform with the declared step");
        }
    }
}

double fbm_covariance(Hurst H, double t, double s) {
    if (t < 0.0 || s < 0.0) throw DomainError("fbm_covariance: times must be non-negative");
    const double two_h = 2.0 * H.value();
    return 0.5 * (std::pow(t, two_h) + std::pow(s, two_h) - std::pow(std::abs(t - s), two_h));
}

double fgn_autocovariance(Hurst H, std::size_t lag, double step) {
    if (!(step > 0.0)) throw DomainError("fgn_autocovariance: step must be positive");
    const double two_h = 2.0 * H.value();
    const double scale = std::pow(step, two_h);
    if (lag == 0) return scale;
    const double k = static_cast<double>(lag);
    if (lag == 1) return scale * 0.5 * (std::pow(2.0, two_h) - 2.0);
    // k^2H [ (1 + 1/k)^2H - 2 + (1 - 1/k)^2H ] / 2 with the two first-order terms cancelled analytically
    const double up = std::expm1(two_h * std::log1p(1.0 / k));
    const double down = std::expm1(two_h * std::log1p(-1.0 / k));
    return scale * 0.5 * std::pow(k, two_h) * (up + down);
}

namespace {

// (d + l)^e - d^e for d >= 0, l > 0, without cancellation.
double power_difference(double d, double l, double e) {
    if (d == 0.0) return std::pow(l, e);
    return std::pow(d, e) * std::expm1(e * std::log1p(l / d));
}

}  // namespace

double fbm_increment_covariance(Hurst H, double s1, double s2, double t1, double t2) {
    if (!(s2 > s1) || !(t2 > t1)) throw DomainError("fbm_increment_covariance: empty interval");
    if (s1 > t1) {
        std::swap(s1, t1);
        std::swap(s2, t2);
    }
    const double h = H.value();
    const double two_h = 2.0 * h;
    const double ls = s2 - s1;
    const double lt = t2 - t1;
    if (s1 == t1 && s2 == t2) return std::pow(ls, two_h);

    const double gap = t1 - s2;
    if (gap > 0.0 && gap >= std::min(ls, lt)) {
        // H(2H-1) \int\int |x - y|^{2H-2}: inner integral in closed form, outer by Gauss over the shorter interval.
        const double e = two_h - 1.0;
        const quad::Rule& rule = quad::gauss_legendre(16);
        double acc = 0.0;
        if (ls <= lt) {
            for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
                const double x = s1 + 0.5 * ls * (1.0 + rule.nodes[k]);
                acc += rule.weights[k] * power_difference(t1 - x, lt, e);
            }
            return h * 0.5 * ls * acc;
        }
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
            const double y = t1 + 0.5 * lt * (1.0 + rule.nodes[k]);
            acc += rule.weights[k] * power_difference(y - s2, ls, e);
        }
        return h * 0.5 * lt * acc;
    }
    auto p = [two_h](double x) { return std::pow(std::abs(x), two_h); };
    return 0.5 * (p(t2 - s1) + p(t1 - s2) - p(t2 - s2) - p(t1 - s1));
}

// ---------------------------------------------------------------------------
// FFTW helpers. Planning is not thread-safe in FFTW; execution with the
// new-array interface is.

namespace {

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n)
        : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
        if (!data) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    fftw_complex* data;
};

// Forward complex DFT of size n, in place on `buffer`.
void forward_dft(FftwBuffer& buffer, std::size_t n) {
    fftw_plan plan = nullptr;
    {
        std::lock_guard lock(fftw_planner_mutex());
        FftwBuffer scratch(n);
        plan = fftw_plan_dft_1d(static_cast<int>(n), scratch.data, scratch.data, FFTW_FORWARD,
                                FFTW_ESTIMATE);
    }
    if (!plan) throw NumericalError("FFTW planning failed");
    fftw_execute_dft(plan, buffer.data, buffer.data);
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

CirculantSampler::CirculantSampler(Autocovariance autocov, std::size_t count, std::size_t max_embedding)
    : count_(count) {
    if (count == 0) throw DomainError("CirculantSampler: count must be >= 1");
    std::size_t m = next_pow2(std::max<std::size_t>(2, 2 * (count - 1)));
    std::vector<double> cov;  // cov[k] for k = 0..m/2, extended as m grows
    for (;;) {
        if (m > max_embedding) {
            std::ostringstream msg;
            msg << "circulant embedding is not non-negative definite up to size " << max_embedding
                << "; use the Cholesky sampler for this covariance";
            throw NumericalError(msg.str());
        }
        const std::size_t half = m / 2;
        for (std::size_t k = cov.size(); k <= half; ++k) cov.push_back(autocov(k));

        FftwBuffer buf(m);
        for (std::size_t j = 0; j < m; ++j) {
            buf.data[j][0] = cov[std::min(j, m - j)];
            buf.data[j][1] = 0.0;
        }
        forward_dft(buf, m);
        double max_eig = 0.0;
        double min_eig = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            max_eig = std::max(max_eig, buf.data[j][0]);
            min_eig = std::min(min_eig, buf.data[j][0]);
        }
        const double tol = 1e-10 * max_eig;
        if (min_eig < -tol) {
            m *= 2;
            continue;
        }
        sqrt_eigen_.resize(m);
        clamped_ = 0;
        for (std::size_t j = 0; j < m; ++j) {
            double lambda = buf.data[j][0];
            if (lambda < 0.0) {
                lambda = 0.0;
                ++clamped_;
            }
            sqrt_eigen_[j] = std::sqrt(lambda / static_cast<double>(m));
        }
        return;
    }
}

std::vector<double> CirculantSampler::sample(Rng& rng) const {
    const std::size_t m = sqrt_eigen_.size();
    FftwBuffer buf(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double re = rng.normal();
        const double im = rng.normal();
        buf.data[j][0] = sqrt_eigen_[j] * re;
        buf.data[j][1] = sqrt_eigen_[j] * im;
    }
    forward_dft(buf, m);
    std::vector<double> out(count_);
    for (std::size_t j = 0; j < count_; ++j) out[j] = buf.data[j][0];
    return out;
}

CholeskySampler::CholeskySampler(const Eigen::MatrixXd& covariance) {
    const Eigen::Index n = covariance.rows();
    if (n == 0 || covariance.cols() != n) throw DomainError("CholeskySampler: covariance must be square");
    Eigen::VectorXd scale(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = covariance(i, i);
        if (!(d > 0.0)) {
            std::ostringstream msg;
            msg << "CholeskySampler: non-positive variance " << d << " at index " << i;
            throw NumericalError(msg.str());
        }
        scale(i) = std::sqrt(d);
    }
    Eigen::MatrixXd corr = scale.cwiseInverse().asDiagonal() * covariance * scale.cwiseInverse().asDiagonal();
    Eigen::LLT<Eigen::MatrixXd> llt(corr);
    if (llt.info() != Eigen::Success) {
        corr.diagonal().array() += 1e-12;
        llt.compute(corr);
        jittered_ = true;
        if (llt.info() != Eigen::Success) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr, Eigen::EigenvaluesOnly);
            std::ostringstream msg;
            msg << "CholeskySampler: covariance not positive definite after jitter 1e-12 (dimension "
                << n << ", smallest eigenvalue of the unit-diagonal matrix " << eig.eigenvalues()(0)
                << ")";
            throw NumericalError(msg.str());
        }
    }
    factor_ = scale.asDiagonal() * Eigen::MatrixXd(llt.matrixL());
}

std::vector<double> CholeskySampler::sample(Rng& rng) const {
    const Eigen::Index n = factor_.rows();
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
    const Eigen::VectorXd x = factor_.triangularView<Eigen::Lower>() * z;
    return {x.data(), x.data() + n};
}

NoiseIncrements sample_fgn_uniform(Hurst H, std::size_t count, double step, std::uint64_t seed) {
    if (count == 0) throw DomainError("sample_fgn_uniform: count must be >= 1");
    CirculantSampler sampler([H, step](std::size_t k) { return fgn_autocovariance(H, k, step); }, count);
    Rng rng(seed);
    NoiseIncrements out;
    out.values = sampler.sample(rng);
    out.grid = TimeGrid::uniform(0.0, step, count + 1);
    out.seed = seed;
    return out;
}

namespace {

Eigen::MatrixXd increment_covariance(Hurst H, const std::vector<double>& edges) {
    const Eigen::Index n = static_cast<Eigen::Index>(edges.size()) - 1;
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double c = fbm_increment_covariance(H, edges[j], edges[j + 1], edges[i], edges[i + 1]);
            cov(i, j) = c;
            cov(j, i) = c;
        }
    }
    return cov;
}

std::vector<double> edges_of(const TimeGrid& grid, bool leading) {
    std::vector<double> edges;
    edges.reserve(grid.size() + 1);
    if (leading) edges.push_back(0.0);
    edges.insert(edges.end(), grid.points.begin(), grid.points.end());
    return edges;
}

}  // namespace

NonuniformFbmSampler::NonuniformFbmSampler(Hurst H, const TimeGrid& grid, std::size_t cap) {
    grid.validate();
    if (grid.size() > cap) throw DomainError("NonuniformFbmSampler: grid exceeds the Cholesky size cap");
    leading_ = grid.points.front() > 0.0;
    if (grid.size() == 1 && !leading_) return;
    sampler_.emplace(increment_covariance(H, edges_of(grid, leading_)));
}

std::vector<double> NonuniformFbmSampler::sample_increments(Rng& rng) const {
    if (!sampler_) return {};
    return sampler_->sample(rng);
}

std::vector<double> NonuniformFbmSampler::sample_values(Rng& rng) const {
    const std::vector<double> inc = sample_increments(rng);
    std::vector<double> values;
    values.reserve(inc.size() + 1);
    if (!leading_) values.push_back(0.0);
    double level = 0.0;
    for (double d : inc) {
        level += d;
        values.push_back(level);
    }
    return values;
}

std::vector<double> sample_fbm_nonuniform(Hurst H, const TimeGrid& grid, std::uint64_t seed) {
    NonuniformFbmSampler sampler(H, grid);
    Rng rng(seed);
    return sampler.sample_values(rng);
}

}  // namespace pfou
