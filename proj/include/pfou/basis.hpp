#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <vector>

#include "pfou/fgn.hpp"

namespace pfou {

enum class BasisKind { constant_plus_fourier, custom_table };

/// A family of 1-periodic functions phi_0, ..., phi_{p-1} (0-based).
///
/// The default family is 1, sqrt2 cos(2 pi t), sqrt2 sin(2 pi t), sqrt2 cos(4 pi t), ...
/// Custom families are tabulated on the uniform grid j/K, j = 0..K-1, and
/// interpolated linearly with periodic wrap-around.
class BasisSpec {
public:
    static BasisSpec fourier(std::size_t p);
    static BasisSpec custom(std::vector<std::vector<double>> tables);
    /// One two-column (t, value) text file per function.
    static BasisSpec load_tables(const std::vector<std::filesystem::path>& files);

    std::size_t size() const noexcept { return p_; }
    BasisKind kind() const noexcept { return kind_; }
    const std::vector<std::vector<double>>& tables() const noexcept { return tables_; }

    /// phi_i(t mod 1). Throws DomainError if i >= size().
    double evaluate(std::size_t i, double t) const;
    Eigen::VectorXd evaluate_all(double t) const;

    /// Points of [0, 1) where the functions may fail to be smooth (empty for Fourier).
    std::vector<double> breakpoints() const;

    /// Integral over one period of f, using a rule adapted to the basis
    /// (composite Gauss on 16 panels x 32 nodes, or per-cell Gauss for tables).
    double period_integral(const std::function<double(double)>& f) const;

    /// Throws DomainError when the Gram matrix deviates from the identity by more than tol.
    void require_orthonormal(double tol = 1e-8) const;

    /// Whether the Gram matrix over whole periods is exactly the identity (no quadrature needed).
    bool exactly_orthonormal() const noexcept { return kind_ == BasisKind::constant_plus_fourier; }

private:
    BasisSpec() = default;

    BasisKind kind_ = BasisKind::constant_plus_fourier;
    std::size_t p_ = 0;
    std::vector<std::vector<double>> tables_;
};

/// Numerical Gram matrix over one period.
Eigen::MatrixXd gram_check(const BasisSpec& spec);

/// Drift parameters theta = (mu, alpha) together with the known Hurst index.
struct DriftParams {
    Eigen::VectorXd mu;
    double alpha;
    Hurst H;

    /// Throws DomainError if alpha <= 0 or mu has the wrong length.
    void validate(const BasisSpec& spec) const;
    /// (mu_1, ..., mu_p, alpha)
    Eigen::VectorXd theta() const;
};

/// sum_i mu_i phi_i(t)
double mean_drift(const DriftParams& params, const BasisSpec& spec, double t);

/// Periodic stationary drift response
///   h~(t) = sum_i mu_i \int_0^inf e^{-alpha u} phi_i(t - u) du,
/// evaluated through the period-folding identity
///   \int_0^inf e^{-alpha u} f(t - u) du = (1 - e^{-alpha})^{-1} \int_0^1 e^{-alpha u} f(t - u) du.
double htilde_of_t(const DriftParams& params, const BasisSpec& spec, double t);

/// Deterministic part of the solution started at 0: h(t) = h~(t) - e^{-alpha t} h~(0).
double h_of_t(const DriftParams& params, const BasisSpec& spec, double t);

/// h~ tabulated on a uniform period grid and interpolated with cubic Hermite
/// polynomials, using the exact derivative h~' = sum mu_i phi_i - alpha h~.
/// Immutable after construction.
class DriftProfile {
public:
    DriftProfile(const DriftParams& params, const BasisSpec& spec, std::size_t grid_size = 4096);

    double htilde(double t) const;
    double h(double t) const { return htilde(t) - std::exp(-alpha_ * t) * values_.front(); }
    double mean_drift(double t) const;

private:
    BasisSpec spec_;
    Eigen::VectorXd mu_;
    double alpha_;
    std::vector<double> values_;
    std::vector<double> slopes_;
};

}  // namespace pfou
