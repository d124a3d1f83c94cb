#include "pfou/basis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "pfou/errors.hpp"
#include "pfou/quadrature.hpp"

namespace pfou {

namespace {

double wrap_unit(double t) {
    double r = t - std::floor(t);
    return r >= 1.0 ? 0.0 : r;
}

// Gauss rule on each table cell; exact for products of two linear pieces.
constexpr int kCellOrder = 4;

}  // namespace

BasisSpec BasisSpec::fourier(std::size_t p) {
    if (p < 1) throw DomainError("BasisSpec: need at least one basis function");
    BasisSpec spec;
    spec.kind_ = BasisKind::constant_plus_fourier;
    spec.p_ = p;
    return spec;
}

BasisSpec BasisSpec::custom(std::vector<std::vector<double>> tables) {
    if (tables.empty()) throw DomainError("BasisSpec: need at least one basis function");
    const std::size_t cells = tables.front().size();
    if (cells < 2) throw DomainError("BasisSpec: a table needs at least two points per period");
    for (const auto& t : tables) {
        if (t.size() != cells) throw DomainError("BasisSpec: all tables must share one grid");
        for (double v : t)
            if (!std::isfinite(v)) throw DomainError("BasisSpec: table values must be finite");
    }
    BasisSpec spec;
    spec.kind_ = BasisKind::custom_table;
    spec.p_ = tables.size();
    spec.tables_ = std::move(tables);
    return spec;
}

BasisSpec BasisSpec::load_tables(const std::vector<std::filesystem::path>& files) {
    std::vector<std::vector<double>> tables;
    for (const auto& path : files) {
        std::ifstream in(path);
        if (!in) throw DomainError("cannot open basis table " + path.string());
        std::vector<double> ts;
        std::vector<double> vs;
        std::string line;
        while (std::getline(in, line)) {
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#') continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream row(line);
            double t = 0.0;
            double v = 0.0;
            if (!(row >> t >> v)) throw DomainError("malformed row in basis table " + path.string() + ": " + line);
            ts.push_back(t);
            vs.push_back(v);
        }
        const std::size_t k = ts.size();
        for (std::size_t j = 0; j < k; ++j) {
            if (std::abs(ts[j] - static_cast<double>(j) / static_cast<double>(k)) > 1e-9)
                throw DomainError("basis table " + path.string() +
                                  " must be sampled on the uniform grid j/K of [0, 1)");
        }
        tables.push_back(std::move(vs));
    }
    return custom(std::move(tables));
}

double BasisSpec::evaluate(std::size_t i, double t) const {
    if (i >= p_) throw DomainError("basis index out of range");
    const double u = wrap_unit(t);
    if (kind_ == BasisKind::constant_plus_fourier) {
        if (i == 0) return 1.0;
        const double k = static_cast<double>((i + 1) / 2);
        const double arg = 2.0 * std::numbers::pi * k * u;
        return std::numbers::sqrt2 * ((i % 2 == 1) ? std::cos(arg) : std::sin(arg));
    }
    const auto& table = tables_[i];
    const std::size_t cells = table.size();
    const double x = u * static_cast<double>(cells);
    const auto j = std::min(static_cast<std::size_t>(x), cells - 1);
    const double frac = x - static_cast<double>(j);
    return (1.0 - frac) * table[j] + frac * table[(j + 1) % cells];
}

Eigen::VectorXd BasisSpec::evaluate_all(double t) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(p_));
    for (std::size_t i = 0; i < p_; ++i) out(static_cast<Eigen::Index>(i)) = evaluate(i, t);
    return out;
}

std::vector<double> BasisSpec::breakpoints() const {
    std::vector<double> out;
    if (kind_ == BasisKind::custom_table) {
        const std::size_t cells = tables_.front().size();
        for (std::size_t j = 0; j < cells; ++j) out.push_back(static_cast<double>(j) / static_cast<double>(cells));
    }
    return out;
}

double BasisSpec::period_integral(const std::function<double(double)>& f) const {
    if (kind_ == BasisKind::constant_plus_fourier) return quad::composite_gauss(f, 0.0, 1.0, 16, 32);
    const auto cells = static_cast<int>(tables_.front().size());
    return quad::composite_gauss(f, 0.0, 1.0, cells, kCellOrder);
}

void BasisSpec::require_orthonormal(double tol) const {
    const Eigen::MatrixXd g = gram_check(*this);
    const double dev = (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
    if (dev > tol) {
        std::ostringstream msg;
        msg << "basis is not orthonormal over one period: max |Gram - I| = " << dev << " > " << tol;
        throw DomainError(msg.str());
    }
}

Eigen::MatrixXd gram_check(const BasisSpec& spec) {
    const auto p = static_cast<Eigen::Index>(spec.size());
    Eigen::MatrixXd g(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = spec.period_integral([&](double t) {
                return spec.evaluate(static_cast<std::size_t>(i), t) * spec.evaluate(static_cast<std::size_t>(j), t);
            });
            g(i, j) = v;
            g(j, i) = v;
        }
    }
    return g;
}

void DriftParams::validate(const BasisSpec& spec) const {
    if (!(alpha > 0.0)) throw DomainError("drift parameter alpha must be positive");
    if (static_cast<std::size_t>(mu.size()) != spec.size())
        throw DomainError("drift parameter mu must have one entry per basis function");
    for (Eigen::Index i = 0; i < mu.size(); ++i)
        if (!std::isfinite(mu(i))) throw DomainError("drift parameter mu must be finite");
}

Eigen::VectorXd DriftParams::theta() const {
    Eigen::VectorXd th(mu.size() + 1);
    th.head(mu.size()) = mu;
    th(mu.size()) = alpha;
    return th;
}

double mean_drift(const DriftParams& params, const BasisSpec& spec, double t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const double m = params.mu(static_cast<Eigen::Index>(i));
        if (m != 0.0) acc += m * spec.evaluate(i, t);
    }
    return acc;
}

double htilde_of_t(const DriftParams& params, const BasisSpec& spec, double t) {
    params.validate(spec);
    if (params.mu.isZero(0.0)) return 0.0;
    const double alpha = params.alpha;
    auto integrand = [&](double u) { return std::exp(-alpha * u) * mean_drift(params, spec, t - u); };
    double folded = 0.0;
    if (spec.kind() == BasisKind::constant_plus_fourier) {
        folded = quad::composite_gauss(integrand, 0.0, 1.0, 16, 32);
    } else {
        // split [0, 1] at the kinks of u -> f(t - u)
        std::vector<double> cuts{0.0, 1.0};
        for (double b : spec.breakpoints()) {
            double u = t - b;
            u -= std::floor(u);
            if (u > 0.0 && u < 1.0) cuts.push_back(u);
        }
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            if (cuts[k + 1] > cuts[k]) folded += quad::composite_gauss(integrand, cuts[k], cuts[k + 1], 1, 8);
        }
    }
    return folded / -std::expm1(-alpha);
}

double h_of_t(const DriftParams& params, const BasisSpec& spec, double t) {
    if (t < 0.0) throw DomainError("h_of_t: t must be non-negative");
    if (t == 0.0) return 0.0;
    return htilde_of_t(params, spec, t) - std::exp(-params.alpha * t) * htilde_of_t(params, spec, 0.0);
}

DriftProfile::DriftProfile(const DriftParams& params, const BasisSpec& spec, std::size_t grid_size)
    : spec_(spec), mu_(params.mu), alpha_(params.alpha) {
    params.validate(spec);
    if (grid_size < 4) throw DomainError("DriftProfile: grid too small");
    values_.resize(grid_size + 1);
    slopes_.resize(grid_size + 1);
    for (std::size_t k = 0; k < grid_size; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(grid_size);
        values_[k] = htilde_of_t(params, spec, t);
        slopes_[k] = pfou::mean_drift(params, spec, t) - alpha_ * values_[k];
    }
    values_[grid_size] = values_[0];
    slopes_[grid_size] = slopes_[0];
}

double DriftProfile::mean_drift(double t) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < spec_.size(); ++i) acc += mu_(static_cast<Eigen::Index>(i)) * spec_.evaluate(i, t);
    return acc;
}

double DriftProfile::htilde(double t) const {
    const std::size_t n = values_.size() - 1;
    const double step = 1.0 / static_cast<double>(n);
    double u = t - std::floor(t);
    if (u >= 1.0) u = 0.0;
    const double x = u * static_cast<double>(n);
    const auto k = std::min(static_cast<std::size_t>(x), n - 1);
    const double s = x - static_cast<double>(k);
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    return h00 * values_[k] + h10 * step * slopes_[k] + h01 * values_[k + 1] + h11 * step * slopes_[k + 1];
}

}  // namespace pfou
