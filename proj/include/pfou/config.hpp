#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pfou/errors.hpp"
#include "pfou/mc_harness.hpp"

namespace pfou {

/// Invalid configuration (unknown key, malformed value, failed validation).
class ConfigError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

/// Strict `key = value` file: one pair per line, `#` starts a comment, blank
/// lines ignored, duplicate keys rejected. Every value that is read (or
/// defaulted) is recorded in canonical form and can be replayed via resolved().
class KeyValueConfig {
public:
    KeyValueConfig() = default;
    static KeyValueConfig parse(std::istream& in, const std::string& source = "<config>");
    static KeyValueConfig load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::optional<std::string>& fallback = std::nullopt) const;
    double get_double(const std::string& key, const std::optional<double>& fallback = std::nullopt) const;
    int get_int(const std::string& key, const std::optional<int>& fallback = std::nullopt) const;
    std::uint64_t get_u64(const std::string& key, const std::optional<std::uint64_t>& fallback = std::nullopt) const;
    bool get_bool(const std::string& key, const std::optional<bool>& fallback = std::nullopt) const;
    std::vector<double> get_doubles(const std::string& key) const;
    std::vector<int> get_ints(const std::string& key) const;
    /// Records a derived value in the resolved view.
    void note(const std::string& key, const std::string& value) const { resolved_[key] = value; }

    /// Throws ConfigError naming every key not in `allowed`.
    void require_known(const std::set<std::string>& allowed) const;

    const std::map<std::string, std::string>& raw() const noexcept { return values_; }
    /// Keys read so far with their canonical values, sorted by key.
    const std::map<std::string, std::string>& resolved() const noexcept { return resolved_; }

private:
    const std::string& require(const std::string& key) const;

    std::map<std::string, std::string> values_;
    mutable std::map<std::string, std::string> resolved_;
};

/// Keys shared by every subcommand that describes a model.
extern const std::set<std::string> kModelKeys;
std::set<std::string> simulate_keys();
std::set<std::string> estimate_keys();
std::set<std::string> asymptotics_keys();
std::set<std::string> mc_keys();

/// kind, H, alpha, mu, p, basis, basis_files.
ModelSpec model_from_config(const KeyValueConfig& cfg);
BasisSpec basis_from_config(const KeyValueConfig& cfg, std::optional<std::size_t> p_hint = std::nullopt);
SimulationOptions simulation_from_config(const KeyValueConfig& cfg);

struct SimulateRequest {
    ModelSpec model;
    int n = 0;
    int m = 0;
    std::uint64_t seed = 0;
    SimulationOptions simulation{};
};
SimulateRequest simulate_request(const KeyValueConfig& cfg);

struct EstimateRequest {
    std::optional<std::filesystem::path> input;
    std::optional<std::size_t> p;
    std::string basis = "fourier";
    std::vector<std::filesystem::path> basis_files;
    StochasticIntegral integral = StochasticIntegral::divergence;
    std::optional<double> trace_alpha;  ///< unset: self-consistent
    std::optional<ModelKind> kind;      ///< override of the file provenance
    std::optional<double> H;
};
EstimateRequest estimate_request(const KeyValueConfig& cfg);

struct AsymptoticsRequest {
    ModelSpec model;
    SigmaForm sigma_form = SigmaForm::product_of_means;
    std::optional<double> sigma2{};  ///< second kind: fixed sigma^2 instead of Monte Carlo
    int sigma2_replications = 500;
    int sigma2_n = 400;
    int sigma2_m = 50;
    std::uint64_t seed = 1;
    double lattice_tol = 1e-10;
};
AsymptoticsRequest asymptotics_request(const KeyValueConfig& cfg);

ExperimentPlan plan_from_config(const KeyValueConfig& cfg);

}  // namespace pfou
