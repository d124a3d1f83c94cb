#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "pfou/errors.hpp"

#include "pfou/asymptotics.hpp"
#include "pfou/estimator.hpp"
#include "pfou/mc_harness.hpp"
#include "pfou/sde.hpp"

namespace pfou {

/// Artifact version embedded in every output file.
const char* version();

using ConfigMap = std::map<std::string, std::string>;

/// Malformed or inconsistent input file.
class FormatError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Header lines `# key=value` (version, path provenance, then `config.<key>` for
/// the resolved config), the column row `t,x,dnoise`, then n m + 1 data rows.
/// dnoise on row k is the driving increment over [t_{k-1}, t_k]; row 0 holds 0.
void write_path_csv(std::ostream& out, const SamplePath& path, const ConfigMap& config = {});
void write_path_csv(const std::filesystem::path& file, const SamplePath& path, const ConfigMap& config = {});

/// Throws FormatError for malformed rows, a non-uniform grid, a step that does
/// not divide the unit period, a partial last period or x_0 != 0. Header
/// provenance is optional; without it kind/H/... stay at their defaults.
SamplePath read_path_csv(std::istream& in);
SamplePath read_path_csv(const std::filesystem::path& file);

nlohmann::json to_json(const Eigen::VectorXd& v);
nlohmann::json to_json(const Eigen::MatrixXd& m);
nlohmann::json to_json(const Estimate& e, const PathMeta& meta, const ConfigMap& config = {});
nlohmann::json to_json(const AsymptoticCov& c, const ConfigMap& config = {},
                       const std::optional<Sigma2Estimate>& sigma2 = std::nullopt);
nlohmann::json to_json(const McReport& r, const ConfigMap& config = {});

/// One row per replication (consistency, clt) or per covariance entry (noise check).
void write_report_csv(std::ostream& out, const McReport& r, const ConfigMap& config = {});
/// Plain-text verdict table; every verdict shows its statistic and threshold.
void write_verdict(std::ostream& out, const McReport& r);

}  // namespace pfou
