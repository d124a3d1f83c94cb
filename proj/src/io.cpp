#include "pfou/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "pfou/config.hpp"

#ifndef PFOU_VERSION
#define PFOU_VERSION "0.0.0"
#endif

namespace pfou {

using nlohmann::json;

const char* version() { return PFOU_VERSION; }

namespace {

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
    return out;
}

std::vector<double> split_doubles(const std::string& s, const std::string& what) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto next = std::min(s.find(',', pos), s.size());
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + next, v);
        if (ec != std::errc() || ptr != s.data() + next) throw FormatError("bad value in header field " + what);
        out.push_back(v);
        pos = next + 1;
    }
    return out;
}

void write_header(std::ostream& out, const ConfigMap& config) {
    out << "# version=" << version() << '\n';
    for (const auto& [k, v] : config) out << "# config." << k << '=' << v << '\n';
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class T>
T parse_int_field(const std::string& key, const std::string& text) {
    T v{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) throw FormatError("bad header field " + key);
    return v;
}

json config_json(const ConfigMap& config) {
    json c = json::object();
    for (const auto& [k, v] : config) c[k] = v;
    return c;
}

}  // namespace

void write_path_csv(std::ostream& out, const SamplePath& path, const ConfigMap& config) {
    path.validate();
    const PathMeta& m = path.meta;
    write_header(out, config);
    out << "# kind=" << to_string(m.kind) << '\n'
        << "# H=" << format_double(m.H) << '\n'
        << "# alpha=" << format_double(m.alpha) << '\n'
        << "# mu=" << join_doubles(m.mu) << '\n'
        << "# p=" << m.mu.size() << '\n'
        << "# basis=" << m.basis << '\n'
        << "# seed=" << m.seed << '\n'
        << "# n=" << m.n << '\n'
        << "# m=" << m.m << '\n'
        << "# scheme=" << m.scheme << '\n';
    out << "t,x,dnoise\n";
    std::string line;
    for (std::size_t k = 0; k < path.x.size(); ++k) {
        const double dn = (k == 0 || path.noise_increments.empty()) ? 0.0 : path.noise_increments[k - 1];
        line = format_double(path.grid.points[k]);
        line += ',';
        line += format_double(path.x[k]);
        line += ',';
        line += format_double(dn);
        line += '\n';
        out << line;
    }
}

void write_path_csv(const std::filesystem::path& file, const SamplePath& path, const ConfigMap& config) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    write_path_csv(out, path, config);
    if (!out) throw std::runtime_error("write failed for " + file.string());
}

SamplePath read_path_csv(std::istream& in) {
    std::map<std::string, std::string> header;
    std::string line;
    int lineno = 0;
    bool have_columns = false;
    std::vector<double> t, x, dn;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (have_columns) throw FormatError("line " + std::to_string(lineno) + ": comment after data");
            const auto eq = line.find('=');
            if (eq != std::string::npos) {
                std::string key = line.substr(1, eq - 1);
                key.erase(0, key.find_first_not_of(' '));
                header[key] = line.substr(eq + 1);
            }
            continue;
        }
        if (!have_columns) {
            if (line != "t,x,dnoise" && line != "t,x")
                throw FormatError("line " + std::to_string(lineno) + ": expected column row 't,x,dnoise'");
            have_columns = true;
            continue;
        }
        double vals[3] = {0.0, 0.0, 0.0};
        int count = 0;
        const char* p = line.data();
        const char* end = p + line.size();
        while (true) {
            if (count == 3) throw FormatError("line " + std::to_string(lineno) + ": too many columns");
            auto [ptr, ec] = std::from_chars(p, end, vals[count]);
            if (ec != std::errc() || !std::isfinite(vals[count]))
                throw FormatError("line " + std::to_string(lineno) + ": malformed number");
            ++count;
            if (ptr == end) break;
            if (*ptr != ',') throw FormatError("line " + std::to_string(lineno) + ": malformed row");
            p = ptr + 1;
        }
        if (count < 2) throw FormatError("line " + std::to_string(lineno) + ": expected at least t and x");
        t.push_back(vals[0]);
        x.push_back(vals[1]);
        dn.push_back(vals[2]);
    }
    if (!have_columns) throw FormatError("missing column row 't,x,dnoise'");
    if (t.size() < 3) throw FormatError("path has fewer than 3 rows");
    if (t[0] != 0.0) throw FormatError("grid must start at t = 0");
    if (x[0] != 0.0) throw FormatError("path must start at x = 0");

    const double step = t[1] - t[0];
    if (!(step > 0.0)) throw FormatError("non-uniform grid: times must increase");
    for (std::size_t k = 1; k < t.size(); ++k) {
        const double expected = static_cast<double>(k) * step;
        if (std::abs(t[k] - expected) > 1e-9 * std::max(1.0, expected))
            throw FormatError("non-uniform grid at row " + std::to_string(k));
    }
    const double per = 1.0 / step;
    const long m = std::lround(per);
    if (m < 2 || std::abs(per - static_cast<double>(m)) > 1e-6 * per)
        throw FormatError("grid step does not divide the unit period");
    if (auto it = header.find("m"); it != header.end() && parse_int_field<long>("m", it->second) != m)
        throw FormatError("header m does not match the grid step");
    const std::size_t steps = t.size() - 1;
    if (steps % static_cast<std::size_t>(m) != 0)
        throw FormatError("partial period: " + std::to_string(steps) + " steps is not a multiple of m = " +
                          std::to_string(m));

    SamplePath path;
    PathMeta& meta = path.meta;
    meta.m = static_cast<int>(m);
    meta.n = static_cast<int>(steps / static_cast<std::size_t>(m));
    if (auto it = header.find("n"); it != header.end() && parse_int_field<long>("n", it->second) != meta.n)
        throw FormatError("partial period: header n = " + it->second + " but the file holds " +
                          std::to_string(meta.n) + " periods");
    if (auto it = header.find("kind"); it != header.end()) {
        try {
            meta.kind = parse_model_kind(it->second);
        } catch (const std::exception& e) {
            throw FormatError(std::string("header kind: ") + e.what());
        }
    }
    if (auto it = header.find("H"); it != header.end()) meta.H = split_doubles(it->second, "H").at(0);
    if (auto it = header.find("alpha"); it != header.end()) meta.alpha = split_doubles(it->second, "alpha").at(0);
    if (auto it = header.find("mu"); it != header.end() && !it->second.empty()) meta.mu = split_doubles(it->second, "mu");
    if (auto it = header.find("basis"); it != header.end()) meta.basis = it->second;
    if (auto it = header.find("seed"); it != header.end()) meta.seed = parse_int_field<std::uint64_t>("seed", it->second);
    if (auto it = header.find("scheme"); it != header.end()) meta.scheme = it->second;

    path.grid = TimeGrid::uniform(0.0, 1.0 / static_cast<double>(m), t.size());
    path.x = std::move(x);
    path.noise_increments.assign(dn.begin() + 1, dn.end());
    path.validate();
    return path;
}

SamplePath read_path_csv(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw FormatError("cannot open " + file.string());
    return read_path_csv(in);
}

json to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
    return out;
}

json to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
        out.push_back(std::move(row));
    }
    return out;
}

json to_json(const Estimate& e, const PathMeta& meta, const ConfigMap& config) {
    json j;
    j["version"] = version();
    j["config"] = config_json(config);
    j["kind"] = to_string(meta.kind);
    j["H"] = number(meta.H);
    j["n"] = e.design.n;
    j["m"] = e.design.m;
    j["p"] = e.design.a.size();
    j["theta_hat"] = to_json(e.theta_hat);
    j["P"] = to_json(e.P);
    j["G"] = to_json(e.design.G);
    j["a"] = to_json(e.design.a);
    j["b"] = number(e.design.b);
    j["Lambda"] = to_json(e.design.Lambda);
    j["gamma"] = number(e.design.gamma);
    j["integral"] = to_string(e.integral);
    if (e.integral == StochasticIntegral::divergence) {
        j["trace"] = number(e.trace);
        j["trace_alpha"] = number(e.trace_alpha);
    }
    j["crosscheck"] = number(e.crosscheck);
    if (e.residual) j["residual"] = to_json(*e.residual);
    j["source"] = {{"seed", meta.seed}, {"scheme", meta.scheme}, {"alpha", number(meta.alpha)},
                   {"mu", meta.mu}, {"basis", meta.basis}};
    std::vector<std::string> warnings = e.design.warnings;
    warnings.insert(warnings.end(), e.warnings.begin(), e.warnings.end());
    j["warnings"] = warnings;
    return j;
}

json to_json(const AsymptoticCov& c, const ConfigMap& config, const std::optional<Sigma2Estimate>& sigma2) {
    json j;
    j["version"] = version();
    j["config"] = config_json(config);
    j["kind"] = to_string(c.kind);
    j["H"] = number(c.H);
    j["M"] = to_json(c.M);
    j["Sigma"] = to_json(c.Sigma);
    j["covariance"] = to_json(c.product);
    j["Lambda"] = to_json(c.Lambda);
    j[c.kind == ModelKind::first_kind ? "gamma" : "eta"] = number(c.gamma);
    j["stationary_var"] = number(c.stationary_var);
    j["quad_tol"] = number(c.quad_tol);
    j["truncation_order"] = c.truncation_order;
    j["sigma_form"] = c.sigma_form;
    if (c.kind == ModelKind::second_kind) {
        j["sigma2"] = number(c.sigma2);
        j["sigma2_se"] = number(c.sigma2_se);
        if (sigma2) {
            j["sigma2_mc"] = {{"value", number(sigma2->value)},         {"se", number(sigma2->se)},
                              {"value_2n", number(sigma2->value_2n)},   {"se_2n", number(sigma2->se_2n)},
                              {"replications", sigma2->replications},   {"n", sigma2->n},
                              {"m", sigma2->m},                         {"seed", sigma2->seed},
                              {"stabilized", sigma2->stabilized}};
        }
    }
    j["warnings"] = c.warnings;
    return j;
}

json to_json(const McReport& r, const ConfigMap& config) {
    json j;
    j["version"] = version();
    j["config"] = config_json(config);
    j["experiment"] = r.experiment;
    j["pass"] = r.pass;
    j["notes"] = r.notes;
    if (r.experiment == "noise_distribution") {
        j["H"] = number(r.noise_H);
        j["n"] = r.noise_n;
        j["m"] = r.noise_m;
        j["replications"] = r.noise_replications;
        j["seed"] = r.noise_seed;
        j["functions"] = r.function_names;
        json entries = json::array();
        for (const auto& e : r.noise)
            entries.push_back({{"k", e.k},
                               {"l", e.l},
                               {"empirical", number(e.empirical)},
                               {"mc_se", number(e.mc_se)},
                               {"limit", number(e.limit)},
                               {"exact_n", number(e.exact_n)},
                               {"tolerance", number(e.tolerance)},
                               {"pass_strict", e.pass_strict},
                               {"pass", e.pass}});
        j["entries"] = entries;
        return j;
    }
    j["theta"] = to_json(r.theta);
    j["failures"] = r.failures;
    j["replications"] = r.plan ? r.plan->replications : 0;
    json horizons = json::array();
    for (const auto& h : r.horizons)
        horizons.push_back({{"n", h.n},
                            {"median_error", number(h.median_error)},
                            {"mean_error", number(h.mean_error)},
                            {"failures", h.failures}});
    j["horizons"] = horizons;
    if (r.experiment == "clt") {
        j["scale"] = number(r.scale);
        j["mean"] = to_json(r.mean);
        j["bias"] = to_json(r.bias);
        j["covariance"] = to_json(r.covariance);
        if (r.theory) j["theory"] = to_json(*r.theory, {}, r.sigma2);
        j["theory_norm"] = number(r.theory_norm);
        json comparisons = json::array();
        for (const auto& c : r.comparisons)
            comparisons.push_back({{"i", c.i},
                                   {"j", c.j},
                                   {"empirical", number(c.empirical)},
                                   {"theory", number(c.theory)},
                                   {"mc_se", number(c.mc_se)},
                                   {"relative_deviation", number(c.relative_deviation)},
                                   {"sigma2_allowance", number(c.sigma2_allowance)},
                                   {"tolerance", number(c.tolerance)},
                                   {"checked", c.checked},
                                   {"pass", c.pass}});
        j["comparisons"] = comparisons;
        json moments = json::array();
        for (const auto& m : r.moments)
            moments.push_back({{"component", m.component},
                               {"skewness", number(m.skewness)},
                               {"excess_kurtosis", number(m.excess_kurtosis)},
                               {"skewness_band", number(m.skewness_band)},
                               {"kurtosis_band", number(m.kurtosis_band)},
                               {"checked", m.checked},
                               {"pass", m.pass}});
        j["moments"] = moments;
        j["covariance_pass"] = r.covariance_pass;
        j["normality_pass"] = r.normality_pass;
    }
    return j;
}

void write_report_csv(std::ostream& out, const McReport& r, const ConfigMap& config) {
    write_header(out, config);
    out << "# experiment=" << r.experiment << '\n';
    if (r.experiment == "noise_distribution") {
        out << "k,l,f_k,f_l,empirical,mc_se,limit,exact_n,tolerance,pass\n";
        for (const auto& e : r.noise)
            out << e.k << ',' << e.l << ',' << r.function_names.at(static_cast<std::size_t>(e.k)) << ','
                << r.function_names.at(static_cast<std::size_t>(e.l)) << ',' << format_double(e.empirical) << ','
                << format_double(e.mc_se) << ',' << format_double(e.limit) << ',' << format_double(e.exact_n) << ','
                << format_double(e.tolerance) << ',' << (e.pass ? 1 : 0) << '\n';
        return;
    }
    const Eigen::Index d = r.theta.size();
    out << "replication,seed,n,status";
    for (Eigen::Index i = 0; i + 1 < d; ++i) out << ",mu_" << i + 1;
    out << ",alpha\n";
    for (const auto& row : r.rows) {
        out << row.replication << ',' << row.seed << ',' << row.n << ',' << row.status;
        for (Eigen::Index i = 0; i < d; ++i)
            out << ',' << (row.theta_hat.size() == d ? format_double(row.theta_hat(i)) : std::string("nan"));
        out << '\n';
    }
}

namespace {

std::string fixed(double v, int digits = 4) {
    std::ostringstream s;
    s << std::setprecision(digits) << std::defaultfloat << v;
    return s.str();
}

const char* verdict(bool pass) { return pass ? "PASS" : "FAIL"; }

}  // namespace

void write_verdict(std::ostream& out, const McReport& r) {
    out << "experiment: " << r.experiment << "  (pfou " << version() << ")\n";
    if (r.experiment == "noise_distribution") {
        out << "H=" << fixed(r.noise_H) << " n=" << r.noise_n << " m=" << r.noise_m
            << " replications=" << r.noise_replications << '\n';
        out << "entry           empirical   limit      exact_n    |dev|      threshold  verdict\n";
        for (const auto& e : r.noise) {
            std::ostringstream name;
            name << r.function_names.at(static_cast<std::size_t>(e.k)) << 'x'
                 << r.function_names.at(static_cast<std::size_t>(e.l));
            out << std::left << std::setw(16) << name.str() << std::setw(12) << fixed(e.empirical) << std::setw(11)
                << fixed(e.limit) << std::setw(11) << fixed(e.exact_n) << std::setw(11)
                << fixed(std::abs(e.empirical - e.limit)) << std::setw(11) << fixed(e.tolerance) << verdict(e.pass)
                << (e.pass_strict ? "" : " (outside 3 SE of the limit)") << '\n';
        }
    } else if (r.experiment == "consistency") {
        out << "n       median |err|   mean |err|   failures\n";
        for (const auto& h : r.horizons)
            out << std::left << std::setw(8) << h.n << std::setw(15) << fixed(h.median_error) << std::setw(13)
                << fixed(h.mean_error) << h.failures << '\n';
        out << "criterion: median error strictly decreasing in n\n";
    } else {
        out << "n=" << (r.plan && !r.plan->n_list.empty() ? r.plan->n_list.back() : 0) << " scale=" << fixed(r.scale)
            << " failures=" << r.failures << '\n';
        if (r.sigma2)
            out << "sigma2=" << fixed(r.sigma2->value) << " (se " << fixed(r.sigma2->se) << "), at 2n "
                << fixed(r.sigma2->value_2n) << " (se " << fixed(r.sigma2->se_2n) << ")\n";
        out << "entry  empirical   theory     |dev|      threshold  verdict\n";
        for (const auto& c : r.comparisons) {
            std::ostringstream name;
            name << '(' << c.i << ',' << c.j << ')';
            out << std::left << std::setw(7) << name.str() << std::setw(12) << fixed(c.empirical) << std::setw(11)
                << fixed(c.theory) << std::setw(11) << fixed(std::abs(c.empirical - c.theory)) << std::setw(11)
                << fixed(c.tolerance) << (c.checked ? verdict(c.pass) : "skipped (below magnitude filter)") << '\n';
        }
        out << "component  skewness   band      excess_kurt  band      verdict\n";
        for (const auto& m : r.moments)
            out << std::left << std::setw(11) << m.component << std::setw(11) << fixed(m.skewness) << std::setw(10)
                << fixed(m.skewness_band) << std::setw(13) << fixed(m.excess_kurtosis) << std::setw(10)
                << fixed(m.kurtosis_band) << (m.checked ? verdict(m.pass) : "skipped (degenerate)") << '\n';
        out << "covariance: " << verdict(r.covariance_pass) << "  normality: " << verdict(r.normality_pass) << '\n';
    }
    for (const auto& n : r.notes) out << "note: " << n << '\n';
    out << "overall: " << verdict(r.pass) << '\n';
}

}  // namespace pfou
