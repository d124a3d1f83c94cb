// pfou: simulate | estimate | asymptotics | mc
//
// Exit codes: 0 success or PASS, 1 validation error, 2 runtime failure,
// 3 experiment FAIL.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pfou/config.hpp"
#include "pfou/io.hpp"

namespace fs = std::filesystem;
using namespace pfou;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kRuntime = 2;
constexpr int kFail = 3;

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    int threads = 1;
    std::string format;
    std::string input;
};

KeyValueConfig load_config(const Flags& f) {
    KeyValueConfig cfg = f.config.empty() ? KeyValueConfig{} : KeyValueConfig::load(f.config);
    if (f.seed) cfg.set("seed", std::to_string(*f.seed));
    if (!f.input.empty()) cfg.set("input", f.input);
    return cfg;
}

void write_file(const fs::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + file.string());
}

fs::path prepare_out_dir(const Flags& f) {
    const fs::path dir = f.out_dir.empty() ? fs::path(".") : fs::path(f.out_dir);
    fs::create_directories(dir);
    return dir;
}

/// stdout, and a file in --out-dir when one is given.
void emit(const Flags& f, const std::string& stem, const std::string& text) {
    std::cout << text;
    if (!f.out_dir.empty()) write_file(prepare_out_dir(f) / (stem + "." + f.format), text);
}

std::string matrix_csv(const Eigen::MatrixXd& m) {
    std::string s;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) s += (j ? "," : "") + format_double(m(i, j));
        s += '\n';
    }
    return s;
}

std::string header_csv(const ConfigMap& config) {
    std::string s = std::string("# version=") + version() + "\n";
    for (const auto& [k, v] : config) s += "# config." + k + "=" + v + "\n";
    return s;
}

int cmd_simulate(const Flags& f) {
    if (f.format == "json") throw ConfigError("simulate writes CSV only");
    const KeyValueConfig cfg = load_config(f);
    const SimulateRequest req = simulate_request(cfg);
    const PathSimulator sim(req.model, req.n, req.m, req.simulation);
    const SamplePath path = sim.simulate(req.seed);
    const fs::path file = prepare_out_dir(f) / "path.csv";
    write_path_csv(file, path, cfg.resolved());
    std::cerr << "wrote " << file.string() << " (" << path.x.size() << " rows)\n";
    return kOk;
}

int cmd_estimate(const Flags& f) {
    const KeyValueConfig cfg = load_config(f);
    const EstimateRequest req = estimate_request(cfg);
    if (!req.input) throw ConfigError("estimate needs an input path (--input or key 'input')");
    SamplePath path = read_path_csv(*req.input);
    std::vector<std::string> warnings;

    if (req.kind) {
        if (path.meta.scheme.size() && path.meta.kind != *req.kind)
            warnings.push_back(std::string("kind mismatch: config ") + to_string(*req.kind) + ", path provenance " +
                               to_string(path.meta.kind));
        path.meta.kind = *req.kind;
    }
    if (req.H) {
        if (path.meta.H != 0.0 && path.meta.H != *req.H)
            warnings.push_back("H mismatch: config " + format_double(*req.H) + ", path provenance " +
                               format_double(path.meta.H));
        path.meta.H = *req.H;
    }
    if (path.meta.H == 0.0) throw ConfigError("H is neither in the config nor in the path header");
    Hurst(path.meta.H);

    const std::size_t p_file = path.meta.mu.size();
    std::optional<BasisSpec> basis;
    if (req.basis == "custom") {
        if (req.basis_files.empty()) throw ConfigError("basis = custom needs basis_files");
        basis = BasisSpec::load_tables(req.basis_files);
        if (req.p && *req.p != basis->size()) throw ConfigError("key 'p' does not match the number of basis files");
    } else {
        const std::size_t p = req.p ? *req.p : p_file;
        if (p == 0) throw ConfigError("p is neither in the config nor in the path header");
        basis = BasisSpec::fourier(p);
    }
    if (p_file != 0 && p_file != basis->size())
        warnings.push_back("basis mismatch: estimating with p = " + std::to_string(basis->size()) +
                           " but the path was generated with p = " + std::to_string(p_file));
    cfg.note("p", std::to_string(basis->size()));

    EstimatorOptions opt;
    opt.integral = req.integral;
    opt.trace_alpha = req.trace_alpha;
    Estimate e = estimate(path, *basis, opt);
    e.warnings.insert(e.warnings.begin(), warnings.begin(), warnings.end());
    for (const auto& w : e.warnings) std::cerr << "warning: " << w << '\n';

    if (f.format == "csv") {
        std::string s = header_csv(cfg.resolved()) + "name,value\n";
        for (Eigen::Index i = 0; i + 1 < e.theta_hat.size(); ++i)
            s += "mu_" + std::to_string(i + 1) + "," + format_double(e.theta_hat(i)) + "\n";
        s += "alpha," + format_double(e.theta_hat(e.theta_hat.size() - 1)) + "\n";
        emit(f, "estimate", s);
    } else {
        emit(f, "estimate", to_json(e, path.meta, cfg.resolved()).dump(2) + "\n");
    }
    return kOk;
}

int cmd_asymptotics(const Flags& f) {
    const KeyValueConfig cfg = load_config(f);
    const AsymptoticsRequest req = asymptotics_request(cfg);
    AsymptoticCov cov;
    std::optional<Sigma2Estimate> s2;
    if (req.model.kind == ModelKind::first_kind) {
        cov = asymptotic_cov_first(req.model.drift, req.model.basis, req.sigma_form);
    } else {
        double sigma2 = 0.0, se = 0.0;
        if (req.sigma2) {
            sigma2 = *req.sigma2;
        } else {
            s2 = estimate_sigma2_mc(req.model.drift.H, req.model.drift.alpha, req.sigma2_replications, req.sigma2_n,
                                    req.sigma2_m, req.seed, f.threads);
            sigma2 = s2->value;
            se = s2->se;
        }
        cov = asymptotic_cov_second(req.model.drift, req.model.basis, sigma2, se, req.lattice_tol);
    }
    for (const auto& w : cov.warnings) std::cerr << "warning: " << w << '\n';
    if (f.format == "csv") {
        emit(f, "asymptotics", header_csv(cfg.resolved()) + matrix_csv(cov.product));
    } else {
        emit(f, "asymptotics", to_json(cov, cfg.resolved(), s2).dump(2) + "\n");
    }
    return kOk;
}

int cmd_mc(const Flags& f) {
    const KeyValueConfig cfg = load_config(f);
    ExperimentPlan plan = plan_from_config(cfg);
    plan.threads = f.threads;
    const auto start = std::chrono::steady_clock::now();
    McReport report = run_experiment(plan);
    report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const fs::path dir = prepare_out_dir(f);
    const ConfigMap& resolved = cfg.resolved();
    std::ostringstream csv, verdict;
    write_report_csv(csv, report, resolved);
    write_file(dir / "report.csv", csv.str());
    write_file(dir / "report.json", to_json(report, resolved).dump(2) + "\n");
    write_verdict(verdict, report);
    write_file(dir / "verdict.txt", verdict.str());
    std::cout << verdict.str();
    std::cerr << "runtime: " << report.runtime_seconds << " s\n";
    return report.pass ? kOk : kFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Least squares drift estimation for periodic fractional OU processes"};
    app.set_version_flag("--version", std::string(version()));
    app.require_subcommand(1);

    Flags flags;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", flags.config, "key = value config file")->check(CLI::ExistingFile);
        sub->add_option("--out-dir", flags.out_dir, "directory for output files");
        sub->add_option("--threads", flags.threads, "worker cap; results do not depend on it")
            ->check(CLI::PositiveNumber);
        sub->add_option("--format", flags.format, "output format")->check(CLI::IsMember({"csv", "json"}));
    };
    auto* simulate = app.add_subcommand("simulate", "simulate one path and write it as CSV");
    add_common(simulate);
    simulate->add_option("--seed", flags.seed, "override the config seed");
    auto* est = app.add_subcommand("estimate", "least squares estimate from a path CSV");
    add_common(est);
    est->add_option("--input", flags.input, "path CSV");
    auto* asym = app.add_subcommand("asymptotics", "limiting covariance");
    add_common(asym);
    asym->add_option("--seed", flags.seed, "override the sigma^2 Monte Carlo seed");
    auto* mc = app.add_subcommand("mc", "Monte Carlo experiment");
    add_common(mc);
    mc->add_option("--seed", flags.seed, "override the base seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kInvalid;
    }
    if (flags.format.empty()) flags.format = simulate->parsed() ? "csv" : "json";

    try {
        if (simulate->parsed()) return cmd_simulate(flags);
        if (est->parsed()) return cmd_estimate(flags);
        if (asym->parsed()) return cmd_asymptotics(flags);
        return cmd_mc(flags);
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
}
