#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "pfou/asymptotics.hpp"
#include "pfou/config.hpp"
#include "pfou/estimator.hpp"
#include "pfou/fgn.hpp"
#include "pfou/io.hpp"
#include "pfou/mc_harness.hpp"
#include "pfou/sde.hpp"

namespace py = pybind11;
using namespace pfou;

namespace {

ModelSpec make_model(const std::string& kind, double H, double alpha, const std::vector<double>& mu) {
    Eigen::VectorXd m(static_cast<Eigen::Index>(mu.size()));
    for (std::size_t i = 0; i < mu.size(); ++i) m(static_cast<Eigen::Index>(i)) = mu[i];
    ModelSpec model{DriftParams{m, alpha, Hurst(H)}, BasisSpec::fourier(mu.size()), parse_model_kind(kind)};
    model.validate();
    return model;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

py::dict path_dict(const SamplePath& p) {
    std::vector<double> dn(p.x.size(), 0.0);
    std::copy(p.noise_increments.begin(), p.noise_increments.end(), dn.begin() + 1);
    py::dict d;
    d["t"] = to_vector(p.grid.points);
    d["x"] = to_vector(p.x);
    d["dnoise"] = to_vector(dn);
    d["kind"] = to_string(p.meta.kind);
    d["H"] = p.meta.H;
    d["n"] = p.meta.n;
    d["m"] = p.meta.m;
    d["seed"] = p.meta.seed;
    d["scheme"] = p.meta.scheme;
    return d;
}

py::object loads(const std::string& text) { return py::module_::import("json").attr("loads")(text); }

}  // namespace

PYBIND11_MODULE(_core, mod) {
    mod.doc() = "Periodic-mean fractional OU processes: simulation and least squares drift estimation";
    mod.attr("__version__") = version();

    py::register_exception<DomainError>(mod, "DomainError", PyExc_ValueError);
    py::register_exception<NumericalError>(mod, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<ExperimentError>(mod, "ExperimentError", PyExc_RuntimeError);

    mod.def("fgn_autocovariance", [](double H, std::size_t lag, double step) {
        return fgn_autocovariance(Hurst(H), lag, step);
    }, py::arg("H"), py::arg("lag"), py::arg("step") = 1.0);

    mod.def("sample_fgn", [](double H, std::size_t count, double step, std::uint64_t seed) {
        return to_vector(sample_fgn_uniform(Hurst(H), count, step, seed).values);
    }, py::arg("H"), py::arg("count"), py::arg("step") = 1.0, py::arg("seed") = 1);

    mod.def("quad_singular", [](const std::function<double(double)>& f, const std::function<double(double)>& g,
                                double H) { return quad_singular(f, g, Hurst(H)); },
            py::arg("f"), py::arg("g"), py::arg("H"));

    mod.def("simulate", [](const std::string& kind, double H, double alpha, const std::vector<double>& mu, int n, int m,
                           std::uint64_t seed, bool noise, const std::string& y1_method) {
        SimulationOptions opt;
        opt.noise = noise ? NoiseMode::on : NoiseMode::off;
        opt.y1_method = parse_y1_method(y1_method);
        const PathSimulator sim(make_model(kind, H, alpha, mu), n, m, opt);
        SamplePath p;
        {
            py::gil_scoped_release release;
            p = sim.simulate(seed);
        }
        return path_dict(p);
    }, py::arg("kind"), py::arg("H"), py::arg("alpha"), py::arg("mu"), py::arg("n"), py::arg("m"), py::arg("seed") = 1,
       py::arg("noise") = true, py::arg("y1_method") = "stationary_cov");

    mod.def("read_path", [](const std::string& file) { return path_dict(read_path_csv(file)); }, py::arg("file"));

    mod.def("estimate", [](const Eigen::VectorXd& x, int m, const std::string& kind, double H, std::size_t p,
                           const std::string& integral, std::optional<double> trace_alpha) {
        if (m < 2 || x.size() < 2 || (x.size() - 1) % m != 0)
            throw DomainError("partial period: len(x) - 1 must be a positive multiple of m");
        SamplePath path;
        path.meta.m = m;
        path.meta.n = static_cast<int>((x.size() - 1) / m);
        path.meta.kind = parse_model_kind(kind);
        path.meta.H = Hurst(H).value();
        path.grid = TimeGrid::uniform(0.0, 1.0 / m, static_cast<std::size_t>(x.size()));
        path.x.assign(x.data(), x.data() + x.size());
        path.validate();
        EstimatorOptions opt;
        opt.integral = parse_stochastic_integral(integral);
        opt.trace_alpha = trace_alpha;
        const Estimate e = estimate(path, BasisSpec::fourier(p), opt);
        return loads(to_json(e, path.meta).dump());
    }, py::arg("x"), py::arg("m"), py::arg("kind"), py::arg("H"), py::arg("p"), py::arg("integral") = "divergence",
       py::arg("trace_alpha") = py::none());

    mod.def("limit_matrix", [](const std::string& kind, double H, double alpha, const std::vector<double>& mu) {
        const ModelSpec model = make_model(kind, H, alpha, mu);
        const LimitMatrix l = model.kind == ModelKind::first_kind ? matrix_M(model.drift, model.basis)
                                                                  : matrix_M_bar(model.drift, model.basis);
        py::dict d;
        d["M"] = l.M;
        d["Lambda"] = l.Lambda;
        d[model.kind == ModelKind::first_kind ? "gamma" : "eta"] = l.gamma;
        d["stationary_var"] = l.stationary_var;
        return d;
    }, py::arg("kind"), py::arg("H"), py::arg("alpha"), py::arg("mu"));

    mod.def("stationary_variance", [](const std::string& kind, double H, double alpha) {
        return parse_model_kind(kind) == ModelKind::first_kind ? first_kind_stationary_variance(Hurst(H), alpha)
                                                               : zbar_variance(Hurst(H), alpha);
    }, py::arg("kind"), py::arg("H"), py::arg("alpha"));

    mod.def("run_config", [](const std::string& text, int threads) {
        std::istringstream in(text);
        const KeyValueConfig cfg = KeyValueConfig::parse(in, "<string>");
        ExperimentPlan plan = plan_from_config(cfg);
        plan.threads = threads;
        McReport report;
        {
            py::gil_scoped_release release;
            report = run_experiment(plan);
        }
        return loads(to_json(report, cfg.resolved()).dump());
    }, py::arg("config"), py::arg("threads") = 1,
       "Runs a Monte Carlo experiment described by key = value text; returns the JSON summary as a dict.");
}
