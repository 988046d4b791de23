#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "fmlab/checkpoint.hpp"
#include "fmlab/cli/app.hpp"
#include "fmlab/core/errors.hpp"
#include "fmlab/error_bounds.hpp"
#include "fmlab/finetune.hpp"
#include "fmlab/flow_model.hpp"
#include "fmlab/metrics.hpp"
#include "fmlab/stability.hpp"
#include "fmlab/train_cfm.hpp"

namespace py = pybind11;
using namespace fmlab;

namespace {

using Json = nlohmann::json;

MlpField mlp_from(const std::string& checkpoint) { return load_mlp(Json::parse(checkpoint)); }

SolverConfig solver_from(const std::string& method, int steps, double rtol, double atol) {
  SolverConfig cfg;
  cfg.method = parse_solver_method(method);
  cfg.step_count = steps;
  cfg.rtol = rtol;
  cfg.atol = atol;
  cfg.record_trajectory = false;
  validate(cfg);
  return cfg;
}

py::dict report_dict(const ErrorBoundReport& r) {
  py::dict d;
  d["case"] = r.name;
  d["L_u"] = r.L_u;
  d["delta"] = r.delta;
  d["M"] = r.M;
  d["eps0"] = r.eps0;
  d["bound4"] = r.bound_variable;
  d["bound5"] = r.uniform ? py::object(py::float_(r.bound_uniform)) : py::object(py::none());
  d["measured"] = r.measured;
  d["pass"] = r.pass;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Flow-matching lab core: datasets, training, fine-tuning, solvers and checks";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<UnsupportedError>(m, "UnsupportedError", PyExc_NotImplementedError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  py::class_<DatasetSpec>(m, "DatasetSpec")
      .def(py::init([](const std::string& name, std::optional<double> noise, int count, double cx, double cy) {
             DatasetSpec s;
             s.name = name;
             s.noise_scale = noise ? *noise : default_noise_scale(name);
             s.sample_count = count;
             s.center_x = cx;
             s.center_y = cy;
             validate(s);
             return s;
           }),
           py::arg("name") = "gaussian", py::arg("noise_scale") = py::none(), py::arg("sample_count") = 256,
           py::arg("center_x") = 0.0, py::arg("center_y") = 0.0)
      .def_readwrite("name", &DatasetSpec::name)
      .def_readwrite("noise_scale", &DatasetSpec::noise_scale)
      .def_readwrite("sample_count", &DatasetSpec::sample_count)
      .def_readwrite("center_x", &DatasetSpec::center_x)
      .def_readwrite("center_y", &DatasetSpec::center_y);

  m.def("dataset_names", &dataset_names);
  m.def("sample_dataset", [](const DatasetSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    return sample(spec, rng);
  }, py::arg("spec"), py::arg("seed"));
  m.def("sample_source", [](int count, int dim, std::uint64_t seed) {
    Rng rng(seed);
    return sample_source(count, dim, rng);
  }, py::arg("count"), py::arg("dim"), py::arg("seed"));

  m.def("couple", [](const Mat& x0, const Mat& x1, const std::string& method) {
    const CouplingBatch b = couple(x0, x1, parse_coupling(method));
    return py::make_tuple(b.x1, b.cost, b.permutation);
  }, py::arg("x0"), py::arg("x1"), py::arg("method") = "minibatch_ot",
     "Returns (paired x1, squared-distance cost, permutation).");
  m.def("wasserstein2", &wasserstein2, py::arg("a"), py::arg("b"));

  m.def("mlp_init", [](int dim, std::vector<int> hidden, int time_features, std::uint64_t seed) {
    Rng rng(seed);
    return save_checkpoint(MlpField(MlpConfig{dim, std::move(hidden), time_features}, rng), {seed, 0, "init"}).dump();
  }, py::arg("dim") = 2, py::arg("hidden") = std::vector<int>{64, 64}, py::arg("time_features") = 8,
     py::arg("seed") = 0, "Randomly initialized field as checkpoint JSON text.");
  m.def("checkpoint_hash", [](const std::string& ck) { return checkpoint_hash(Json::parse(ck)); });

  m.def("pretrain", [](const std::string& ck, const DatasetSpec& spec, int steps, int batch_size, double lr,
                       std::uint64_t seed, const std::string& coupling) {
    MlpField f = mlp_from(ck);
    TrainConfig cfg;
    cfg.steps = steps;
    cfg.batch_size = batch_size;
    cfg.learning_rate = lr;
    cfg.seed = seed;
    cfg.coupling = parse_coupling(coupling);
    const PretrainResult r = pretrain(f, spec, cfg);
    std::vector<double> losses;
    for (const auto& rec : r.curve) losses.push_back(rec.loss);
    return py::make_tuple(r.checkpoints.back().dump(), losses, r.diverged);
  }, py::arg("checkpoint"), py::arg("spec"), py::arg("steps") = 2000, py::arg("batch_size") = 256,
     py::arg("lr") = 1e-4, py::arg("seed") = 0, py::arg("coupling") = "minibatch_ot",
     "Returns (checkpoint JSON, per-step losses, diverged).");

  m.def("finetune", [](const std::string& ck, const DatasetSpec& spec, int steps, int batch_size, double lr,
                       std::uint64_t seed, int solver_steps, std::vector<double> sigma) {
    MlpField f = mlp_from(ck);
    MleConfig cfg;
    cfg.steps = steps;
    cfg.batch_size = batch_size;
    cfg.learning_rate = lr;
    cfg.seed = seed;
    cfg.solver = SolverConfig::euler(solver_steps);
    cfg.sigma = std::move(sigma);
    const FinetuneResult r = finetune(f, spec, cfg);
    std::vector<double> losses;
    for (const auto& rec : r.curve) losses.push_back(rec.loss);
    return py::make_tuple(save_checkpoint(f, {seed, steps, "finetuned"}).dump(), losses, r.diverged);
  }, py::arg("checkpoint"), py::arg("spec"), py::arg("steps") = 200, py::arg("batch_size") = 256,
     py::arg("lr") = 5e-6, py::arg("seed") = 0, py::arg("solver_steps") = 16,
     py::arg("sigma") = std::vector<double>{1.0}, "MLE fine-tuning; returns (checkpoint JSON, losses, diverged).");

  m.def("generate", [](const std::string& ck, const Mat& x0, const std::string& method, int steps, double rtol,
                       double atol) {
    const MlpField f = mlp_from(ck);
    const Generation g = generate(FlowModel{&f}, x0, solver_from(method, steps, rtol, atol));
    return py::make_tuple(g.samples, g.mean_nfe);
  }, py::arg("checkpoint"), py::arg("x0"), py::arg("method") = "dopri5", py::arg("steps") = 100,
     py::arg("rtol") = 1e-5, py::arg("atol") = 1e-5, "Returns (samples, mean NFE per sample).");

  m.def("reconstruction_mse", [](const std::string& ck, const Mat& x0, const Mat& x1, const std::string& method,
                                 int steps) {
    const MlpField f = mlp_from(ck);
    CouplingBatch b;
    b.x0 = x0;
    b.x1 = x1;
    const Reconstruction r = reconstruction_mse(b, FlowModel{&f}, solver_from(method, steps, 1e-5, 1e-5));
    return py::make_tuple(r.mse, r.mean_nfe);
  }, py::arg("checkpoint"), py::arg("x0"), py::arg("x1"), py::arg("method") = "euler", py::arg("steps") = 16);

  m.def("mle_loss", &mle_loss_value, py::arg("final_state"), py::arg("x1"), py::arg("sigma") = std::vector<double>{1.0});
  m.def("dominance_penalty", py::overload_cast<const std::vector<Mat>&, double>(&dominance_penalty), py::arg("matrices"), py::arg("eps_A") = 1e-6);

  m.def("bound_variable_step", &bound_variable_step, py::arg("L_u"), py::arg("delta"), py::arg("M"),
        py::arg("eps0"), py::arg("taus"));
  m.def("bound_uniform_step", &bound_uniform_step, py::arg("L_u"), py::arg("delta"), py::arg("M"),
        py::arg("eps0"), py::arg("tau0"));
  m.def("gronwall_discrete", [](double lambda, const std::vector<double>& taus, const std::vector<double>& xis) {
    const GronwallResult r = gronwall_discrete(lambda, taus, xis);
    return py::make_tuple(r.bound, r.recursion);
  }, py::arg("lam"), py::arg("taus"), py::arg("xis"), "Returns (bounds, recursion values).");
  m.def("run_analytic_suite", [](std::uint64_t seed) {
    py::list out;
    for (const auto& r : run_analytic_suite(seed)) out.append(report_dict(r));
    return out;
  }, py::arg("seed") = 0);

  m.def("slope_inequality_check", [](const std::string& activation, long probes, std::uint64_t seed, double slope) {
    Rng rng(seed);
    const SlopeInequalityCheck c = slope_inequality_check(Activation::parse(activation, slope), probes, rng);
    return py::make_tuple(c.probes, c.violations, c.worst_excess);
  }, py::arg("activation"), py::arg("probes") = 100000, py::arg("seed") = 0, py::arg("slope") = 0.2,
     "Returns (probes, violations, worst excess).");

  m.def("control_synth_checkpoint", [](const Mat& A0, const std::vector<Mat>& As, const std::vector<Mat>& Ws,
                                       std::optional<Mat> G, std::optional<Mat> c,
                                       std::vector<std::string> activations) {
    if (As.size() != Ws.size()) throw DimensionError("need one W per A block");
    ControlSynthConfig cfg;
    cfg.dim = static_cast<int>(A0.rows());
    cfg.widths.clear();
    for (const auto& w : Ws) cfg.widths.push_back(static_cast<int>(w.rows()));
    for (std::size_t j = 0; j < Ws.size(); ++j)
      cfg.activations.push_back(Activation::parse(j < activations.size() ? activations[j] : "tanh"));
    ControlSynthField f = ControlSynthField::zeros(cfg);
    f.params().set_value("A0", A0);
    for (std::size_t j = 0; j < As.size(); ++j) {
      f.params().set_value(ControlSynthField::a_name(static_cast<int>(j)), As[j]);
      f.params().set_value(ControlSynthField::w_name(static_cast<int>(j)), Ws[j]);
    }
    if (G) f.params().set_value("G", *G);
    if (c) f.params().set_value("c", *c);
    return save_checkpoint(f, {}).dump();
  }, py::arg("A0"), py::arg("As"), py::arg("Ws"), py::arg("G") = py::none(), py::arg("c") = py::none(),
     py::arg("activations") = std::vector<std::string>{}, "ControlSynth residual checkpoint JSON from matrices.");

  m.def("analyze_residual", [](const std::string& residual, std::optional<std::string> certificate) {
    const ControlSynthField f = load_control_synth(Json::parse(residual));
    const StabilityCertificate cert = certificate ? certificate_from_json(Json::parse(*certificate), f)
                                                  : search_certificate(f).certificate;
    Json v = verdict_to_json(verify_certificate(f, cert));
    v["certificate"] = certificate_to_json(cert);
    return v.dump();
  }, py::arg("residual"), py::arg("certificate") = py::none(),
     "Verdict JSON for a ControlSynth checkpoint; searches a certificate when none is given.");

  m.def("cli", [](std::vector<std::string> args) {
    args.insert(args.begin(), "fmlab");
    return cli::run(args);
  }, py::arg("args"), "Runs the command-line entrypoint in-process and returns its exit code.");
}
