#include "fmlab/cli/app.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fmlab/checkpoint.hpp"
#include "fmlab/cli/config.hpp"
#include "fmlab/core/errors.hpp"
#include "fmlab/coupling.hpp"
#include "fmlab/datasets.hpp"
#include "fmlab/error_bounds.hpp"
#include "fmlab/finetune.hpp"
#include "fmlab/io.hpp"
#include "fmlab/metrics.hpp"
#include "fmlab/stability.hpp"
#include "fmlab/train_cfm.hpp"

namespace fs = std::filesystem;

namespace fmlab::cli {

namespace {

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

struct Context {
  std::string subcommand;
  Config cfg;
  std::vector<std::string> argv;
  fs::path out;
  nlohmann::json metrics = nlohmann::json::object();
  nlohmann::json seeds = nlohmann::json::object();
  std::vector<std::string> files;
  std::string checkpoint_hash;
  nlohmann::json inputs = nlohmann::json::object();
};

DatasetSpec dataset_spec(const Config& cfg) {
  DatasetSpec s;
  s.name = cfg.get_string("dataset", "name");
  const std::string noise = cfg.get_string("dataset", "noise");
  s.noise_scale = noise == "default" ? default_noise_scale(s.name) : cfg.get_double("dataset", "noise");
  s.center_x = cfg.get_double("dataset", "center_x");
  s.center_y = cfg.get_double("dataset", "center_y");
  s.sample_count = cfg.get_int("dataset", "samples");
  validate(s);
  return s;
}

MlpConfig mlp_config(const Config& cfg) {
  MlpConfig m;
  m.dim = 2;
  m.hidden = cfg.get_ints("field", "hidden");
  m.time_features = cfg.get_int("field", "time_features");
  return m;
}

ControlSynthConfig control_synth_config(const Config& cfg, int dim) {
  ControlSynthConfig c;
  c.dim = dim;
  c.widths = cfg.get_ints("field", "residual_widths");
  const double slope = cfg.get_double("field", "leaky_slope");
  auto names = cfg.get_strings("field", "residual_activations");
  if (names.size() == 1 && c.widths.size() > 1) names.resize(c.widths.size(), names.front());
  if (names.size() != c.widths.size())
    throw ConfigError("field.residual_activations needs one entry or one per residual block");
  for (const auto& n : names) c.activations.push_back(Activation::parse(n, slope));
  return c;
}

SolverConfig solver_config(const Config& cfg) {
  SolverConfig s;
  s.method = parse_solver_method(cfg.get_string("solver", "method"));
  s.step_count = cfg.get_int("solver", "steps");
  s.rtol = cfg.get_double("solver", "rtol");
  s.atol = cfg.get_double("solver", "atol");
  s.record_trajectory = false;
  validate(s);
  return s;
}

TrainConfig train_config(const Config& cfg) {
  TrainConfig t;
  t.steps = cfg.get_int("train", "steps");
  t.batch_size = cfg.get_int("train", "batch_size");
  t.learning_rate = cfg.get_double("train", "lr");
  t.grad_clip = cfg.get_double("train", "grad_clip");
  t.coupling = parse_coupling(cfg.get_string("train", "coupling"));
  t.seed = cfg.get_u64("train", "seed");
  t.checkpoint_interval = cfg.get_int("train", "checkpoint_interval");
  validate(t);
  return t;
}

MleConfig mle_config(const Config& cfg) {
  MleConfig m;
  m.steps = cfg.get_int("finetune", "steps");
  m.batch_size = cfg.get_int("finetune", "batch_size");
  m.learning_rate = cfg.get_double("finetune", "lr");
  m.grad_clip = cfg.get_double("finetune", "grad_clip");
  m.solver.method = parse_solver_method(cfg.get_string("finetune", "solver"));
  m.solver.step_count = cfg.get_int("finetune", "solver_steps");
  m.solver.record_trajectory = false;
  m.sigma = cfg.get_doubles("finetune", "sigma");
  m.horizon_T = cfg.get_double("finetune", "horizon_T");
  m.lambda_omega = cfg.get_double("finetune", "lambda_omega");
  m.eps_A = cfg.get_double("finetune", "eps_A");
  m.coupling = parse_coupling(cfg.get_string("finetune", "coupling"));
  m.repair_per_batch = cfg.get_bool("finetune", "repair_per_batch");
  m.seed = cfg.get_u64("finetune", "seed");
  validate(m);
  return m;
}

fs::path output_dir(const Config& cfg, const std::string& sub) {
  const char* env = std::getenv("FMLAB_OUTPUT_ROOT");
  const fs::path root = (env && *env) ? fs::path(env) : fs::path(cfg.get_string("output", "root"));
  std::string run = cfg.get_string("output", "run");
  if (run.empty()) run = sub;
  const fs::path dir = root / run;
  fs::create_directories(dir);
  return dir;
}

fs::path required_path(const Config& cfg, const std::string& section, const std::string& key,
                       const std::string& sub) {
  const std::string p = cfg.get_string(section, key);
  if (p.empty()) throw ConfigError(section + "." + key + " is required for " + sub);
  if (!fs::exists(p)) throw ConfigError(section + "." + key + ": file not found: " + p);
  return fs::path(p);
}

void write_file(Context& ctx, const std::string& name, const std::string& content) {
  write_text_file(ctx.out / name, content);
  ctx.files.push_back(name);
}

void write_json(Context& ctx, const std::string& name, const nlohmann::json& j) {
  write_json_file(ctx.out / name, j);
  ctx.files.push_back(name);
}

void write_manifest(Context& ctx) {
  nlohmann::json m;
  m["subcommand"] = ctx.subcommand;
  m["argv"] = ctx.argv;
  m["config"] = ctx.cfg.to_json();
  m["seeds"] = ctx.seeds;
  m["checkpoint_hash"] = ctx.checkpoint_hash;
  m["inputs"] = ctx.inputs;
  m["metrics"] = ctx.metrics;
  m["files"] = ctx.files;
  write_text_file(ctx.out / "config.ini", ctx.cfg.to_ini());
  write_json_file(ctx.out / "manifest.json", m);
}

nlohmann::json number(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

// Held-out evaluation on fresh OT-paired data drawn from dataset.seed.
nlohmann::json evaluate(const FlowModel& model, const DatasetSpec& spec, const SolverConfig& solver,
                        std::uint64_t seed) {
  const int n = spec.sample_count;
  if (n > kMaxExactCoupling)
    throw ConfigError("dataset.samples must be <= " + std::to_string(kMaxExactCoupling) +
                      " for exact evaluation");
  Rng rng(seed);
  const Mat x0 = sample_source(n, model.base->dim(), rng);
  const Mat x1 = sample(spec, rng);
  const Mat fresh = sample(spec, rng);
  const CouplingBatch batch = couple(x0, x1, CouplingMethod::minibatch_ot);
  const Reconstruction recon = reconstruction_mse(batch, model, solver);
  const Generation gen = generate(model, batch.x0, solver);
  SolverConfig path = SolverConfig::rk4(100);
  const Trajectory traj = integrate(*model.base, batch.x0, 0.0, 1.0, path);
  nlohmann::json j;
  j["w2"] = wasserstein2(gen.samples, fresh);
  j["recon_mse"] = recon.mse;
  j["mean_nfe"] = recon.mean_nfe;
  j["straightness_mean"] = mean_straightness(traj);
  return j;
}

struct LoadedModel {
  MlpField base;
  std::optional<ControlSynthField> residual;
  std::string base_hash;
  std::string residual_hash;
};

LoadedModel load_model(Context& ctx, bool with_residual) {
  const fs::path base_path = required_path(ctx.cfg, "field", "checkpoint", ctx.subcommand);
  const nlohmann::json ck = load_checkpoint_file(base_path);
  LoadedModel m{load_mlp(ck), std::nullopt, checkpoint_hash(ck), ""};
  ctx.inputs["checkpoint"] = {{"path", base_path.string()}, {"hash", m.base_hash}};
  const std::string rpath = ctx.cfg.get_string("field", "residual_checkpoint");
  if (with_residual && !rpath.empty()) {
    const fs::path p = required_path(ctx.cfg, "field", "residual_checkpoint", ctx.subcommand);
    const nlohmann::json rck = load_checkpoint_file(p);
    m.residual = load_control_synth(rck);
    m.residual_hash = checkpoint_hash(rck);
    ctx.inputs["residual_checkpoint"] = {{"path", p.string()}, {"hash", m.residual_hash}};
  }
  return m;
}

FlowModel flow_model(const LoadedModel& m, double horizon_T) {
  FlowModel f;
  f.base = &m.base;
  if (m.residual) {
    f.residual = &*m.residual;
    f.horizon_T = horizon_T;
  }
  return f;
}

int cmd_pretrain(Context& ctx) {
  const DatasetSpec spec = dataset_spec(ctx.cfg);
  const TrainConfig tc = train_config(ctx.cfg);
  Rng init = Rng(tc.seed).fork(1);
  MlpField field(mlp_config(ctx.cfg), init);
  const PretrainResult r = pretrain(field, spec, tc);
  ctx.seeds["train"] = tc.seed;
  for (std::size_t i = 0; i + 1 < r.checkpoints.size(); ++i) {
    const long step = r.checkpoints[i].at("training_step").get<long>();
    write_json(ctx, "checkpoint_step" + std::to_string(step) + ".json", r.checkpoints[i]);
  }
  nlohmann::json final_ck = r.checkpoints.empty()
                                ? save_checkpoint(field, {tc.seed, 0, "pretrained"})
                                : r.checkpoints.back();
  write_json(ctx, "checkpoint.json", final_ck);
  ctx.checkpoint_hash = checkpoint_hash(final_ck);
  std::ostringstream loss;
  write_loss_csv(loss, r.curve);
  write_file(ctx, "loss.csv", loss.str());
  ctx.metrics["final_loss"] = r.curve.empty() ? nlohmann::json(nullptr) : number(r.curve.back().loss);
  ctx.metrics["steps_completed"] = r.curve.size();
  ctx.metrics["diverged"] = r.diverged;
  if (r.diverged) {
    ctx.metrics["message"] = r.message;
    std::cerr << "pretrain diverged: " << r.message << "\n";
    return kViolation;
  }
  return kOk;
}

int cmd_finetune(Context& ctx) {
  const DatasetSpec spec = dataset_spec(ctx.cfg);
  const MleConfig mc = mle_config(ctx.cfg);
  const SolverConfig solver = solver_config(ctx.cfg);
  LoadedModel m = load_model(ctx, false);
  const std::uint64_t eval_seed = ctx.cfg.get_u64("dataset", "seed");
  ctx.seeds["finetune"] = mc.seed;
  ctx.seeds["eval"] = eval_seed;
  const nlohmann::json before = evaluate(flow_model(m, 0.0), spec, solver, eval_seed);
  const FinetuneResult r = finetune(m.base, spec, mc);
  const nlohmann::json after = evaluate(flow_model(m, 0.0), spec, solver, eval_seed);
  const nlohmann::json ck = save_checkpoint(m.base, {mc.seed, static_cast<long>(r.curve.size()), "finetuned"});
  write_json(ctx, "checkpoint.json", ck);
  ctx.checkpoint_hash = checkpoint_hash(ck);
  std::ostringstream loss;
  write_finetune_csv(loss, r.curve);
  write_file(ctx, "loss.csv", loss.str());
  ctx.metrics = {{"before", before}, {"after", after}, {"diverged", r.diverged}};
  write_json(ctx, "metrics.json", ctx.metrics);
  if (r.diverged) {
    std::cerr << "finetune diverged: " << r.message << "\n";
    return kViolation;
  }
  return kOk;
}

int cmd_finetune_residual(Context& ctx) {
  if (!ctx.cfg.get_bool("finetune", "freeze_pretrained"))
    throw UnsupportedError(
        "finetune-residual trains only the residual field; jointly updating the pretrained field "
        "is not supported (use finetune for that)");
  const DatasetSpec spec = dataset_spec(ctx.cfg);
  const MleConfig mc = mle_config(ctx.cfg);
  const SolverConfig solver = solver_config(ctx.cfg);
  LoadedModel m = load_model(ctx, false);
  Rng init = Rng(mc.seed).fork(7);
  ControlSynthField residual = ControlSynthField::identity_init(
      control_synth_config(ctx.cfg, m.base.dim()), init, ctx.cfg.get_double("field", "residual_decay"));
  const std::uint64_t eval_seed = ctx.cfg.get_u64("dataset", "seed");
  ctx.seeds["finetune"] = mc.seed;
  ctx.seeds["eval"] = eval_seed;
  const nlohmann::json before = evaluate(flow_model(m, 0.0), spec, solver, eval_seed);
  const FinetuneResult r = finetune_residual(m.base, residual, spec, mc);
  m.residual = residual;
  const nlohmann::json after = evaluate(flow_model(m, mc.horizon_T), spec, solver, eval_seed);
  const nlohmann::json ck =
      save_checkpoint(residual, {mc.seed, static_cast<long>(r.curve.size()), "residual"});
  write_json(ctx, "residual.json", ck);
  ctx.checkpoint_hash = checkpoint_hash(ck);
  std::ostringstream loss;
  write_finetune_csv(loss, r.curve);
  write_file(ctx, "loss.csv", loss.str());
  const double omega = dominance_penalty({residual.A0()}, mc.eps_A);
  ctx.metrics = {{"before", before},
                 {"after", after},
                 {"omega_A0", omega},
                 {"horizon_T", mc.horizon_T},
                 {"pretrained_hash_after", checkpoint_hash(save_checkpoint(m.base, {}))},
                 {"diverged", r.diverged}};
  write_json(ctx, "metrics.json", ctx.metrics);
  if (r.diverged) {
    std::cerr << "residual finetune diverged: " << r.message << "\n";
    return kViolation;
  }
  return kOk;
}

int cmd_sample(Context& ctx) {
  const DatasetSpec spec = dataset_spec(ctx.cfg);
  const SolverConfig solver = solver_config(ctx.cfg);
  LoadedModel m = load_model(ctx, true);
  const std::uint64_t seed = ctx.cfg.get_u64("dataset", "seed");
  ctx.seeds["sample"] = seed;
  Rng rng(seed);
  const Mat x0 = sample_source(spec.sample_count, m.base.dim(), rng);
  const Generation gen = generate(flow_model(m, ctx.cfg.get_double("finetune", "horizon_T")), x0, solver);
  std::ostringstream csv;
  write_points_csv(csv, gen.samples);
  write_file(ctx, "samples.csv", csv.str());
  ctx.checkpoint_hash = m.base_hash;
  ctx.metrics["mean_nfe"] = gen.mean_nfe;
  ctx.metrics["count"] = spec.sample_count;
  return kOk;
}

int cmd_eval(Context& ctx) {
  const DatasetSpec spec = dataset_spec(ctx.cfg);
  const SolverConfig solver = solver_config(ctx.cfg);
  LoadedModel m = load_model(ctx, true);
  const std::uint64_t seed = ctx.cfg.get_u64("dataset", "seed");
  ctx.seeds["eval"] = seed;
  const nlohmann::json j = evaluate(flow_model(m, ctx.cfg.get_double("finetune", "horizon_T")), spec, solver, seed);
  write_json(ctx, "eval.json", j);
  ctx.checkpoint_hash = m.base_hash;
  ctx.metrics = j;
  return kOk;
}

int cmd_verify_bounds(Context& ctx) {
  const std::uint64_t seed = ctx.cfg.get_u64("stability", "seed");
  ctx.seeds["bounds"] = seed;
  const auto reports = run_analytic_suite(seed);
  std::ostringstream csv;
  write_bound_csv(csv, reports);
  write_file(ctx, "bounds.csv", csv.str());
  int passed = 0;
  for (const auto& r : reports) passed += r.pass ? 1 : 0;
  ctx.metrics = {{"cases", reports.size()}, {"passed", passed}};
  std::cout << csv.str();
  if (passed != static_cast<int>(reports.size())) {
    try {
      require_all_pass(reports);
    } catch (const NumericError& e) {
      std::cerr << e.what() << "\n";
    }
    return kViolation;
  }
  return kOk;
}

struct StabilitySetup {
  ControlSynthField field;
  StabilityCertificate cert;
  bool supplied = false;
  CertificateVerdict verdict;
};

StabilitySetup stability_setup(Context& ctx) {
  const fs::path p = required_path(ctx.cfg, "field", "residual_checkpoint", ctx.subcommand);
  const nlohmann::json ck = load_checkpoint_file(p);
  ControlSynthField field = load_control_synth(ck);
  ctx.checkpoint_hash = checkpoint_hash(ck);
  ctx.inputs["residual_checkpoint"] = {{"path", p.string()}, {"hash", ctx.checkpoint_hash}};
  const double tol = ctx.cfg.get_double("stability", "tol");
  const std::string cpath = ctx.cfg.get_string("stability", "certificate");
  StabilitySetup s{field, StabilityCertificate::zeros_for(field), false, {}};
  if (!cpath.empty()) {
    if (!fs::exists(cpath)) throw ConfigError("stability.certificate: file not found: " + cpath);
    s.cert = certificate_from_json(read_json_file(cpath), field);
    s.supplied = true;
    ctx.inputs["certificate"] = cpath;
  } else {
    SearchOptions opts;
    opts.tol = tol;
    s.cert = search_certificate(field, opts).certificate;
  }
  s.verdict = verify_certificate(field, s.cert, tol);
  return s;
}

// Random probes; returns the number of probes that failed to contract
// (only meaningful for certified fields).
int run_probes(Context& ctx, StabilitySetup& s) {
  const int count = ctx.cfg.get_int("stability", "probes");
  const double horizon = ctx.cfg.get_double("stability", "horizon");
  const double scale = ctx.cfg.get_double("stability", "probe_scale");
  const std::uint64_t seed = ctx.cfg.get_u64("stability", "seed");
  ctx.seeds["probes"] = seed;
  std::optional<ContractionRegion> region;
  if (s.verdict.contraction_ok) {
    RegionOptions ro;
    ro.radius = ctx.cfg.get_double("stability", "region_radius");
    region = contraction_region(s.cert, s.field, ro);
    ctx.metrics["region"] = {{"global", region->global}, {"level", number(region->level)}};
  }
  Rng rng(seed);
  std::ostringstream csv;
  csv << "probe,t,norm\n";
  int failures = 0;
  double worst = 0.0;
  const int d = s.field.dim();
  for (int i = 0; i < count; ++i) {
    const Vec x0 = scale * rng.normal_matrix(d, 1);
    Vec d0 = scale * rng.normal_matrix(d, 1);
    for (int tries = 0; region && !region->contains(d0) && tries < 1000; ++tries) d0 *= 0.5;
    const ContractionProbe p = contraction_probe(s.field, x0, x0, d0, horizon);
    for (std::size_t k = 0; k < p.times.size(); ++k)
      csv << i << ',' << format_double(p.times[k]) << ',' << format_double(p.norms[k]) << '\n';
    worst = std::max(worst, p.ratio);
    if (!(p.ratio < 1.0)) ++failures;
  }
  write_file(ctx, "probes.csv", csv.str());
  ctx.metrics["probes"] = count;
  ctx.metrics["max_ratio"] = worst;
  ctx.metrics["non_contracting_probes"] = failures;
  return failures;
}

int cmd_analyze_stability(Context& ctx) {
  StabilitySetup s = stability_setup(ctx);
  write_json(ctx, "certificate.json", certificate_to_json(s.cert));
  const int failures = run_probes(ctx, s);
  nlohmann::json v = verdict_to_json(s.verdict);
  v["certificate_supplied"] = s.supplied;
  if (ctx.metrics.contains("region")) v["region"] = ctx.metrics["region"];
  write_json(ctx, "verdict.json", v);
  ctx.metrics["verdict"] = v;
  const bool supplied_fails = s.supplied && !(s.verdict.iss_ok && s.verdict.contraction_ok);
  const bool probe_fails = s.verdict.contraction_ok && failures > 0;
  std::cout << "iss_ok=" << (s.verdict.iss_ok ? "true" : "false")
            << " contraction_ok=" << (s.verdict.contraction_ok ? "true" : "false")
            << " lambda_max_Q=" << format_double(s.verdict.lambda_max_Q)
            << " lambda_max_Qtilde=" << format_double(s.verdict.lambda_max_Qtilde) << "\n";
  return (supplied_fails || probe_fails) ? kViolation : kOk;
}

int cmd_probe_contraction(Context& ctx) {
  StabilitySetup s = stability_setup(ctx);
  const int failures = run_probes(ctx, s);
  ctx.metrics["certified"] = s.verdict.contraction_ok;
  write_json(ctx, "probe_summary.json", ctx.metrics);
  return (s.verdict.contraction_ok && failures > 0) ? kViolation : kOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Flow-matching lab: pretraining, MLE fine-tuning, stability and error-bound checks"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  std::string horizon, lambda, sigma;
  std::optional<bool> freeze;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"pretrain", "train a flow-matching field with the CFM objective"},
      {"finetune", "MLE fine-tune all pretrained parameters through the solver"},
      {"finetune-residual", "train a ControlSynth residual field on [1, 1+T]"},
      {"sample", "generate samples to samples.csv"},
      {"eval", "held-out W2, reconstruction MSE, NFE and straightness"},
      {"analyze-stability", "verify ISS and contraction certificates of a residual field"},
      {"verify-bounds", "validate the Euler error bounds on the analytic suite"},
      {"probe-contraction", "integrate nearby trajectory pairs of a residual field"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config_path, "INI config file");
    sub->add_option("--set", overrides, "override, section.key=value")->take_all();
    sub->add_option("--horizon-T", horizon, "finetune.horizon_T");
    sub->add_option("--lambda-omega", lambda, "finetune.lambda_omega");
    sub->add_option("--sigma", sigma, "finetune.sigma (one value or one per dimension)");
    sub->add_flag("--freeze-pretrained,!--no-freeze-pretrained", freeze, "finetune.freeze_pretrained");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  Context ctx;
  ctx.argv = args;
  for (const auto& [name, help] : commands)
    if (app.got_subcommand(name)) ctx.subcommand = name;
  try {
    ctx.cfg = config_path.empty() ? Config() : Config::load(config_path);
    for (const auto& o : overrides) ctx.cfg.apply_override(o);
    if (!horizon.empty()) ctx.cfg.set("finetune", "horizon_T", horizon);
    if (!lambda.empty()) ctx.cfg.set("finetune", "lambda_omega", lambda);
    if (!sigma.empty()) ctx.cfg.set("finetune", "sigma", sigma);
    if (freeze) ctx.cfg.set("finetune", "freeze_pretrained", *freeze ? "true" : "false");
    ctx.out = output_dir(ctx.cfg, ctx.subcommand);

    int code = kOk;
    if (ctx.subcommand == "pretrain") code = cmd_pretrain(ctx);
    else if (ctx.subcommand == "finetune") code = cmd_finetune(ctx);
    else if (ctx.subcommand == "finetune-residual") code = cmd_finetune_residual(ctx);
    else if (ctx.subcommand == "sample") code = cmd_sample(ctx);
    else if (ctx.subcommand == "eval") code = cmd_eval(ctx);
    else if (ctx.subcommand == "analyze-stability") code = cmd_analyze_stability(ctx);
    else if (ctx.subcommand == "verify-bounds") code = cmd_verify_bounds(ctx);
    else if (ctx.subcommand == "probe-contraction") code = cmd_probe_contraction(ctx);
    ctx.metrics["exit_code"] = code;
    write_manifest(ctx);
    std::cout << "wrote " << (ctx.out / "manifest.json").string() << "\n";
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const UnsupportedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kViolation;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args);
}

}  // namespace fmlab::cli
