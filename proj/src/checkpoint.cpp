#include "fmlab/checkpoint.hpp"

#include "fmlab/core/errors.hpp"
#include "fmlab/io.hpp"

namespace fmlab {

namespace {

nlohmann::json envelope(const std::string& kind, const ParamStore& params,
                        const CheckpointMeta& meta, nlohmann::json config) {
  nlohmann::json j = params_to_json(params);
  j["format_version"] = kCheckpointFormatVersion;
  j["field_kind"] = kind;
  j["config"] = std::move(config);
  j["rng_seed"] = meta.rng_seed;
  j["training_step"] = meta.training_step;
  j["tag"] = meta.tag;
  j["content_hash"] = params.content_hash();
  return j;
}

void check_envelope(const nlohmann::json& j, const std::string& kind) {
  if (!j.is_object() || !j.contains("format_version"))
    throw ConfigError("not a checkpoint: missing format_version");
  if (j.at("format_version").get<int>() != kCheckpointFormatVersion)
    throw ConfigError("unsupported checkpoint format_version " + j.at("format_version").dump());
  if (j.at("field_kind").get<std::string>() != kind)
    throw ConfigError("checkpoint holds a '" + j.at("field_kind").get<std::string>() +
                      "' field, expected '" + kind + "'");
}

void read_meta(const nlohmann::json& j, CheckpointMeta* meta) {
  if (!meta) return;
  meta->rng_seed = j.value("rng_seed", std::uint64_t{0});
  meta->training_step = j.value("training_step", 0L);
  meta->tag = j.value("tag", std::string());
}

}  // namespace

nlohmann::json params_to_json(const ParamStore& params) {
  nlohmann::json shapes = nlohmann::json::object();
  nlohmann::json values = nlohmann::json::object();
  nlohmann::json trainable = nlohmann::json::object();
  nlohmann::json order = nlohmann::json::array();
  for (const auto& e : params.entries()) {
    shapes[e.name] = {e.value.rows(), e.value.cols()};
    nlohmann::json flat = nlohmann::json::array();
    for (Eigen::Index i = 0; i < e.value.rows(); ++i)
      for (Eigen::Index k = 0; k < e.value.cols(); ++k) flat.push_back(e.value(i, k));
    values[e.name] = std::move(flat);
    trainable[e.name] = e.trainable;
    order.push_back(e.name);
  }
  return {{"param_order", order}, {"shapes", shapes}, {"params", values}, {"trainable", trainable}};
}

void params_from_json(const nlohmann::json& j, ParamStore& params) {
  for (auto& e : params.entries()) {
    if (!j.at("params").contains(e.name))
      throw ConfigError("checkpoint is missing parameter '" + e.name + "'");
    const auto shape = j.at("shapes").at(e.name);
    const auto rows = shape.at(0).get<Eigen::Index>();
    const auto cols = shape.at(1).get<Eigen::Index>();
    if (rows != e.value.rows() || cols != e.value.cols())
      throw DimensionError("checkpoint shape for '" + e.name + "' is " + std::to_string(rows) +
                           "x" + std::to_string(cols) + ", field expects " +
                           std::to_string(e.value.rows()) + "x" +
                           std::to_string(e.value.cols()));
    const auto& flat = j.at("params").at(e.name);
    if (static_cast<Eigen::Index>(flat.size()) != rows * cols)
      throw DimensionError("checkpoint parameter '" + e.name + "' has wrong element count");
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index k = 0; k < cols; ++k)
        m(i, k) = flat[static_cast<std::size_t>(i * cols + k)].get<double>();
    e.value = std::move(m);
  }
  if (j.at("params").size() != params.size())
    throw ConfigError("checkpoint has parameters the field does not know");
}

nlohmann::json save_checkpoint(const MlpField& field, const CheckpointMeta& meta) {
  const auto& c = field.config();
  return envelope("mlp", field.params(), meta,
                  {{"dim", c.dim}, {"hidden", c.hidden}, {"time_features", c.time_features}});
}

nlohmann::json save_checkpoint(const ControlSynthField& field, const CheckpointMeta& meta) {
  const auto& c = field.config();
  nlohmann::json acts = nlohmann::json::array();
  for (const auto& a : c.activations) acts.push_back({{"kind", a.name()}, {"slope", a.slope}});
  return envelope("control_synth", field.params(), meta,
                  {{"dim", c.dim}, {"widths", c.widths}, {"activations", acts},
                   {"input_dim", c.input_dim}});
}

MlpField load_mlp(const nlohmann::json& j, CheckpointMeta* meta) {
  check_envelope(j, "mlp");
  MlpConfig c;
  const auto& cfg = j.at("config");
  c.dim = cfg.at("dim").get<int>();
  c.hidden = cfg.at("hidden").get<std::vector<int>>();
  c.time_features = cfg.at("time_features").get<int>();
  MlpField f = MlpField::zeros(c);
  params_from_json(j, f.params());
  read_meta(j, meta);
  return f;
}

ControlSynthField load_control_synth(const nlohmann::json& j, CheckpointMeta* meta) {
  check_envelope(j, "control_synth");
  ControlSynthConfig c;
  const auto& cfg = j.at("config");
  c.dim = cfg.at("dim").get<int>();
  c.widths = cfg.at("widths").get<std::vector<int>>();
  c.input_dim = cfg.at("input_dim").get<int>();
  for (const auto& a : cfg.at("activations"))
    c.activations.push_back(Activation::parse(a.at("kind").get<std::string>(),
                                              a.at("slope").get<double>()));
  ControlSynthField f = ControlSynthField::zeros(c);
  params_from_json(j, f.params());
  read_meta(j, meta);
  return f;
}

std::string checkpoint_kind(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("field_kind")) throw ConfigError("not a checkpoint");
  return j.at("field_kind").get<std::string>();
}

std::string checkpoint_hash(const nlohmann::json& j) {
  const std::string kind = checkpoint_kind(j);
  if (kind == "mlp") return load_mlp(j).params().content_hash();
  if (kind == "control_synth") return load_control_synth(j).params().content_hash();
  throw ConfigError("unknown checkpoint field_kind '" + kind + "'");
}

nlohmann::json load_checkpoint_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw ConfigError("checkpoint not found: " + path.string());
  return read_json_file(path);
}

}  // namespace fmlab
