#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "fmlab/fields.hpp"

namespace fmlab {

inline constexpr int kCheckpointFormatVersion = 1;

struct CheckpointMeta {
  std::uint64_t rng_seed = 0;
  long training_step = 0;
  std::string tag;
};

// {format_version, field_kind, config, shapes, params (flat row-major),
//  trainable, rng_seed, training_step, tag, content_hash}
nlohmann::json save_checkpoint(const MlpField& field, const CheckpointMeta& meta);
nlohmann::json save_checkpoint(const ControlSynthField& field, const CheckpointMeta& meta);

MlpField load_mlp(const nlohmann::json& checkpoint, CheckpointMeta* meta = nullptr);
ControlSynthField load_control_synth(const nlohmann::json& checkpoint,
                                     CheckpointMeta* meta = nullptr);

std::string checkpoint_kind(const nlohmann::json& checkpoint);
// Parameter content hash (independent of metadata such as step or tag).
std::string checkpoint_hash(const nlohmann::json& checkpoint);

nlohmann::json params_to_json(const ParamStore& params);
// Values are copied into an existing store with the same names and shapes.
void params_from_json(const nlohmann::json& checkpoint, ParamStore& params);

nlohmann::json load_checkpoint_file(const std::filesystem::path& path);

}  // namespace fmlab
