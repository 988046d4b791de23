#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "fmlab/core/types.hpp"

namespace fmlab {

// Shortest round-trip decimal form ("%.17g" fallback), locale independent.
std::string format_double(double v);

nlohmann::json matrix_to_json(const Mat& m);  // row-major nested arrays
Mat matrix_from_json(const nlohmann::json& j);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace fmlab
