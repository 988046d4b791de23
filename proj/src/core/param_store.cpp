#include "fmlab/core/param_store.hpp"

#include <cmath>
#include <cstring>

#include "fmlab/core/errors.hpp"
#include "fmlab/core/hash.hpp"

namespace fmlab {

void ParamStore::add(std::string name, Mat value, bool trainable) {
  if (contains(name)) throw ConfigError("duplicate parameter '" + name + "'");
  Entry e;
  e.name = std::move(name);
  e.trainable = trainable;
  if (trainable) e.grad = Mat::Zero(value.rows(), value.cols());
  e.value = std::move(value);
  entries_.push_back(std::move(e));
}

bool ParamStore::contains(std::string_view name) const {
  for (const auto& e : entries_)
    if (e.name == name) return true;
  return false;
}

std::size_t ParamStore::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].name == name) return i;
  throw ConfigError("unknown parameter '" + std::string(name) + "'");
}

ParamStore::Entry& ParamStore::entry(std::string_view name) {
  return entries_[index_of(name)];
}

const ParamStore::Entry& ParamStore::entry(std::string_view name) const {
  return entries_[index_of(name)];
}

const Mat& ParamStore::value(std::string_view name) const { return entry(name).value; }

void ParamStore::set_value(std::string_view name, const Mat& value) {
  Entry& e = entry(name);
  if (value.rows() != e.value.rows() || value.cols() != e.value.cols()) {
    throw DimensionError("parameter '" + e.name + "' expects shape " +
                         std::to_string(e.value.rows()) + "x" +
                         std::to_string(e.value.cols()) + ", got " +
                         std::to_string(value.rows()) + "x" +
                         std::to_string(value.cols()));
  }
  e.value = value;
}

Mat& ParamStore::mutable_value(std::string_view name) { return entry(name).value; }

const Mat& ParamStore::grad(std::string_view name) const {
  const Entry& e = entry(name);
  if (!e.trainable) throw ConfigError("parameter '" + e.name + "' is frozen");
  return e.grad;
}

bool ParamStore::trainable(std::string_view name) const { return entry(name).trainable; }

void ParamStore::set_trainable(std::string_view name, bool trainable) {
  Entry& e = entry(name);
  e.trainable = trainable;
  e.grad = trainable ? Mat::Zero(e.value.rows(), e.value.cols()) : Mat();
}

void ParamStore::freeze_all() {
  for (auto& e : entries_) {
    e.trainable = false;
    e.grad = Mat();
  }
}

void ParamStore::zero_grad() {
  for (auto& e : entries_)
    if (e.trainable) e.grad.setZero();
}

double ParamStore::grad_norm() const {
  double s = 0.0;
  for (const auto& e : entries_)
    if (e.trainable) s += e.grad.squaredNorm();
  return std::sqrt(s);
}

double ParamStore::clip_grad_norm(double max_norm) {
  const double norm = grad_norm();
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (auto& e : entries_)
      if (e.trainable) e.grad *= scale;
  }
  return norm;
}

std::size_t ParamStore::trainable_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_)
    if (e.trainable) n += static_cast<std::size_t>(e.value.size());
  return n;
}

bool ParamStore::all_finite() const {
  for (const auto& e : entries_)
    if (!e.value.allFinite()) return false;
  return true;
}

std::string ParamStore::content_hash() const {
  std::string bytes;
  for (const auto& e : entries_) {
    bytes += e.name;
    bytes += '\0';
    bytes += std::to_string(e.value.rows()) + "x" + std::to_string(e.value.cols());
    bytes += '\0';
    // Row-major raw doubles.
    for (Eigen::Index i = 0; i < e.value.rows(); ++i) {
      for (Eigen::Index j = 0; j < e.value.cols(); ++j) {
        const double v = e.value(i, j);
        char raw[sizeof(double)];
        std::memcpy(raw, &v, sizeof(double));
        bytes.append(raw, sizeof(double));
      }
    }
  }
  return git_blob_sha1(bytes);
}

}  // namespace fmlab
