#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "fmlab/core/types.hpp"

namespace fmlab {

// Named trainable arrays with parallel gradient slots. A gradient slot
// exists (non-empty) iff the entry is trainable. Shapes are fixed once an
// entry has been added.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Mat value;
    Mat grad;
    bool trainable = true;
  };

  void add(std::string name, Mat value, bool trainable = true);

  bool contains(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;

  const Mat& value(std::string_view name) const;
  // Overwrites values; the shape must match.
  void set_value(std::string_view name, const Mat& value);
  Mat& mutable_value(std::string_view name);
  const Mat& grad(std::string_view name) const;
  bool trainable(std::string_view name) const;
  void set_trainable(std::string_view name, bool trainable);
  void freeze_all();

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  void zero_grad();
  double grad_norm() const;
  // Scales every gradient so the global norm is at most max_norm. Returns
  // the norm before clipping.
  double clip_grad_norm(double max_norm);
  std::size_t trainable_count() const;
  bool all_finite() const;

  // Git-style SHA-1 over names, shapes and raw values.
  std::string content_hash() const;

 private:
  Entry& entry(std::string_view name);
  const Entry& entry(std::string_view name) const;

  std::vector<Entry> entries_;
};

}  // namespace fmlab
