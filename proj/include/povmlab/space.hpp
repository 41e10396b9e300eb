// Labelled tensor-product structure of a composite Hilbert space.
#pragma once

#include "povmlab/core.hpp"

#include <algorithm>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

namespace povmlab {

struct Subsystem {
  std::string label;
  Index dim = 1;

  friend bool operator==(const Subsystem&, const Subsystem&) = default;
};

/// Ordered list of subsystems. The first subsystem is the most significant
/// digit of the flat (row-major / Kronecker) basis index.
class SpaceShape {
 public:
  SpaceShape() = default;
  SpaceShape(std::initializer_list<Subsystem> parts) : SpaceShape(std::vector<Subsystem>(parts)) {}
  explicit SpaceShape(std::vector<Subsystem> parts) : parts_(std::move(parts)) {
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      if (parts_[i].label.empty()) throw LabelError("empty subsystem label");
      if (parts_[i].dim < 1) {
        throw DimensionMismatch("subsystem '" + parts_[i].label + "' has dimension < 1");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (parts_[j].label == parts_[i].label) {
          throw LabelError("duplicate subsystem label '" + parts_[i].label + "'");
        }
      }
    }
  }

  const std::vector<Subsystem>& parts() const { return parts_; }
  std::size_t size() const { return parts_.size(); }

  Index total_dim() const {
    Index d = 1;
    for (const auto& p : parts_) d *= p.dim;
    return d;
  }

  bool contains(const std::string& label) const {
    return std::any_of(parts_.begin(), parts_.end(), [&](const Subsystem& p) { return p.label == label; });
  }

  std::size_t position(const std::string& label) const {
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      if (parts_[i].label == label) return i;
    }
    throw LabelError("unknown subsystem label '" + label + "'");
  }

  Index dim_of(const std::string& label) const { return parts_[position(label)].dim; }

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    for (const auto& p : parts_) out.push_back(p.label);
    return out;
  }

  /// Shape made of the named subsystems, in the order given.
  SpaceShape select(const std::vector<std::string>& labels) const {
    std::vector<Subsystem> out;
    for (const auto& l : labels) out.push_back(parts_[position(l)]);
    return SpaceShape(std::move(out));
  }

  /// Labels not in `labels`, in shape order.
  std::vector<std::string> complement(const std::vector<std::string>& labels) const {
    for (const auto& l : labels) position(l);
    std::vector<std::string> out;
    for (const auto& p : parts_) {
      if (std::find(labels.begin(), labels.end(), p.label) == labels.end()) out.push_back(p.label);
    }
    return out;
  }

  SpaceShape concat(const SpaceShape& other) const {
    std::vector<Subsystem> out = parts_;
    out.insert(out.end(), other.parts_.begin(), other.parts_.end());
    return SpaceShape(std::move(out));
  }

  friend bool operator==(const SpaceShape&, const SpaceShape&) = default;

 private:
  std::vector<Subsystem> parts_;
};

/// For a reordering of `shape` into `order` (a permutation of its labels),
/// returns src such that new_flat_index i corresponds to old flat index src[i].
inline std::vector<Index> permutation_map(const SpaceShape& shape, const std::vector<std::string>& order) {
  if (order.size() != shape.size()) {
    throw LabelError("reordering must name every subsystem exactly once");
  }
  const std::size_t n = shape.size();
  std::vector<Index> old_stride(n);
  Index s = 1;
  for (std::size_t i = n; i-- > 0;) {
    old_stride[i] = s;
    s *= shape.parts()[i].dim;
  }
  std::vector<std::size_t> pos(n);
  std::vector<Index> new_dims(n);
  for (std::size_t i = 0; i < n; ++i) {
    pos[i] = shape.position(order[i]);
    for (std::size_t j = 0; j < i; ++j) {
      if (pos[j] == pos[i]) throw LabelError("reordering repeats label '" + order[i] + "'");
    }
    new_dims[i] = shape.parts()[pos[i]].dim;
  }
  const Index total = shape.total_dim();
  std::vector<Index> src(static_cast<std::size_t>(total));
  std::vector<Index> digit(n, 0);
  for (Index flat = 0; flat < total; ++flat) {
    Index old = 0;
    for (std::size_t i = 0; i < n; ++i) old += digit[i] * old_stride[pos[i]];
    src[static_cast<std::size_t>(flat)] = old;
    for (std::size_t i = n; i-- > 0;) {
      if (++digit[i] < new_dims[i]) break;
      digit[i] = 0;
    }
  }
  return src;
}

}  // namespace povmlab
