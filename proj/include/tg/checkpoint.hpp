#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tg/errors.hpp"

namespace tg {

enum class Dtype : std::uint8_t { f32 = 0, f64 = 1 };

std::string_view dtype_name(Dtype dtype);

/// One named parameter tensor. Values are held as f64 in memory regardless of
/// the owning checkpoint's storage dtype; an f32 checkpoint keeps every value
/// snapped to its f32 representation so serialization is lossless.
struct Tensor {
  std::string name;
  std::vector<std::uint64_t> shape;  // row-major dims; empty shape = scalar
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

std::size_t shape_count(std::span<const std::uint64_t> shape);

/// An ordered set of named tensors captured at one integer timestamp.
/// Immutable after construction; the constructor enforces unique names,
/// shape/value agreement, and finiteness of every element (values of an f32
/// checkpoint are narrowed to f32 first, so overflow to infinity is caught).
class Checkpoint {
 public:
  Checkpoint() = default;
  Checkpoint(std::vector<Tensor> tensors, std::int64_t timestamp = 0,
             Dtype dtype = Dtype::f64);

  const std::vector<Tensor>& tensors() const { return tensors_; }
  std::int64_t timestamp() const { return timestamp_; }
  Dtype dtype() const { return dtype_; }

  std::size_t tensor_count() const { return tensors_.size(); }
  /// Total number of elements across all tensors.
  std::size_t total_size() const;
  /// Pointer to the tensor with this name, or nullptr.
  const Tensor* find(std::string_view name) const;

  Checkpoint with_timestamp(std::int64_t timestamp) const;

  bool operator==(const Checkpoint& other) const;

 private:
  std::vector<Tensor> tensors_;
  std::int64_t timestamp_ = 0;
  Dtype dtype_ = Dtype::f64;
};

struct LayoutEntry {
  std::string name;
  std::size_t offset;
  std::vector<std::uint64_t> shape;
};

/// Contiguous view of a checkpoint's values in manifest order.
struct FlatView {
  std::vector<double> values;
  std::vector<LayoutEntry> layout;
};

FlatView flatten(const Checkpoint& c);

/// Rebuilds a checkpoint from a flat view. The view's layout must match the
/// template's structure exactly (LayoutMismatch otherwise); timestamp and
/// dtype are taken from the template.
Checkpoint unflatten(const FlatView& view, const Checkpoint& like);

/// Rebuilds a checkpoint from bare values laid out like `like`.
Checkpoint from_flat(std::span<const double> values, const Checkpoint& like);

/// True when both checkpoints have identical tensor names, shapes, and dtype.
bool congruent(const Checkpoint& a, const Checkpoint& b);
void require_congruent(const Checkpoint& a, const Checkpoint& b);

double l2_norm(const Checkpoint& c);

/// result = sum_i coeffs[i] * checkpoints[i], accumulated in f64 and cast to
/// the checkpoints' storage dtype on output. All inputs must be congruent.
Checkpoint linear_combination(std::span<const Checkpoint* const> checkpoints,
                              std::span<const double> coeffs,
                              std::int64_t timestamp);

// ---------------------------------------------------------------------------
// TGCK v1 container. Little-endian throughout; layout:
//
//   magic   4 bytes  "TGCK"
//   version u16      1
//   dtype   u8       0 = f32, 1 = f64
//   count   u32      number of tensors
//   per tensor:
//     name_len u16, name bytes (UTF-8),
//     rank u8, dims u64[rank]
//   payloads: all tensor values concatenated, row-major, in manifest order
//
// The timestamp is not part of the container; it lives in the trajectory
// manifest. Loading rejects malformed headers and truncation (FormatError)
// and any non-finite element (NonFinite).
// ---------------------------------------------------------------------------

void save(const Checkpoint& c, const std::filesystem::path& path);
Checkpoint load(const std::filesystem::path& path, std::int64_t timestamp = 0);

/// Time-ordered sequence of structurally congruent checkpoints with a uniform
/// inter-checkpoint interval. Immutable after construction.
class Trajectory {
 public:
  explicit Trajectory(std::vector<Checkpoint> checkpoints, std::int64_t step = 1);

  std::size_t size() const { return checkpoints_.size(); }
  const Checkpoint& operator[](std::size_t i) const { return checkpoints_[i]; }
  const Checkpoint& front() const { return checkpoints_.front(); }
  const Checkpoint& back() const { return checkpoints_.back(); }
  const std::vector<Checkpoint>& checkpoints() const { return checkpoints_; }
  std::int64_t step() const { return step_; }

  /// First `count` checkpoints as a new trajectory.
  Trajectory prefix(std::size_t count) const;

 private:
  std::vector<Checkpoint> checkpoints_;
  std::int64_t step_ = 1;
};

// Trajectory manifest: a UTF-8 JSON file {"step": S, "checkpoints":
// [{"t": T, "path": P}, ...]} with paths relative to the manifest location.

Trajectory load_trajectory(const std::filesystem::path& manifest_path);
void save_trajectory(const Trajectory& traj, const std::filesystem::path& dir,
                     const std::string& basename = "ck");

}  // namespace tg
