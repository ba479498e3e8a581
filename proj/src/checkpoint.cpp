#include "tg/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace tg {
namespace {

constexpr char kMagic[4] = {'T', 'G', 'C', 'K'};
constexpr std::uint16_t kVersion = 1;

double snap(double value, Dtype dtype) {
  return dtype == Dtype::f32 ? static_cast<double>(static_cast<float>(value))
                             : value;
}

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto byte = static_cast<unsigned char>(s[i]);
    std::size_t extra = 0;
    std::uint32_t code = 0;
    if (byte < 0x80) {
      i += 1;
      continue;
    } else if ((byte & 0xE0) == 0xC0) {
      extra = 1;
      code = byte & 0x1Fu;
    } else if ((byte & 0xF0) == 0xE0) {
      extra = 2;
      code = byte & 0x0Fu;
    } else if ((byte & 0xF8) == 0xF0) {
      extra = 3;
      code = byte & 0x07u;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cont = static_cast<unsigned char>(s[i + k]);
      if ((cont & 0xC0) != 0x80) return false;
      code = (code << 6) | (cont & 0x3Fu);
    }
    // Reject overlong encodings, surrogates, and out-of-range code points.
    static constexpr std::uint32_t kMin[4] = {0, 0x80, 0x800, 0x10000};
    if (code < kMin[extra] || code > 0x10FFFF ||
        (code >= 0xD800 && code <= 0xDFFF)) {
      return false;
    }
    i += extra + 1;
  }
  return true;
}

// Little-endian primitives, independent of host byte order.

void put_bytes(std::string& out, std::uint64_t v, int n) {
  for (int i = 0; i < n; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  Reader(const std::string& data, const std::filesystem::path& path)
      : data_(data), path_(path) {}

  std::uint64_t take(int n) {
    if (pos_ + static_cast<std::size_t>(n) > data_.size()) {
      raise(Errc::format_error, "truncated file: " + path_.string());
    }
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i]))
           << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::string take_string(std::size_t n) {
    if (pos_ + n > data_.size()) {
      raise(Errc::format_error, "truncated file: " + path_.string());
    }
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool exhausted() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  const std::string& data_;
  std::filesystem::path path_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string_view dtype_name(Dtype dtype) {
  return dtype == Dtype::f32 ? "f32" : "f64";
}

std::size_t shape_count(std::span<const std::uint64_t> shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

Checkpoint::Checkpoint(std::vector<Tensor> tensors, std::int64_t timestamp,
                       Dtype dtype)
    : tensors_(std::move(tensors)), timestamp_(timestamp), dtype_(dtype) {
  std::unordered_set<std::string_view> names;
  for (auto& t : tensors_) {
    if (!names.insert(t.name).second) {
      raise(Errc::invalid_argument, "duplicate tensor name '" + t.name + "'");
    }
    if (shape_count(t.shape) != t.values.size()) {
      raise(Errc::invalid_argument,
            "tensor '" + t.name + "' shape does not match value count");
    }
    for (auto& v : t.values) {
      v = snap(v, dtype_);
      if (!std::isfinite(v)) {
        raise(Errc::non_finite, "tensor '" + t.name + "' has a non-finite element");
      }
    }
  }
}

std::size_t Checkpoint::total_size() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.size();
  return n;
}

const Tensor* Checkpoint::find(std::string_view name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

Checkpoint Checkpoint::with_timestamp(std::int64_t timestamp) const {
  Checkpoint copy = *this;
  copy.timestamp_ = timestamp;
  return copy;
}

bool Checkpoint::operator==(const Checkpoint& other) const {
  if (dtype_ != other.dtype_ || timestamp_ != other.timestamp_ ||
      tensors_.size() != other.tensors_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    const auto& a = tensors_[i];
    const auto& b = other.tensors_[i];
    if (a.name != b.name || a.shape != b.shape) return false;
    for (std::size_t k = 0; k < a.values.size(); ++k) {
      if (std::bit_cast<std::uint64_t>(a.values[k]) !=
          std::bit_cast<std::uint64_t>(b.values[k])) {
        return false;
      }
    }
  }
  return true;
}

FlatView flatten(const Checkpoint& c) {
  FlatView view;
  view.values.reserve(c.total_size());
  std::size_t offset = 0;
  for (const auto& t : c.tensors()) {
    view.layout.push_back({t.name, offset, t.shape});
    view.values.insert(view.values.end(), t.values.begin(), t.values.end());
    offset += t.size();
  }
  return view;
}

Checkpoint unflatten(const FlatView& view, const Checkpoint& like) {
  if (view.layout.size() != like.tensor_count()) {
    raise(Errc::layout_mismatch, "layout tensor count differs from template");
  }
  std::size_t offset = 0;
  for (std::size_t i = 0; i < view.layout.size(); ++i) {
    const auto& entry = view.layout[i];
    const auto& t = like.tensors()[i];
    if (entry.name != t.name || entry.shape != t.shape || entry.offset != offset) {
      raise(Errc::layout_mismatch, "layout entry '" + entry.name +
                                       "' does not match template tensor '" +
                                       t.name + "'");
    }
    offset += t.size();
  }
  if (view.values.size() != offset) {
    raise(Errc::layout_mismatch, "layout value count differs from template");
  }
  return from_flat(view.values, like);
}

Checkpoint from_flat(std::span<const double> values, const Checkpoint& like) {
  if (values.size() != like.total_size()) {
    raise(Errc::layout_mismatch, "flat value count differs from template");
  }
  std::vector<Tensor> tensors;
  tensors.reserve(like.tensor_count());
  std::size_t offset = 0;
  for (const auto& t : like.tensors()) {
    Tensor out;
    out.name = t.name;
    out.shape = t.shape;
    out.values.assign(values.begin() + static_cast<std::ptrdiff_t>(offset),
                      values.begin() + static_cast<std::ptrdiff_t>(offset + t.size()));
    offset += t.size();
    tensors.push_back(std::move(out));
  }
  return Checkpoint(std::move(tensors), like.timestamp(), like.dtype());
}

bool congruent(const Checkpoint& a, const Checkpoint& b) {
  if (a.dtype() != b.dtype() || a.tensor_count() != b.tensor_count()) return false;
  for (std::size_t i = 0; i < a.tensor_count(); ++i) {
    if (a.tensors()[i].name != b.tensors()[i].name ||
        a.tensors()[i].shape != b.tensors()[i].shape) {
      return false;
    }
  }
  return true;
}

void require_congruent(const Checkpoint& a, const Checkpoint& b) {
  if (!congruent(a, b)) {
    raise(Errc::congruence_error,
          "checkpoints differ in tensor names, shapes, or dtype");
  }
}

double l2_norm(const Checkpoint& c) {
  double sum = 0.0;
  for (const auto& t : c.tensors()) {
    for (double v : t.values) sum += v * v;
  }
  return std::sqrt(sum);
}

Checkpoint linear_combination(std::span<const Checkpoint* const> checkpoints,
                              std::span<const double> coeffs,
                              std::int64_t timestamp) {
  if (checkpoints.empty() || checkpoints.size() != coeffs.size()) {
    raise(Errc::invalid_argument, "combination needs matching checkpoints and coefficients");
  }
  const Checkpoint& first = *checkpoints.front();
  for (const auto* c : checkpoints) require_congruent(first, *c);

  // A combination that reduces to 1.0 * one checkpoint is returned bit-exactly
  // (accumulating through +0.0 would lose the sign of negative zeros).
  std::size_t nonzero = 0;
  std::size_t only = 0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i] != 0.0) {
      ++nonzero;
      only = i;
    }
  }
  if (nonzero == 1 && coeffs[only] == 1.0) {
    return checkpoints[only]->with_timestamp(timestamp);
  }

  std::vector<double> acc(first.total_size(), 0.0);
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (coeffs[i] == 0.0) continue;
    std::size_t pos = 0;
    for (const auto& t : checkpoints[i]->tensors()) {
      for (double v : t.values) acc[pos++] += coeffs[i] * v;
    }
  }
  return from_flat(acc, first.with_timestamp(timestamp));
}

void save(const Checkpoint& c, const std::filesystem::path& path) {
  std::string out;
  out.append(kMagic, 4);
  put_bytes(out, kVersion, 2);
  put_bytes(out, static_cast<std::uint64_t>(c.dtype()), 1);
  put_bytes(out, c.tensor_count(), 4);
  for (const auto& t : c.tensors()) {
    if (t.name.size() > std::numeric_limits<std::uint16_t>::max()) {
      raise(Errc::invalid_argument, "tensor name too long: " + t.name);
    }
    put_bytes(out, t.name.size(), 2);
    out.append(t.name);
    put_bytes(out, t.shape.size(), 1);
    for (auto d : t.shape) put_bytes(out, d, 8);
  }
  for (const auto& t : c.tensors()) {
    for (double v : t.values) {
      if (c.dtype() == Dtype::f32) {
        put_bytes(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)), 4);
      } else {
        put_bytes(out, std::bit_cast<std::uint64_t>(v), 8);
      }
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) raise(Errc::io_error, "cannot open for writing: " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) raise(Errc::io_error, "write failed: " + path.string());
}

Checkpoint load(const std::filesystem::path& path, std::int64_t timestamp) {
  std::ifstream f(path, std::ios::binary);
  if (!f) raise(Errc::io_error, "cannot open for reading: " + path.string());
  std::string data((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());

  Reader r(data, path);
  if (r.take_string(4) != std::string_view(kMagic, 4)) {
    raise(Errc::format_error, "bad magic in " + path.string());
  }
  const auto version = r.take(2);
  if (version != kVersion) {
    raise(Errc::format_error,
          "unsupported version " + std::to_string(version) + " in " + path.string());
  }
  const auto dtype_code = r.take(1);
  if (dtype_code > 1) {
    raise(Errc::format_error, "unknown dtype code in " + path.string());
  }
  const Dtype dtype = static_cast<Dtype>(dtype_code);
  const auto count = r.take(4);
  // Every tensor header needs at least 3 bytes; a larger count means the
  // file is cut short. Checked before allocating.
  if (count * 3 > r.remaining()) {
    raise(Errc::format_error, "truncated file: " + path.string());
  }

  std::vector<Tensor> tensors(count);
  std::uint64_t total_elems = 0;
  for (auto& t : tensors) {
    const auto name_len = r.take(2);
    t.name = r.take_string(name_len);
    if (!valid_utf8(t.name)) {
      raise(Errc::format_error, "tensor name is not valid UTF-8 in " + path.string());
    }
    const auto rank = r.take(1);
    t.shape.resize(rank);
    std::uint64_t elems = 1;
    for (auto& d : t.shape) {
      d = r.take(8);
      if (d != 0 && elems > r.remaining() / d) {  // payload cannot fit
        raise(Errc::format_error, "implausible tensor shape in " + path.string());
      }
      elems *= d;
    }
    total_elems += elems;
  }
  const std::uint64_t width = dtype == Dtype::f32 ? 4 : 8;
  if (total_elems * width != r.remaining()) {
    raise(Errc::format_error,
          "payload size disagrees with the header in " + path.string());
  }
  for (auto& t : tensors) {
    const std::size_t n = shape_count(t.shape);
    t.values.resize(n);
    for (auto& v : t.values) {
      if (dtype == Dtype::f32) {
        v = static_cast<double>(std::bit_cast<float>(static_cast<std::uint32_t>(r.take(4))));
      } else {
        v = std::bit_cast<double>(r.take(8));
      }
      if (!std::isfinite(v)) {
        raise(Errc::non_finite,
              "non-finite element in tensor '" + t.name + "' of " + path.string());
      }
    }
  }
  return Checkpoint(std::move(tensors), timestamp, dtype);
}

Trajectory::Trajectory(std::vector<Checkpoint> checkpoints, std::int64_t step)
    : checkpoints_(std::move(checkpoints)), step_(step) {
  if (checkpoints_.empty()) {
    raise(Errc::empty_trajectory, "trajectory needs at least one checkpoint");
  }
  if (step_ < 1) {
    raise(Errc::invalid_argument, "trajectory step must be a positive integer");
  }
  for (std::size_t i = 1; i < checkpoints_.size(); ++i) {
    if (checkpoints_[i].timestamp() <= checkpoints_[i - 1].timestamp()) {
      raise(Errc::invalid_argument, "trajectory timestamps must strictly increase");
    }
    require_congruent(checkpoints_.front(), checkpoints_[i]);
  }
}

Trajectory Trajectory::prefix(std::size_t count) const {
  if (count == 0 || count > checkpoints_.size()) {
    raise(Errc::invalid_argument, "prefix length out of range");
  }
  return Trajectory(
      std::vector<Checkpoint>(checkpoints_.begin(),
                              checkpoints_.begin() + static_cast<std::ptrdiff_t>(count)),
      step_);
}

Trajectory load_trajectory(const std::filesystem::path& manifest_path) {
  std::ifstream f(manifest_path);
  if (!f) raise(Errc::io_error, "cannot open manifest: " + manifest_path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::format_error,
          "manifest is not valid JSON (" + manifest_path.string() + "): " + e.what());
  }
  if (!doc.is_object() || !doc.contains("step") || !doc.contains("checkpoints")) {
    raise(Errc::format_error,
          "manifest must contain 'step' and 'checkpoints': " + manifest_path.string());
  }
  const auto base = manifest_path.parent_path();
  std::vector<Checkpoint> checkpoints;
  for (const auto& entry : doc.at("checkpoints")) {
    if (!entry.contains("t") || !entry.contains("path")) {
      raise(Errc::format_error, "manifest entries need 't' and 'path'");
    }
    checkpoints.push_back(load(base / entry.at("path").get<std::string>(),
                               entry.at("t").get<std::int64_t>()));
  }
  return Trajectory(std::move(checkpoints), doc.at("step").get<std::int64_t>());
}

void save_trajectory(const Trajectory& traj, const std::filesystem::path& dir,
                     const std::string& basename) {
  std::filesystem::create_directories(dir);
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& c = traj[i];
    char suffix[32];
    std::snprintf(suffix, sizeof(suffix), "_%05lld.tgck",
                  static_cast<long long>(c.timestamp()));
    const std::string filename = basename + suffix;
    save(c, dir / filename);
    entries.push_back({{"t", c.timestamp()}, {"path", filename}});
  }
  nlohmann::json doc{{"step", traj.step()}, {"checkpoints", entries}};
  std::ofstream f(dir / "trajectory.json", std::ios::binary | std::ios::trunc);
  if (!f) raise(Errc::io_error, "cannot write manifest in " + dir.string());
  f << doc.dump(2) << "\n";
}

}  // namespace tg
