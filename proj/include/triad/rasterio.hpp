#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "triad/errors.hpp"
#include "triad/geometry.hpp"
#include "triad/image.hpp"
#include "triad/trajectory.hpp"

namespace triad {

/// Middlebury convention: a flow component beyond this magnitude marks an
/// unknown correspondence.
inline constexpr float kFlowInvalidThreshold = 1e9f;
inline constexpr float kFlowInvalid = 1e10f;

inline bool flow_is_valid(float u, float v) {
  return std::isfinite(u) && std::isfinite(v) && std::abs(u) <= kFlowInvalidThreshold &&
         std::abs(v) <= kFlowInvalidThreshold;
}

/// Keyframe-to-frame displacement field with an explicit validity mask.
struct FlowField {
  Raster<2> flow;
  Mask valid;

  FlowField() = default;
  FlowField(int width, int height) : flow(width, height, 0.0f), valid(width, height, 1) {}

  int width() const { return flow.width(); }
  int height() const { return flow.height(); }

  bool is_valid(int x, int y) const { return valid(x, y) != 0; }

  void invalidate(int x, int y) {
    valid(x, y) = 0;
    flow(x, y, 0) = kFlowInvalid;
    flow(x, y, 1) = kFlowInvalid;
  }

  static FlowField from_raster(Raster<2> raster) {
    FlowField f;
    f.valid = Mask(raster.width(), raster.height(), 0);
    for (std::size_t i = 0; i < raster.pixel_count(); ++i) {
      f.valid.at(i) = flow_is_valid(raster.at(i, 0), raster.at(i, 1)) ? 1 : 0;
    }
    f.flow = std::move(raster);
    return f;
  }

  // Invalid pixels are written with the sentinel regardless of their stored value.
  Raster<2> to_raster() const {
    Raster<2> out = flow;
    for (std::size_t i = 0; i < out.pixel_count(); ++i) {
      if (!valid.at(i)) {
        out.at(i, 0) = kFlowInvalid;
        out.at(i, 1) = kFlowInvalid;
      }
    }
    return out;
  }
};

namespace detail {

inline std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

template <typename T>
T load_le(const unsigned char* p) {
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::ranges::reverse(bytes);
  return std::bit_cast<T>(bytes);
}

template <typename T>
T load_be(const unsigned char* p) {
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), p, sizeof(T));
  if constexpr (std::endian::native == std::endian::little) std::ranges::reverse(bytes);
  return std::bit_cast<T>(bytes);
}

template <typename T>
void store_le(std::string& out, T value) {
  auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::ranges::reverse(bytes);
  out.append(bytes.data(), bytes.size());
}

// Minimal tokenizer for the ASCII headers of PFM and PGM files.
class HeaderCursor {
 public:
  HeaderCursor(const std::vector<unsigned char>& bytes, std::string what)
      : bytes_(bytes), what_(std::move(what)) {}

  std::string token(bool allow_comments) {
    skip_space(allow_comments);
    std::string tok;
    while (pos_ < bytes_.size() && !is_space(bytes_[pos_])) tok.push_back(static_cast<char>(bytes_[pos_++]));
    if (tok.empty()) throw FormatError(what_ + ": truncated header");
    return tok;
  }

  // Exactly one whitespace byte separates the header from the payload.
  std::size_t payload_offset() {
    if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) throw FormatError(what_ + ": malformed header");
    return pos_ + 1;
  }

 private:
  static bool is_space(unsigned char c) { return c == ' ' || c == '\n' || c == '\r' || c == '\t'; }

  void skip_space(bool allow_comments) {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (allow_comments && bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& bytes_;
  std::string what_;
  std::size_t pos_ = 0;
};

inline int parse_dimension(const std::string& tok, const std::string& what) {
  std::size_t used = 0;
  long value = 0;
  try {
    value = std::stol(tok, &used);
  } catch (const std::exception&) {
    throw FormatError(what + ": bad dimension '" + tok + "'");
  }
  if (used != tok.size() || value <= 0 || value > (1 << 20)) {
    throw FormatError(what + ": bad dimension '" + tok + "'");
  }
  return static_cast<int>(value);
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Optical flow (.flo)

inline Raster<2> read_flow(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  const std::string what = "flow " + path.string();
  if (bytes.size() < 12) throw FormatError(what + ": truncated header");
  if (std::memcmp(bytes.data(), "PIEH", 4) != 0) throw FormatError(what + ": bad magic");
  const auto width = detail::load_le<std::int32_t>(bytes.data() + 4);
  const auto height = detail::load_le<std::int32_t>(bytes.data() + 8);
  if (width <= 0 || height <= 0 || width > (1 << 20) || height > (1 << 20)) {
    throw FormatError(what + ": bad dimensions");
  }
  const std::size_t expected = 12 + static_cast<std::size_t>(width) * height * 2 * sizeof(float);
  if (bytes.size() < expected) throw FormatError(what + ": truncated payload");
  if (bytes.size() > expected) throw FormatError(what + ": trailing bytes");
  Raster<2> flow(width, height);
  auto data = flow.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = detail::load_le<float>(bytes.data() + 12 + i * sizeof(float));
  }
  return flow;
}

inline void write_flow(const Raster<2>& flow, const std::filesystem::path& path) {
  std::string out;
  out.reserve(12 + flow.data().size() * sizeof(float));
  out.append("PIEH");
  detail::store_le<std::int32_t>(out, flow.width());
  detail::store_le<std::int32_t>(out, flow.height());
  for (float v : flow.data()) detail::store_le<float>(out, v);
  detail::write_file(path, out);
}

// ---------------------------------------------------------------------------
// Portable float map (.pfm). Files store scanlines bottom-to-top; rasters in
// memory are top-to-bottom.

inline int pfm_channels(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == 'f') return 1;
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == 'F') return 3;
  throw FormatError("pfm " + path.string() + ": bad magic");
}

template <int C>
Raster<C> read_pfm(const std::filesystem::path& path) {
  static_assert(C == 1 || C == 3, "PFM holds one or three channels");
  const auto bytes = detail::read_file(path);
  const std::string what = "pfm " + path.string();
  detail::HeaderCursor cursor(bytes, what);
  const std::string magic = cursor.token(false);
  if (magic != "Pf" && magic != "PF") throw FormatError(what + ": bad magic '" + magic + "'");
  if ((magic == "Pf" ? 1 : 3) != C) throw FormatError(what + ": unexpected channel count");
  const int width = detail::parse_dimension(cursor.token(false), what);
  const int height = detail::parse_dimension(cursor.token(false), what);
  const std::string scale_tok = cursor.token(false);
  double scale = 0.0;
  try {
    std::size_t used = 0;
    scale = std::stod(scale_tok, &used);
    if (used != scale_tok.size()) throw FormatError(what + ": bad scale");
  } catch (const std::invalid_argument&) {
    throw FormatError(what + ": bad scale '" + scale_tok + "'");
  } catch (const std::out_of_range&) {
    throw FormatError(what + ": bad scale '" + scale_tok + "'");
  }
  if (scale == 0.0 || !std::isfinite(scale)) throw FormatError(what + ": bad scale");
  const bool little = scale < 0.0;
  const std::size_t offset = cursor.payload_offset();
  const std::size_t row_values = static_cast<std::size_t>(width) * C;
  const std::size_t expected = offset + row_values * height * sizeof(float);
  if (bytes.size() < expected) throw FormatError(what + ": truncated payload");
  if (bytes.size() > expected) throw FormatError(what + ": trailing bytes");
  Raster<C> out(width, height);
  for (int file_row = 0; file_row < height; ++file_row) {
    auto dst = out.row(height - 1 - file_row);
    const unsigned char* src = bytes.data() + offset + file_row * row_values * sizeof(float);
    for (std::size_t i = 0; i < row_values; ++i) {
      dst[i] = little ? detail::load_le<float>(src + i * sizeof(float))
                      : detail::load_be<float>(src + i * sizeof(float));
    }
  }
  return out;
}

template <int C>
void write_pfm(const Raster<C>& raster, const std::filesystem::path& path) {
  static_assert(C == 1 || C == 3, "PFM holds one or three channels");
  std::string out = (C == 1 ? "Pf\n" : "PF\n") + std::to_string(raster.width()) + " " +
                    std::to_string(raster.height()) + "\n-1.0\n";
  out.reserve(out.size() + raster.data().size() * sizeof(float));
  for (int y = raster.height() - 1; y >= 0; --y) {
    for (float v : raster.row(y)) detail::store_le<float>(out, v);
  }
  detail::write_file(path, out);
}

// ---------------------------------------------------------------------------
// Binary PGM (P5), 8 or 16 bit, intensities scaled to [0, 1].

inline Raster<1> read_image(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  const std::string what = "pgm " + path.string();
  detail::HeaderCursor cursor(bytes, what);
  if (cursor.token(true) != "P5") throw FormatError(what + ": only binary P5 is supported");
  const int width = detail::parse_dimension(cursor.token(true), what);
  const int height = detail::parse_dimension(cursor.token(true), what);
  const int maxval = detail::parse_dimension(cursor.token(true), what);
  if (maxval > 65535) throw FormatError(what + ": maxval above 65535");
  const std::size_t offset = cursor.payload_offset();
  const std::size_t bpp = maxval < 256 ? 1 : 2;
  const std::size_t expected = offset + static_cast<std::size_t>(width) * height * bpp;
  if (bytes.size() < expected) throw FormatError(what + ": truncated payload");
  Raster<1> out(width, height);
  for (std::size_t i = 0; i < out.pixel_count(); ++i) {
    const unsigned char* p = bytes.data() + offset + i * bpp;
    const unsigned value = bpp == 1 ? p[0] : (static_cast<unsigned>(p[0]) << 8) | p[1];
    if (value > static_cast<unsigned>(maxval)) throw FormatError(what + ": sample above maxval");
    out.at(i) = static_cast<float>(static_cast<double>(value) / maxval);
  }
  return out;
}

inline void write_image(const Raster<1>& image, const std::filesystem::path& path,
                        int maxval = 65535) {
  if (maxval <= 0 || maxval > 65535) throw InputError("pgm maxval must be in [1, 65535]");
  std::string out = "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) +
                    "\n" + std::to_string(maxval) + "\n";
  for (float v : image.data()) {
    const double clamped = std::isfinite(v) ? std::clamp(static_cast<double>(v), 0.0, 1.0) : 0.0;
    const auto q = static_cast<unsigned>(std::lround(clamped * maxval));
    if (maxval < 256) {
      out.push_back(static_cast<char>(q));
    } else {
      out.push_back(static_cast<char>(q >> 8));
      out.push_back(static_cast<char>(q & 0xff));
    }
  }
  detail::write_file(path, out);
}

// ---------------------------------------------------------------------------
// TUM trajectory text: "t tx ty tz qx qy qz qw" per line, world-from-camera.

inline Trajectory parse_trajectory(std::istream& in, const std::string& what = "trajectory") {
  Trajectory traj;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double v[8];
    for (double& x : v) {
      if (!(ls >> x)) throw FormatError(what + ":" + std::to_string(lineno) + ": expected 8 numbers");
    }
    std::string extra;
    if (ls >> extra) throw FormatError(what + ":" + std::to_string(lineno) + ": trailing tokens");
    Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);
    const double norm = q.norm();
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-3) {
      throw FormatError(what + ":" + std::to_string(lineno) + ": quaternion not unit length");
    }
    if (!traj.empty() && !(v[0] > traj[traj.size() - 1].timestamp)) {
      throw FormatError(what + ":" + std::to_string(lineno) + ": timestamps not strictly increasing");
    }
    traj.push_back({v[0], RelativePose::from_quaternion(q, Vec3(v[1], v[2], v[3]))});
  }
  return traj;
}

inline Trajectory read_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_trajectory(in, path.string());
}

inline std::string format_trajectory(const Trajectory& traj) {
  std::string out;
  for (const auto& sp : traj) {
    const Eigen::Quaterniond q(sp.pose.rotation);
    const Vec3& t = sp.pose.translation;
    bool first = true;
    for (double v : {sp.timestamp, t.x(), t.y(), t.z(), q.x(), q.y(), q.z(), q.w()}) {
      if (!first) out.push_back(' ');
      out += detail::format_double(v);
      first = false;
    }
    out.push_back('\n');
  }
  return out;
}

inline void write_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
  detail::write_file(path, format_trajectory(traj));
}

// ---------------------------------------------------------------------------
// Intrinsics text: "fx fy cx cy width height".

inline Intrinsics read_intrinsics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Intrinsics K;
  if (!(in >> K.fx >> K.fy >> K.cx >> K.cy >> K.width >> K.height)) {
    throw FormatError("intrinsics " + path.string() + ": expected 'fx fy cx cy width height'");
  }
  std::string extra;
  if (in >> extra) throw FormatError("intrinsics " + path.string() + ": trailing tokens");
  try {
    K.validate();
  } catch (const InputError& e) {
    throw FormatError("intrinsics " + path.string() + ": " + e.what());
  }
  return K;
}

inline void write_intrinsics(const Intrinsics& K, const std::filesystem::path& path) {
  detail::write_file(path, detail::format_double(K.fx) + " " + detail::format_double(K.fy) + " " +
                               detail::format_double(K.cx) + " " + detail::format_double(K.cy) +
                               " " + std::to_string(K.width) + " " + std::to_string(K.height) +
                               "\n");
}

}  // namespace triad
