#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "triad/errors.hpp"

namespace triad {

/// Dense row-major image with `C` interleaved channels per pixel, top row first.
template <typename T, int C = 1>
class Image {
  static_assert(C >= 1, "an image needs at least one channel");

 public:
  using value_type = T;
  static constexpr int kChannels = C;

  Image() = default;
  Image(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 0 || height < 0) {
      throw InputError("negative image dimensions");
    }
    data_.assign(static_cast<std::size_t>(width) * height * C, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
  bool empty() const { return data_.empty(); }

  T& operator()(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  const T& operator()(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  // Flat access by pixel index (row-major) and channel.
  T& at(std::size_t pixel, int c = 0) { return data_[pixel * C + c]; }
  const T& at(std::size_t pixel, int c = 0) const { return data_[pixel * C + c]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  std::span<T> row(int y) {
    return std::span<T>(data_).subspan(static_cast<std::size_t>(y) * width_ * C,
                                       static_cast<std::size_t>(width_) * C);
  }
  std::span<const T> row(int y) const {
    return std::span<const T>(data_).subspan(static_cast<std::size_t>(y) * width_ * C,
                                             static_cast<std::size_t>(width_) * C);
  }

  template <typename U, int D>
  bool same_size(const Image<U, D>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * C + c;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// 32-bit float raster, the on-disk currency of the toolkit.
template <int C>
using Raster = Image<float, C>;

using Mask = Image<std::uint8_t, 1>;

/// Double-precision scalar field used for in-memory numerics.
using Field = Image<double, 1>;

template <typename A, int CA, typename B, int CB>
void require_same_size(const Image<A, CA>& a, const Image<B, CB>& b, const std::string& what) {
  if (!a.same_size(b)) {
    throw InputError(what + ": dimension mismatch (" + std::to_string(a.width()) + "x" +
                     std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                     std::to_string(b.height()) + ")");
  }
}

template <typename T>
Field to_field(const Image<T, 1>& image) {
  Field out(image.width(), image.height());
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    out.at(i) = static_cast<double>(image.at(i));
  }
  return out;
}

inline Raster<1> to_raster(const Field& field) {
  Raster<1> out(field.width(), field.height());
  for (std::size_t i = 0; i < field.pixel_count(); ++i) {
    out.at(i) = static_cast<float>(field.at(i));
  }
  return out;
}

}  // namespace triad
