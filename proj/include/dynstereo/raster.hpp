#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace dynstereo {

/// Dense single-channel image, row-major.
template <typename T>
class Raster {
 public:
  Raster() = default;
  Raster(int height, int width, T fill = T{})
      : height_(height), width_(width), values_(checked_size(height, width), fill) {}

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  T& operator()(int y, int x) { return values_[index(y, x)]; }
  const T& operator()(int y, int x) const { return values_[index(y, x)]; }
  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  template <typename U>
  bool same_shape(const Raster<U>& other) const {
    return height_ == other.height() && width_ == other.width();
  }

 private:
  static std::size_t checked_size(int height, int width) {
    if (height < 0 || width < 0) throw std::invalid_argument("raster dims must be non-negative");
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  std::size_t index(int y, int x) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<T> values_;
};

using DepthMap = Raster<double>;

/// H x W x C float features, channel-contiguous per pixel.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int height, int width, int channels);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  bool empty() const { return values_.empty(); }

  std::span<float> at(int y, int x) {
    return {values_.data() + offset(y, x), static_cast<std::size_t>(channels_)};
  }
  std::span<const float> at(int y, int x) const {
    return {values_.data() + offset(y, x), static_cast<std::size_t>(channels_)};
  }
  std::span<float> values() { return values_; }
  std::span<const float> values() const { return values_; }

  bool same_shape(const FeatureMap& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }

 private:
  std::size_t offset(int y, int x) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) *
           static_cast<std::size_t>(channels_);
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<float> values_;
};

}  // namespace dynstereo
