#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gphmm/error.hpp"

namespace gphmm {

/// Dense row-major 2D array. Element (x, y) lives at index y * width + x.
template <class T>
class Grid {
public:
  Grid() = default;
  Grid(std::size_t width, std::size_t height, T fill = T{})
      : width_(width), height_(height), data_(width * height, fill) {}
  Grid(std::size_t width, std::size_t height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != width_ * height_) {
      throw InvalidArgument("Grid: data size does not match width * height");
    }
  }

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }
  const T& operator()(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }

  std::span<T> row(std::size_t y) { return {data_.data() + y * width_, width_}; }
  std::span<const T> row(std::size_t y) const { return {data_.data() + y * width_, width_}; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  bool operator==(const Grid&) const = default;

private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<T> data_;
};

using Image = Grid<double>;

}  // namespace gphmm
