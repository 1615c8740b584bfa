#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hdys::nc {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Immutable dense float64 array in row-major order. Copies share storage.
class Tensor {
 public:
  Tensor();
  Tensor(Shape shape, std::vector<double> values);

  static Tensor zeros(Shape shape);
  static Tensor filled(Shape shape, double value);
  static Tensor scalar(double value);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_->size(); }
  std::span<const double> values() const { return *data_; }
  const double* data() const { return data_->data(); }
  double operator[](std::size_t i) const { return (*data_)[i]; }

  /// Leading extent for matrices, 1 for vectors.
  std::size_t rows() const;
  /// Trailing extent.
  std::size_t cols() const;
  double at(std::size_t r, std::size_t c) const { return (*data_)[r * cols() + c]; }

  bool all_finite() const;
  /// Exact element-wise and shape equality.
  bool identical(const Tensor& other) const;

 private:
  Shape shape_;
  std::shared_ptr<const std::vector<double>> data_;
};

}  // namespace hdys::nc
