#include "hdys/numcore/tensor.hpp"

#include <cmath>
#include <sstream>

#include "hdys/common/error.hpp"

namespace hdys::nc {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream ss;
  ss << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) ss << (i ? "," : "") << shape[i];
  ss << ']';
  return ss.str();
}

Tensor::Tensor() : shape_{1}, data_(std::make_shared<const std::vector<double>>(1, 0.0)) {}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(std::move(shape)) {
  if (shape_.empty()) throw ShapeError("tensor shape must have rank >= 1");
  for (std::size_t e : shape_)
    if (e == 0) throw ShapeError("tensor extents must be positive, got " + shape_str(shape_));
  if (shape_size(shape_) != values.size())
    throw ShapeError("shape " + shape_str(shape_) + " does not match " +
                     std::to_string(values.size()) + " values");
  data_ = std::make_shared<const std::vector<double>>(std::move(values));
}

Tensor Tensor::zeros(Shape shape) { return filled(std::move(shape), 0.0); }

Tensor Tensor::filled(Shape shape, double value) {
  std::size_t n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

std::size_t Tensor::rows() const { return shape_.size() >= 2 ? shape_size(Shape(shape_.begin(), shape_.end() - 1)) : 1; }

std::size_t Tensor::cols() const { return shape_.back(); }

bool Tensor::all_finite() const {
  for (double v : *data_)
    if (!std::isfinite(v)) return false;
  return true;
}

bool Tensor::identical(const Tensor& other) const {
  return shape_ == other.shape_ && *data_ == *other.data_;
}

}  // namespace hdys::nc
