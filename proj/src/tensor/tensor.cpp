#include "sgbench/tensor/tensor.hpp"

#include <algorithm>
#include <numeric>

#include "sgbench/core/error.hpp"

namespace sgbench::tensor {

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), values_(element_count(shape_), fill) {}

Tensor::Tensor(Shape shape, std::span<const double> values)
    : shape_(std::move(shape)), values_(values.begin(), values.end()) {
  require(values_.size() == element_count(shape_), ErrorKind::ShapeMismatch,
          "Tensor: " + std::to_string(values_.size()) + " values for shape " +
              shape_string(shape_));
}

Tensor Tensor::from(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::span<const double>(values.begin(), values.size()));
}

Tensor Tensor::reshaped(Shape shape) const& {
  Tensor copy = *this;
  return std::move(copy).reshaped(std::move(shape));
}

Tensor Tensor::reshaped(Shape shape) && {
  require(element_count(shape) == values_.size(), ErrorKind::ShapeMismatch,
          "reshape " + shape_string(shape_) + " -> " + shape_string(shape));
  shape_ = std::move(shape);
  return std::move(*this);
}

void Tensor::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

}  // namespace sgbench::tensor
