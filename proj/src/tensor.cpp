#include "synevo/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>

#include "synevo/errors.hpp"

namespace synevo {

std::size_t shape_volume(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + ")";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), values_(shape_volume(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(std::move(shape)), values_(std::move(values)) {
  if (shape_volume(shape_) != values_.size()) {
    throw InvalidInput("tensor shape " + shape_string(shape_) + " does not hold " + std::to_string(values_.size()) +
                       " values");
  }
}

bool Tensor::all_finite() const noexcept {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace synevo
