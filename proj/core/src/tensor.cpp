#include "deeppco/tensor.hpp"

#include <numeric>
#include <string>

namespace deeppco {

std::size_t shape_size(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw ShapeMismatch("negative dimension in shape " + shape_string(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string shape_string(const std::vector<int>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)), v(shape_size(shape), 0.0) {}

void Tensor::ensure_grad() {
  if (g.size() != v.size()) g.assign(v.size(), 0.0);
}

void Tensor::zero_grad() { g.assign(v.size(), 0.0); }

}  // namespace deeppco
