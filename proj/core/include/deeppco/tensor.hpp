#pragma once

#include <cstddef>
#include <vector>

#include "deeppco/errors.hpp"

namespace deeppco {

// Dense row-major N-d array of doubles with an optional gradient slot of
// the same shape. This is the network's working currency; it carries no
// graph — layers own their backward logic.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> v;
  std::vector<double> g;  // empty until a gradient is needed

  Tensor() = default;
  explicit Tensor(std::vector<int> s);

  static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }

  std::size_t size() const { return v.size(); }
  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

  // 3-d (c, h, w) indexing; shape must have rank 3.
  double& at(int c, int h, int w) {
    return v[static_cast<std::size_t>((c * shape[1] + h) * shape[2] + w)];
  }
  double at(int c, int h, int w) const {
    return v[static_cast<std::size_t>((c * shape[1] + h) * shape[2] + w)];
  }

  void ensure_grad();
  void zero_grad();
  bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

std::size_t shape_size(const std::vector<int>& shape);
std::string shape_string(const std::vector<int>& shape);

}  // namespace deeppco
