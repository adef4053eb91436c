#pragma once

#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "deeppco/tensor.hpp"

namespace deeppco {

enum class Mode { kTrain, kEval };

using Rng = std::mt19937_64;

struct ConvSpec {
  int in_ch = 0;
  int out_ch = 0;
  int kernel = 3;
  int stride = 1;
  int pad = 0;

  int out_dim(int in) const { return (in + 2 * pad - kernel) / stride + 1; }
  bool operator==(const ConvSpec&) const = default;
};

using NamedParam = std::pair<std::string, Tensor*>;

// Layers cache whatever the backward pass needs during forward.
// backward() accumulates into parameter .g slots and returns the
// gradient with respect to the layer input.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& in, Mode mode, Rng& rng) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual std::vector<NamedParam> params(const std::string& prefix) { return {}; }
  virtual std::string kind() const = 0;
};

// Cross-correlation over (C, H, W) input, weight layout (out, in, k, k).
class Conv2d final : public Layer {
 public:
  Conv2d(const ConvSpec& spec, Rng& init_rng);

  Tensor forward(const Tensor& in, Mode mode, Rng& rng) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<NamedParam> params(const std::string& prefix) override;
  std::string kind() const override { return "conv"; }

  const ConvSpec& spec() const { return spec_; }
  Tensor& weight() { return w_; }
  Tensor& bias() { return b_; }

 private:
  ConvSpec spec_;
  Tensor w_, b_;
  Tensor cached_in_;
  bool have_input_ = false;
};

class LeakyReLU final : public Layer {
 public:
  explicit LeakyReLU(double slope = 0.1) : slope_(slope) {}

  Tensor forward(const Tensor& in, Mode mode, Rng& rng) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "leaky_relu"; }

 private:
  double slope_;
  Tensor cached_in_;
  bool have_input_ = false;
};

// Inverted dropout: survivors scaled by 1/(1-rate) in train mode,
// identity in eval mode.
class Dropout final : public Layer {
 public:
  explicit Dropout(double rate);

  Tensor forward(const Tensor& in, Mode mode, Rng& rng) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "dropout"; }

 private:
  double rate_;
  std::vector<double> mask_;
  bool have_input_ = false;
};

class Linear final : public Layer {
 public:
  Linear(int in_features, int out_features, Rng& init_rng);

  Tensor forward(const Tensor& in, Mode mode, Rng& rng) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<NamedParam> params(const std::string& prefix) override;
  std::string kind() const override { return "linear"; }

  Tensor& weight() { return w_; }
  Tensor& bias() { return b_; }

 private:
  int in_, out_;
  Tensor w_, b_;  // w: (out, in)
  Tensor cached_in_;
  bool have_input_ = false;
};

class Flatten final : public Layer {
 public:
  Tensor forward(const Tensor& in, Mode mode, Rng& rng) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "flatten"; }

 private:
  std::vector<int> cached_shape_;
  bool have_input_ = false;
};

class Sequential final : public Layer {
 public:
  void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

  Tensor forward(const Tensor& in, Mode mode, Rng& rng) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<NamedParam> params(const std::string& prefix) override;
  std::string kind() const override { return "sequential"; }

  std::size_t size() const { return layers_.size(); }
  Layer& at(std::size_t i) { return *layers_[i]; }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

// Kaiming fan-in normal init, suited to leaky-ReLU stacks.
void kaiming_init(Tensor& w, int fan_in, Rng& rng);

}  // namespace deeppco
