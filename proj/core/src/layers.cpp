#include "deeppco/layers.hpp"

#include <cmath>

namespace deeppco {

void kaiming_init(Tensor& w, int fan_in, Rng& rng) {
  const double gain = std::sqrt(2.0 / (1.0 + 0.1 * 0.1));  // leaky slope 0.1
  const double stddev = gain / std::sqrt(static_cast<double>(fan_in));
  std::normal_distribution<double> dist(0.0, stddev);
  for (double& x : w.v) x = dist(rng);
}

// ---- Conv2d ----

Conv2d::Conv2d(const ConvSpec& spec, Rng& init_rng)
    : spec_(spec),
      w_({spec.out_ch, spec.in_ch, spec.kernel, spec.kernel}),
      b_({spec.out_ch}) {
  kaiming_init(w_, spec.in_ch * spec.kernel * spec.kernel, init_rng);
}

Tensor Conv2d::forward(const Tensor& in, Mode, Rng&) {
  if (in.shape.size() != 3 || in.shape[0] != spec_.in_ch) {
    throw ShapeMismatch("conv expects (" + std::to_string(spec_.in_ch) +
                        ",H,W), got " + shape_string(in.shape));
  }
  const int ih = in.shape[1], iw = in.shape[2];
  const int oh = spec_.out_dim(ih), ow = spec_.out_dim(iw);
  if (oh < 1 || ow < 1) {
    throw ShapeMismatch("conv output collapses below 1x1 for input " +
                        shape_string(in.shape));
  }
  cached_in_ = in;
  have_input_ = true;

  Tensor out({spec_.out_ch, oh, ow});
  const int k = spec_.kernel;
  for (int oc = 0; oc < spec_.out_ch; ++oc) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        double acc = b_.v[static_cast<std::size_t>(oc)];
        const int y0 = y * spec_.stride - spec_.pad;
        const int x0 = x * spec_.stride - spec_.pad;
        for (int ic = 0; ic < spec_.in_ch; ++ic) {
          for (int ky = 0; ky < k; ++ky) {
            const int iy = y0 + ky;
            if (iy < 0 || iy >= ih) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = x0 + kx;
              if (ix < 0 || ix >= iw) continue;
              acc += in.at(ic, iy, ix) *
                     w_.v[static_cast<std::size_t>(
                         ((oc * spec_.in_ch + ic) * k + ky) * k + kx)];
            }
          }
        }
        out.at(oc, y, x) = acc;
      }
    }
  }
  return out;
}

Tensor Conv2d::backward(const Tensor& grad_out) {
  if (!have_input_) throw GraphNotBuilt("conv backward before forward");
  const Tensor& in = cached_in_;
  const int ih = in.shape[1], iw = in.shape[2];
  const int oh = grad_out.shape[1], ow = grad_out.shape[2];
  const int k = spec_.kernel;

  w_.ensure_grad();
  b_.ensure_grad();
  Tensor grad_in(in.shape);

  for (int oc = 0; oc < spec_.out_ch; ++oc) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        const double go = grad_out.at(oc, y, x);
        b_.g[static_cast<std::size_t>(oc)] += go;
        const int y0 = y * spec_.stride - spec_.pad;
        const int x0 = x * spec_.stride - spec_.pad;
        for (int ic = 0; ic < spec_.in_ch; ++ic) {
          for (int ky = 0; ky < k; ++ky) {
            const int iy = y0 + ky;
            if (iy < 0 || iy >= ih) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = x0 + kx;
              if (ix < 0 || ix >= iw) continue;
              const std::size_t wi = static_cast<std::size_t>(
                  ((oc * spec_.in_ch + ic) * k + ky) * k + kx);
              w_.g[wi] += go * in.at(ic, iy, ix);
              grad_in.at(ic, iy, ix) += go * w_.v[wi];
            }
          }
        }
      }
    }
  }
  return grad_in;
}

std::vector<NamedParam> Conv2d::params(const std::string& prefix) {
  return {{prefix + ".w", &w_}, {prefix + ".b", &b_}};
}

// ---- LeakyReLU ----

Tensor LeakyReLU::forward(const Tensor& in, Mode, Rng&) {
  cached_in_ = in;
  have_input_ = true;
  Tensor out = in;
  for (double& x : out.v) {
    if (x < 0) x *= slope_;
  }
  return out;
}

Tensor LeakyReLU::backward(const Tensor& grad_out) {
  if (!have_input_) throw GraphNotBuilt("leaky_relu backward before forward");
  Tensor grad_in = grad_out;
  for (std::size_t i = 0; i < grad_in.v.size(); ++i) {
    if (cached_in_.v[i] < 0) grad_in.v[i] *= slope_;
  }
  return grad_in;
}

// ---- Dropout ----

Dropout::Dropout(double rate) : rate_(rate) {
  if (rate < 0.0 || rate >= 1.0) {
    throw BadConfig("dropout rate must be in [0,1), got " + std::to_string(rate));
  }
}

Tensor Dropout::forward(const Tensor& in, Mode mode, Rng& rng) {
  have_input_ = true;
  if (mode == Mode::kEval || rate_ == 0.0) {
    mask_.assign(in.size(), 1.0);
    return in;
  }
  const double keep = 1.0 - rate_;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  mask_.resize(in.size());
  Tensor out = in;
  for (std::size_t i = 0; i < out.v.size(); ++i) {
    mask_[i] = (u(rng) < rate_) ? 0.0 : 1.0 / keep;
    out.v[i] *= mask_[i];
  }
  return out;
}

Tensor Dropout::backward(const Tensor& grad_out) {
  if (!have_input_) throw GraphNotBuilt("dropout backward before forward");
  Tensor grad_in = grad_out;
  for (std::size_t i = 0; i < grad_in.v.size(); ++i) grad_in.v[i] *= mask_[i];
  return grad_in;
}

// ---- Linear ----

Linear::Linear(int in_features, int out_features, Rng& init_rng)
    : in_(in_features), out_(out_features), w_({out_features, in_features}),
      b_({out_features}) {
  kaiming_init(w_, in_features, init_rng);
}

Tensor Linear::forward(const Tensor& in, Mode, Rng&) {
  if (static_cast<int>(in.size()) != in_) {
    throw ShapeMismatch("linear expects " + std::to_string(in_) +
                        " features, got " + shape_string(in.shape));
  }
  cached_in_ = in;
  have_input_ = true;
  Tensor out({out_});
  for (int o = 0; o < out_; ++o) {
    double acc = b_.v[static_cast<std::size_t>(o)];
    const double* wrow = &w_.v[static_cast<std::size_t>(o) * in_];
    for (int i = 0; i < in_; ++i) acc += wrow[i] * in.v[static_cast<std::size_t>(i)];
    out.v[static_cast<std::size_t>(o)] = acc;
  }
  return out;
}

Tensor Linear::backward(const Tensor& grad_out) {
  if (!have_input_) throw GraphNotBuilt("linear backward before forward");
  w_.ensure_grad();
  b_.ensure_grad();
  Tensor grad_in({in_});
  for (int o = 0; o < out_; ++o) {
    const double go = grad_out.v[static_cast<std::size_t>(o)];
    b_.g[static_cast<std::size_t>(o)] += go;
    const std::size_t row = static_cast<std::size_t>(o) * in_;
    for (int i = 0; i < in_; ++i) {
      w_.g[row + i] += go * cached_in_.v[static_cast<std::size_t>(i)];
      grad_in.v[static_cast<std::size_t>(i)] += go * w_.v[row + i];
    }
  }
  return grad_in;
}

std::vector<NamedParam> Linear::params(const std::string& prefix) {
  return {{prefix + ".w", &w_}, {prefix + ".b", &b_}};
}

// ---- Flatten ----

Tensor Flatten::forward(const Tensor& in, Mode, Rng&) {
  cached_shape_ = in.shape;
  have_input_ = true;
  Tensor out = in;
  out.shape = {static_cast<int>(in.size())};
  return out;
}

Tensor Flatten::backward(const Tensor& grad_out) {
  if (!have_input_) throw GraphNotBuilt("flatten backward before forward");
  Tensor grad_in = grad_out;
  grad_in.shape = cached_shape_;
  return grad_in;
}

// ---- Sequential ----

Tensor Sequential::forward(const Tensor& in, Mode mode, Rng& rng) {
  Tensor x = in;
  for (auto& layer : layers_) x = layer->forward(x, mode, rng);
  return x;
}

Tensor Sequential::backward(const Tensor& grad_out) {
  Tensor g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    g = (*it)->backward(g);
  }
  return g;
}

std::vector<NamedParam> Sequential::params(const std::string& prefix) {
  std::vector<NamedParam> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    auto sub = layers_[i]->params(prefix + "." + std::to_string(i) + "." +
                                  layers_[i]->kind());
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

}  // namespace deeppco
