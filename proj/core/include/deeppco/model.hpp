#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "deeppco/encoding.hpp"
#include "deeppco/layers.hpp"
#include "deeppco/pose.hpp"

namespace deeppco {

// One sub-network: conv feature stack (leaky ReLU after every conv, no
// pooling, no batch norm), FC trunk with dropout, then either two
// 3-wide heads (translation / orientation) or a single 6-wide head for
// the single-branch ablation.
struct SubNetConfig {
  int input_channels = 2;
  int input_height = 16;
  int input_width = 64;
  std::vector<ConvSpec> convs;
  std::vector<int> fc_sizes;
  double dropout = 0.5;
  double leaky_slope = 0.1;
  bool single_branch = false;

  // Throws BadConfig on structural violations (empty stacks, collapsed
  // feature maps, channel mismatches).
  void validate() const;

  int flattened_features() const;
  std::size_t parameter_count() const;
  std::string describe() const;  // canonical string, feeds the digest
};

struct SubNetOutput {
  Eigen::Vector3d p;
  Eigen::Vector3d q;

  PoseVec6 vec6() const { return {p, q}; }
};

class SubNet {
 public:
  SubNet(const SubNetConfig& cfg, Rng& init_rng);

  SubNetOutput forward(const Tensor& input, Mode mode, Rng& rng);
  void backward(const Eigen::Vector3d& grad_p, const Eigen::Vector3d& grad_q);

  std::vector<NamedParam> params(const std::string& prefix);
  const SubNetConfig& config() const { return cfg_; }

 private:
  SubNetConfig cfg_;
  Sequential body_;  // convs + flatten + fc trunk
  std::unique_ptr<Linear> head_p_, head_q_;  // two-branch mode
  std::unique_ptr<Linear> head_joint_;       // single-branch mode
  bool have_forward_ = false;
};

// Which sub-networks exist; kBoth is the full parallel model, the
// single-subnet variants are the individual-network ablation.
enum class ModelVariant { kBoth, kTranslationOnly, kOrientationOnly };

const char* to_string(ModelVariant v);

struct ModelOutput {
  std::optional<SubNetOutput> translation;  // full 6-DOF from translation net
  std::optional<SubNetOutput> orientation;  // full 6-DOF from orientation net

  // p from the translation net, q from the orientation net; a missing
  // net's role is covered by the other (ablation mode).
  PoseVec6 fused() const;
};

class DeepPcoModel {
 public:
  DeepPcoModel(SubNetConfig translation_cfg, SubNetConfig orientation_cfg,
               std::uint64_t seed, ModelVariant variant = ModelVariant::kBoth);

  ModelOutput forward(const FramePairInput& pair, Mode mode);
  void backward(const std::optional<SubNetOutput>& grad_translation,
                const std::optional<SubNetOutput>& grad_orientation);

  std::vector<NamedParam> params();
  void zero_grad();

  ModelVariant variant() const { return variant_; }
  const SubNetConfig& translation_config() const { return trans_cfg_; }
  const SubNetConfig& orientation_config() const { return orient_cfg_; }
  std::uint64_t config_digest() const;
  std::size_t parameter_count() const;

  Rng& rng() { return rng_; }
  void reseed(std::uint64_t seed) { rng_.seed(seed); }

 private:
  SubNetConfig trans_cfg_, orient_cfg_;
  ModelVariant variant_;
  std::optional<SubNet> trans_, orient_;
  Rng rng_;  // dropout stream
};

// ---- loss (6-DOF weighted MSE) ----

struct LossResult {
  double value = 0.0;
  Eigen::Vector3d grad_p = Eigen::Vector3d::Zero();
  Eigen::Vector3d grad_q = Eigen::Vector3d::Zero();
};

// L = mean((p - p̂)²) + k · mean((q - q̂)²), means over 3 components.
LossResult loss_6dof(const PoseVec6& pred, const PoseVec6& truth, double k);

struct TotalLoss {
  double value = 0.0;
  double translation_part = 0.0;  // loss of the translation sub-network
  double orientation_part = 0.0;  // loss of the orientation sub-network
  std::optional<SubNetOutput> grad_translation, grad_orientation;
};

// Sum of loss_6dof over every present sub-network's full 6-DOF output;
// both specialists train against the full label.
TotalLoss total_loss(const ModelOutput& out, const PoseVec6& truth, double k);

// Parse a conv stack like "conv:2>8,k3,s2,p1|conv:8>16,k5,s2,p2".
// Only conv layers exist in this architecture; any other layer kind
// (maxpool, batchnorm, ...) is rejected with BadConfig, which makes the
// structural constraint machine-checked for configs loaded from files.
std::vector<ConvSpec> parse_conv_stack(const std::string& text);

// ---- profiles ----

struct ModelProfile {
  std::string name;
  ProjectionConfig projection;
  SubNetConfig translation;
  SubNetConfig orientation;
};

// 16x64 images, <1e6 parameters, trains in minutes on one CPU core.
ModelProfile tiny_profile();
// 64x1024 images; orientation stack follows the FlowNetS contraction.
ModelProfile full_profile();
ModelProfile profile_by_name(const std::string& name);

}  // namespace deeppco
