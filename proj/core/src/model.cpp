#include "deeppco/model.hpp"

#include <sstream>

namespace deeppco {

// ---- SubNetConfig ----

void SubNetConfig::validate() const {
  if (convs.empty()) throw BadConfig("sub-network needs at least one conv layer");
  if (fc_sizes.empty()) throw BadConfig("sub-network needs an FC trunk");
  if (dropout < 0.0 || dropout >= 1.0) throw BadConfig("dropout must be in [0,1)");

  int ch = input_channels;
  int h = input_height, w = input_width;
  for (std::size_t i = 0; i < convs.size(); ++i) {
    const ConvSpec& c = convs[i];
    if (c.in_ch != ch) {
      throw BadConfig("conv " + std::to_string(i) + " expects " +
                      std::to_string(c.in_ch) + " channels, gets " +
                      std::to_string(ch));
    }
    if (c.kernel > h + 2 * c.pad || c.kernel > w + 2 * c.pad) {
      throw BadConfig("conv " + std::to_string(i) +
                      ": kernel exceeds the padded input");
    }
    h = c.out_dim(h);
    w = c.out_dim(w);
    if (h < 1 || w < 1) {
      throw BadConfig("conv " + std::to_string(i) + " collapses the feature map");
    }
    ch = c.out_ch;
  }
  for (int s : fc_sizes) {
    if (s < 1) throw BadConfig("FC width must be positive");
  }
}

int SubNetConfig::flattened_features() const {
  int ch = input_channels, h = input_height, w = input_width;
  for (const ConvSpec& c : convs) {
    h = c.out_dim(h);
    w = c.out_dim(w);
    ch = c.out_ch;
  }
  return ch * h * w;
}

std::size_t SubNetConfig::parameter_count() const {
  std::size_t n = 0;
  for (const ConvSpec& c : convs) {
    n += static_cast<std::size_t>(c.out_ch) * c.in_ch * c.kernel * c.kernel +
         c.out_ch;
  }
  int in = flattened_features();
  for (int s : fc_sizes) {
    n += static_cast<std::size_t>(s) * in + s;
    in = s;
  }
  if (single_branch) {
    n += static_cast<std::size_t>(6) * in + 6;
  } else {
    n += 2 * (static_cast<std::size_t>(3) * in + 3);
  }
  return n;
}

std::string SubNetConfig::describe() const {
  std::ostringstream ss;
  ss << "in=" << input_channels << "x" << input_height << "x" << input_width;
  for (const ConvSpec& c : convs) {
    ss << "|conv:" << c.in_ch << ">" << c.out_ch << ",k" << c.kernel << ",s"
       << c.stride << ",p" << c.pad;
  }
  ss << "|fc:";
  for (std::size_t i = 0; i < fc_sizes.size(); ++i) {
    if (i) ss << ",";
    ss << fc_sizes[i];
  }
  ss << "|drop=" << dropout << "|slope=" << leaky_slope
     << "|heads=" << (single_branch ? "joint6" : "3+3");
  return ss.str();
}

// ---- SubNet ----

SubNet::SubNet(const SubNetConfig& cfg, Rng& init_rng) : cfg_(cfg) {
  cfg_.validate();
  for (const ConvSpec& c : cfg_.convs) {
    body_.add(std::make_unique<Conv2d>(c, init_rng));
    body_.add(std::make_unique<LeakyReLU>(cfg_.leaky_slope));
  }
  body_.add(std::make_unique<Flatten>());
  int in = cfg_.flattened_features();
  for (int s : cfg_.fc_sizes) {
    body_.add(std::make_unique<Linear>(in, s, init_rng));
    body_.add(std::make_unique<LeakyReLU>(cfg_.leaky_slope));
    body_.add(std::make_unique<Dropout>(cfg_.dropout));
    in = s;
  }
  if (cfg_.single_branch) {
    head_joint_ = std::make_unique<Linear>(in, 6, init_rng);
  } else {
    head_p_ = std::make_unique<Linear>(in, 3, init_rng);
    head_q_ = std::make_unique<Linear>(in, 3, init_rng);
  }
  // regression heads start near zero: pose steps are small, and with
  // k = 100 a unit-scale initial orientation guess dominates the loss
  for (Linear* head : {head_joint_.get(), head_p_.get(), head_q_.get()}) {
    if (head == nullptr) continue;
    for (double& w : head->weight().v) w *= 0.1;
  }
}

SubNetOutput SubNet::forward(const Tensor& input, Mode mode, Rng& rng) {
  const Tensor trunk = body_.forward(input, mode, rng);
  have_forward_ = true;
  SubNetOutput out;
  if (cfg_.single_branch) {
    const Tensor o = head_joint_->forward(trunk, mode, rng);
    out.p = {o.v[0], o.v[1], o.v[2]};
    out.q = {o.v[3], o.v[4], o.v[5]};
  } else {
    const Tensor op = head_p_->forward(trunk, mode, rng);
    const Tensor oq = head_q_->forward(trunk, mode, rng);
    out.p = {op.v[0], op.v[1], op.v[2]};
    out.q = {oq.v[0], oq.v[1], oq.v[2]};
  }
  return out;
}

void SubNet::backward(const Eigen::Vector3d& grad_p, const Eigen::Vector3d& grad_q) {
  if (!have_forward_) throw GraphNotBuilt("subnet backward before forward");
  Tensor grad_trunk;
  if (cfg_.single_branch) {
    Tensor g({6});
    for (int i = 0; i < 3; ++i) {
      g.v[static_cast<std::size_t>(i)] = grad_p[i];
      g.v[static_cast<std::size_t>(i + 3)] = grad_q[i];
    }
    grad_trunk = head_joint_->backward(g);
  } else {
    Tensor gp({3}), gq({3});
    for (int i = 0; i < 3; ++i) {
      gp.v[static_cast<std::size_t>(i)] = grad_p[i];
      gq.v[static_cast<std::size_t>(i)] = grad_q[i];
    }
    grad_trunk = head_p_->backward(gp);
    const Tensor gq_trunk = head_q_->backward(gq);
    for (std::size_t i = 0; i < grad_trunk.v.size(); ++i) {
      grad_trunk.v[i] += gq_trunk.v[i];
    }
  }
  body_.backward(grad_trunk);
}

std::vector<NamedParam> SubNet::params(const std::string& prefix) {
  std::vector<NamedParam> out = body_.params(prefix + ".body");
  if (cfg_.single_branch) {
    auto h = head_joint_->params(prefix + ".head");
    out.insert(out.end(), h.begin(), h.end());
  } else {
    auto hp = head_p_->params(prefix + ".head_p");
    auto hq = head_q_->params(prefix + ".head_q");
    out.insert(out.end(), hp.begin(), hp.end());
    out.insert(out.end(), hq.begin(), hq.end());
  }
  return out;
}

// ---- DeepPcoModel ----

const char* to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::kBoth: return "both";
    case ModelVariant::kTranslationOnly: return "translation-only";
    case ModelVariant::kOrientationOnly: return "orientation-only";
  }
  return "unknown";
}

PoseVec6 ModelOutput::fused() const {
  PoseVec6 v;
  if (translation && orientation) {
    v.p = translation->p;
    v.q = orientation->q;
  } else if (translation) {
    v = translation->vec6();
  } else if (orientation) {
    v = orientation->vec6();
  }
  return v;
}

DeepPcoModel::DeepPcoModel(SubNetConfig translation_cfg, SubNetConfig orientation_cfg,
                           std::uint64_t seed, ModelVariant variant)
    : trans_cfg_(std::move(translation_cfg)),
      orient_cfg_(std::move(orientation_cfg)),
      variant_(variant),
      rng_(seed) {
  Rng init_rng(seed ^ 0x5DEECE66DULL);
  if (variant_ != ModelVariant::kOrientationOnly) {
    trans_.emplace(trans_cfg_, init_rng);
  }
  if (variant_ != ModelVariant::kTranslationOnly) {
    orient_.emplace(orient_cfg_, init_rng);
  }
}

ModelOutput DeepPcoModel::forward(const FramePairInput& pair, Mode mode) {
  ModelOutput out;
  if (trans_) out.translation = trans_->forward(pair.translation_input, mode, rng_);
  if (orient_) out.orientation = orient_->forward(pair.orientation_input, mode, rng_);
  return out;
}

void DeepPcoModel::backward(const std::optional<SubNetOutput>& grad_translation,
                            const std::optional<SubNetOutput>& grad_orientation) {
  if (trans_ && grad_translation) {
    trans_->backward(grad_translation->p, grad_translation->q);
  }
  if (orient_ && grad_orientation) {
    orient_->backward(grad_orientation->p, grad_orientation->q);
  }
}

std::vector<NamedParam> DeepPcoModel::params() {
  std::vector<NamedParam> out;
  if (trans_) {
    auto t = trans_->params("trans");
    out.insert(out.end(), t.begin(), t.end());
  }
  if (orient_) {
    auto o = orient_->params("orient");
    out.insert(out.end(), o.begin(), o.end());
  }
  return out;
}

void DeepPcoModel::zero_grad() {
  for (auto& [name, t] : params()) t->zero_grad();
}

std::uint64_t DeepPcoModel::config_digest() const {
  std::string desc = std::string(to_string(variant_));
  if (variant_ != ModelVariant::kOrientationOnly) desc += "|T{" + trans_cfg_.describe() + "}";
  if (variant_ != ModelVariant::kTranslationOnly) desc += "|O{" + orient_cfg_.describe() + "}";
  // FNV-1a
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : desc) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::size_t DeepPcoModel::parameter_count() const {
  std::size_t n = 0;
  if (trans_) n += trans_cfg_.parameter_count();
  if (orient_) n += orient_cfg_.parameter_count();
  return n;
}

// ---- loss ----

LossResult loss_6dof(const PoseVec6& pred, const PoseVec6& truth, double k) {
  if (k <= 0) throw BadConfig("loss scale k must be positive");
  LossResult r;
  const Eigen::Vector3d dp = pred.p - truth.p;
  const Eigen::Vector3d dq = pred.q - truth.q;
  r.value = dp.squaredNorm() / 3.0 + k * dq.squaredNorm() / 3.0;
  r.grad_p = 2.0 / 3.0 * dp;
  r.grad_q = 2.0 * k / 3.0 * dq;
  return r;
}

TotalLoss total_loss(const ModelOutput& out, const PoseVec6& truth, double k) {
  TotalLoss t;
  if (out.translation) {
    const LossResult l = loss_6dof(out.translation->vec6(), truth, k);
    t.translation_part = l.value;
    t.value += l.value;
    t.grad_translation = SubNetOutput{l.grad_p, l.grad_q};
  }
  if (out.orientation) {
    const LossResult l = loss_6dof(out.orientation->vec6(), truth, k);
    t.orientation_part = l.value;
    t.value += l.value;
    t.grad_orientation = SubNetOutput{l.grad_p, l.grad_q};
  }
  return t;
}

std::vector<ConvSpec> parse_conv_stack(const std::string& text) {
  std::vector<ConvSpec> out;
  std::istringstream stream(text);
  std::string item;
  while (std::getline(stream, item, '|')) {
    // trim
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    item = item.substr(b, e - b + 1);

    if (item.rfind("conv:", 0) != 0) {
      throw BadConfig("unsupported layer '" + item +
                      "': only conv layers exist in this architecture "
                      "(no pooling, no batch normalization)");
    }
    ConvSpec c;
    char gt, comma1, k, comma2, s, comma3, p;
    std::istringstream ss(item.substr(5));
    if (!(ss >> c.in_ch >> gt >> c.out_ch >> comma1 >> k >> c.kernel >> comma2 >>
          s >> c.stride >> comma3 >> p >> c.pad) ||
        gt != '>' || comma1 != ',' || k != 'k' || comma2 != ',' || s != 's' ||
        comma3 != ',' || p != 'p') {
      throw BadConfig("cannot parse conv spec '" + item +
                      "' (expected conv:IN>OUT,kK,sS,pP)");
    }
    out.push_back(c);
  }
  if (out.empty()) throw BadConfig("empty conv stack");
  return out;
}

// ---- profiles ----

ModelProfile tiny_profile() {
  ModelProfile p;
  p.name = "tiny";
  p.projection = tiny_projection();

  p.translation.input_channels = 2;
  p.translation.input_height = 16;
  p.translation.input_width = 64;
  p.translation.convs = {
      {2, 8, 3, 2, 1}, {8, 16, 3, 2, 1}, {16, 32, 3, 2, 1}, {32, 32, 3, 2, 1}};
  p.translation.fc_sizes = {64, 32};

  p.orientation.input_channels = 6;
  p.orientation.input_height = 16;
  p.orientation.input_width = 64;
  // FlowNetS-shaped contraction, scaled down
  p.orientation.convs = {{6, 8, 7, 2, 3},
                         {8, 16, 5, 2, 2},
                         {16, 32, 5, 2, 2},
                         {32, 32, 3, 1, 1},
                         {32, 64, 3, 2, 1}};
  p.orientation.fc_sizes = {64, 32};
  return p;
}

ModelProfile full_profile() {
  ModelProfile p;
  p.name = "full";
  p.projection = full_projection();

  p.translation.input_channels = 2;
  p.translation.input_height = 64;
  p.translation.input_width = 1024;
  p.translation.convs = {
      {2, 64, 3, 2, 1}, {64, 128, 3, 2, 1}, {128, 256, 3, 2, 1}, {256, 512, 3, 2, 1}};
  p.translation.fc_sizes = {512, 128};

  p.orientation.input_channels = 6;
  p.orientation.input_height = 64;
  p.orientation.input_width = 1024;
  // FlowNetS contraction
  p.orientation.convs = {{6, 64, 7, 2, 3},
                         {64, 128, 5, 2, 2},
                         {128, 256, 5, 2, 2},
                         {256, 256, 3, 1, 1},
                         {256, 512, 3, 2, 1},
                         {512, 512, 3, 1, 1},
                         {512, 512, 3, 2, 1},
                         {512, 512, 3, 1, 1},
                         {512, 1024, 3, 2, 1}};
  p.orientation.fc_sizes = {512, 128};
  return p;
}

ModelProfile profile_by_name(const std::string& name) {
  if (name == "tiny") return tiny_profile();
  if (name == "full") return full_profile();
  throw BadConfig("unknown profile '" + name + "' (expected tiny or full)");
}

}  // namespace deeppco
