#include "deeppco/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "deeppco/checkpoint.hpp"

namespace deeppco {

void TrainConfig::validate() const {
  if (lr0 <= 0 || beta1 <= 0 || beta2 <= 0 || eps <= 0 || k <= 0) {
    throw BadConfig("train config: rates and scales must be positive");
  }
  if (beta1 >= 1 || beta2 >= 1) throw BadConfig("train config: betas must be < 1");
  if (batch_size < 1) throw BadConfig("train config: batch size must be >= 1");
  if (epochs < 1) throw BadConfig("train config: epochs must be >= 1");
  if (halve_lr_every < 1) throw BadConfig("train config: halve_lr_every must be >= 1");
  if (dropout < 0 || dropout >= 1) throw BadConfig("train config: dropout in [0,1)");
  if (clip_norm < 0) throw BadConfig("train config: clip_norm must be >= 0");
}

std::string TrainConfig::describe() const {
  std::ostringstream ss;
  ss << "lr0=" << lr0 << " beta1=" << beta1 << " beta2=" << beta2
     << " eps=" << eps << " batch_size=" << batch_size << " epochs=" << epochs
     << " halve_lr_every=" << halve_lr_every << " k=" << k
     << " dropout=" << dropout << " clip_norm=" << clip_norm
     << " seed=" << seed;
  return ss.str();
}

double lr_at(const TrainConfig& cfg, int epoch) {
  return cfg.lr0 * std::pow(0.5, epoch / cfg.halve_lr_every);
}

void Adam::step(std::vector<NamedParam>& params, double lr) {
  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i].assign(params[i].second->v.size(), 0.0);
      v_[i].assign(params[i].second->v.size(), 0.0);
    }
  }
  if (m_.size() != params.size()) {
    throw ShapeMismatch("adam state does not match parameter list");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor* p = params[i].second;
    if (p->g.size() != p->v.size()) {
      throw ShapeMismatch("parameter '" + params[i].first + "' has no gradient");
    }
    if (m_[i].size() != p->v.size()) {
      throw ShapeMismatch("adam moment shape mismatch for '" + params[i].first + "'");
    }
    for (std::size_t j = 0; j < p->v.size(); ++j) {
      const double g = p->g[j];
      m_[i][j] = b1_ * m_[i][j] + (1.0 - b1_) * g;
      v_[i][j] = b2_ * v_[i][j] + (1.0 - b2_) * g * g;
      const double m_hat = m_[i][j] / bc1;
      const double v_hat = v_[i][j] / bc2;
      p->v[j] -= lr * m_hat / (std::sqrt(v_hat) + eps_);
    }
  }
}

void write_loss_csv(const std::filesystem::path& path,
                    const std::vector<LossRecord>& history) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << "epoch,step,lr,loss_total,loss_trans_subnet,loss_orient_subnet\n";
  f.precision(12);
  for (const LossRecord& r : history) {
    f << r.epoch << ',' << r.step << ',' << r.lr << ',' << r.loss_total << ','
      << r.loss_trans_subnet << ',' << r.loss_orient_subnet << '\n';
  }
  if (!f) throw IoError("write failed: " + path.string());
}

void save_optimizer_state(const std::filesystem::path& path, Adam& adam) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  const std::int64_t t = adam.step_count();
  f.write(reinterpret_cast<const char*>(&t), sizeof(t));
  const std::uint64_t n = adam.first_moments().size();
  f.write(reinterpret_cast<const char*>(&n), sizeof(n));
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t sz = adam.first_moments()[i].size();
    f.write(reinterpret_cast<const char*>(&sz), sizeof(sz));
    f.write(reinterpret_cast<const char*>(adam.first_moments()[i].data()),
            static_cast<std::streamsize>(sz * sizeof(double)));
    f.write(reinterpret_cast<const char*>(adam.second_moments()[i].data()),
            static_cast<std::streamsize>(sz * sizeof(double)));
  }
  if (!f) throw IoError("write failed: " + path.string());
}

void load_optimizer_state(const std::filesystem::path& path, Adam& adam) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::int64_t t;
  f.read(reinterpret_cast<char*>(&t), sizeof(t));
  std::uint64_t n;
  f.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (!f) throw TruncatedFile(path.string() + ": short read");
  adam.set_step_count(t);
  adam.first_moments().resize(n);
  adam.second_moments().resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t sz;
    f.read(reinterpret_cast<char*>(&sz), sizeof(sz));
    adam.first_moments()[i].resize(sz);
    adam.second_moments()[i].resize(sz);
    f.read(reinterpret_cast<char*>(adam.first_moments()[i].data()),
           static_cast<std::streamsize>(sz * sizeof(double)));
    f.read(reinterpret_cast<char*>(adam.second_moments()[i].data()),
           static_cast<std::streamsize>(sz * sizeof(double)));
    if (!f) throw TruncatedFile(path.string() + ": short read");
  }
}

namespace {

// Per-epoch derived stream: shuffle order and dropout masks depend only
// on (seed, epoch, weights at epoch start), so a resumed run replays a
// continuous one exactly.
Rng epoch_rng(std::uint64_t seed, int epoch) {
  return Rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(epoch) + 1);
}

double global_grad_norm(std::vector<NamedParam>& params) {
  double sq = 0.0;
  for (auto& [name, t] : params) {
    for (double g : t->g) sq += g * g;
  }
  return std::sqrt(sq);
}

}  // namespace

TrainResult train(DeepPcoModel& model, const PairDataset& data,
                  const TrainConfig& cfg, int start_epoch, Adam* optimizer) {
  cfg.validate();
  if (data.size() == 0) throw BadConfig("train: empty dataset");

  Adam local(cfg.beta1, cfg.beta2, cfg.eps);
  Adam& adam = optimizer ? *optimizer : local;

  TrainResult result;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  if (!cfg.out_dir.empty()) std::filesystem::create_directories(cfg.out_dir);

  for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
    Rng rng = epoch_rng(cfg.seed, epoch);
    std::shuffle(order.begin(), order.end(), rng);
    model.reseed(rng());  // dropout stream for this epoch
    const double lr = lr_at(cfg, epoch);

    double epoch_loss_sum = 0.0;
    int steps_in_epoch = 0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
      const double inv_batch = 1.0 / static_cast<double>(end - begin);

      model.zero_grad();
      double batch_total = 0.0, batch_trans = 0.0, batch_orient = 0.0;
      for (std::size_t s = begin; s < end; ++s) {
        const SamplePair sample = data.get(order[s]);
        const ModelOutput out = model.forward(sample.input, Mode::kTrain);
        TotalLoss loss = total_loss(out, sample.label, cfg.k);
        batch_total += loss.value;
        batch_trans += loss.translation_part;
        batch_orient += loss.orientation_part;
        // mean over the batch
        if (loss.grad_translation) {
          loss.grad_translation->p *= inv_batch;
          loss.grad_translation->q *= inv_batch;
        }
        if (loss.grad_orientation) {
          loss.grad_orientation->p *= inv_batch;
          loss.grad_orientation->q *= inv_batch;
        }
        model.backward(loss.grad_translation, loss.grad_orientation);
      }
      batch_total *= inv_batch;
      batch_trans *= inv_batch;
      batch_orient *= inv_batch;

      if (!std::isfinite(batch_total)) {
        std::ostringstream dump;
        dump << "non-finite loss at epoch " << epoch << " step " << steps_in_epoch
             << "; batch indices:";
        for (std::size_t s = begin; s < end; ++s) dump << ' ' << order[s];
        throw NonFiniteLoss(dump.str());
      }

      auto params = model.params();
      if (cfg.clip_norm > 0) {
        const double norm = global_grad_norm(params);
        if (norm > cfg.clip_norm) {
          const double scale = cfg.clip_norm / norm;
          for (auto& [name, t] : params) {
            for (double& g : t->g) g *= scale;
          }
        }
      }
      adam.step(params, lr);

      result.history.push_back({epoch, steps_in_epoch, lr, batch_total,
                                batch_trans, batch_orient});
      epoch_loss_sum += batch_total;
      ++steps_in_epoch;
    }
    result.epoch_mean_loss.push_back(epoch_loss_sum / steps_in_epoch);

    if (!cfg.out_dir.empty()) {
      char name[32];
      std::snprintf(name, sizeof(name), "epoch%03d.ckpt", epoch);
      save_checkpoint(cfg.out_dir / name, model,
                      static_cast<std::uint32_t>(epoch + 1));
      save_optimizer_state(cfg.out_dir / (std::string(name) + ".opt"), adam);
      write_loss_csv(cfg.out_dir / "loss.csv", result.history);
    }
  }
  return result;
}

EvalResult evaluate(DeepPcoModel& model, const PairDataset& data) {
  EvalResult res;
  res.predictions.reserve(data.size());
  res.truths.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const SamplePair sample = data.get(i);
    const ModelOutput out = model.forward(sample.input, Mode::kEval);
    res.predictions.push_back(out.fused());
    res.truths.push_back(sample.label);
  }
  res.rmse = rmse_relative(res.predictions, res.truths);
  return res;
}

}  // namespace deeppco
