#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "deeppco/dataset.hpp"
#include "deeppco/eval.hpp"
#include "deeppco/model.hpp"

namespace deeppco {

struct TrainConfig {
  double lr0 = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int batch_size = 8;
  int epochs = 30;
  int halve_lr_every = 10;  // epochs per learning-rate halving
  double k = 100.0;         // orientation loss scale
  double dropout = 0.5;
  double clip_norm = 10.0;  // 0 disables gradient clipping
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;  // empty: no checkpoints / CSV

  void validate() const;
  std::string describe() const;
};

// lr0 · 0.5^⌊epoch / halve_lr_every⌋
double lr_at(const TrainConfig& cfg, int epoch);

// Per-parameter Adam with bias correction. Moments persist across
// learning-rate changes.
class Adam {
 public:
  Adam(double beta1, double beta2, double eps) : b1_(beta1), b2_(beta2), eps_(eps) {}

  void step(std::vector<NamedParam>& params, double lr);
  std::int64_t step_count() const { return t_; }

  // moment arrays keyed by parameter order, for resume
  std::vector<std::vector<double>>& first_moments() { return m_; }
  std::vector<std::vector<double>>& second_moments() { return v_; }
  void set_step_count(std::int64_t t) { t_ = t; }

 private:
  double b1_, b2_, eps_;
  std::int64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

struct LossRecord {
  int epoch = 0;
  int step = 0;
  double lr = 0.0;
  double loss_total = 0.0;
  double loss_trans_subnet = 0.0;
  double loss_orient_subnet = 0.0;
};

struct TrainResult {
  std::vector<LossRecord> history;
  std::vector<double> epoch_mean_loss;
};

void write_loss_csv(const std::filesystem::path& path,
                    const std::vector<LossRecord>& history);

// Adam moments + step counter, so a resumed run continues the schedule
// exactly. Written next to each checkpoint as <name>.opt.
void save_optimizer_state(const std::filesystem::path& path, Adam& adam);
void load_optimizer_state(const std::filesystem::path& path, Adam& adam);

// Seeded-shuffle epoch loop: one Adam step per batch, last partial
// batch kept, per-epoch checkpoint when out_dir is set. A non-finite
// loss aborts with NonFiniteLoss after dumping the offending batch
// indices. Fully deterministic for a fixed (seed, config, data).
// start_epoch > 0 resumes mid-schedule (the caller restores weights).
TrainResult train(DeepPcoModel& model, const PairDataset& data,
                  const TrainConfig& cfg, int start_epoch = 0,
                  Adam* optimizer = nullptr);

struct EvalResult {
  std::vector<PoseVec6> predictions;
  std::vector<PoseVec6> truths;
  RmseReport rmse;
};

// Dropout off, parameters untouched.
EvalResult evaluate(DeepPcoModel& model, const PairDataset& data);

}  // namespace deeppco
