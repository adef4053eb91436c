// deeppco command-line driver.
//
// Exit codes: 0 ok, 2 I/O failure, 3 malformed data, 4 numeric failure,
// 5 checkpoint/config incompatibility.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "deeppco/checkpoint.hpp"
#include "deeppco/config.hpp"
#include "deeppco/eval.hpp"
#include "deeppco/kitti_io.hpp"
#include "deeppco/synthetic.hpp"
#include "deeppco/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 2;
constexpr int kExitFormat = 3;
constexpr int kExitNumeric = 4;
constexpr int kExitCompat = 5;

struct CommonOpts {
  std::string config_path;
  std::string profile = "tiny";
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "key = value config file");
  cmd->add_option("--profile", o.profile, "network/projection size: tiny|full")
      ->check(CLI::IsMember({"tiny", "full"}));
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--out", o.out_dir, "output directory");
}

// every command logs how it was resolved, so reruns are reproducible
void reproducibility_header(const std::string& cmd,
                            const deeppco::TrainConfig* tc,
                            const CommonOpts& o) {
  std::cout << "# deeppco " << cmd << " profile=" << o.profile
            << " seed=" << o.seed << "\n";
  if (tc != nullptr) std::cout << "# " << tc->describe() << "\n";
}

deeppco::TrainConfig resolve_train_config(const CommonOpts& o) {
  deeppco::TrainConfig cfg;
  if (!o.config_path.empty()) {
    cfg = deeppco::train_config_from(deeppco::load_kv_config(o.config_path), cfg);
  }
  cfg.seed = o.seed;
  cfg.out_dir = o.out_dir;
  return cfg;
}

deeppco::ModelVariant parse_variant(const std::string& v) {
  if (v == "both") return deeppco::ModelVariant::kBoth;
  if (v == "translation") return deeppco::ModelVariant::kTranslationOnly;
  return deeppco::ModelVariant::kOrientationOnly;
}

deeppco::DeepPcoModel make_model(const CommonOpts& o, const std::string& variant,
                                 bool single_branch) {
  deeppco::ModelProfile prof = deeppco::profile_by_name(o.profile);
  if (single_branch) {
    prof.translation.single_branch = true;
    prof.orientation.single_branch = true;
  }
  return deeppco::DeepPcoModel(prof.translation, prof.orientation, o.seed,
                               parse_variant(variant));
}

std::vector<deeppco::SamplePair> load_kitti_pairs(
    const std::string& root, const std::vector<std::string>& sequences,
    const deeppco::ProjectionConfig& cfg) {
  std::vector<deeppco::SamplePair> all;
  deeppco::DatasetLayout layout{root};
  for (const std::string& seq : sequences) {
    deeppco::KittiPairDataset ds(layout, seq, cfg);
    for (std::size_t i = 0; i < ds.size(); ++i) all.push_back(ds.get(i));
  }
  return all;
}

int cmd_encode(const CommonOpts& o, const std::string& input_dir) {
  const deeppco::ProjectionConfig cfg =
      deeppco::profile_by_name(o.profile).projection;
  reproducibility_header("encode", nullptr, o);

  if (!fs::is_directory(input_dir)) {
    std::cerr << "encode: not a directory: " << input_dir << "\n";
    return kExitIo;
  }
  std::vector<fs::path> bins;
  for (const auto& e : fs::directory_iterator(input_dir)) {
    if (e.path().extension() == ".bin") bins.push_back(e.path());
  }
  std::sort(bins.begin(), bins.end());
  if (bins.empty()) {
    std::cerr << "encode: warning: no .bin scans in " << input_dir << "\n";
    return kExitOk;
  }

  fs::create_directories(o.out_dir);
  std::ofstream stats_out(fs::path(o.out_dir) / "encode_stats.jsonl");
  for (const fs::path& bin : bins) {
    std::size_t dropped = 0;
    const deeppco::PointCloud pc = deeppco::read_velodyne_bin(bin, &dropped);
    deeppco::EncodeStats stats;
    const deeppco::DepthImage img = deeppco::project_cloud(pc, cfg, &stats);
    const fs::path pgm = fs::path(o.out_dir) / (bin.stem().string() + ".pgm");
    deeppco::write_pgm(img, pgm.string());

    json j;
    j["scan"] = bin.filename().string();
    j["points"] = stats.total;
    j["in_fov"] = stats.in_fov;
    j["in_fov_fraction"] =
        stats.total ? static_cast<double>(stats.in_fov) / stats.total : 0.0;
    j["collisions"] = stats.collisions;
    j["dropped_origin"] = stats.dropped_origin;
    j["dropped_nonfinite"] = dropped;
    stats_out << j.dump() << "\n";
  }
  std::cout << "encoded " << bins.size() << " scans -> " << o.out_dir << "\n";
  return kExitOk;
}

int cmd_dataset_prep(const CommonOpts& o, const std::string& root) {
  reproducibility_header("dataset-prep", nullptr, o);
  const deeppco::DatasetLayout layout{root};
  const deeppco::SplitSpec split;
  const deeppco::ProjectionConfig cfg =
      deeppco::profile_by_name(o.profile).projection;

  fs::create_directories(o.out_dir);
  std::ofstream manifest(fs::path(o.out_dir) / "manifest.csv");
  manifest << "sequence,split,frames,pairs\n";
  std::size_t checked = 0;
  const auto visit = [&](const std::vector<std::string>& seqs,
                         const char* name) {
    for (const std::string& seq : seqs) {
      if (!fs::exists(layout.pose_path(seq))) continue;
      deeppco::KittiPairDataset ds(layout, seq, cfg);
      manifest << seq << ',' << name << ',' << ds.poses().size() << ','
               << ds.size() << "\n";
      ++checked;
    }
  };
  visit(split.train, "train");
  visit(split.test, "test");
  if (checked == 0) {
    std::cerr << "dataset-prep: no sequences under " << root << "\n";
    return kExitIo;
  }
  std::cout << "validated " << checked << " sequences -> "
            << (fs::path(o.out_dir) / "manifest.csv").string() << "\n";
  return kExitOk;
}

int cmd_synth(const CommonOpts& o, int frames, double noise,
              const std::string& sequence_id) {
  reproducibility_header("synth", nullptr, o);
  deeppco::SceneSpec scene = deeppco::default_scene(o.seed);
  scene.noise_sigma = noise;
  const deeppco::MotionSpec motion = deeppco::default_motion(o.seed + 1);
  const deeppco::ProjectionConfig cfg =
      deeppco::profile_by_name(o.profile).projection;
  const deeppco::SyntheticSequence seq =
      deeppco::generate_sequence(scene, motion, frames, cfg);
  deeppco::write_kitti_layout(o.out_dir, sequence_id, seq);
  std::cout << "wrote " << frames << " synthetic frames as sequence "
            << sequence_id << " under " << o.out_dir << "\n";
  return kExitOk;
}

int cmd_train(const CommonOpts& o, const std::string& data_root,
              std::vector<std::string> sequences, int synth_frames,
              const std::string& variant, bool single_branch,
              const std::string& resume_from) {
  deeppco::TrainConfig cfg = resolve_train_config(o);
  cfg.validate();
  reproducibility_header("train", &cfg, o);

  const deeppco::ProjectionConfig proj =
      deeppco::profile_by_name(o.profile).projection;
  std::vector<deeppco::SamplePair> pairs;
  if (synth_frames > 0) {
    const deeppco::SyntheticSequence seq = deeppco::generate_sequence(
        deeppco::default_scene(o.seed), deeppco::default_motion(o.seed + 1),
        synth_frames, proj);
    pairs = deeppco::encode_pairs(seq, proj);
  } else {
    if (sequences.empty()) sequences = deeppco::SplitSpec{}.train;
    std::vector<std::string> present;
    deeppco::DatasetLayout layout{data_root};
    for (const std::string& s : sequences) {
      if (fs::exists(layout.pose_path(s))) present.push_back(s);
    }
    if (present.empty()) {
      std::cerr << "train: no usable sequences under " << data_root << "\n";
      return kExitIo;
    }
    pairs = load_kitti_pairs(data_root, present, proj);
  }
  const deeppco::InMemoryPairs data(std::move(pairs));

  deeppco::DeepPcoModel model = make_model(o, variant, single_branch);
  deeppco::Adam adam(cfg.beta1, cfg.beta2, cfg.eps);
  int start_epoch = 0;
  if (!resume_from.empty()) {
    // checkpoints store the next epoch to run
    start_epoch = static_cast<int>(deeppco::load_checkpoint(resume_from, model));
    const fs::path opt = resume_from + ".opt";
    if (fs::exists(opt)) deeppco::load_optimizer_state(opt, adam);
    std::cout << "# resuming at epoch " << start_epoch << "\n";
  }

  const deeppco::TrainResult result =
      deeppco::train(model, data, cfg, start_epoch, &adam);
  std::cout << "trained " << data.size() << " pairs, final epoch mean loss "
            << result.epoch_mean_loss.back() << "\n";
  return kExitOk;
}

int cmd_infer(const CommonOpts& o, const std::string& checkpoint,
              const std::string& data_root, const std::string& sequence,
              const std::string& variant, bool single_branch) {
  reproducibility_header("infer", nullptr, o);
  deeppco::DeepPcoModel model = make_model(o, variant, single_branch);
  deeppco::load_checkpoint(checkpoint, model);

  const deeppco::ProjectionConfig proj =
      deeppco::profile_by_name(o.profile).projection;
  const deeppco::DatasetLayout layout{data_root};
  const deeppco::KittiPairDataset ds(layout, sequence, proj);

  fs::create_directories(o.out_dir);
  std::ofstream rel(fs::path(o.out_dir) / ("relative_" + sequence + ".csv"));
  rel << "pair,px,py,pz,qr,qp,qy\n";
  rel.precision(17);
  std::vector<deeppco::PoseVec6> steps;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const deeppco::ModelOutput out =
        model.forward(ds.get(i).input, deeppco::Mode::kEval);
    const deeppco::PoseVec6 v = out.fused();
    steps.push_back(v);
    rel << i << ',' << v.p.x() << ',' << v.p.y() << ',' << v.p.z() << ','
        << v.q.x() << ',' << v.q.y() << ',' << v.q.z() << "\n";
  }
  const std::vector<deeppco::Pose> traj =
      deeppco::integrate_trajectory(deeppco::Pose(), steps);
  deeppco::write_kitti_trajectory(
      fs::path(o.out_dir) / ("trajectory_" + sequence + ".txt"), traj);
  std::cout << "inferred " << steps.size() << " steps -> " << o.out_dir << "\n";
  return kExitOk;
}

int cmd_eval(const CommonOpts& o, const std::string& pred_file,
             const std::string& gt_file, const std::string& label) {
  reproducibility_header("eval", nullptr, o);
  for (const std::string& f : {pred_file, gt_file}) {
    if (!fs::exists(f)) {
      std::cerr << "eval: missing file: " << f << "\n";
      return kExitIo;
    }
  }
  const std::vector<deeppco::Pose> pred = deeppco::read_kitti_poses(pred_file);
  const std::vector<deeppco::Pose> gt = deeppco::read_kitti_poses(gt_file);
  if (pred.size() != gt.size()) {
    std::cerr << "eval: trajectory lengths differ (" << pred.size() << " vs "
              << gt.size() << ")\n";
    return kExitFormat;
  }
  if (pred.size() < 2) {
    std::cerr << "eval: need at least two poses\n";
    return kExitFormat;
  }

  std::vector<deeppco::PoseVec6> pred_rel, gt_rel;
  for (std::size_t i = 0; i + 1 < pred.size(); ++i) {
    pred_rel.push_back(
        deeppco::pose_to_vec6(deeppco::relative_pose(pred[i], pred[i + 1])));
    gt_rel.push_back(
        deeppco::pose_to_vec6(deeppco::relative_pose(gt[i], gt[i + 1])));
  }
  const deeppco::RmseReport rmse = deeppco::rmse_relative(pred_rel, gt_rel);
  const deeppco::DriftReport drift = deeppco::kitti_drift(pred, gt);

  std::cout << deeppco::format_rmse_report(label, rmse);
  std::cout << deeppco::format_drift_report(label, drift);
  fs::create_directories(o.out_dir);
  deeppco::write_report_csv(fs::path(o.out_dir) / "report.csv", label, rmse,
                            &drift);
  deeppco::export_trajectory_svg(pred, gt,
                                 fs::path(o.out_dir) / "trajectory.svg");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"point-cloud odometry toolkit"};
  app.require_subcommand(1);

  CommonOpts o;
  std::string input_dir, data_root, checkpoint, sequence = "00";
  std::string pred_file, gt_file, label = "eval";
  std::string variant = "both", resume_from, sequence_id = "00";
  std::vector<std::string> sequences;
  bool single_branch = false;
  int synth_frames = 0, frames = 60;
  double noise = 0.0;

  CLI::App* enc = app.add_subcommand("encode", "scan dir -> depth PGMs + stats");
  add_common(enc, o);
  enc->add_option("--input", input_dir, "directory of velodyne .bin scans")
      ->required();

  CLI::App* prep =
      app.add_subcommand("dataset-prep", "validate a KITTI-layout dataset root");
  add_common(prep, o);
  prep->add_option("--data", data_root, "dataset root")->required();

  CLI::App* synth =
      app.add_subcommand("synth", "generate a synthetic KITTI-layout sequence");
  add_common(synth, o);
  synth->add_option("--frames", frames, "number of frames");
  synth->add_option("--noise", noise, "range noise sigma, meters");
  synth->add_option("--sequence-id", sequence_id, "sequence directory name");

  CLI::App* train = app.add_subcommand("train", "train a model");
  add_common(train, o);
  train->add_option("--data", data_root, "KITTI-layout dataset root");
  train->add_option("--sequence", sequences, "sequence id (repeatable)");
  train->add_option("--synth", synth_frames,
                    "train on N generated synthetic frames instead of --data");
  train->add_option("--variant", variant, "both|translation|orientation")
      ->check(CLI::IsMember({"both", "translation", "orientation"}));
  train->add_flag("--single-branch", single_branch,
                  "one 6-wide head instead of two 3-wide heads");
  train->add_option("--resume", resume_from, "checkpoint to resume from");

  CLI::App* infer =
      app.add_subcommand("infer", "checkpoint + sequence -> trajectory");
  add_common(infer, o);
  infer->add_option("--checkpoint", checkpoint, "trained checkpoint")->required();
  infer->add_option("--data", data_root, "dataset root")->required();
  infer->add_option("--sequence", sequence, "sequence id");
  infer->add_option("--variant", variant, "both|translation|orientation")
      ->check(CLI::IsMember({"both", "translation", "orientation"}));
  infer->add_flag("--single-branch", single_branch,
                  "one 6-wide head instead of two 3-wide heads");

  CLI::App* ev = app.add_subcommand("eval", "compare two KITTI trajectories");
  add_common(ev, o);
  ev->add_option("--pred", pred_file, "predicted trajectory")->required();
  ev->add_option("--gt", gt_file, "ground-truth trajectory")->required();
  ev->add_option("--label", label, "report label");

  CLI11_PARSE(app, argc, argv);

  try {
    if (enc->parsed()) return cmd_encode(o, input_dir);
    if (prep->parsed()) return cmd_dataset_prep(o, data_root);
    if (synth->parsed()) return cmd_synth(o, frames, noise, sequence_id);
    if (train->parsed())
      return cmd_train(o, data_root, sequences, synth_frames, variant,
                       single_branch, resume_from);
    if (infer->parsed())
      return cmd_infer(o, checkpoint, data_root, sequence, variant,
                       single_branch);
    if (ev->parsed()) return cmd_eval(o, pred_file, gt_file, label);
  } catch (const deeppco::NonFiniteLoss& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const deeppco::DigestMismatch& e) {
    std::cerr << "incompatible checkpoint: " << e.what() << "\n";
    return kExitCompat;
  } catch (const deeppco::ConfigMismatch& e) {
    std::cerr << "incompatible config: " << e.what() << "\n";
    return kExitCompat;
  } catch (const deeppco::MalformedLine& e) {
    std::cerr << "malformed data: " << e.what() << "\n";
    return kExitFormat;
  } catch (const deeppco::TruncatedFile& e) {
    std::cerr << "malformed data: " << e.what() << "\n";
    return kExitFormat;
  } catch (const deeppco::BadConfig& e) {
    std::cerr << "malformed config: " << e.what() << "\n";
    return kExitFormat;
  } catch (const deeppco::IoError& e) {
    std::cerr << "I/O failure: " << e.what() << "\n";
    return kExitIo;
  } catch (const deeppco::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFormat;
  }
  return kExitOk;
}
