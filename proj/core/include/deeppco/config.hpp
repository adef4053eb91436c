#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "deeppco/trainer.hpp"

namespace deeppco {

// Flat `key = value` text config; '#' starts a comment. CLI overrides
// win over file values.
using KvConfig = std::map<std::string, std::string>;

KvConfig load_kv_config(const std::filesystem::path& path);

double kv_double(const KvConfig& kv, const std::string& key, double fallback);
int kv_int(const KvConfig& kv, const std::string& key, int fallback);
std::string kv_string(const KvConfig& kv, const std::string& key,
                      const std::string& fallback);

// Recognized keys mirror TrainConfig: lr0, beta1, beta2, eps,
// batch_size, epochs, halve_lr_every, k, dropout, clip_norm, seed.
TrainConfig train_config_from(const KvConfig& kv, TrainConfig base = {});

}  // namespace deeppco
