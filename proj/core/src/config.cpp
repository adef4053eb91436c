#include "deeppco/config.hpp"

#include <fstream>
#include <sstream>

namespace deeppco {

KvConfig load_kv_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config " + path.string());
  KvConfig kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    const auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (strip(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw MalformedLine(path.string() + ":" + std::to_string(lineno) +
                          ": expected key = value");
    }
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (key.empty()) {
      throw MalformedLine(path.string() + ":" + std::to_string(lineno) +
                          ": empty key");
    }
    kv[key] = value;
  }
  return kv;
}

double kv_double(const KvConfig& kv, const std::string& key, double fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw BadConfig("config key '" + key + "': '" + it->second +
                    "' is not a number");
  }
}

int kv_int(const KvConfig& kv, const std::string& key, int fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    std::size_t pos = 0;
    const int v = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw BadConfig("config key '" + key + "': '" + it->second +
                    "' is not an integer");
  }
}

std::string kv_string(const KvConfig& kv, const std::string& key,
                      const std::string& fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

TrainConfig train_config_from(const KvConfig& kv, TrainConfig base) {
  base.lr0 = kv_double(kv, "lr0", base.lr0);
  base.beta1 = kv_double(kv, "beta1", base.beta1);
  base.beta2 = kv_double(kv, "beta2", base.beta2);
  base.eps = kv_double(kv, "eps", base.eps);
  base.batch_size = kv_int(kv, "batch_size", base.batch_size);
  base.epochs = kv_int(kv, "epochs", base.epochs);
  base.halve_lr_every = kv_int(kv, "halve_lr_every", base.halve_lr_every);
  base.k = kv_double(kv, "k", base.k);
  base.dropout = kv_double(kv, "dropout", base.dropout);
  base.clip_norm = kv_double(kv, "clip_norm", base.clip_norm);
  base.seed = static_cast<std::uint64_t>(
      kv_double(kv, "seed", static_cast<double>(base.seed)));
  base.validate();
  return base;
}

}  // namespace deeppco
