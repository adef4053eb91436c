#include "deeppco/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace deeppco {

namespace {

constexpr std::uint32_t kMagic = 0x4F435044;  // "DPCO"
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& f, T value) {
  // little-endian hosts only (x86/arm64); asserted at build time
  static_assert(std::endian::native == std::endian::little);
  f.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T take(std::ifstream& f, const std::string& path) {
  T value;
  f.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!f) throw TruncatedFile(path + ": short read");
  return value;
}

}  // namespace

void write_named_blobs(const std::filesystem::path& path, const NamedBlobs& nb) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  put(f, kMagic);
  put(f, kVersion);
  put(f, nb.digest);
  put(f, nb.epoch);
  put(f, static_cast<std::uint32_t>(nb.blobs.size()));
  for (const auto& [name, data] : nb.blobs) {
    put(f, static_cast<std::uint32_t>(name.size()));
    f.write(name.data(), static_cast<std::streamsize>(name.size()));
    put(f, static_cast<std::uint32_t>(data.size()));
    f.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(float)));
  }
  if (!f) throw IoError("write failed: " + path.string());
}

NamedBlobs read_named_blobs(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  if (take<std::uint32_t>(f, path.string()) != kMagic) {
    throw MalformedLine(path.string() + ": bad magic");
  }
  if (take<std::uint32_t>(f, path.string()) != kVersion) {
    throw MalformedLine(path.string() + ": unsupported version");
  }
  NamedBlobs nb;
  nb.digest = take<std::uint64_t>(f, path.string());
  nb.epoch = take<std::uint32_t>(f, path.string());
  const std::uint32_t count = take<std::uint32_t>(f, path.string());
  nb.blobs.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = take<std::uint32_t>(f, path.string());
    std::string name(name_len, '\0');
    f.read(name.data(), name_len);
    const std::uint32_t n = take<std::uint32_t>(f, path.string());
    std::vector<float> data(n);
    f.read(reinterpret_cast<char*>(data.data()),
           static_cast<std::streamsize>(n * sizeof(float)));
    if (!f) throw TruncatedFile(path.string() + ": short read in blob " + name);
    nb.blobs.emplace_back(std::move(name), std::move(data));
  }
  return nb;
}

void save_checkpoint(const std::filesystem::path& path, DeepPcoModel& model,
                     std::uint32_t epoch) {
  NamedBlobs nb;
  nb.digest = model.config_digest();
  nb.epoch = epoch;
  for (auto& [name, t] : model.params()) {
    std::vector<float> data(t->v.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      data[i] = static_cast<float>(t->v[i]);
    }
    nb.blobs.emplace_back(name, std::move(data));
  }
  write_named_blobs(path, nb);
}

std::uint32_t load_checkpoint(const std::filesystem::path& path,
                              DeepPcoModel& model) {
  const NamedBlobs nb = read_named_blobs(path);
  if (nb.digest != model.config_digest()) {
    throw DigestMismatch(path.string() + ": checkpoint config digest " +
                         std::to_string(nb.digest) + " != model digest " +
                         std::to_string(model.config_digest()));
  }
  auto params = model.params();
  if (nb.blobs.size() != params.size()) {
    throw DigestMismatch(path.string() + ": blob count mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& [name, data] = nb.blobs[i];
    Tensor* t = params[i].second;
    if (name != params[i].first || data.size() != t->v.size()) {
      throw DigestMismatch(path.string() + ": blob '" + name +
                           "' does not match parameter '" + params[i].first + "'");
    }
    for (std::size_t j = 0; j < data.size(); ++j) {
      t->v[j] = static_cast<double>(data[j]);
    }
  }
  return nb.epoch;
}

std::size_t import_named_weights(const std::filesystem::path& path,
                                 DeepPcoModel& model) {
  const NamedBlobs nb = read_named_blobs(path);
  std::size_t imported = 0;
  auto params = model.params();
  for (const auto& [name, data] : nb.blobs) {
    for (auto& [pname, t] : params) {
      if (pname == name && data.size() == t->v.size()) {
        for (std::size_t j = 0; j < data.size(); ++j) {
          t->v[j] = static_cast<double>(data[j]);
        }
        imported += data.size();
        break;
      }
    }
  }
  return imported;
}

std::uint64_t parameter_value_digest(DeepPcoModel& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto& [name, t] : model.params()) {
    for (double x : t->v) {
      std::uint64_t bits;
      std::memcpy(&bits, &x, sizeof(bits));
      for (int b = 0; b < 8; ++b) {
        h ^= (bits >> (8 * b)) & 0xFF;
        h *= 0x100000001b3ULL;
      }
    }
  }
  return h;
}

}  // namespace deeppco
