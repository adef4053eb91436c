#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "deeppco/model.hpp"

namespace deeppco {

// Self-describing binary checkpoint: magic + version + config digest,
// then named parameter blobs (little-endian f32) in declaration order.
// Loading into a model whose digest differs throws DigestMismatch.
//
// Metadata (epoch) rides in the header so training can resume.

struct NamedBlobs {
  std::uint64_t digest = 0;
  std::uint32_t epoch = 0;
  std::vector<std::pair<std::string, std::vector<float>>> blobs;
};

void write_named_blobs(const std::filesystem::path& path, const NamedBlobs& nb);
NamedBlobs read_named_blobs(const std::filesystem::path& path);

void save_checkpoint(const std::filesystem::path& path, DeepPcoModel& model,
                     std::uint32_t epoch = 0);
// Returns the stored epoch.
std::uint32_t load_checkpoint(const std::filesystem::path& path,
                              DeepPcoModel& model);

// Import hook for externally pretrained convolutional weights (named
// f32 blobs in the same container format). Disabled unless explicitly
// called; blobs whose names match model parameters are copied, others
// are ignored. Returns the number of parameters imported.
std::size_t import_named_weights(const std::filesystem::path& path,
                                 DeepPcoModel& model);

// Digest of all parameter values, for evaluation-purity checks.
std::uint64_t parameter_value_digest(DeepPcoModel& model);

}  // namespace deeppco
