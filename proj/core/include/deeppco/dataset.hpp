#pragma once

#include <cstddef>
#include <vector>

#include "deeppco/encoding.hpp"
#include "deeppco/pose.hpp"

namespace deeppco {

// One training example: stacked consecutive-frame input and the
// relative pose frame i -> i+1 as the regression target.
struct SamplePair {
  FramePairInput input;
  PoseVec6 label;
};

// Random-access view over sample pairs. Implementations may load and
// encode lazily; get() must be deterministic for a given index.
class PairDataset {
 public:
  virtual ~PairDataset() = default;
  virtual std::size_t size() const = 0;
  virtual SamplePair get(std::size_t i) const = 0;
};

class InMemoryPairs final : public PairDataset {
 public:
  explicit InMemoryPairs(std::vector<SamplePair> pairs)
      : pairs_(std::move(pairs)) {}

  std::size_t size() const override { return pairs_.size(); }
  SamplePair get(std::size_t i) const override { return pairs_[i]; }

 private:
  std::vector<SamplePair> pairs_;
};

}  // namespace deeppco
