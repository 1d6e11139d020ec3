#pragma once

#include <cstdint>

#include "raylearn/common.hpp"

namespace raylearn {

// Primes driving the first 32 Halton dimensions.
inline constexpr int kHaltonPrimes[32] = {
    2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31,  37,  41,  43,  47,  53,
    59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131};

inline constexpr int kHaltonDims = 32;

// Dimensions at and above kHaltonDims fall back to a counter-based hash;
// asking for this many or more is treated as a caller bug.
inline constexpr int kMaxSampleDims = 1024;

// Digit-reversed index in the given base, in [0, 1). Pure and deterministic.
double radical_inverse(int base, uint64_t index);

// Coordinate `dim` of Halton point `index`. The first 32 dimensions are the
// radical inverses in the primes above; higher dimensions decorrelate through
// a hash so that deep paths never exhaust the sequence.
double halton_point(uint64_t index, int dim);

// Lazy per-sample view of one Halton point: each call to next() yields the
// coordinate at the current dimension cursor and advances it.
class SampleStream {
 public:
  explicit SampleStream(uint64_t index, int start_dim = 0)
      : index_(index), cursor_(start_dim) {}

  uint64_t index() const { return index_; }
  int cursor() const { return cursor_; }

  double next() { return halton_point(index_, cursor_++); }

 private:
  uint64_t index_;
  int cursor_;
};

// Global sample indices are partitioned by purpose so that distinct consumers
// (pixel estimates, data generation, training draws) never share points.
inline uint64_t stream_index(uint64_t seed, uint64_t purpose, uint64_t counter) {
  return (seed << 44) + (purpose << 40) + counter;
}

inline constexpr uint64_t kPurposeRender = 0;
inline constexpr uint64_t kPurposeQTrain = 1;
inline constexpr uint64_t kPurposeNeeTrain = 2;
inline constexpr uint64_t kPurposeNeeEval = 3;
inline constexpr uint64_t kPurposeBakePoints = 4;
inline constexpr uint64_t kPurposeBakeRays = 5;
inline constexpr uint64_t kPurposeProbe = 6;

}  // namespace raylearn
