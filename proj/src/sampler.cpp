#include "raylearn/sampler.hpp"

#include <algorithm>
#include <bit>

namespace raylearn {

namespace {

constexpr double kOneMinusEpsilon = 0x1.fffffffffffffp-1;

// Base 2 reduces to a 64-bit reversal, much cheaper than the digit loop.
double radical_inverse_base2(uint64_t v) {
  v = (v << 32) | (v >> 32);
  v = ((v & 0x0000ffff0000ffffull) << 16) | ((v >> 16) & 0x0000ffff0000ffffull);
  v = ((v & 0x00ff00ff00ff00ffull) << 8) | ((v >> 8) & 0x00ff00ff00ff00ffull);
  v = ((v & 0x0f0f0f0f0f0f0f0full) << 4) | ((v >> 4) & 0x0f0f0f0f0f0f0f0full);
  v = ((v & 0x3333333333333333ull) << 2) | ((v >> 2) & 0x3333333333333333ull);
  v = ((v & 0x5555555555555555ull) << 1) | ((v >> 1) & 0x5555555555555555ull);
  return std::min(double(v) * 0x1.0p-64, kOneMinusEpsilon);
}

// Compile-time base lets the divisions become multiply-shift sequences.
template <int Base>
double radical_inverse_fixed(uint64_t index) {
  constexpr double inv_base = 1.0 / Base;
  uint64_t reversed = 0;
  double scale = 1.0;
  while (index) {
    uint64_t next = index / Base;
    reversed = reversed * Base + (index - next * Base);
    scale *= inv_base;
    index = next;
  }
  return std::min(double(reversed) * scale, kOneMinusEpsilon);
}

double radical_inverse_generic(int base, uint64_t index) {
  const double inv_base = 1.0 / base;
  uint64_t reversed = 0;
  double scale = 1.0;
  while (index) {
    uint64_t next = index / uint64_t(base);
    reversed = reversed * uint64_t(base) + (index - next * uint64_t(base));
    scale *= inv_base;
    index = next;
  }
  return std::min(double(reversed) * scale, kOneMinusEpsilon);
}

}  // namespace

double radical_inverse(int base, uint64_t index) {
  require(base >= 2, "radical_inverse: base must be at least 2");
  switch (base) {
    case 2: return radical_inverse_base2(index);
    case 3: return radical_inverse_fixed<3>(index);
    case 5: return radical_inverse_fixed<5>(index);
    case 7: return radical_inverse_fixed<7>(index);
    case 11: return radical_inverse_fixed<11>(index);
    case 13: return radical_inverse_fixed<13>(index);
    case 17: return radical_inverse_fixed<17>(index);
    case 19: return radical_inverse_fixed<19>(index);
    case 23: return radical_inverse_fixed<23>(index);
    case 29: return radical_inverse_fixed<29>(index);
    case 31: return radical_inverse_fixed<31>(index);
    case 37: return radical_inverse_fixed<37>(index);
    case 41: return radical_inverse_fixed<41>(index);
    case 43: return radical_inverse_fixed<43>(index);
    case 47: return radical_inverse_fixed<47>(index);
    case 53: return radical_inverse_fixed<53>(index);
    case 59: return radical_inverse_fixed<59>(index);
    case 61: return radical_inverse_fixed<61>(index);
    case 67: return radical_inverse_fixed<67>(index);
    case 71: return radical_inverse_fixed<71>(index);
    case 73: return radical_inverse_fixed<73>(index);
    case 79: return radical_inverse_fixed<79>(index);
    case 83: return radical_inverse_fixed<83>(index);
    case 89: return radical_inverse_fixed<89>(index);
    case 97: return radical_inverse_fixed<97>(index);
    case 101: return radical_inverse_fixed<101>(index);
    case 103: return radical_inverse_fixed<103>(index);
    case 107: return radical_inverse_fixed<107>(index);
    case 109: return radical_inverse_fixed<109>(index);
    case 113: return radical_inverse_fixed<113>(index);
    case 127: return radical_inverse_fixed<127>(index);
    case 131: return radical_inverse_fixed<131>(index);
    default: return radical_inverse_generic(base, index);
  }
}

double halton_point(uint64_t index, int dim) {
  require(dim >= 0 && dim < kMaxSampleDims, "halton_point: dimension out of range");
  if (dim < kHaltonDims) return radical_inverse(kHaltonPrimes[dim], index);
  uint64_t h = hash_u64(hash_u64(index) ^ (uint64_t(dim) * 0xd1b54a32d192ed03ull));
  return std::min(double(h >> 11) * 0x1.0p-53, kOneMinusEpsilon);
}

}  // namespace raylearn
