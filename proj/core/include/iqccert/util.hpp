#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iqccert/linalg.hpp"

namespace iqccert {

// Fixed float formatting for CSV and status lines: 12 significant digits,
// '.' decimal separator, locale-independent.
std::string format_g12(double v);

// FNV-1a 64-bit over the dimensions and little-endian entry bytes.
std::string matrix_digest(const Matrix& m);

// Deterministic uniform doubles in [0,1) from a fixed 64-bit state;
// bit-identical across platforms.
class DeterministicRng {
 public:
  explicit DeterministicRng(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  uint64_t next_u64();
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)

 private:
  uint64_t state_;
};

}  // namespace iqccert
