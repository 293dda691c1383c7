#include "iqccert/util.hpp"

#include <cstdio>
#include <cstring>

namespace iqccert {

std::string format_g12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::string(buf);
}

namespace {

void fnv_bytes(uint64_t& h, const void* p, size_t count) {
  const auto* bytes = static_cast<const unsigned char*>(p);
  for (size_t i = 0; i < count; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
}

}  // namespace

std::string matrix_digest(const Matrix& m) {
  uint64_t h = 1469598103934665603ULL;
  const int64_t rows = m.rows(), cols = m.cols();
  fnv_bytes(h, &rows, sizeof(rows));
  fnv_bytes(h, &cols, sizeof(cols));
  for (double v : m.data()) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    fnv_bytes(h, &bits, sizeof(bits));
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

uint64_t DeterministicRng::next_u64() {
  // splitmix64
  state_ += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double DeterministicRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double DeterministicRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

}  // namespace iqccert
