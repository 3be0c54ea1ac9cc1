#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

namespace microdrift {

/// Radical inverse of `index` in the given base (van der Corput).
inline double radical_inverse(std::uint64_t index, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

/// Component `dim` of the Halton point with the given index.
inline double halton(std::uint64_t index, std::size_t dim) {
  static constexpr std::array<unsigned, 16> primes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  if (dim >= primes.size()) throw std::out_of_range("Halton sequence supports at most 16 dimensions");
  return radical_inverse(index, primes[dim]);
}

}  // namespace microdrift
