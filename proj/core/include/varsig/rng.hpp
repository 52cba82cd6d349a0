#ifndef VARSIG_RNG_HPP
#define VARSIG_RNG_HPP

#include <cstdint>
#include <random>

namespace varsig {

using Rng = std::mt19937_64;

/// Deterministic child seed for stream `index` of `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x5eedu};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace varsig

#endif  // VARSIG_RNG_HPP
