#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace caltec {

/// SplitMix64 finalizer. Byte-defined, used for all seed derivation.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derive an independent substream seed from a master seed and a key tuple.
///
/// h0 = splitmix64(master); h_{k+1} = splitmix64(h_k ^ key_k). The result does
/// not depend on platform, compiler or standard library.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> keys) noexcept
{
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t k : keys)
    h = splitmix64(h ^ k);
  return h;
}

/// IEEE-754 bit pattern of a double, for hashing real-valued keys.
std::uint64_t double_bits(double v) noexcept;

/// Portable random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard distributions are not (their algorithms are
/// implementation-defined), so every derived variate is computed here.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), unbiased by rejection. n must be > 0.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace caltec
