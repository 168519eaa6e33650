#pragma once

#include <cmath>
#include <cstdint>

namespace voronn::rng {

// Counter-based generator: every variate is a pure function of
// (seed, stream, counter). Streams are keyed per data row / MC point so
// the draw sequence is independent of evaluation order and worker count.

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t bits(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t counter) {
  std::uint64_t x = mix64(seed ^ 0x853c49e6748fea9bULL);
  x = mix64(x ^ stream * 0xda942042e4dd58b5ULL);
  x = mix64(x ^ counter * 0x2545f4914f6cdd1dULL);
  return x;
}

// Open interval (0,1); never returns 0 so logs are safe.
inline double uniform(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t counter) {
  return (static_cast<double>(bits(seed, stream, counter) >> 11) + 0.5) *
         0x1.0p-53;
}

// Sequential draws from one (seed, stream) pair.
class Stream {
public:
  Stream(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream) {}

  double uniform() { return rng::uniform(seed_, stream_, counter_++); }

  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Gamma(k) for integer k as a sum of exponentials; rejection-free so the
  // number of underlying uniforms is fixed and draws replay bit-exactly.
  double gamma_int(int k) {
    double prod = 1.0;
    for (int i = 0; i < k; ++i) prod *= uniform();
    return -std::log(prod);
  }

  // Beta(a,b) for integer shapes via the ratio-of-Gammas construction.
  double beta_int(int a, int b) {
    const double g1 = gamma_int(a);
    const double g2 = gamma_int(b);
    return g1 / (g1 + g2);
  }

private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

// Derive an independent sub-seed, e.g. one per replicate.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag,
                                 std::uint64_t index) {
  return bits(master, tag, index);
}

}  // namespace voronn::rng
