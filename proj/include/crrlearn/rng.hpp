#pragma once

#include <cmath>
#include <cstdint>

#include "crrlearn/tensor.hpp"

namespace crrlearn {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

/// Counter-based random stream keyed by (master seed, stream id).
/// Equal keys replay the same sequence regardless of scheduling; the
/// generator hashes key+counter, so cloning with a fresh id forks an
/// independent stream.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id), counter_(0), has_spare_(false), spare_(0.0) {
    key_ = detail::splitmix64(seed ^ 0x5851f42d4c957f2dULL);
    key_ = detail::splitmix64(key_ ^ detail::splitmix64(stream_id ^ 0x14057b7ef767814fULL));
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  RngStream fork(std::uint64_t new_stream_id) const { return RngStream(seed_, new_stream_id); }

  std::uint64_t next_u64() { return detail::splitmix64(key_ + 0x9e3779b97f4a7c15ULL * (++counter_)); }

  /// Uniform double in (0, 1].
  double next_uniform() { return double((next_u64() >> 11) + 1) * 0x1.0p-53; }

  /// Standard normal draw (Box-Muller, caches the second variate).
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = next_uniform();
    double u2 = next_uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  /// Poisson draw. Inversion below mean 30, exact halving split above.
  std::uint64_t next_poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 30.0) {
      double l = std::exp(-mean);
      std::uint64_t k = 0;
      double p = 1.0;
      do {
        ++k;
        p *= next_uniform();
      } while (p > l);
      return k - 1;
    }
    return next_poisson(mean * 0.5) + next_poisson(mean * 0.5);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_;
  bool has_spare_;
  double spare_;
};

inline Tensor sample_std_normal(RngStream& rng, std::vector<std::size_t> shape) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.next_normal();
  return t;
}

}  // namespace crrlearn
