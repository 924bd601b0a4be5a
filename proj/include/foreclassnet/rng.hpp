#ifndef FORECLASSNET_RNG_HPP
#define FORECLASSNET_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

#include "foreclassnet/errors.hpp"

namespace fcn {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash64(std::string_view s) {
  // FNV-1a
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Deterministic random source. All distributions are implemented on top of
/// the raw mt19937_64 stream so sequences are identical across platforms and
/// standard-library versions (std::normal_distribution and friends are not
/// pinned by the standard).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in the open interval (0, 1); safe inside log/logit.
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller. Two uniforms per draw, no cached spare,
  /// so the consumed stream length is predictable.
  double normal() {
    const double u1 = uniform_open();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Unbiased integer in [0, bound).
  std::uint64_t integer(std::uint64_t bound) {
    if (bound == 0) throw contract_error("Rng::integer: bound must be positive");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % bound;
  }

  /// Fisher-Yates shuffle.
  template <typename Container>
  void shuffle(Container& c) {
    const std::size_t n = c.size();
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(integer(i));
      std::swap(c[i - 1], c[j]);
    }
  }

  std::string save_state() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  void restore_state(const std::string& state) {
    std::istringstream is(state);
    is >> engine_;
    if (!is) throw io_error("Rng: malformed engine state");
  }

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent stream seed from a master seed, a purpose tag, and
/// optional indices (epoch, sample id, pass, ...). Pure function of its
/// arguments, so derived streams can be recreated anywhere.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::initializer_list<std::uint64_t> indices = {}) {
  std::uint64_t h = detail::splitmix64(master ^ detail::hash64(tag));
  for (std::uint64_t ix : indices) h = detail::splitmix64(h ^ ix);
  return h;
}

inline Rng derive_rng(std::uint64_t master, std::string_view tag,
                      std::initializer_list<std::uint64_t> indices = {}) {
  return Rng(derive_seed(master, tag, indices));
}

}  // namespace fcn

#endif  // FORECLASSNET_RNG_HPP
