#ifndef FORECLASSNET_WELFORD_HPP
#define FORECLASSNET_WELFORD_HPP

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "foreclassnet/errors.hpp"
#include "foreclassnet/ops.hpp"
#include "foreclassnet/tensor.hpp"

namespace fcn {

/// Per-sample online mean/variance over the forecast horizon, keyed by the
/// dataset-assigned stable sample id. Uses the population normalization
/// (divide by n), so the first update already yields a defined variance of
/// zero. Updates for the same id must be serialized; distinct ids may be
/// updated concurrently once their entries exist.
class WelfordAccumulator {
 public:
  struct Entry {
    std::uint64_t n = 0;
    std::vector<double> mean;
    std::vector<double> m2;
  };

  explicit WelfordAccumulator(std::size_t horizon = 0) : horizon_(horizon) {}

  std::size_t horizon() const { return horizon_; }

  void set_horizon(std::size_t k) {
    horizon_ = k;
    clear();
  }

  bool contains(std::int64_t id) const { return table_.find(id) != table_.end(); }

  std::uint64_t count(std::int64_t id) const {
    auto it = table_.find(id);
    return it == table_.end() ? 0 : it->second.n;
  }

  /// Creates (or returns) the zeroed entry for a sample id. Pre-creating
  /// entries makes later per-id updates safe to run in parallel: once every
  /// id of interest exists, updates only find and mutate disjoint entries.
  Entry& touch(std::int64_t id) {
    auto it = table_.find(id);
    if (it != table_.end()) return it->second;
    Entry& e = table_[id];
    e.mean.assign(horizon_, 0.0);
    e.m2.assign(horizon_, 0.0);
    return e;
  }

  /// Zeroes an entry without erasing it (map structure untouched, so this is
  /// usable while other ids are being updated concurrently).
  Entry& reset_in_place(std::int64_t id) {
    Entry& e = touch(id);
    e.n = 0;
    std::fill(e.mean.begin(), e.mean.end(), 0.0);
    std::fill(e.m2.begin(), e.m2.end(), 0.0);
    return e;
  }

  /// One Welford step: mean_n = mean_{n-1} + (x - mean_{n-1})/n,
  /// m2_n = m2_{n-1} + (x - mean_{n-1})(x - mean_n).
  Entry& update(std::int64_t id, std::span<const double> forecast) {
    if (forecast.size() != horizon_)
      throw dimension_error("WelfordAccumulator: forecast length " +
                            std::to_string(forecast.size()) + " != horizon " +
                            std::to_string(horizon_));
    Entry& e = touch(id);
    e.n += 1;
    const double n = static_cast<double>(e.n);
    for (std::size_t i = 0; i < horizon_; ++i) {
      const double delta = forecast[i] - e.mean[i];
      e.mean[i] += delta / n;
      e.m2[i] += delta * (forecast[i] - e.mean[i]);
    }
    return e;
  }

  const Entry& entry(std::int64_t id) const {
    auto it = table_.find(id);
    if (it == table_.end() || it->second.n == 0)
      throw contract_error("WelfordAccumulator: no updates recorded for sample id " +
                           std::to_string(id));
    return it->second;
  }

  /// Population variance m2/n, clamped at zero against roundoff.
  static std::vector<double> variance(const Entry& e) {
    std::vector<double> v(e.mean.size(), 0.0);
    if (e.n == 0) return v;
    const double n = static_cast<double>(e.n);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double x = e.m2[i] / n;
      v[i] = x > 0.0 ? x : 0.0;
    }
    return v;
  }

  std::vector<double> variance(std::int64_t id) const { return variance(entry(id)); }

  void reset(std::int64_t id) { table_.erase(id); }
  void clear() { table_.clear(); }
  std::size_t size() const { return table_.size(); }

 private:
  std::size_t horizon_;
  std::unordered_map<std::int64_t, Entry> table_;
};

/// Builds the 2 x (m + k) concatenation matrix fed to the classifier:
/// row 1 = [phi_1..phi_m, mean_1..mean_k], row 2 = [0...0, var_1..var_k].
/// The observed representation's variance is zero by construction, and the
/// accumulated statistics enter as constants (no gradient flows through
/// cross-pass history).
inline Tensor assemble_representation(Tape& t, const Tensor& observed_repr,
                                      const WelfordAccumulator::Entry& entry) {
  if (entry.n == 0)
    throw contract_error(
        "assemble_representation: accumulator entry has no updates");
  const std::size_t m = observed_repr.size();
  const std::size_t k = entry.mean.size();
  Tensor mean_c = t.constant({k}, entry.mean);
  Tensor var_c = t.constant({k}, WelfordAccumulator::variance(entry));
  Tensor zeros = t.constant({m}, std::vector<double>(m, 0.0));
  Tensor phi = observed_repr.shape().size() == 1
                   ? observed_repr
                   : reshape(observed_repr, {m});
  Tensor row1 = reshape(concat({phi, mean_c}, 0), {1, m + k});
  Tensor row2 = reshape(concat({zeros, var_c}, 0), {1, m + k});
  return concat({row1, row2}, 0);
}

}  // namespace fcn

#endif  // FORECLASSNET_WELFORD_HPP
