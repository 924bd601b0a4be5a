#ifndef FORECLASSNET_FILTERS_HPP
#define FORECLASSNET_FILTERS_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "foreclassnet/errors.hpp"
#include "foreclassnet/tensor.hpp"

namespace fcn {

/// Fixed pattern filters: decreasing, increasing, and a Pascal-triangle peak
/// filter, all of length h. Non-trainable; excluded from every regularizer.
struct HandCraftedFilterBank {
  std::size_t length = 3;
  std::vector<double> decreasing;
  std::vector<double> increasing;
  std::vector<double> peak;

  /// Stacks the three filters as a single-input-channel conv weight bank,
  /// shape [3 x 1 x h], rows in the order decreasing, increasing, peak.
  Parameter as_parameter(const std::string& name) const {
    Parameter p(name, {3, 1, length}, /*trainable=*/false);
    std::copy(decreasing.begin(), decreasing.end(), p.value.begin());
    std::copy(increasing.begin(), increasing.end(), p.value.begin() + length);
    std::copy(peak.begin(), peak.end(), p.value.begin() + 2 * length);
    return p;
  }
};

namespace detail {

inline double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  if (k > n - k) k = n - k;
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i)
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

}  // namespace detail

/// Builds the three fixed filters of length h. The peak filter's branch
/// boundaries are only contiguous when h is a positive multiple of 3; other
/// lengths are rejected rather than guessed.
inline HandCraftedFilterBank make_handcrafted_filters(std::size_t h) {
  if (h < 3 || h % 3 != 0)
    throw contract_error("make_handcrafted_filters: unsupported length " +
                         std::to_string(h) + "; h must be a positive multiple of 3");
  HandCraftedFilterBank bank;
  bank.length = h;
  bank.decreasing.resize(h);
  bank.increasing.resize(h);
  bank.peak.resize(h);
  for (std::size_t i = 0; i < h; ++i) {
    bank.decreasing[i] = (i % 2 == 0) ? -1.0 : 1.0;  // (-1)^(i+1)
    bank.increasing[i] = (i % 2 == 0) ? 1.0 : -1.0;  // (-1)^i
  }
  const std::size_t g = (h - 3) / 3;  // top row index of the Pascal block
  const double hh = static_cast<double>(h);
  for (std::size_t i = 0; i < h; ++i) {
    double v;
    if (i <= g)
      v = -(3.0 / hh) * detail::binomial(g, i);
    else if (i <= 2 * g + 1)
      v = (6.0 / hh) * detail::binomial(g, i - (g + 1));
    else
      v = -(3.0 / hh) * detail::binomial(g, i - (2 * g + 2));
    bank.peak[i] = v;
  }
  return bank;
}

}  // namespace fcn

#endif  // FORECLASSNET_FILTERS_HPP
