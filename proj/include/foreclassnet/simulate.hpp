#ifndef FORECLASSNET_SIMULATE_HPP
#define FORECLASSNET_SIMULATE_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "foreclassnet/dataset.hpp"
#include "foreclassnet/errors.hpp"
#include "foreclassnet/rng.hpp"

namespace fcn {

/// ARMA process description: X_t = sum_i ar[i] X_{t-1-i}
///                                + sum_j ma[j] eta_{t-1-j} + eta_t,
/// eta_t iid N(0, noise_std^2), zero initialization, burn_in samples
/// generated and discarded before the emitted window.
struct ProcessSpec {
  std::vector<double> ar;
  std::vector<double> ma;
  double noise_std = 1.0;
  std::size_t burn_in = 100;

  void validate() const {
    if (ar.empty() && ma.empty())
      throw config_error("ProcessSpec: at least one coefficient set required");
    if (noise_std < 0.0) throw config_error("ProcessSpec: negative noise_std");
  }
};

/// Deterministic core: runs the recursion over a caller-provided noise
/// sequence of length burn_in + length and returns the final `length` values.
inline std::vector<double> arma_path_from_noise(const ProcessSpec& spec,
                                                std::size_t length,
                                                std::span<const double> noise) {
  spec.validate();
  const std::size_t total = spec.burn_in + length;
  if (noise.size() != total)
    throw contract_error("arma_path_from_noise: need " + std::to_string(total) +
                         " noise values, got " + std::to_string(noise.size()));
  std::vector<double> x(total, 0.0);
  for (std::size_t t = 0; t < total; ++t) {
    double v = noise[t];
    for (std::size_t i = 0; i < spec.ar.size(); ++i)
      if (t >= i + 1) v += spec.ar[i] * x[t - 1 - i];
    for (std::size_t j = 0; j < spec.ma.size(); ++j)
      if (t >= j + 1) v += spec.ma[j] * noise[t - 1 - j];
    if (std::abs(v) > 1e12)
      throw divergence_error("arma_path: |X_t| exceeded 1e12 at t = " +
                             std::to_string(t) + " (explosive recursion)");
    x[t] = v;
  }
  return std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(spec.burn_in),
                             x.end());
}

inline std::vector<double> arma_path(const ProcessSpec& spec, std::size_t length,
                                     Rng& rng) {
  std::vector<double> noise(spec.burn_in + length);
  for (double& v : noise) v = spec.noise_std == 0.0 ? 0.0 : rng.normal(0.0, spec.noise_std);
  return arma_path_from_noise(spec, length, noise);
}

/// `count` independent series, one derived noise stream per series.
inline std::vector<std::vector<double>> simulate_arma(const ProcessSpec& spec,
                                                      std::size_t length,
                                                      std::size_t count,
                                                      std::uint64_t seed) {
  if (length < 1) throw contract_error("simulate_arma: length must be >= 1");
  std::vector<std::vector<double>> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = derive_rng(seed, "simulate", {i});
    out.push_back(arma_path(spec, length, rng));
  }
  return out;
}

// The simulation study's generating processes.
inline ProcessSpec process_ar3(std::size_t burn_in = 100) {
  return ProcessSpec{{0.6, -0.3, 0.2}, {}, 1.0, burn_in};
}
inline ProcessSpec process_ma2(std::size_t burn_in = 100) {
  return ProcessSpec{{}, {0.5, 0.4}, 1.0, burn_in};
}
inline ProcessSpec process_ar2(std::size_t burn_in = 100) {
  return ProcessSpec{{0.7, -0.4}, {}, 1.0, burn_in};
}

/// Scenario generator. Classes are drawn uniformly; each series of length
/// m + k is split into the observed window and the future horizon. The
/// three-class mixture adds 0.6 * AR(3) path + 0.4 * AR(2) path with
/// independent noise streams.
inline Dataset build_scenario(const std::string& name, std::size_t count,
                              std::size_t m, std::size_t k, std::uint64_t seed,
                              std::size_t burn_in = 100) {
  if (count < 2) throw contract_error("build_scenario: count must be >= 2");
  std::size_t num_classes;
  if (name == "ar_vs_ma" || name == "ar_vs_ar") num_classes = 2;
  else if (name == "three_class_mixture") num_classes = 3;
  else throw config_error("unknown scenario '" + name +
                          "' (expected ar_vs_ma, ar_vs_ar, or three_class_mixture)");

  const std::size_t length = m + k;
  Dataset ds;
  ds.m = m;
  ds.k = k;
  ds.num_classes = num_classes;
  ds.samples.reserve(count);

  Rng class_rng = derive_rng(seed, "class");
  for (std::size_t i = 0; i < count; ++i) {
    const int label = static_cast<int>(class_rng.integer(num_classes));
    Rng rng = derive_rng(seed, "simulate", {i});
    std::vector<double> series;
    if (name == "ar_vs_ma") {
      series = arma_path(label == 0 ? process_ar3(burn_in) : process_ma2(burn_in),
                         length, rng);
    } else {
      if (label == 0) {
        series = arma_path(process_ar3(burn_in), length, rng);
      } else if (label == 1) {
        series = arma_path(process_ar2(burn_in), length, rng);
      } else {
        Rng rng_b = derive_rng(seed, "simulate_b", {i});
        std::vector<double> a = arma_path(process_ar3(burn_in), length, rng);
        std::vector<double> b = arma_path(process_ar2(burn_in), length, rng_b);
        series.resize(length);
        for (std::size_t t = 0; t < length; ++t)
          series[t] = 0.6 * a[t] + 0.4 * b[t];
      }
    }
    TimeSeriesSample s;
    s.id = static_cast<std::int64_t>(i);
    s.label = label;
    s.observed.assign(series.begin(), series.begin() + static_cast<std::ptrdiff_t>(m));
    s.future.assign(series.begin() + static_cast<std::ptrdiff_t>(m), series.end());
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace fcn

#endif  // FORECLASSNET_SIMULATE_HPP
