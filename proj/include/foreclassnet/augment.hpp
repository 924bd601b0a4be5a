#ifndef FORECLASSNET_AUGMENT_HPP
#define FORECLASSNET_AUGMENT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "foreclassnet/dataset.hpp"
#include "foreclassnet/errors.hpp"
#include "foreclassnet/rng.hpp"

namespace fcn {

/// Tags samples train/val/test by shuffled id. fractions = (train, val, test),
/// must sum to 1; counts are rounded so e.g. (0.72, 0.08, 0.20) over 10,000
/// samples gives 7200/800/2000.
inline void split_dataset(Dataset& ds, const std::array<double, 3>& fractions,
                          std::uint64_t seed) {
  const double total = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(total - 1.0) > 1e-9)
    throw contract_error("split: fractions must sum to 1, got " + std::to_string(total));
  for (double f : fractions)
    if (f < 0.0) throw contract_error("split: negative fraction");
  const std::size_t n = ds.samples.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng = derive_rng(seed, "split");
  rng.shuffle(order);
  const std::size_t n_train =
      static_cast<std::size_t>(std::llround(fractions[0] * static_cast<double>(n)));
  const std::size_t n_val = std::min(
      n - n_train,
      static_cast<std::size_t>(std::llround(fractions[1] * static_cast<double>(n))));
  for (std::size_t i = 0; i < n; ++i) {
    SplitTag tag = i < n_train               ? SplitTag::train
                   : i < n_train + n_val     ? SplitTag::val
                                             : SplitTag::test;
    ds.samples[order[i]].split = tag;
  }
}

/// Derives the (train, val, test) fractions from "hold out `test_fraction`,
/// then reserve `val_of_train` of the remaining training data".
inline std::array<double, 3> split_fractions(double test_fraction, double val_of_train) {
  const double train_pool = 1.0 - test_fraction;
  return {train_pool * (1.0 - val_of_train), train_pool * val_of_train, test_fraction};
}

/// Randomly switches the labels of exactly round(rate * |train|) training
/// samples; each gets a uniformly drawn different label. Val and test are
/// never touched.
inline void corrupt_labels(Dataset& ds, double rate, std::uint64_t seed) {
  if (rate < 0.0 || rate > 1.0)
    throw contract_error("corrupt_labels: rate must lie in [0, 1]");
  if (ds.num_classes < 2)
    throw contract_error("corrupt_labels: need at least two classes");
  std::vector<std::size_t> train = ds.indices_of(SplitTag::train);
  const std::size_t n_flip = static_cast<std::size_t>(
      std::llround(rate * static_cast<double>(train.size())));
  if (n_flip == 0) return;
  Rng rng = derive_rng(seed, "corrupt");
  rng.shuffle(train);
  for (std::size_t i = 0; i < n_flip; ++i) {
    TimeSeriesSample& s = ds.samples[train[i]];
    const auto offset = 1 + rng.integer(ds.num_classes - 1);
    s.label = static_cast<int>(
        (static_cast<std::uint64_t>(s.label) + offset) % ds.num_classes);
  }
}

/// SMOTE: upsamples every minority class to the majority count. A synthetic
/// sample interpolates a random class member toward one of its k nearest
/// same-class neighbors (Euclidean distance over the concatenated
/// observed+future vector): sample + lambda * (neighbor - sample),
/// lambda ~ U(0,1). Synthetics get fresh ids and the train tag.
inline void smote(Dataset& ds, std::size_t k_neighbors, std::uint64_t seed) {
  if (k_neighbors < 1) throw contract_error("smote: k_neighbors must be >= 1");
  const std::size_t L = ds.num_classes;
  std::vector<std::vector<std::size_t>> by_class(L);
  for (std::size_t i = 0; i < ds.samples.size(); ++i)
    by_class[static_cast<std::size_t>(ds.samples[i].label)].push_back(i);
  std::size_t majority = 0;
  for (const auto& v : by_class) majority = std::max(majority, v.size());

  auto full_vector = [&](const TimeSeriesSample& s) {
    std::vector<double> v(s.observed);
    v.insert(v.end(), s.future.begin(), s.future.end());
    return v;
  };

  Rng rng = derive_rng(seed, "smote");
  std::int64_t next_id = ds.max_id() + 1;
  for (std::size_t c = 0; c < L; ++c) {
    const std::vector<std::size_t>& members = by_class[c];
    if (members.size() == majority) continue;
    if (members.size() < 2)
      throw contract_error("smote: class " + std::to_string(c) + " has " +
                           std::to_string(members.size()) +
                           " samples; need at least 2 to interpolate");
    std::vector<std::vector<double>> vectors;
    vectors.reserve(members.size());
    for (std::size_t ix : members) vectors.push_back(full_vector(ds.samples[ix]));

    // Neighbor lists: k nearest same-class members, ties broken by index.
    const std::size_t kk = std::min(k_neighbors, members.size() - 1);
    std::vector<std::vector<std::size_t>> neighbors(members.size());
    for (std::size_t a = 0; a < members.size(); ++a) {
      std::vector<std::pair<double, std::size_t>> dist;
      dist.reserve(members.size() - 1);
      for (std::size_t b = 0; b < members.size(); ++b) {
        if (b == a) continue;
        double d2 = 0.0;
        for (std::size_t j = 0; j < vectors[a].size(); ++j) {
          const double d = vectors[a][j] - vectors[b][j];
          d2 += d * d;
        }
        dist.emplace_back(d2, b);
      }
      std::sort(dist.begin(), dist.end());
      neighbors[a].reserve(kk);
      for (std::size_t j = 0; j < kk; ++j) neighbors[a].push_back(dist[j].second);
    }

    for (std::size_t need = majority - members.size(); need > 0; --need) {
      const std::size_t a = static_cast<std::size_t>(rng.integer(members.size()));
      const std::size_t b = neighbors[a][static_cast<std::size_t>(
          rng.integer(neighbors[a].size()))];
      const double lambda = rng.uniform();
      TimeSeriesSample s;
      s.id = next_id++;
      s.label = static_cast<int>(c);
      s.split = SplitTag::train;
      s.observed.resize(ds.m);
      s.future.resize(ds.k);
      for (std::size_t j = 0; j < ds.m + ds.k; ++j) {
        const double v = vectors[a][j] + lambda * (vectors[b][j] - vectors[a][j]);
        if (j < ds.m) s.observed[j] = v;
        else s.future[j - ds.m] = v;
      }
      ds.samples.push_back(std::move(s));
    }
  }
}

}  // namespace fcn

#endif  // FORECLASSNET_AUGMENT_HPP
