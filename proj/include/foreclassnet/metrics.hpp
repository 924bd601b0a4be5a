#ifndef FORECLASSNET_METRICS_HPP
#define FORECLASSNET_METRICS_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "foreclassnet/dataset.hpp"
#include "foreclassnet/network.hpp"

namespace fcn {

/// Rows index the true class, columns the predicted class.
struct ConfusionMatrix {
  std::size_t num_classes = 0;
  std::vector<std::size_t> counts;  // row-major L x L

  explicit ConfusionMatrix(std::size_t L = 0) : num_classes(L), counts(L * L, 0) {}

  std::size_t& at(std::size_t true_class, std::size_t pred_class) {
    return counts[true_class * num_classes + pred_class];
  }
  std::size_t at(std::size_t true_class, std::size_t pred_class) const {
    return counts[true_class * num_classes + pred_class];
  }
  std::size_t total() const {
    std::size_t s = 0;
    for (std::size_t c : counts) s += c;
    return s;
  }
  std::size_t trace() const {
    std::size_t s = 0;
    for (std::size_t i = 0; i < num_classes; ++i) s += at(i, i);
    return s;
  }
};

struct MetricsReport {
  double accuracy = 0.0;
  double f1_binary = 0.0;  // F1 of class 1; meaningful when num_classes == 2
  double f1_macro = 0.0;
  double f1_weighted = 0.0;
  std::vector<double> f1_per_class;
  ConfusionMatrix confusion;
};

/// accuracy = correct/total; per-class F1 = 2TP / (2TP + FP + FN), defined as
/// 0 when the denominator is 0; macro = unweighted mean, weighted = mean
/// weighted by true-class support.
inline MetricsReport compute_metrics(const std::vector<int>& truth,
                                     const std::vector<int>& predicted,
                                     std::size_t num_classes) {
  if (truth.size() != predicted.size())
    throw contract_error("metrics: label vectors differ in length");
  if (truth.empty()) throw contract_error("metrics: empty input");
  MetricsReport rep;
  rep.confusion = ConfusionMatrix(num_classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || static_cast<std::size_t>(truth[i]) >= num_classes ||
        predicted[i] < 0 || static_cast<std::size_t>(predicted[i]) >= num_classes)
      throw contract_error("metrics: label outside [0, L) at index " +
                           std::to_string(i));
    ++rep.confusion.at(static_cast<std::size_t>(truth[i]),
                       static_cast<std::size_t>(predicted[i]));
  }
  const double total = static_cast<double>(truth.size());
  rep.accuracy = static_cast<double>(rep.confusion.trace()) / total;
  rep.f1_per_class.resize(num_classes, 0.0);
  double weighted = 0.0, macro = 0.0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    std::size_t tp = rep.confusion.at(c, c), fp = 0, fn = 0, support = 0;
    for (std::size_t o = 0; o < num_classes; ++o) {
      if (o != c) {
        fp += rep.confusion.at(o, c);
        fn += rep.confusion.at(c, o);
      }
      support += rep.confusion.at(c, o);
    }
    const double denom = static_cast<double>(2 * tp + fp + fn);
    const double f1 = denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
    rep.f1_per_class[c] = f1;
    macro += f1;
    weighted += f1 * static_cast<double>(support);
  }
  rep.f1_macro = macro / static_cast<double>(num_classes);
  rep.f1_weighted = weighted / total;
  rep.f1_binary = num_classes == 2 ? rep.f1_per_class[1] : rep.f1_macro;
  return rep;
}

inline void write_metrics_csv(const std::string& path, const MetricsReport& rep) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << "metric,value\n";
  out << "accuracy," << detail::format_double(rep.accuracy) << "\n";
  out << "f1_binary," << detail::format_double(rep.f1_binary) << "\n";
  out << "f1_macro," << detail::format_double(rep.f1_macro) << "\n";
  out << "f1_weighted," << detail::format_double(rep.f1_weighted) << "\n";
  for (std::size_t c = 0; c < rep.f1_per_class.size(); ++c)
    out << "f1_class_" << c << ',' << detail::format_double(rep.f1_per_class[c]) << "\n";
}

inline void write_confusion_csv(const std::string& path, const ConfusionMatrix& cm) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << "true\\pred";
  for (std::size_t c = 0; c < cm.num_classes; ++c) out << ',' << c;
  out << "\n";
  for (std::size_t r = 0; r < cm.num_classes; ++r) {
    out << r;
    for (std::size_t c = 0; c < cm.num_classes; ++c) out << ',' << cm.at(r, c);
    out << "\n";
  }
}

inline std::string metrics_summary(const MetricsReport& rep) {
  std::string s;
  s += "accuracy:    " + std::to_string(rep.accuracy) + "\n";
  s += "f1_binary:   " + std::to_string(rep.f1_binary) + "\n";
  s += "f1_macro:    " + std::to_string(rep.f1_macro) + "\n";
  s += "f1_weighted: " + std::to_string(rep.f1_weighted) + "\n";
  s += "confusion (rows true, cols predicted):\n";
  for (std::size_t r = 0; r < rep.confusion.num_classes; ++r) {
    for (std::size_t c = 0; c < rep.confusion.num_classes; ++c)
      s += "  " + std::to_string(rep.confusion.at(r, c));
    s += "\n";
  }
  return s;
}

/// |d logit_pred / d x_t| over the observed window, with one frozen dropout
/// mask. The target is the predicted class's pre-softmax logit (label-free
/// and unaffected by the softmax normalizer), computed with the classifier
/// stop-gradient lowered so the derivative reaches the input.
inline std::vector<double> saliency(ForeClassNet& model, const TimeSeriesSample& s,
                                    std::uint64_t seed) {
  Tape t;
  Tensor x = t.leaf({1, model.config().m}, s.observed, true);
  Rng noise = derive_rng(seed, "saliency", {static_cast<std::uint64_t>(s.id)});
  ForwardOptions opt = model.default_options();
  opt.isolate_classifier = false;
  model.welford().reset_in_place(s.id);
  ForwardResult r = model.forward(t, x, s.id, noise, opt);
  const int pred = argmax_lowest(r.class_probs.values());
  Tensor target = slice(r.logits, 0, static_cast<std::size_t>(pred), 1);
  t.backward(target);
  std::vector<double> g = x.grad();
  for (double& v : g) v = std::abs(v);
  return g;
}

inline void write_saliency_csv(const std::string& path, const TimeSeriesSample& s,
                               const std::vector<double>& sal) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << "value,saliency\n";
  for (std::size_t i = 0; i < sal.size(); ++i)
    out << detail::format_double(s.observed[i]) << ',' << detail::format_double(sal[i])
        << "\n";
}

}  // namespace fcn

#endif  // FORECLASSNET_METRICS_HPP
