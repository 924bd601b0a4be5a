#ifndef FORECLASSNET_ATTACK_HPP
#define FORECLASSNET_ATTACK_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "foreclassnet/dataset.hpp"
#include "foreclassnet/network.hpp"
#include "foreclassnet/rng.hpp"

namespace fcn {

enum class AttackLoss { cce, mse };

inline const char* to_string(AttackLoss k) {
  return k == AttackLoss::cce ? "fgsm_cce" : "fgsm_mse";
}

struct AttackConfig {
  double epsilon = 0.1;
  AttackLoss loss_kind = AttackLoss::cce;
  SplitTag target_split = SplitTag::test;

  void validate() const {
    if (epsilon < 0.0) throw contract_error("attack: epsilon must be non-negative");
  }
};

/// x + epsilon * sign(g), with sign(0) = 0.
inline std::vector<double> fgsm_apply(std::span<const double> x,
                                      std::span<const double> grad, double epsilon) {
  if (x.size() != grad.size())
    throw dimension_error("fgsm_apply: gradient length mismatch");
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double g = grad[i];
    out[i] += g > 0.0 ? epsilon : (g < 0.0 ? -epsilon : 0.0);
  }
  return out;
}

/// Fast gradient sign method against one sample. Runs a single stochastic
/// pass (one frozen dropout mask, taken from the derived noise stream), with
/// the classifier's stop-gradient lowered so the chosen loss term is
/// differentiable down to the observed input:
///   cce attacks the cross-entropy term only, mse the forecast MSE only.
/// The label and future horizon are never modified. The pass uses a freshly
/// reset accumulator entry for the sample, so it does not disturb trained
/// state beyond that entry.
inline std::vector<double> fgsm(ForeClassNet& model, const TimeSeriesSample& s,
                                const AttackConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Tape t;
  Tensor x = t.leaf({1, model.config().m}, s.observed, true);
  Rng noise = derive_rng(seed, "attack", {static_cast<std::uint64_t>(s.id)});
  ForwardOptions opt = model.default_options();
  opt.isolate_classifier = false;
  model.welford().reset_in_place(s.id);
  ForwardResult r = model.forward(t, x, s.id, noise, opt);
  Tensor loss;
  if (cfg.loss_kind == AttackLoss::cce) {
    Tensor p_true = slice(r.class_probs, 0, static_cast<std::size_t>(s.label), 1);
    loss = neg(log(clamp_min(p_true, 1e-12)));
  } else {
    Tensor target = t.constant({s.future.size()},
                               std::vector<double>(s.future.begin(), s.future.end()));
    Tensor diff = sub(r.forecast, target);
    loss = scalar_mul(sum(mul(diff, diff)), 1.0 / static_cast<double>(s.future.size()));
  }
  t.backward(loss);
  return fgsm_apply(s.observed, x.grad(), cfg.epsilon);
}

/// Perturbed copies of every sample in the configured split. Fresh ids (the
/// Welford layer keys on ids, so a perturbed copy must not collide with its
/// source) and a provenance tag; labels, futures, and split tags carry over.
inline Dataset attack_split(ForeClassNet& model, const Dataset& ds,
                            const AttackConfig& cfg, std::uint64_t seed) {
  Dataset out;
  out.m = ds.m;
  out.k = ds.k;
  out.num_classes = ds.num_classes;
  std::int64_t next_id = ds.max_id() + 1;
  for (const TimeSeriesSample& s : ds.samples) {
    if (s.split != cfg.target_split) continue;
    TimeSeriesSample adv = s;
    adv.id = next_id++;
    adv.observed = fgsm(model, s, cfg, seed);
    adv.provenance = to_string(cfg.loss_kind);
    out.samples.push_back(std::move(adv));
  }
  return out;
}

/// Phase-1 artifacts of the adversarial protocol: an adversarial copy of the
/// train split (for retraining) and of the test split (evaluation set "a").
struct AdversarialPhase1 {
  Dataset adv_train;
  Dataset adv_test;  // set (a)
};

inline AdversarialPhase1 adversarial_phase1(ForeClassNet& model, const Dataset& ds,
                                            AttackConfig cfg, std::uint64_t seed) {
  AdversarialPhase1 out;
  cfg.target_split = SplitTag::train;
  out.adv_train = attack_split(model, ds, cfg, seed);
  cfg.target_split = SplitTag::test;
  out.adv_test = attack_split(model, ds, cfg, seed);
  return out;
}

/// Original train+val plus the adversarial training copies (tagged train);
/// the original test split carries over untouched (evaluation set "b").
inline Dataset combine_for_adversarial_training(const Dataset& original,
                                                const Dataset& adv_train) {
  if (original.m != adv_train.m || original.k != adv_train.k)
    throw dimension_error("combine_for_adversarial_training: shape mismatch");
  Dataset out = original;
  for (const TimeSeriesSample& s : adv_train.samples) {
    if (s.split != SplitTag::train)
      throw contract_error(
          "combine_for_adversarial_training: adversarial sample not train-tagged");
    out.samples.push_back(s);
  }
  return out;
}

}  // namespace fcn

#endif  // FORECLASSNET_ATTACK_HPP
