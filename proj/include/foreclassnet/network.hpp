#ifndef FORECLASSNET_NETWORK_HPP
#define FORECLASSNET_NETWORK_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "foreclassnet/dataset.hpp"
#include "foreclassnet/dropout.hpp"
#include "foreclassnet/filters.hpp"
#include "foreclassnet/layers.hpp"
#include "foreclassnet/ops.hpp"
#include "foreclassnet/rng.hpp"
#include "foreclassnet/tensor.hpp"
#include "foreclassnet/welford.hpp"

namespace fcn {

struct ForeClassNetConfig {
  std::size_t m = 40;            // observed length
  std::size_t k = 10;            // forecast horizon
  std::size_t num_classes = 2;   // L
  std::vector<std::size_t> filter_lengths{3, 6, 12, 18, 24, 30, 36};
  std::size_t handcrafted_length = 3;
  std::vector<std::size_t> channels{32, 32, 32};
  std::vector<std::size_t> dilations{1, 2, 4};
  std::vector<std::size_t> forecast_hidden{64};    // head emits k after these
  std::vector<std::size_t> classifier_hidden{64};  // head emits L after these
  double temperature = 1.0;
  double leaky_slope = 0.01;
  std::size_t mc_passes = 30;  // stochastic passes at final inference
  bool dropout_enabled = true;
  double concrete_temperature = 0.1;
  double weight_reg = 1e-6;
  double dropout_reg = 1e-5;
  double dropout_init_p = 0.1;
  // The learned representation serves the forecasting problem; the classifier
  // head reads it through a stop-gradient so cross-entropy trains only the
  // head itself.
  bool isolate_classifier_gradients = true;

  void validate() const {
    if (m < 1 || k < 1 || num_classes < 2)
      throw config_error("network: m, k must be >= 1 and num_classes >= 2");
    if (channels.empty() || channels.size() != dilations.size())
      throw config_error("network: channels and dilations must be non-empty and equal length");
    for (std::size_t c : channels)
      if (c == 0) throw config_error("network: zero channel width");
    for (std::size_t i = 0; i + 1 < dilations.size(); ++i)
      if (dilations[i + 1] != 2 * dilations[i])
        throw config_error("network: dilations must double each layer");
    if (dilations[0] == 0) throw config_error("network: zero dilation");
    if (filter_lengths.empty()) throw config_error("network: empty filter length set");
    for (std::size_t w : forecast_hidden)
      if (w == 0) throw config_error("network: zero forecast head width");
    for (std::size_t w : classifier_hidden)
      if (w == 0) throw config_error("network: zero classifier head width");
    if (handcrafted_length < 3 || handcrafted_length % 3 != 0)
      throw config_error("network: handcrafted_length must be a positive multiple of 3");
    if (temperature <= 0.0) throw config_error("network: temperature must be positive");
    if (mc_passes < 1) throw config_error("network: mc_passes must be >= 1");
  }
};

struct LossConfig {
  double alpha = 1.0;  // categorical cross entropy weight
  double beta = 1.0;   // forecast MSE weight

  void validate() const {
    if (alpha < 0.0 || beta < 0.0)
      throw config_error("loss: alpha and beta must be non-negative");
  }
};

/// Per-pass options. Defaults describe an ordinary stochastic training or
/// inference pass; attacks and saliency lower the isolation wall so input
/// gradients exist, and tests may freeze dropout off.
struct ForwardOptions {
  bool dropout = true;
  bool update_welford = true;
  bool isolate_classifier = true;
};

struct ForwardResult {
  Tensor input;        // [1 x m] leaf actually consumed by the trunk
  Tensor trunk;        // [C x m] activations after the last BC layer
  Tensor forecast;     // [k]
  Tensor phi;          // [m] learned representation (pre-detach)
  Tensor logits;       // [L]
  Tensor class_probs;  // [L]
  std::vector<double> welford_mean;
  std::vector<double> welford_var;
};

/// The full architecture: a hand-crafted BC layer in parallel with a
/// learnable BC layer, concatenated, then stacked dilated BC layers, a
/// forecast head off the last causal state, a time-distributed projection to
/// the per-step representation, the Welford layer over successive forecasts,
/// and a classifier head over the assembled 2 x (m + k) matrix.
class ForeClassNet {
 public:
  explicit ForeClassNet(const ForeClassNetConfig& cfg)
      : cfg_(cfg), welford_(cfg.k) {
    cfg_.validate();
    const ConcreteDropoutConfig dcfg{cfg_.dropout_init_p, cfg_.concrete_temperature,
                                     cfg_.weight_reg, cfg_.dropout_reg};
    bc_hand_ = BoltzmannConv("trunk.hand",
                             make_handcrafted_filters(cfg_.handcrafted_length),
                             cfg_.dilations[0], cfg_.temperature);
    bc_first_ = BoltzmannConv("trunk.bc0", cfg_.filter_lengths, cfg_.channels[0], 1,
                              cfg_.dilations[0], cfg_.temperature, dcfg);
    std::size_t width = 3 + cfg_.channels[0];
    for (std::size_t i = 1; i < cfg_.channels.size(); ++i) {
      stack_.emplace_back("trunk.bc" + std::to_string(i), cfg_.filter_lengths,
                          cfg_.channels[i], width, cfg_.dilations[i],
                          cfg_.temperature, dcfg);
      width = cfg_.channels[i];
    }
    trunk_width_ = width;

    std::size_t in = width;
    for (std::size_t i = 0; i < cfg_.forecast_hidden.size(); ++i) {
      const std::string nm = "forecast.dense" + std::to_string(i);
      forecast_drop_.emplace_back(nm, in, /*spatial=*/false, dcfg);
      forecast_head_.emplace_back(nm, cfg_.forecast_hidden[i], in);
      in = cfg_.forecast_hidden[i];
    }
    forecast_out_ = Dense("forecast.out", cfg_.k, in);

    projector_ = Dense("repr.projector", 1, width);

    in = 2 * (cfg_.m + cfg_.k);
    for (std::size_t i = 0; i < cfg_.classifier_hidden.size(); ++i) {
      const std::string nm = "classifier.dense" + std::to_string(i);
      classifier_drop_.emplace_back(nm, in, /*spatial=*/false, dcfg);
      classifier_head_.emplace_back(nm, cfg_.classifier_hidden[i], in);
      in = cfg_.classifier_hidden[i];
    }
    classifier_out_ = Dense("classifier.out", cfg_.num_classes, in);
  }

  const ForeClassNetConfig& config() const { return cfg_; }
  WelfordAccumulator& welford() { return welford_; }
  std::size_t trunk_width() const { return trunk_width_; }

  void init(Rng& rng) {
    bc_first_.init(rng);
    for (BoltzmannConv& bc : stack_) bc.init(rng);
    for (Dense& d : forecast_head_) d.init(rng);
    forecast_out_.init(rng);
    projector_.init(rng);
    for (Dense& d : classifier_head_) d.init(rng);
    classifier_out_.init(rng);
  }

  ForwardOptions default_options() const {
    return ForwardOptions{cfg_.dropout_enabled, true, cfg_.isolate_classifier_gradients};
  }

  /// Builds the input leaf for a sample and runs a pass. Use the
  /// Tensor-input overload to supply a leaf that requires gradients.
  ForwardResult forward(Tape& t, const TimeSeriesSample& s, Rng& noise) {
    return forward(t, s, noise, default_options());
  }

  ForwardResult forward(Tape& t, const TimeSeriesSample& s, Rng& noise,
                        const ForwardOptions& opt) {
    if (s.observed.size() != cfg_.m)
      throw dimension_error("forward: sample " + std::to_string(s.id) + " has length " +
                            std::to_string(s.observed.size()) + ", model expects m = " +
                            std::to_string(cfg_.m));
    Tensor x = t.constant({1, cfg_.m}, s.observed);
    return forward(t, x, s.id, noise, opt);
  }

  ForwardResult forward(Tape& t, const Tensor& x, std::int64_t sample_id, Rng& noise,
                        const ForwardOptions& opt) {
    if (x.shape() != Shape{1, cfg_.m})
      throw dimension_error("forward: input must be [1 x m], got " + shape_str(x.shape()));
    ForwardResult r;
    r.input = x;

    Tensor a = leaky_relu(bc_hand_.forward(t, x, noise, false), cfg_.leaky_slope);
    Tensor b = leaky_relu(bc_first_.forward(t, x, noise, opt.dropout), cfg_.leaky_slope);
    Tensor h = concat({a, b}, 0);
    for (BoltzmannConv& bc : stack_)
      h = leaky_relu(bc.forward(t, h, noise, opt.dropout), cfg_.leaky_slope);
    r.trunk = h;

    // Forecast head reads the last causal state (it has seen the whole
    // observed window).
    Tensor state = reshape(slice(h, 1, cfg_.m - 1, 1), {trunk_width_});
    Tensor f = state;
    for (std::size_t i = 0; i < forecast_head_.size(); ++i) {
      if (opt.dropout) f = forecast_drop_[i].apply(t, f, noise);
      f = relu(forecast_head_[i].forward(t, f));
    }
    r.forecast = forecast_out_.forward(t, f);

    // Time-distributed projection: one representation value per time step.
    r.phi = reshape(projector_.forward(t, h), {cfg_.m});

    const WelfordAccumulator::Entry& e =
        opt.update_welford ? welford_.update(sample_id, r.forecast.values())
                           : welford_.entry(sample_id);
    r.welford_mean = e.mean;
    r.welford_var = WelfordAccumulator::variance(e);

    Tensor phi_in = opt.isolate_classifier ? detach(r.phi) : r.phi;
    Tensor rep = assemble_representation(t, phi_in, e);
    Tensor c = reshape(rep, {2 * (cfg_.m + cfg_.k)});
    for (std::size_t i = 0; i < classifier_head_.size(); ++i) {
      if (opt.dropout) c = classifier_drop_[i].apply(t, c, noise);
      c = relu(classifier_head_[i].forward(t, c));
    }
    r.logits = classifier_out_.forward(t, c);
    r.class_probs = softmax(r.logits);
    return r;
  }

  /// Sum of all concrete-dropout regularizer terms (weights and dropout
  /// probabilities). Hand-crafted filters contribute nothing.
  Tensor regularizer(Tape& t) {
    Tensor reg = bc_first_.regularizer(t);
    for (BoltzmannConv& bc : stack_) {
      Tensor term = bc.regularizer(t);
      if (term.defined()) reg = reg.defined() ? add(reg, term) : term;
    }
    for (std::size_t i = 0; i < forecast_head_.size(); ++i) {
      Tensor term = forecast_drop_[i].regularizer(t, t.watch(forecast_head_[i].weight()));
      reg = reg.defined() ? add(reg, term) : term;
    }
    for (std::size_t i = 0; i < classifier_head_.size(); ++i) {
      Tensor term =
          classifier_drop_[i].regularizer(t, t.watch(classifier_head_[i].weight()));
      reg = reg.defined() ? add(reg, term) : term;
    }
    if (!reg.defined()) reg = t.scalar(0.0);
    return reg;
  }

  /// Trainable parameters in declaration order.
  std::vector<Parameter*> parameters() {
    std::vector<Parameter*> out;
    auto push_all = [&out](std::vector<Parameter*> v) {
      for (Parameter* p : v)
        if (p->trainable) out.push_back(p);
    };
    push_all(bc_first_.parameters());
    for (BoltzmannConv& bc : stack_) push_all(bc.parameters());
    for (std::size_t i = 0; i < forecast_head_.size(); ++i) {
      out.push_back(&forecast_drop_[i].logit());
      out.push_back(&forecast_head_[i].weight());
      out.push_back(&forecast_head_[i].bias());
    }
    out.push_back(&forecast_out_.weight());
    out.push_back(&forecast_out_.bias());
    out.push_back(&projector_.weight());
    out.push_back(&projector_.bias());
    for (std::size_t i = 0; i < classifier_head_.size(); ++i) {
      out.push_back(&classifier_drop_[i].logit());
      out.push_back(&classifier_head_[i].weight());
      out.push_back(&classifier_head_[i].bias());
    }
    out.push_back(&classifier_out_.weight());
    out.push_back(&classifier_out_.bias());
    return out;
  }

  /// Every parameter incl. fixed banks, for checkpointing.
  std::vector<Parameter*> all_parameters() {
    std::vector<Parameter*> out;
    auto push_all = [&out](std::vector<Parameter*> v) {
      for (Parameter* p : v) out.push_back(p);
    };
    push_all(bc_hand_.all_parameters());
    push_all(bc_first_.all_parameters());
    for (BoltzmannConv& bc : stack_) push_all(bc.all_parameters());
    for (std::size_t i = 0; i < forecast_head_.size(); ++i) {
      out.push_back(&forecast_drop_[i].logit());
      out.push_back(&forecast_head_[i].weight());
      out.push_back(&forecast_head_[i].bias());
    }
    out.push_back(&forecast_out_.weight());
    out.push_back(&forecast_out_.bias());
    out.push_back(&projector_.weight());
    out.push_back(&projector_.bias());
    for (std::size_t i = 0; i < classifier_head_.size(); ++i) {
      out.push_back(&classifier_drop_[i].logit());
      out.push_back(&classifier_head_[i].weight());
      out.push_back(&classifier_head_[i].bias());
    }
    out.push_back(&classifier_out_.weight());
    out.push_back(&classifier_out_.bias());
    return out;
  }

  BoltzmannConv& handcrafted_layer() { return bc_hand_; }
  BoltzmannConv& first_learnable_layer() { return bc_first_; }
  std::vector<BoltzmannConv>& stacked_layers() { return stack_; }
  Dense& classifier_output_layer() { return classifier_out_; }
  Dense& forecast_output_layer() { return forecast_out_; }

 private:
  ForeClassNetConfig cfg_;
  BoltzmannConv bc_hand_;
  BoltzmannConv bc_first_;
  std::vector<BoltzmannConv> stack_;
  std::size_t trunk_width_ = 0;
  std::vector<ConcreteDropout> forecast_drop_;
  std::vector<Dense> forecast_head_;
  Dense forecast_out_;
  Dense projector_;
  std::vector<ConcreteDropout> classifier_drop_;
  std::vector<Dense> classifier_head_;
  Dense classifier_out_;
  WelfordAccumulator welford_;
};

/// Eq-style joint objective:
///   beta * (1/k) * sum_j (xstar_j - forecast_j)^2
///   - alpha * sum_j y_j log(max(probs_j, 1e-12))
///   [+ regularizer when supplied].
/// Probabilities are clamped before the log so a confident wrong prediction
/// yields a large finite loss instead of -inf.
inline Tensor joint_loss(Tape& t, const Tensor& class_probs, int true_label,
                         const Tensor& forecast, std::span<const double> future,
                         const LossConfig& cfg, const Tensor* regularizer = nullptr) {
  cfg.validate();
  if (forecast.size() != future.size())
    throw dimension_error("joint_loss: forecast length " +
                          std::to_string(forecast.size()) + " != future length " +
                          std::to_string(future.size()));
  if (true_label < 0 || static_cast<std::size_t>(true_label) >= class_probs.size())
    throw contract_error("joint_loss: label out of range");
  const std::size_t k = future.size();
  Tensor target = t.constant({k}, std::vector<double>(future.begin(), future.end()));
  Tensor diff = sub(forecast, target);
  Tensor mse = scalar_mul(sum(mul(diff, diff)), 1.0 / static_cast<double>(k));
  Tensor p_true = slice(class_probs, 0, static_cast<std::size_t>(true_label), 1);
  Tensor cce = neg(log(clamp_min(p_true, 1e-12)));
  Tensor loss = add(scalar_mul(mse, cfg.beta), scalar_mul(cce, cfg.alpha));
  if (regularizer && regularizer->defined()) loss = add(loss, *regularizer);
  return loss;
}

struct McPrediction {
  std::vector<double> class_probs;   // averaged over passes
  std::vector<double> forecast_mean; // final Welford mean
  std::vector<double> forecast_var;  // final Welford population variance
  int label = 0;                     // argmax, lowest index wins ties
};

inline int argmax_lowest(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return static_cast<int>(best);
}

/// Runs `passes` stochastic forwards with dropout active, averaging the class
/// probabilities and accumulating the forecast mean/variance online. The
/// sample's accumulator entry is reset first. Noise for pass p comes from
/// derive(noise_seed, "mc", {id, p}), so predictions are independent of
/// evaluation order.
inline McPrediction predict_mc(ForeClassNet& model, const TimeSeriesSample& s,
                               std::size_t passes, std::uint64_t noise_seed) {
  if (passes < 1) throw contract_error("predict_mc: passes must be >= 1");
  model.welford().reset_in_place(s.id);
  const std::size_t L = model.config().num_classes;
  McPrediction out;
  out.class_probs.assign(L, 0.0);
  Tape t;
  for (std::size_t p = 0; p < passes; ++p) {
    t.clear();
    Rng noise = derive_rng(noise_seed, "mc",
                           {static_cast<std::uint64_t>(s.id), p});
    ForwardResult r = model.forward(t, s, noise);
    auto probs = r.class_probs.values();
    for (std::size_t i = 0; i < L; ++i) out.class_probs[i] += probs[i];
    if (p + 1 == passes) {
      out.forecast_mean = r.welford_mean;
      out.forecast_var = r.welford_var;
    }
  }
  for (double& v : out.class_probs) v /= static_cast<double>(passes);
  out.label = argmax_lowest(out.class_probs);
  return out;
}

}  // namespace fcn

#endif  // FORECLASSNET_NETWORK_HPP
