#ifndef FORECLASSNET_DROPOUT_HPP
#define FORECLASSNET_DROPOUT_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "foreclassnet/ops.hpp"
#include "foreclassnet/rng.hpp"
#include "foreclassnet/tensor.hpp"

namespace fcn {

struct ConcreteDropoutConfig {
  double init_p = 0.1;
  double temperature = 0.1;
  double weight_reg = 1e-6;
  double dropout_reg = 1e-5;
};

/// Dropout with a concrete (continuous) relaxation of the Bernoulli mask, so
/// the drop probability is itself trained by gradient descent. The relaxed
/// mask is
///   z = sigmoid((logit(p) + logit(u)) / temperature),  u ~ U(0,1),
/// and the output is input * (1 - z) / (1 - p). With spatial=true one mask
/// value covers a whole channel of a [C x T] input. The mask stays active at
/// inference (MC dropout); only regularizer collection is train-only.
class ConcreteDropout {
 public:
  ConcreteDropout() = default;

  ConcreteDropout(const std::string& name, std::size_t units, bool spatial,
                  const ConcreteDropoutConfig& cfg)
      : p_logit_(name + ".p_logit", {1}),
        units_(units),
        spatial_(spatial),
        temperature_(cfg.temperature),
        weight_reg_(cfg.weight_reg),
        dropout_reg_(cfg.dropout_reg) {
    if (cfg.init_p <= 0.0 || cfg.init_p >= 1.0)
      throw domain_error("ConcreteDropout: init_p must lie in (0, 1)");
    p_logit_.value[0] = std::log(cfg.init_p / (1.0 - cfg.init_p));
  }

  Parameter& logit() { return p_logit_; }
  const Parameter& logit() const { return p_logit_; }

  /// sigmoid(p_logit); always strictly inside (0, 1).
  double dropout_probability() const {
    const double l = p_logit_.value[0];
    return l >= 0.0 ? 1.0 / (1.0 + std::exp(-l)) : std::exp(l) / (1.0 + std::exp(l));
  }

  std::size_t units() const { return units_; }
  bool spatial() const { return spatial_; }

  /// Stochastic forward. Draws one uniform per masked unit from `noise`.
  Tensor apply(Tape& t, const Tensor& input, Rng& noise) {
    const std::size_t mask_n = spatial_ ? input.shape()[0] : input.size();
    if (spatial_ && input.shape().size() != 2)
      throw dimension_error("ConcreteDropout: spatial wrapper expects [C x T] input");
    if (mask_n != units_)
      throw dimension_error("ConcreteDropout(" + p_logit_.name + "): input has " +
                            std::to_string(mask_n) + " units, wrapper built for " +
                            std::to_string(units_));
    std::vector<double> noise_logit(mask_n);
    for (double& v : noise_logit) {
      const double u = noise.uniform_open();
      v = std::log(u) - std::log1p(-u);
    }
    Tensor lp = t.watch(p_logit_);
    Tensor pre = bcast_add(lp, t.constant({mask_n}, std::move(noise_logit)));
    Tensor z = sigmoid(scalar_mul(pre, 1.0 / temperature_));
    Tensor keep = affine(z, -1.0, 1.0);
    Tensor p = sigmoid(lp);
    Tensor scale = reciprocal(affine(p, -1.0, 1.0));
    Tensor masked = spatial_ ? mul_channel(input, keep) : mul(input, keep);
    return bcast_mul(scale, masked);
  }

  /// weight_reg * ||W||^2 / (1 - p)
  ///   + dropout_reg * D * (p log p + (1 - p) log(1 - p)),
  /// where D is the number of wrapped input units. Differentiable in both the
  /// wrapped weights and p_logit. Pass an undefined tensor for weightless
  /// wrappers (only the entropy term is produced).
  Tensor regularizer(Tape& t, const Tensor& wrapped_weights) {
    Tensor lp = t.watch(p_logit_);
    Tensor p = sigmoid(lp);
    Tensor q = affine(p, -1.0, 1.0);
    Tensor entropy = add(mul(p, log(p)), mul(q, log(q)));
    Tensor reg = scalar_mul(entropy, dropout_reg_ * static_cast<double>(units_));
    if (wrapped_weights.defined() && weight_reg_ != 0.0) {
      Tensor w2 = sum(mul(wrapped_weights, wrapped_weights));
      Tensor wterm = scalar_mul(mul(w2, reciprocal(q)), weight_reg_);
      reg = add(reg, wterm);
    }
    return reg;
  }

 private:
  Parameter p_logit_;
  std::size_t units_ = 0;
  bool spatial_ = false;
  double temperature_ = 0.1;
  double weight_reg_ = 1e-6;
  double dropout_reg_ = 1e-5;
};

}  // namespace fcn

#endif  // FORECLASSNET_DROPOUT_HPP
