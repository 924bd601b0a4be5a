#ifndef FORECLASSNET_LAYERS_HPP
#define FORECLASSNET_LAYERS_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "foreclassnet/dropout.hpp"
#include "foreclassnet/filters.hpp"
#include "foreclassnet/ops.hpp"
#include "foreclassnet/rng.hpp"
#include "foreclassnet/tensor.hpp"

namespace fcn {

/// Temperature-scaled softmax over an energy vector: softmax(p / T).
/// Order-preserving in p for any T > 0.
inline std::vector<double> boltzmann_probabilities(std::span<const double> energies,
                                                   double temperature) {
  if (temperature <= 0.0)
    throw domain_error("boltzmann_probabilities: temperature must be positive, got " +
                       std::to_string(temperature));
  if (energies.empty())
    throw contract_error("boltzmann_probabilities: empty energy vector");
  for (double e : energies)
    if (!std::isfinite(e))
      throw numeric_error("boltzmann_probabilities: non-finite energy");
  double m = energies[0] / temperature;
  for (double e : energies) m = std::max(m, e / temperature);
  std::vector<double> p(energies.size());
  double z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(energies[i] / temperature - m);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

/// Fully connected layer: out = W x + b.
class Dense {
 public:
  Dense() = default;
  Dense(const std::string& name, std::size_t out, std::size_t in)
      : W_(name + ".weight", {out, in}), b_(name + ".bias", {out}) {}

  void init(Rng& rng) {
    const double bound = std::sqrt(1.0 / static_cast<double>(W_.shape[1]));
    for (double& v : W_.value) v = rng.uniform(-bound, bound);
    std::fill(b_.value.begin(), b_.value.end(), 0.0);
  }

  /// x may be [in] (vector) or [in x T] (applied per time step).
  Tensor forward(Tape& t, const Tensor& x) {
    return add_bias(matmul(t.watch(W_), x), t.watch(b_));
  }

  Parameter& weight() { return W_; }
  Parameter& bias() { return b_; }
  std::size_t in_features() const { return W_.shape[1]; }
  std::size_t out_features() const { return W_.shape[0]; }

 private:
  Parameter W_, b_;
};

/// Boltzmann convolutional layer: a probability-weighted sum of parallel
/// causal convolutions with different filter lengths. The weights follow the
/// Boltzmann distribution softmax(p / T) over a trainable energy vector p, so
/// the layer learns which temporal resolutions to favor. Each trainable bank
/// is wrapped in a spatial concrete-dropout layer on its input; a fixed
/// (hand-crafted) layer has no dropout and no trainable state.
class BoltzmannConv {
 public:
  BoltzmannConv() = default;

  /// Trainable layer.
  BoltzmannConv(const std::string& name, std::vector<std::size_t> lengths,
                std::size_t channels_out, std::size_t channels_in,
                std::size_t dilation, double temperature,
                const ConcreteDropoutConfig& dropout_cfg)
      : name_(name),
        lengths_(std::move(lengths)),
        cout_(channels_out),
        cin_(channels_in),
        dilation_(dilation),
        temperature_(temperature),
        trainable_(true),
        energies_(name + ".energies", {lengths_.size()}) {
    check_lengths();
    banks_.reserve(lengths_.size());
    dropouts_.reserve(lengths_.size());
    for (std::size_t j = 0; j < lengths_.size(); ++j) {
      const std::string bank_name = name + ".bank" + std::to_string(lengths_[j]);
      banks_.emplace_back(bank_name, Shape{cout_, cin_, lengths_[j]});
      dropouts_.emplace_back(bank_name, cin_, /*spatial=*/true, dropout_cfg);
    }
  }

  /// Fixed layer around a hand-crafted filter bank. Its single length still
  /// participates in the Boltzmann mixture (probability one for a singleton),
  /// but nothing in the layer trains and no dropout wraps it.
  BoltzmannConv(const std::string& name, const HandCraftedFilterBank& bank,
                std::size_t dilation, double temperature)
      : name_(name),
        lengths_{bank.length},
        cout_(3),
        cin_(1),
        dilation_(dilation),
        temperature_(temperature),
        trainable_(false),
        energies_(name + ".energies", {1}, /*trainable=*/false) {
    banks_.push_back(bank.as_parameter(name + ".bank" + std::to_string(bank.length)));
  }

  void init(Rng& rng) {
    if (!trainable_) return;
    for (std::size_t j = 0; j < banks_.size(); ++j) {
      const double fan_in = static_cast<double>(cin_ * lengths_[j]);
      const double bound = std::sqrt(1.0 / fan_in);
      for (double& v : banks_[j].value) v = rng.uniform(-bound, bound);
    }
    std::fill(energies_.value.begin(), energies_.value.end(), 0.0);
  }

  std::vector<double> probabilities() const {
    return boltzmann_probabilities(energies_.value, temperature_);
  }

  /// One stochastic pass. When dropout_active is false the wrappers are
  /// bypassed entirely (exact deterministic mixture).
  Tensor forward(Tape& t, const Tensor& x, Rng& noise, bool dropout_active = true) {
    if (x.shape().size() != 2 || x.shape()[0] != cin_)
      throw dimension_error(name_ + ": expected input [" + std::to_string(cin_) +
                            " x T], got " + shape_str(x.shape()));
    Tensor probs = softmax(scalar_mul(t.watch(energies_), 1.0 / temperature_));
    Tensor out;
    for (std::size_t j = 0; j < lengths_.size(); ++j) {
      Tensor xin = (trainable_ && dropout_active) ? dropouts_[j].apply(t, x, noise) : x;
      Tensor conv = conv1d_causal(xin, t.watch(banks_[j]), dilation_);
      Tensor term = bcast_mul(slice(probs, 0, j, 1), conv);
      out = out.defined() ? add(out, term) : term;
    }
    return out;
  }

  /// Sum of the concrete-dropout regularizers over all wrapped banks.
  /// A fixed layer contributes nothing.
  Tensor regularizer(Tape& t) {
    Tensor reg;
    if (!trainable_) return reg;
    for (std::size_t j = 0; j < banks_.size(); ++j) {
      Tensor term = dropouts_[j].regularizer(t, t.watch(banks_[j]));
      reg = reg.defined() ? add(reg, term) : term;
    }
    return reg;
  }

  std::vector<Parameter*> parameters() {
    std::vector<Parameter*> out;
    if (!trainable_) return out;
    out.push_back(&energies_);
    for (Parameter& b : banks_) out.push_back(&b);
    for (ConcreteDropout& d : dropouts_) out.push_back(&d.logit());
    return out;
  }

  /// Including fixed banks (for checkpointing).
  std::vector<Parameter*> all_parameters() {
    std::vector<Parameter*> out;
    out.push_back(&energies_);
    for (Parameter& b : banks_) out.push_back(&b);
    for (ConcreteDropout& d : dropouts_) out.push_back(&d.logit());
    return out;
  }

  const std::vector<std::size_t>& lengths() const { return lengths_; }
  std::size_t channels_out() const { return cout_; }
  std::size_t channels_in() const { return cin_; }
  std::size_t dilation() const { return dilation_; }
  bool trainable() const { return trainable_; }
  Parameter& energies() { return energies_; }
  Parameter& bank(std::size_t j) { return banks_[j]; }
  ConcreteDropout& dropout(std::size_t j) { return dropouts_[j]; }

 private:
  void check_lengths() {
    if (lengths_.empty()) throw contract_error(name_ + ": empty filter length set");
    for (std::size_t j = 0; j < lengths_.size(); ++j) {
      if (lengths_[j] == 0) throw contract_error(name_ + ": zero filter length");
      for (std::size_t i = 0; i < j; ++i)
        if (lengths_[i] == lengths_[j])
          throw contract_error(name_ + ": duplicate filter length " +
                               std::to_string(lengths_[j]));
    }
  }

  std::string name_;
  std::vector<std::size_t> lengths_;
  std::size_t cout_ = 0, cin_ = 0, dilation_ = 1;
  double temperature_ = 1.0;
  bool trainable_ = true;
  Parameter energies_;
  std::vector<Parameter> banks_;
  std::vector<ConcreteDropout> dropouts_;
};

}  // namespace fcn

#endif  // FORECLASSNET_LAYERS_HPP
