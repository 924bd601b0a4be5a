#ifndef FORECLASSNET_ADAM_HPP
#define FORECLASSNET_ADAM_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "foreclassnet/errors.hpp"
#include "foreclassnet/tensor.hpp"

namespace fcn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,
///   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps).
class Adam {
 public:
  Adam(std::vector<Parameter*> params, const AdamConfig& cfg = {})
      : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (Parameter* p : params_) {
      m_.emplace_back(p->size(), 0.0);
      v_.emplace_back(p->size(), 0.0);
    }
  }

  std::uint64_t step_count() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

  void zero_grad() {
    for (Parameter* p : params_) p->zero_grad();
  }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
      Parameter& p = *params_[pi];
      std::vector<double>& m = m_[pi];
      std::vector<double>& v = v_[pi];
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double g = p.grad[i];
        if (!std::isfinite(g))
          throw numeric_error("adam: non-finite gradient in parameter '" + p.name +
                              "' at index " + std::to_string(i));
        m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
        v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p.value[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      }
    }
  }

 private:
  std::vector<Parameter*> params_;
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  std::uint64_t t_ = 0;
};

}  // namespace fcn

#endif  // FORECLASSNET_ADAM_HPP
