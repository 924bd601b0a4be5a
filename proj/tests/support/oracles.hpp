#ifndef FCN_TESTS_SUPPORT_ORACLES_HPP
#define FCN_TESTS_SUPPORT_ORACLES_HPP

// Independent reference computations used to pin expected values. Everything
// here is deliberately written the dumb, obvious way and must stay decoupled
// from the library's implementation paths.

#include <cmath>
#include <cstddef>
#include <vector>

#include "foreclassnet/rng.hpp"
#include "foreclassnet/tensor.hpp"

namespace oracle {

/// Direct triple-loop dilated causal convolution:
/// out(h, i) = sum_j sum_m w(h, m, j) * x(m, i - d*j), zero left padding.
inline std::vector<double> conv1d_causal(const std::vector<double>& x, std::size_t cin,
                                         std::size_t T, const std::vector<double>& w,
                                         std::size_t cout, std::size_t K,
                                         std::size_t dilation) {
  std::vector<double> out(cout * T, 0.0);
  for (std::size_t h = 0; h < cout; ++h)
    for (std::size_t i = 0; i < T; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < K; ++j)
        for (std::size_t m = 0; m < cin; ++m) {
          const long long src = static_cast<long long>(i) -
                                static_cast<long long>(dilation * j);
          if (src >= 0)
            acc += w[(h * cin + m) * K + j] * x[m * T + static_cast<std::size_t>(src)];
        }
      out[h * T + i] = acc;
    }
  return out;
}

struct MeanVar {
  std::vector<double> mean;
  std::vector<double> var;  // population (divide by n)
};

/// Two-pass population statistics over a sequence of equal-length vectors.
inline MeanVar two_pass(const std::vector<std::vector<double>>& xs) {
  const std::size_t k = xs.front().size();
  const double n = static_cast<double>(xs.size());
  MeanVar out;
  out.mean.assign(k, 0.0);
  out.var.assign(k, 0.0);
  for (const auto& x : xs)
    for (std::size_t i = 0; i < k; ++i) out.mean[i] += x[i];
  for (double& m : out.mean) m /= n;
  for (const auto& x : xs)
    for (std::size_t i = 0; i < k; ++i) {
      const double d = x[i] - out.mean[i];
      out.var[i] += d * d;
    }
  for (double& v : out.var) v /= n;
  return out;
}

/// Textbook Adam recursion for a single scalar parameter.
struct ReferenceAdam {
  double m = 0.0, v = 0.0;
  unsigned long t = 0;
  double lr = 1e-3, b1 = 0.9, b2 = 0.999, eps = 1e-8;

  double step(double theta, double g) {
    ++t;
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    const double mhat = m / (1.0 - std::pow(b1, static_cast<double>(t)));
    const double vhat = v / (1.0 - std::pow(b2, static_cast<double>(t)));
    return theta - lr * mhat / (std::sqrt(vhat) + eps);
  }
};

/// Central-difference gradient checker. `fn` rebuilds the scalar loss from a
/// leaf tensor with the given values on a fresh tape; it must be
/// deterministic (freeze any noise inside). Returns the max relative error
/// |analytic - fd| / max(1, |analytic|) over `probes` random coordinates.
template <typename Fn>
double max_grad_rel_err(const fcn::Shape& shape, const std::vector<double>& x0, Fn fn,
                        std::size_t probes, fcn::Rng& rng, double step = 1e-4) {
  std::vector<double> analytic;
  {
    fcn::Tape t;
    fcn::Tensor x = t.leaf(shape, x0, true);
    fcn::Tensor loss = fn(t, x);
    t.backward(loss);
    analytic = x.grad();
  }
  auto value_at = [&](const std::vector<double>& xv) {
    fcn::Tape t;
    fcn::Tensor x = t.leaf(shape, xv, false);
    return fn(t, x).value();
  };
  double worst = 0.0;
  for (std::size_t p = 0; p < probes; ++p) {
    const std::size_t i = static_cast<std::size_t>(rng.integer(x0.size()));
    std::vector<double> hi = x0, lo = x0;
    hi[i] += step;
    lo[i] -= step;
    const double fd = (value_at(hi) - value_at(lo)) / (2.0 * step);
    const double err = std::abs(analytic[i] - fd) / std::max(1.0, std::abs(analytic[i]));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace oracle

#endif  // FCN_TESTS_SUPPORT_ORACLES_HPP
