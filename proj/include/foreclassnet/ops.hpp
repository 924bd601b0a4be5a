#ifndef FORECLASSNET_OPS_HPP
#define FORECLASSNET_OPS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "foreclassnet/tensor.hpp"

namespace fcn {

namespace detail {

inline Tape& same_tape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.defined() || !b.defined())
    throw contract_error(std::string(op) + ": undefined tensor operand");
  if (a.tape() != b.tape())
    throw contract_error(std::string(op) + ": operands live on different tapes");
  return *a.tape();
}

inline void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw dimension_error(std::string(op) + ": shape mismatch " +
                          shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

inline void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

inline double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise binary ops
// ---------------------------------------------------------------------------

inline Tensor add(const Tensor& a, const Tensor& b) {
  Tape& t = detail::same_tape(a, b, "add");
  detail::check_same_shape("add", a, b);
  auto av = a.values(), bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  const int aid = a.id(), bid = b.id();
  const bool rg = t.wants_grad(aid) || t.wants_grad(bid);
  return t.make(a.shape(), std::move(out), rg, [aid, bid](Tape& t, int self) {
    const auto& g = t.grad_buf(self);
    if (t.wants_grad(aid)) {
      auto& ga = t.grad_buf(aid);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (t.wants_grad(bid)) {
      auto& gb = t.grad_buf(bid);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
    }
  });
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  Tape& t = detail::same_tape(a, b, "sub");
  detail::check_same_shape("sub", a, b);
  auto av = a.values(), bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  const int aid = a.id(), bid = b.id();
  const bool rg = t.wants_grad(aid) || t.wants_grad(bid);
  return t.make(a.shape(), std::move(out), rg, [aid, bid](Tape& t, int self) {
    const auto& g = t.grad_buf(self);
    if (t.wants_grad(aid)) {
      auto& ga = t.grad_buf(aid);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (t.wants_grad(bid)) {
      auto& gb = t.grad_buf(bid);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
  Tape& t = detail::same_tape(a, b, "mul");
  detail::check_same_shape("mul", a, b);
  auto av = a.values(), bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  const int aid = a.id(), bid = b.id();
  const bool rg = t.wants_grad(aid) || t.wants_grad(bid);
  return t.make(a.shape(), std::move(out), rg, [aid, bid](Tape& t, int self) {
    const auto& g = t.grad_buf(self);
    auto av = t.values(aid), bv = t.values(bid);
    if (t.wants_grad(aid)) {
      auto& ga = t.grad_buf(aid);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t.wants_grad(bid)) {
      auto& gb = t.grad_buf(bid);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

// ---------------------------------------------------------------------------
// Affine / scalar ops
// ---------------------------------------------------------------------------

/// out = scale * x + shift (constants).
inline Tensor affine(const Tensor& x, double scale, double shift) {
  Tape& t = *x.tape();
  auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * xv[i] + shift;
  const int xid = x.id();
  const bool rg = t.wants_grad(xid);
  return t.make(x.shape(), std::move(out), rg, [xid, scale](Tape& t, int self) {
    const auto& g = t.grad_buf(self);
    auto& gx = t.grad_buf(xid);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += scale * g[i];
  });
}

inline Tensor scalar_mul(const Tensor& x, double c) { return affine(x, c, 0.0); }
inline Tensor neg(const Tensor& x) { return affine(x, -1.0, 0.0); }

/// out(i) = s + x(i), s a size-1 tensor.
inline Tensor bcast_add(const Tensor& s, const Tensor& x) {
  Tape& t = detail::same_tape(s, x, "bcast_add");
  if (s.size() != 1) throw dimension_error("bcast_add: scalar operand must have size 1");
  const double sv = s.values()[0];
  auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sv + xv[i];
  const int sid = s.id(), xid = x.id();
  const bool rg = t.wants_grad(sid) || t.wants_grad(xid);
  return t.make(x.shape(), std::move(out), rg, [sid, xid](Tape& t, int self) {
    const auto& g = t.grad_buf(self);
    if (t.wants_grad(sid)) {
      double acc = 0.0;
      for (double gi : g) acc += gi;
      t.grad_buf(sid)[0] += acc;
    }
    if (t.wants_grad(xid)) {
      auto& gx = t.grad_buf(xid);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    }
  });
}

/// out(i) = s * x(i), s a size-1 tensor.
inline Tensor bcast_mul(const Tensor& s, const Tensor& x) {
  Tape& t = detail::same_tape(s, x, "bcast_mul");
  if (s.size() != 1) throw dimension_error("bcast_mul: scalar operand must have size 1");
  const double sv = s.values()[0];
  auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sv * xv[i];
  const int sid = s.id(), xid = x.id();
  const bool rg = t.wants_grad(sid) || t.wants_grad(xid);
  return t.make(x.shape(), std::move(out), rg, [sid, xid](Tape& t, int self) {
    const auto& g = t.grad_buf(self);
    auto xv = t.values(xid);
    const double sv = t.values(sid)[0];
    if (t.wants_grad(sid)) {
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * xv[i];
      t.grad_buf(sid)[0] += acc;
    }
    if (t.wants_grad(xid)) {
      auto& gx = t.grad_buf(xid);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += sv * g[i];
    }
  });
}

/// Channel-wise scale: x is [C x T], v is [C]; out(c, i) = x(c, i) * v(c).
inline Tensor mul_channel(const Tensor& x, const Tensor& v) {
  Tape& t = detail::same_tape(x, v, "mul_channel");
  if (x.shape().size() != 2 || v.shape().size() != 1 || x.shape()[0] != v.shape()[0])
    throw dimension_error("mul_channel: expected [CxT] and [C], got " +
                          shape_str(x.shape()) + " and " + shape_str(v.shape()));
  const std::size_t C = x.shape()[0], T = x.shape()[1];
  auto xv = x.values(), vv = v.values();
  std::vector<double> out(xv.size());
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t i = 0; i < T; ++i) out[c * T + i] = xv[c * T + i] * vv[c];
  const int xid = x.id(), vid = v.id();
  const bool rg = t.wants_grad(xid) || t.wants_grad(vid);
  return t.make(x.shape(), std::move(out), rg, [xid, vid, C, T](Tape& t, int self) {
    const auto& g = t.grad_buf(self);
    auto xv = t.values(xid), vv = t.values(vid);
    if (t.wants_grad(xid)) {
      auto& gx = t.grad_buf(xid);
      for (std::size_t c = 0; c < C; ++c)
        for (std::size_t i = 0; i < T; ++i) gx[c * T + i] += g[c * T + i] * vv[c];
    }
    if (t.wants_grad(vid)) {
      auto& gv = t.grad_buf(vid);
      for (std::size_t c = 0; c < C; ++c) {
        double acc = 0.0;
        for (std::size_t i = 0; i < T; ++i) acc += g[c * T + i] * xv[c * T + i];
        gv[c] += acc;
      }
    }
  });
}

/// Column-broadcast bias: x is [P x R], b is [P]; out(i, j) = x(i, j) + b(i).
inline Tensor add_bias(const Tensor& x, const Tensor& b) {
  Tape& t = detail::same_tape(x, b, "add_bias");
  if (x.shape().size() == 1) return add(x, b);
  if (x.shape().size() != 2 || b.shape().size() != 1 || x.shape()[0] != b.shape()[0])
    throw dimension_error("add_bias: expected [PxR] and [P], got " +
                          shape_str(x.shape()) + " and " + shape_str(b.shape()));
  const std::size_t P = x.shape()[0], R = x.shape()[1];
  auto xv = x.values(), bv = b.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < P; ++i)
    for (std::size_t j = 0; j < R; ++j) out[i * R + j] = xv[i * R + j] + bv[i];
  const int xid = x.id(), bid = b.id();
  const bool rg = t.wants_grad(xid) || t.wants_grad(bid);
  return t.make(x.shape(), std::move(out), rg, [xid, bid, P, R](Tape& t, int self) {
    const auto& g = t.grad_buf(self);
    if (t.wants_grad(xid)) {
      auto& gx = t.grad_buf(xid);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    }
    if (t.wants_grad(bid)) {
      auto& gb = t.grad_buf(bid);
      for (std::size_t i = 0; i < P; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < R; ++j) acc += g[i * R + j];
        gb[i] += acc;
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Matrix product
// ---------------------------------------------------------------------------

/// a [P x Q] times b ([Q x R] or [Q]) -> [P x R] or [P].
inline Tensor matmul(const Tensor& a, const Tensor& b) {
  Tape& t = detail::same_tape(a, b, "matmul");
  if (a.shape().size() != 2)
    throw dimension_error("matmul: left operand must be 2-D, got " + shape_str(a.shape()));
  const bool vec = b.shape().size() == 1;
  if (!vec && b.shape().size() != 2)
    throw dimension_error("matmul: right operand must be 1-D or 2-D, got " +
                          shape_str(b.shape()));
  const std::size_t P = a.shape()[0], Q = a.shape()[1];
  const std::size_t R = vec ? 1 : b.shape()[1];
  if (b.shape()[0] != Q)
    throw dimension_error("matmul: inner dimensions differ, " + shape_str(a.shape()) +
                          " vs " + shape_str(b.shape()));
  auto av = a.values(), bv = b.values();
  std::vector<double> out(P * R, 0.0);
  for (std::size_t i = 0; i < P; ++i)
    for (std::size_t kk = 0; kk < Q; ++kk)
      detail::axpy(av[i * Q + kk], bv.data() + kk * R, out.data() + i * R, R);
  const int aid = a.id(), bid = b.id();
  const bool rg = t.wants_grad(aid) || t.wants_grad(bid);
  Shape oshape = vec ? Shape{P} : Shape{P, R};
  return t.make(std::move(oshape), std::move(out), rg,
                [aid, bid, P, Q, R](Tape& t, int self) {
    const auto& g = t.grad_buf(self);
    auto av = t.values(aid), bv = t.values(bid);
    if (t.wants_grad(aid)) {
      auto& ga = t.grad_buf(aid);
      for (std::size_t i = 0; i < P; ++i)
        for (std::size_t kk = 0; kk < Q; ++kk)
          ga[i * Q + kk] += detail::dot(g.data() + i * R, bv.data() + kk * R, R);
    }
    if (t.wants_grad(bid)) {
      auto& gb = t.grad_buf(bid);
      for (std::size_t i = 0; i < P; ++i)
        for (std::size_t kk = 0; kk < Q; ++kk)
          detail::axpy(av[i * Q + kk], g.data() + i * R, gb.data() + kk * R, R);
    }
  });
}

// ---------------------------------------------------------------------------
// Elementwise unary ops
// ---------------------------------------------------------------------------

namespace detail {

template <typename Fwd, typename Bwd>
Tensor unary_op(const Tensor& x, const char* /*name*/, Fwd fwd, Bwd bwd) {
  Tape& t = *x.tape();
  auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(xv[i]);
  const int xid = x.id();
  const bool rg = t.wants_grad(xid);
  return t.make(x.shape(), std::move(out), rg, [xid, bwd](Tape& t, int self) {
    const auto& g = t.grad_buf(self);
    auto xv = t.values(xid);
    auto yv = t.values(self);
    auto& gx = t.grad_buf(xid);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * bwd(xv[i], yv[i]);
  });
}

}  // namespace detail

inline Tensor relu(const Tensor& x) {
  return detail::unary_op(
      x, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

inline Tensor leaky_relu(const Tensor& x, double slope = 0.01) {
  return detail::unary_op(
      x, "leaky_relu", [slope](double v) { return v > 0.0 ? v : slope * v; },
      [slope](double v, double) { return v > 0.0 ? 1.0 : slope; });
}

inline Tensor sigmoid(const Tensor& x) {
  return detail::unary_op(
      x, "sigmoid",
      [](double v) {
        return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                        : std::exp(v) / (1.0 + std::exp(v));
      },
      [](double, double y) { return y * (1.0 - y); });
}

inline Tensor log(const Tensor& x) {
  for (double v : x.values())
    if (v <= 0.0)
      throw domain_error("log: input must be strictly positive, got " +
                         std::to_string(v));
  return detail::unary_op(
      x, "log", [](double v) { return std::log(v); },
      [](double v, double) { return 1.0 / v; });
}

inline Tensor exp(const Tensor& x) {
  return detail::unary_op(
      x, "exp", [](double v) { return std::exp(v); },
      [](double, double y) { return y; });
}

/// out = 1 / x, elementwise.
inline Tensor reciprocal(const Tensor& x) {
  return detail::unary_op(
      x, "reciprocal", [](double v) { return 1.0 / v; },
      [](double v, double) { return -1.0 / (v * v); });
}

/// out = max(x, floor). Subgradient: passes through only where x > floor.
inline Tensor clamp_min(const Tensor& x, double floor) {
  return detail::unary_op(
      x, "clamp_min", [floor](double v) { return v > floor ? v : floor; },
      [floor](double v, double) { return v > floor ? 1.0 : 0.0; });
}

// ---------------------------------------------------------------------------
// Softmax, reductions
// ---------------------------------------------------------------------------

/// Numerically stable softmax over the trailing axis.
inline Tensor softmax(const Tensor& x) {
  Tape& t = *x.tape();
  if (x.shape().empty()) throw dimension_error("softmax: scalar input");
  const std::size_t d = x.shape().back();
  const std::size_t rows = x.size() / d;
  auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xv.data() + r * d;
    double* orow = out.data() + r * d;
    double m = row[0];
    for (std::size_t i = 1; i < d; ++i) m = std::max(m, row[i]);
    double z = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      orow[i] = std::exp(row[i] - m);
      z += orow[i];
    }
    for (std::size_t i = 0; i < d; ++i) orow[i] /= z;
  }
  const int xid = x.id();
  const bool rg = t.wants_grad(xid);
  return t.make(x.shape(), std::move(out), rg, [xid, rows, d](Tape& t, int self) {
    const auto& g = t.grad_buf(self);
    auto yv = t.values(self);
    auto& gx = t.grad_buf(xid);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* grow = g.data() + r * d;
      const double* yrow = yv.data() + r * d;
      double inner = 0.0;
      for (std::size_t i = 0; i < d; ++i) inner += grow[i] * yrow[i];
      for (std::size_t i = 0; i < d; ++i)
        gx[r * d + i] += yrow[i] * (grow[i] - inner);
    }
  });
}

inline Tensor sum(const Tensor& x) {
  Tape& t = *x.tape();
  double s = 0.0;
  for (double v : x.values()) s += v;
  const int xid = x.id();
  const bool rg = t.wants_grad(xid);
  return t.make({1}, {s}, rg, [xid](Tape& t, int self) {
    const double g = t.grad_buf(self)[0];
    auto& gx = t.grad_buf(xid);
    for (double& v : gx) v += g;
  });
}

inline Tensor mean(const Tensor& x) {
  Tape& t = *x.tape();
  const std::size_t n = x.size();
  if (n == 0) throw dimension_error("mean: empty tensor");
  double s = 0.0;
  for (double v : x.values()) s += v;
  const int xid = x.id();
  const bool rg = t.wants_grad(xid);
  return t.make({1}, {s / static_cast<double>(n)}, rg, [xid, n](Tape& t, int self) {
    const double g = t.grad_buf(self)[0] / static_cast<double>(n);
    auto& gx = t.grad_buf(xid);
    for (double& v : gx) v += g;
  });
}

// ---------------------------------------------------------------------------
// Shape ops
// ---------------------------------------------------------------------------

inline Tensor reshape(const Tensor& x, Shape shape) {
  Tape& t = *x.tape();
  if (numel(shape) != x.size())
    throw dimension_error("reshape: cannot view " + shape_str(x.shape()) + " as " +
                          shape_str(shape));
  auto xv = x.values();
  std::vector<double> out(xv.begin(), xv.end());
  const int xid = x.id();
  const bool rg = t.wants_grad(xid);
  return t.make(std::move(shape), std::move(out), rg, [xid](Tape& t, int self) {
    const auto& g = t.grad_buf(self);
    auto& gx = t.grad_buf(xid);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

/// Value copy with no gradient path back to the source.
inline Tensor detach(const Tensor& x) {
  Tape& t = *x.tape();
  auto xv = x.values();
  return t.constant(x.shape(), std::vector<double>(xv.begin(), xv.end()));
}

inline Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw contract_error("concat: no inputs");
  Tape& t = *parts.front().tape();
  const Shape& s0 = parts.front().shape();
  if (axis >= s0.size())
    throw dimension_error("concat: axis " + std::to_string(axis) + " out of range for " +
                          shape_str(s0));
  std::size_t axis_total = 0;
  for (const Tensor& p : parts) {
    if (p.tape() != &t) throw contract_error("concat: operands live on different tapes");
    const Shape& s = p.shape();
    if (s.size() != s0.size())
      throw dimension_error("concat: rank mismatch " + shape_str(s0) + " vs " + shape_str(s));
    for (std::size_t d = 0; d < s.size(); ++d)
      if (d != axis && s[d] != s0[d])
        throw dimension_error("concat: shape mismatch off axis, " + shape_str(s0) +
                              " vs " + shape_str(s));
    axis_total += s[axis];
  }
  Shape oshape = s0;
  oshape[axis] = axis_total;
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= s0[d];
  for (std::size_t d = axis + 1; d < s0.size(); ++d) inner *= s0[d];

  std::vector<double> out(numel(oshape));
  const std::size_t orow = axis_total * inner;
  std::size_t off = 0;
  std::vector<int> ids;
  std::vector<std::size_t> blocks;
  bool rg = false;
  for (const Tensor& p : parts) {
    const std::size_t block = p.shape()[axis] * inner;
    auto pv = p.values();
    for (std::size_t o = 0; o < outer; ++o)
      std::copy(pv.data() + o * block, pv.data() + (o + 1) * block,
                out.data() + o * orow + off);
    ids.push_back(p.id());
    blocks.push_back(block);
    rg = rg || t.wants_grad(p.id());
    off += block;
  }
  return t.make(std::move(oshape), std::move(out), rg,
                [ids, blocks, outer, orow](Tape& t, int self) {
    const auto& g = t.grad_buf(self);
    std::size_t off = 0;
    for (std::size_t pi = 0; pi < ids.size(); ++pi) {
      const std::size_t block = blocks[pi];
      if (t.wants_grad(ids[pi])) {
        auto& gp = t.grad_buf(ids[pi]);
        for (std::size_t o = 0; o < outer; ++o) {
          const double* src = g.data() + o * orow + off;
          double* dst = gp.data() + o * block;
          for (std::size_t i = 0; i < block; ++i) dst[i] += src[i];
        }
      }
      off += block;
    }
  });
}

inline Tensor slice(const Tensor& x, std::size_t axis, std::size_t start,
                    std::size_t len) {
  Tape& t = *x.tape();
  const Shape& s = x.shape();
  if (axis >= s.size())
    throw dimension_error("slice: axis " + std::to_string(axis) + " out of range for " +
                          shape_str(s));
  if (start + len > s[axis] || len == 0)
    throw dimension_error("slice: range [" + std::to_string(start) + ", " +
                          std::to_string(start + len) + ") invalid for axis extent " +
                          std::to_string(s[axis]));
  Shape oshape = s;
  oshape[axis] = len;
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= s[d];
  for (std::size_t d = axis + 1; d < s.size(); ++d) inner *= s[d];
  const std::size_t xrow = s[axis] * inner, orow = len * inner;
  auto xv = x.values();
  std::vector<double> out(numel(oshape));
  for (std::size_t o = 0; o < outer; ++o)
    std::copy(xv.data() + o * xrow + start * inner,
              xv.data() + o * xrow + (start + len) * inner, out.data() + o * orow);
  const int xid = x.id();
  const bool rg = t.wants_grad(xid);
  return t.make(std::move(oshape), std::move(out), rg,
                [xid, outer, inner, xrow, orow, start](Tape& t, int self) {
    const auto& g = t.grad_buf(self);
    auto& gx = t.grad_buf(xid);
    for (std::size_t o = 0; o < outer; ++o) {
      const double* src = g.data() + o * orow;
      double* dst = gx.data() + o * xrow + start * inner;
      for (std::size_t i = 0; i < orow; ++i) dst[i] += src[i];
    }
  });
}

// ---------------------------------------------------------------------------
// Dilated causal 1-D convolution
// ---------------------------------------------------------------------------

/// input [C_in x T], weights [C_out x C_in x K], left zero padding:
/// out(h, i) = sum_j sum_m weights(h, m, j) * input(m, i - dilation*j),
/// with input(m, t) treated as zero for t < 0. weights(..., j) taps the value
/// dilation*j steps in the past, so out(., i) depends only on input(., <= i).
inline Tensor conv1d_causal(const Tensor& input, const Tensor& weights,
                            std::size_t dilation) {
  Tape& t = detail::same_tape(input, weights, "conv1d_causal");
  if (dilation < 1) throw contract_error("conv1d_causal: dilation must be >= 1");
  if (input.shape().size() != 2)
    throw dimension_error("conv1d_causal: input must be [C_in x T], got " +
                          shape_str(input.shape()));
  if (weights.shape().size() != 3)
    throw dimension_error("conv1d_causal: weights must be [C_out x C_in x K], got " +
                          shape_str(weights.shape()));
  const std::size_t Cin = input.shape()[0], T = input.shape()[1];
  const std::size_t Cout = weights.shape()[0], K = weights.shape()[2];
  if (weights.shape()[1] != Cin)
    throw dimension_error("conv1d_causal: input has " + std::to_string(Cin) +
                          " channels but weights expect " +
                          std::to_string(weights.shape()[1]));
  if (K < 1 || T < 1) throw contract_error("conv1d_causal: K and T must be >= 1");

  auto xv = input.values(), wv = weights.values();
  std::vector<double> out(Cout * T, 0.0);
  for (std::size_t h = 0; h < Cout; ++h) {
    double* orow = out.data() + h * T;
    for (std::size_t m = 0; m < Cin; ++m) {
      const double* xrow = xv.data() + m * T;
      const double* wrow = wv.data() + (h * Cin + m) * K;
      for (std::size_t j = 0; j < K; ++j) {
        const std::size_t shift = dilation * j;
        if (shift >= T) break;
        detail::axpy(wrow[j], xrow, orow + shift, T - shift);
      }
    }
  }
  const int xid = input.id(), wid = weights.id();
  const bool rg = t.wants_grad(xid) || t.wants_grad(wid);
  return t.make({Cout, T}, std::move(out), rg,
                [xid, wid, Cin, Cout, T, K, dilation](Tape& t, int self) {
    const auto& g = t.grad_buf(self);
    auto xv = t.values(xid), wv = t.values(wid);
    if (t.wants_grad(xid)) {
      auto& gx = t.grad_buf(xid);
      for (std::size_t h = 0; h < Cout; ++h) {
        const double* grow = g.data() + h * T;
        for (std::size_t m = 0; m < Cin; ++m) {
          double* gxrow = gx.data() + m * T;
          const double* wrow = wv.data() + (h * Cin + m) * K;
          for (std::size_t j = 0; j < K; ++j) {
            const std::size_t shift = dilation * j;
            if (shift >= T) break;
            detail::axpy(wrow[j], grow + shift, gxrow, T - shift);
          }
        }
      }
    }
    if (t.wants_grad(wid)) {
      auto& gw = t.grad_buf(wid);
      for (std::size_t h = 0; h < Cout; ++h) {
        const double* grow = g.data() + h * T;
        for (std::size_t m = 0; m < Cin; ++m) {
          const double* xrow = xv.data() + m * T;
          double* gwrow = gw.data() + (h * Cin + m) * K;
          for (std::size_t j = 0; j < K; ++j) {
            const std::size_t shift = dilation * j;
            if (shift >= T) break;
            gwrow[j] += detail::dot(grow + shift, xrow, T - shift);
          }
        }
      }
    }
  });
}

}  // namespace fcn

#endif  // FORECLASSNET_OPS_HPP
