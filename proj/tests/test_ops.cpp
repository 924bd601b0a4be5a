#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "foreclassnet/ops.hpp"
#include "support/oracles.hpp"

using namespace fcn;

TEST_CASE("matmul by the identity returns the operand") {
  Tape t;
  Tensor I = t.constant({2, 2}, {1, 0, 0, 1});
  Tensor A = t.constant({2, 2}, {3.5, -1.25, 0.75, 9.0});
  Tensor out = matmul(I, A);
  for (std::size_t i = 0; i < 4; ++i) CHECK(out.values()[i] == A.values()[i]);
}

TEST_CASE("matmul shape checking") {
  Tape t;
  Tensor A = t.constant({2, 3}, std::vector<double>(6, 1.0));
  Tensor B = t.constant({2, 2}, std::vector<double>(4, 1.0));
  CHECK_THROWS_AS(matmul(A, B), dimension_error);
}

TEST_CASE("leaky relu slope is 0.01") {
  Tape t;
  Tensor x = t.constant({2}, {-1.0, 2.0});
  Tensor y = leaky_relu(x, 0.01);
  CHECK(y.values()[0] == -0.01);
  CHECK(y.values()[1] == 2.0);
}

TEST_CASE("softmax of a constant vector is uniform") {
  Tape t;
  Tensor y = softmax(t.constant({3}, {0.0, 0.0, 0.0}));
  for (double v : y.values()) CHECK(v == Catch::Approx(1.0 / 3.0).margin(1e-15));
}

TEST_CASE("softmax rows sum to one and shift invariance holds") {
  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> x(5);
    for (double& v : x) v = rng.uniform(-8.0, 8.0);
    std::vector<double> shifted = x;
    const double c = rng.uniform(-5.0, 5.0);
    for (double& v : shifted) v += c;
    Tape t;
    auto a = softmax(t.constant({5}, x)).values();
    auto b = softmax(t.constant({5}, shifted)).values();
    double s = 0.0;
    for (double v : a) s += v;
    CHECK(std::abs(s - 1.0) < 1e-12);
    for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
  }
}

TEST_CASE("log rejects non-positive input") {
  Tape t;
  CHECK_THROWS_AS(log(t.constant({2}, {1.0, 0.0})), domain_error);
  CHECK_THROWS_AS(log(t.constant({1}, {-3.0})), domain_error);
}

TEST_CASE("elementwise ops enforce matching shapes") {
  Tape t;
  Tensor a = t.constant({2}, {1, 2});
  Tensor b = t.constant({3}, {1, 2, 3});
  CHECK_THROWS_AS(add(a, b), dimension_error);
  CHECK_THROWS_AS(mul(a, b), dimension_error);
}

TEST_CASE("concat and slice round shapes correctly") {
  Tape t;
  Tensor a = t.constant({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor b = t.constant({1, 3}, {7, 8, 9});
  Tensor c = concat({a, b}, 0);
  REQUIRE(c.shape() == Shape{3, 3});
  CHECK(c.values()[6] == 7.0);

  Tensor col = slice(c, 1, 2, 1);
  REQUIRE(col.shape() == Shape{3, 1});
  CHECK(col.values()[0] == 3.0);
  CHECK(col.values()[2] == 9.0);

  CHECK_THROWS_AS(slice(c, 1, 2, 2), dimension_error);
  Tensor d = t.constant({2, 2}, {1, 2, 3, 4});
  CHECK_THROWS_AS(concat({a, d}, 0), dimension_error);
}

TEST_CASE("detach blocks the gradient path") {
  Tape t;
  Tensor x = t.leaf({2}, {1.0, 2.0}, true);
  Tensor y = detach(scalar_mul(x, 3.0));
  CHECK_FALSE(t.wants_grad(y.id()));
  Tensor z = add(x, y);
  t.backward(sum(z));
  CHECK(x.grad()[0] == 1.0);  // only the direct path contributes
}

TEST_CASE("every primitive passes a finite-difference spot check") {
  Rng rng(42);
  auto random_vec = [&rng](std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
  };
  const std::size_t probes = 25;

  SECTION("add / sub / mul / affine") {
    const auto x0 = random_vec(6, -2, 2);
    const auto other = random_vec(6, -2, 2);
    for (int which = 0; which < 4; ++which) {
      const double err = oracle::max_grad_rel_err(
          {6}, x0,
          [&](Tape& t, Tensor x) {
            Tensor o = t.constant({6}, other);
            Tensor y = which == 0   ? add(x, o)
                       : which == 1 ? sub(x, o)
                       : which == 2 ? mul(x, o)
                                    : affine(x, -1.7, 0.3);
            return sum(mul(y, y));
          },
          probes, rng);
      CHECK(err < 1e-6);
    }
  }

  SECTION("matmul, both operands") {
    const auto a0 = random_vec(6, -2, 2);
    const auto b0 = random_vec(8, -2, 2);
    double err = oracle::max_grad_rel_err(
        {3, 2}, a0,
        [&](Tape& t, Tensor a) {
          Tensor b = t.constant({2, 4}, b0);
          Tensor y = matmul(a, b);
          return sum(mul(y, y));
        },
        probes, rng);
    CHECK(err < 1e-6);
    err = oracle::max_grad_rel_err(
        {2, 4}, b0,
        [&](Tape& t, Tensor b) {
          Tensor a = t.constant({3, 2}, a0);
          Tensor y = matmul(a, b);
          return sum(mul(y, y));
        },
        probes, rng);
    CHECK(err < 1e-6);
  }

  SECTION("activations, log, exp, reciprocal, clamp") {
    // keep probes away from relu kinks and clamp boundary
    std::vector<double> x0(8);
    for (double& v : x0) {
      v = rng.uniform(0.2, 2.0);
      if (rng.uniform() < 0.5) v = -v;
    }
    for (int which = 0; which < 4; ++which) {
      const double err = oracle::max_grad_rel_err(
          {8}, x0,
          [&](Tape& t, Tensor x) {
            Tensor y = which == 0   ? relu(x)
                       : which == 1 ? leaky_relu(x, 0.01)
                       : which == 2 ? sigmoid(x)
                                    : clamp_min(x, -0.05);
            return sum(mul(y, y));
          },
          probes, rng);
      CHECK(err < 1e-6);
    }
    const auto pos = random_vec(8, 0.3, 3.0);
    for (int which = 0; which < 3; ++which) {
      const double err = oracle::max_grad_rel_err(
          {8}, pos,
          [&](Tape& t, Tensor x) {
            Tensor y = which == 0 ? log(x) : which == 1 ? exp(x) : reciprocal(x);
            return sum(mul(y, y));
          },
          probes, rng);
      CHECK(err < 1e-6);
    }
  }

  SECTION("softmax, reductions, shape ops, broadcasts") {
    // random constants are hoisted so fn stays deterministic across fd calls
    const auto x0 = random_vec(12, -2, 2);
    const auto w0 = random_vec(12, -1, 1);
    const auto err_softmax = oracle::max_grad_rel_err(
        {3, 4}, x0,
        [&](Tape& t, Tensor x) {
          Tensor w = t.constant({12}, w0);
          return sum(mul(reshape(softmax(x), {12}), w));
        },
        probes, rng);
    CHECK(err_softmax < 1e-6);

    const auto err_mean = oracle::max_grad_rel_err(
        {12}, x0, [&](Tape& t, Tensor x) { return mean(mul(x, x)); }, probes, rng);
    CHECK(err_mean < 1e-6);

    const auto err_slice_concat = oracle::max_grad_rel_err(
        {12}, x0,
        [&](Tape& t, Tensor x) {
          Tensor m = reshape(x, {3, 4});
          Tensor left = slice(m, 1, 0, 2);
          Tensor right = slice(m, 1, 2, 2);
          Tensor swapped = concat({right, left, right}, 1);
          return sum(mul(swapped, swapped));
        },
        probes, rng);
    CHECK(err_slice_concat < 1e-6);

    const auto base0 = random_vec(5, -1, 1);
    const auto err_bcast = oracle::max_grad_rel_err(
        {1}, {0.7},
        [&](Tape& t, Tensor s) {
          Tensor base = t.constant({5}, base0);
          Tensor y = bcast_mul(s, bcast_add(s, base));
          return sum(mul(y, y));
        },
        probes, rng);
    CHECK(err_bcast < 1e-6);

    const auto x2 = random_vec(8, -2, 2);
    const auto err_mulch = oracle::max_grad_rel_err(
        {2, 4}, x2,
        [&](Tape& t, Tensor x) {
          Tensor v = t.constant({2}, {0.3, -1.4});
          return sum(mul_channel(x, v));
        },
        probes, rng);
    CHECK(err_mulch < 1e-6);

    const auto xmat = random_vec(6, -1, 1);
    const auto err_bias = oracle::max_grad_rel_err(
        {2}, {0.5, -0.25},
        [&](Tape& t, Tensor b) {
          Tensor x = t.constant({2, 3}, xmat);
          Tensor y = add_bias(x, b);
          return sum(mul(y, y));
        },
        probes, rng);
    CHECK(err_bias < 1e-6);
  }
}
