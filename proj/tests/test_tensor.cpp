#include <catch2/catch_amalgamated.hpp>

#include "foreclassnet/ops.hpp"
#include "foreclassnet/tensor.hpp"

using namespace fcn;

TEST_CASE("tape records leaves and constants") {
  Tape t;
  Tensor c = t.constant({2, 2}, {1, 2, 3, 4});
  CHECK(c.shape() == Shape{2, 2});
  CHECK(c.values()[3] == 4.0);
  CHECK_FALSE(t.wants_grad(c.id()));

  Tensor x = t.leaf({3}, {1, 2, 3}, true);
  CHECK(t.wants_grad(x.id()));
  CHECK_THROWS_AS(t.make({2}, {1, 2, 3}, false, nullptr), dimension_error);
}

TEST_CASE("backward of sum is all ones") {
  Tape t;
  Tensor x = t.leaf({4}, {1.0, -2.0, 3.5, 0.0}, true);
  Tensor loss = sum(x);
  t.backward(loss);
  for (double g : x.grad()) CHECK(g == 1.0);
}

TEST_CASE("backward of sum of relu uses the piecewise definition") {
  Tape t;
  Tensor x = t.leaf({2}, {-2.0, 3.0}, true);
  t.backward(sum(relu(x)));
  auto g = x.grad();
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 1.0);
}

TEST_CASE("gradients sum into shared inputs (diamond)") {
  Tape t;
  Tensor x = t.leaf({1}, {3.0}, true);
  Tensor y = add(x, x);  // dy/dx = 2
  t.backward(sum(y));
  CHECK(x.grad()[0] == 2.0);
}

TEST_CASE("backward rejects non-scalar losses and double traversal") {
  Tape t;
  Tensor x = t.leaf({2}, {1.0, 2.0}, true);
  Tensor y = relu(x);
  CHECK_THROWS_AS(t.backward(y), contract_error);
  Tensor s = sum(y);
  t.backward(s);
  CHECK_THROWS_AS(t.backward(s), contract_error);
}

TEST_CASE("parameter gradients accumulate across backward calls until zeroed") {
  Parameter p("w", {2});
  p.value = {1.0, 2.0};
  for (int pass = 0; pass < 2; ++pass) {
    Tape t;
    Tensor w = t.watch(p);
    t.backward(sum(w));
    t.accumulate_param_grads();
  }
  CHECK(p.grad[0] == 2.0);
  CHECK(p.grad[1] == 2.0);
  p.zero_grad();
  CHECK(p.grad[0] == 0.0);
}

TEST_CASE("watch is zero-copy and respects trainable flag") {
  Parameter fixed("f", {2}, /*trainable=*/false);
  fixed.value = {5.0, 6.0};
  Tape t;
  Tensor w = t.watch(fixed);
  CHECK_FALSE(t.wants_grad(w.id()));
  CHECK(w.values().data() == fixed.value.data());
}

TEST_CASE("non-finite gradients are surfaced, not stored") {
  Tape t;
  // log near zero: d/dx log(x) = 1/x overflows for x = 1e-320.
  Tensor x = t.leaf({1}, {1e-320}, true);
  Tensor y = log(x);
  CHECK_THROWS_AS(t.backward(y), numeric_error);
}

TEST_CASE("fresh leaves report zero gradients before backward") {
  Tape t;
  Tensor x = t.leaf({3}, {1, 2, 3}, true);
  auto g = x.grad();
  REQUIRE(g.size() == 3);
  for (double v : g) CHECK(v == 0.0);
}
