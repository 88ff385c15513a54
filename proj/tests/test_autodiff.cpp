#include <cmath>

#include <doctest.h>

#include "dispo/ops.hpp"
#include "dispo/tape.hpp"
#include "support/testutil.hpp"

using namespace dispo;
using testutil::fd_max_rel_err;
using testutil::rand_tensor;

TEST_CASE("grad of x^2 at x=3 is 6") {
  Tensor x = Tensor::scalar(3.0);
  x.set_requires_grad(true);
  {
    Tape tape;
    Tensor loss = ops::mul(x, x);
    tape.backward(loss);
  }
  CHECK(x.grad()[0] == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("grad of sum(softplus(x)) at 0 is sigmoid(0) = 0.5 per element") {
  Tensor x = Tensor::zeros({4});
  x.set_requires_grad(true);
  {
    Tape tape;
    Tensor loss = ops::sum_all(ops::softplus(x));
    tape.backward(loss);
  }
  for (double g : x.grad()) CHECK(g == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("gradients accumulate across backward calls until zeroed") {
  Tensor x = Tensor::scalar(2.0);
  x.set_requires_grad(true);
  for (int i = 0; i < 2; ++i) {
    Tape tape;
    Tensor loss = ops::mul(x, x);
    tape.backward(loss);
  }
  CHECK(x.grad()[0] == doctest::Approx(8.0).epsilon(1e-12));
  x.zero_grad();
  CHECK(x.grad()[0] == 0.0);
}

TEST_CASE("backward_into leaves parameter grads untouched") {
  Tensor x = Tensor::scalar(1.5);
  x.set_requires_grad(true);
  GradStore store;
  {
    Tape tape;
    Tensor loss = ops::mul(x, x);
    tape.backward_into(loss, store);
  }
  CHECK_FALSE(x.has_grad());
  const std::vector<double>* g = store.find(x.node());
  REQUIRE(g != nullptr);
  CHECK((*g)[0] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("composite graph matches central finite differences") {
  Rng rng(21);
  Tensor x = rand_tensor({3, 4}, rng);
  Tensor w = rand_tensor({2, 4}, rng);
  Tensor b = rand_tensor({2}, rng);
  Tensor gain = rand_tensor({4}, rng, 0.5, 1.5);
  Tensor bias = rand_tensor({4}, rng);
  auto f = [&] {
    Tensor h = ops::layernorm(x, gain, bias);
    Tensor y = ops::silu(ops::linear(h, w, b));
    return ops::mean_all(ops::mul(y, y));
  };
  CHECK(fd_max_rel_err(f, {x, w, b, gain, bias}) < 1e-4);
}

TEST_CASE("scan and zoh gradients match finite differences") {
  Rng rng(22);
  int L = 4, D = 3, N = 2;
  Tensor a = rand_tensor({D, N}, rng, -2.0, -0.1);
  Tensor bmat = rand_tensor({L, N}, rng);
  Tensor delta = rand_tensor({L, D}, rng, 0.05, 0.8);
  Tensor c = rand_tensor({L, N}, rng);
  Tensor u = rand_tensor({L, D}, rng);
  auto f = [&] {
    auto [abar, bbar] = ops::zoh_discretize(a, bmat, delta);
    Tensor y = ops::selective_scan(abar, bbar, c, u);
    return ops::mean_all(ops::mul(y, y));
  };
  CHECK(fd_max_rel_err(f, {a, bmat, delta, c, u}) < 1e-4);
}
