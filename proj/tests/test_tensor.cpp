// Copyright 2026 sxl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sxl/ops.hpp"
#include "sxl/rng.hpp"
#include "test_support.hpp"

using namespace sxl;
using sxl_test::fd_worst_rel_err;
using sxl_test::matmul_oracle;
using sxl_test::rel_err;

namespace {

TensorPtr<double> make(std::vector<int> shape, std::vector<double> data,
                       bool grad = false) {
  return Tensor<double>::from_data(std::move(shape), std::move(data), grad);
}

TensorPtr<double> random_tensor(std::vector<int> shape, Rng& rng,
                                bool grad = true) {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  std::vector<double> data(static_cast<std::size_t>(n));
  for (auto& v : data) v = rng.uniform(-1.0, 1.0);
  return Tensor<double>::from_data(std::move(shape), std::move(data), grad);
}

}  // namespace

TEST_CASE("matmul identity and small cases") {
  auto eye = make({2, 2}, {1, 0, 0, 1});
  auto b = make({2, 2}, {2, 3, 4, 5});
  auto c = ops::matmul(eye, b);
  CHECK(c->data() == std::vector<double>{2, 3, 4, 5});

  auto r = ops::matmul(make({1, 2}, {1, 2}), make({2, 1}, {3, 4}));
  CHECK(r->value() == doctest::Approx(11.0).epsilon(1e-15));
}

TEST_CASE("matmul matches triple-loop oracle") {
  Rng rng(42);
  auto a = random_tensor({5, 4}, rng, false);
  auto b = random_tensor({4, 3}, rng, false);
  auto c = ops::matmul(a, b);
  const auto expect = matmul_oracle(a->data(), b->data(), 5, 4, 3);
  for (std::size_t i = 0; i < expect.size(); ++i) {
    CHECK(std::abs(c->data()[i] - expect[i]) < 1e-12);
  }
}

TEST_CASE("matmul dimension error names both shapes") {
  auto a = make({2, 3}, std::vector<double>(6, 0.0));
  auto b = make({2, 2}, std::vector<double>(4, 0.0));
  CHECK_THROWS_WITH_AS(ops::matmul(a, b),
                       doctest::Contains("[2, 3]"), DimensionError);
  try {
    ops::matmul(a, b);
  } catch (const DimensionError& e) {
    CHECK(std::string(e.what()).find("[2, 2]") != std::string::npos);
  }
}

TEST_CASE("masked softmax spec values") {
  BoolMatrix all(1, 3, true);
  auto s = ops::masked_softmax(make({1, 3}, {0, 0, 0}), all);
  for (int j = 0; j < 3; ++j) {
    CHECK(s->data()[j] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  }

  BoolMatrix skip_first(1, 3, true);
  skip_first.set(0, 0, false);
  auto s2 = ops::masked_softmax(make({1, 3}, {10, 0, 0}), skip_first);
  CHECK(s2->data()[0] == 0.0);  // exactly
  CHECK(s2->data()[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s2->data()[2] == doctest::Approx(0.5).epsilon(1e-12));

  BoolMatrix mid_out(1, 3, true);
  mid_out.set(0, 1, false);
  auto s3 = ops::masked_softmax(make({1, 3}, {1, 2, 3}), mid_out);
  const double e2 = std::exp(2.0);
  CHECK(s3->data()[0] == doctest::Approx(1.0 / (1.0 + e2)).epsilon(1e-12));
  CHECK(s3->data()[1] == 0.0);
  CHECK(s3->data()[2] == doctest::Approx(e2 / (1.0 + e2)).epsilon(1e-12));
}

TEST_CASE("masked softmax fully-masked row yields zeros, no error") {
  BoolMatrix mask(2, 3, false);
  mask.set(1, 0, true);
  auto s = ops::masked_softmax(make({2, 3}, {5, 5, 5, 1, 2, 3}), mask);
  CHECK(s->data()[0] == 0.0);
  CHECK(s->data()[1] == 0.0);
  CHECK(s->data()[2] == 0.0);
  CHECK(s->data()[3] == 1.0);
}

TEST_CASE("masked softmax rows sum to one in both precisions") {
  Rng rng(7);
  BoolMatrix mask(4, 6, false);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 6; ++j) mask.set(i, j, rng.uniform() < 0.6);
    mask.set(i, static_cast<int>(rng.below(6)), true);  // >= 1 visible
  }
  std::vector<double> vals(24);
  for (auto& v : vals) v = rng.uniform(-3.0, 3.0);

  auto sd = ops::masked_softmax(make({4, 6}, vals), mask);
  std::vector<float> valsf(vals.begin(), vals.end());
  auto sf = ops::masked_softmax(
      Tensor<float>::from_data({4, 6}, std::move(valsf)), mask);
  for (int i = 0; i < 4; ++i) {
    double row_d = 0.0, row_f = 0.0;
    for (int j = 0; j < 6; ++j) {
      row_d += sd->at(i, j);
      row_f += sf->at(i, j);
      if (!mask.at(i, j)) {
        CHECK(sd->at(i, j) == 0.0);
        CHECK(sf->at(i, j) == 0.0f);
      } else {
        CHECK(sd->at(i, j) > 0.0);
      }
    }
    CHECK(row_d == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(row_f == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("layer norm spec values") {
  auto gain1 = make({3}, {1, 1, 1});
  auto bias0 = make({3}, {0, 0, 0});
  auto y = ops::layer_norm(make({1, 3}, {1, 1, 1}), gain1, bias0, 1e-5);
  for (int j = 0; j < 3; ++j) CHECK(y->data()[j] == doctest::Approx(0.0));

  auto y2 = ops::layer_norm(make({1, 2}, {-1, 1}), make({2}, {1, 1}),
                            make({2}, {0, 0}), 1e-12);
  CHECK(y2->data()[0] == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(y2->data()[1] == doctest::Approx(1.0).epsilon(1e-9));

  const double eps = 1e-5;
  auto y3 = ops::layer_norm(make({1, 3}, {1, 2, 3}), make({3}, {2, 2, 2}),
                            make({3}, {1, 1, 1}), eps);
  const double std_ = std::sqrt(2.0 / 3.0 + eps);
  for (int j = 0; j < 3; ++j) {
    const double expect = 2.0 * ((j + 1) - 2.0) / std_ + 1.0;
    CHECK(y3->data()[j] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("backward basics") {
  auto x = make({2, 2}, {1, 2, 3, 4}, true);
  auto loss = ops::sum(x);
  backward(loss);
  for (double g : x->grad()) CHECK(g == 1.0);

  auto x2 = make({1, 2}, {1, 2}, true);
  auto loss2 = ops::sum(ops::mul(x2, x2));
  backward(loss2);
  CHECK(x2->grad()[0] == doctest::Approx(2.0));
  CHECK(x2->grad()[1] == doctest::Approx(4.0));
}

TEST_CASE("backward twice without reset is a state error") {
  auto x = make({1, 2}, {1, 2}, true);
  auto loss = ops::sum(ops::mul(x, x));
  auto g = GraphT<double>::build(loss);
  g.backward();
  CHECK_THROWS_AS(g.backward(), StateError);
  g.reset();
  g.backward();  // allowed again after reset
  CHECK(x->grad()[0] == doctest::Approx(2.0));
}

TEST_CASE("backward requires scalar loss") {
  auto x = make({1, 2}, {1, 2}, true);
  auto y = ops::mul(x, x);
  CHECK_THROWS_AS(backward(y), InputError);
}

TEST_CASE("fan-out accumulates both path gradients") {
  auto y = make({1, 2}, {0.5, -1.5}, true);
  // z = sum(y*y + y); dz/dy = 2y + 1
  auto loss = ops::sum(ops::add(ops::mul(y, y), y));
  backward(loss);
  CHECK(y->grad()[0] == doctest::Approx(2.0 * 0.5 + 1.0));
  CHECK(y->grad()[1] == doctest::Approx(2.0 * -1.5 + 1.0));

  y->zero_grad();
  auto loss2 = ops::sum(ops::add(ops::mul(y, y), y));
  backward(loss2);
  const double fd = fd_worst_rel_err(y, [&] {
    return ops::sum(ops::add(ops::mul(y, y), y))->value();
  });
  CHECK(fd < 1e-6);
}

TEST_CASE("finite differences agree for every op in isolation") {
  Rng rng(123);

  SUBCASE("matmul") {
    auto a = random_tensor({3, 4}, rng);
    auto b = random_tensor({4, 2}, rng);
    auto weights = random_tensor({3, 2}, rng, false);
    auto loss_fn = [&] {
      return ops::sum(ops::mul(ops::matmul(a, b), weights))->value();
    };
    backward(ops::sum(ops::mul(ops::matmul(a, b), weights)));
    CHECK(fd_worst_rel_err(a, loss_fn) < 1e-7);
    CHECK(fd_worst_rel_err(b, loss_fn) < 1e-7);
  }

  SUBCASE("add sub mul scale transpose") {
    auto a = random_tensor({2, 3}, rng);
    auto b = random_tensor({2, 3}, rng);
    auto loss_fn = [&] {
      auto t = ops::transpose(ops::scale(ops::sub(ops::mul(a, b),
                                                  ops::add(a, b)), 0.7));
      return ops::sum(ops::mul(t, t))->value();
    };
    auto t = ops::transpose(ops::scale(ops::sub(ops::mul(a, b),
                                                ops::add(a, b)), 0.7));
    backward(ops::sum(ops::mul(t, t)));
    CHECK(fd_worst_rel_err(a, loss_fn) < 1e-6);
    CHECK(fd_worst_rel_err(b, loss_fn) < 1e-6);
  }

  SUBCASE("add_rowvec") {
    auto m = random_tensor({3, 4}, rng);
    auto v = random_tensor({4}, rng);
    auto w = random_tensor({3, 4}, rng, false);
    auto loss_fn = [&] {
      return ops::sum(ops::mul(ops::add_rowvec(m, v), w))->value();
    };
    backward(ops::sum(ops::mul(ops::add_rowvec(m, v), w)));
    CHECK(fd_worst_rel_err(m, loss_fn) < 1e-7);
    CHECK(fd_worst_rel_err(v, loss_fn) < 1e-7);
  }

  SUBCASE("relu away from zero") {
    auto a = make({1, 4}, {0.5, -0.7, 1.3, -2.0}, true);
    auto loss_fn = [&] { return ops::sum(ops::relu(a))->value(); };
    backward(ops::sum(ops::relu(a)));
    CHECK(fd_worst_rel_err(a, loss_fn) < 1e-8);
  }

  SUBCASE("masked softmax") {
    BoolMatrix mask(3, 5, false);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 5; ++j) mask.set(i, j, (i + j) % 3 != 0);
    mask.set(0, 0, true);
    auto s = random_tensor({3, 5}, rng);
    auto w = random_tensor({3, 5}, rng, false);
    auto loss_fn = [&] {
      return ops::sum(ops::mul(ops::masked_softmax(s, mask), w))->value();
    };
    backward(ops::sum(ops::mul(ops::masked_softmax(s, mask), w)));
    CHECK(fd_worst_rel_err(s, loss_fn) < 1e-6);
  }

  SUBCASE("layer norm") {
    auto x = random_tensor({3, 6}, rng);
    auto gain = random_tensor({6}, rng);
    auto bias = random_tensor({6}, rng);
    auto w = random_tensor({3, 6}, rng, false);
    auto loss_fn = [&] {
      return ops::sum(
                 ops::mul(ops::layer_norm(x, gain, bias, 1e-5), w))
          ->value();
    };
    backward(ops::sum(ops::mul(ops::layer_norm(x, gain, bias, 1e-5), w)));
    CHECK(fd_worst_rel_err(x, loss_fn) < 1e-6);
    CHECK(fd_worst_rel_err(gain, loss_fn) < 1e-6);
    CHECK(fd_worst_rel_err(bias, loss_fn) < 1e-6);
  }

  SUBCASE("slice concat gather") {
    auto x = random_tensor({4, 6}, rng);
    auto w = random_tensor({3, 6}, rng, false);
    auto loss_fn = [&] {
      auto left = ops::slice_cols(x, 0, 3);
      auto right = ops::slice_cols(x, 3, 6);
      auto joined = ops::concat_cols({left, right});
      auto picked = ops::gather_rows(joined, {0, 2, 2});
      return ops::sum(ops::mul(picked, w))->value();
    };
    {
      auto left = ops::slice_cols(x, 0, 3);
      auto right = ops::slice_cols(x, 3, 6);
      auto joined = ops::concat_cols({left, right});
      auto picked = ops::gather_rows(joined, {0, 2, 2});
      backward(ops::sum(ops::mul(picked, w)));
    }
    CHECK(fd_worst_rel_err(x, loss_fn) < 1e-7);
  }

  SUBCASE("huber away from the knee") {
    auto p = make({2, 2}, {0.3, -0.2, 1.9, -2.5}, true);
    auto t = make({2, 2}, {0.0, 0.0, 0.0, 0.0});
    auto loss_fn = [&] { return ops::huber_loss(p, t, 1.0)->value(); };
    backward(ops::huber_loss(p, t, 1.0));
    CHECK(fd_worst_rel_err(p, loss_fn) < 1e-7);
  }

  SUBCASE("cross entropy") {
    auto logits = random_tensor({3, 4}, rng);
    const std::vector<int> labels = {2, 0, 3};
    auto loss_fn = [&] {
      return ops::cross_entropy(logits, labels)->value();
    };
    backward(ops::cross_entropy(logits, labels));
    CHECK(fd_worst_rel_err(logits, loss_fn) < 1e-6);
  }
}

TEST_CASE("finite differences agree for a composed expression") {
  Rng rng(321);
  auto x = random_tensor({3, 4}, rng);
  auto w1 = random_tensor({4, 5}, rng);
  auto b1 = random_tensor({5}, rng);
  auto gain = random_tensor({5}, rng);
  auto bias = random_tensor({5}, rng);
  BoolMatrix mask(3, 3, true);
  mask.set(0, 2, false);
  mask.set(2, 0, false);

  auto build = [&] {
    auto h = ops::relu(ops::add_rowvec(ops::matmul(x, w1), b1));
    auto n = ops::layer_norm(h, gain, bias, 1e-5);
    auto scores = ops::matmul(n, ops::transpose(n));
    auto att = ops::masked_softmax(scores, mask);
    auto ctx = ops::matmul(att, n);
    return ops::mean(ops::mul(ctx, ctx));
  };
  backward(build());
  auto loss_fn = [&] { return build()->value(); };
  for (const auto& t : {x, w1, b1, gain, bias}) {
    CHECK(fd_worst_rel_err(t, loss_fn) < 1e-5);
  }
}

TEST_CASE("forward and backward are bitwise deterministic") {
  auto run = [] {
    Rng rng(99);
    auto x = random_tensor({4, 8}, rng);
    auto w = random_tensor({8, 8}, rng);
    BoolMatrix mask(4, 4, true);
    auto att = ops::masked_softmax(
        ops::matmul(ops::matmul(x, w), ops::transpose(x)), mask);
    auto loss = ops::mean(ops::mul(att, att));
    backward(loss);
    std::vector<double> out = loss->data();
    out.insert(out.end(), x->grad().begin(), x->grad().end());
    out.insert(out.end(), w->grad().begin(), w->grad().end());
    return out;
  };
  const auto a = run();
  const auto b = run();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("dropout is inverted and disabled at eval") {
  Rng rng(5);
  auto x = make({1, 1000}, std::vector<double>(1000, 1.0));
  auto dropped = ops::dropout(x, 0.25, rng, true);
  double mean = 0.0;
  for (double v : dropped->data()) {
    CHECK((v == 0.0 || v == doctest::Approx(1.0 / 0.75)));
    mean += v;
  }
  mean /= 1000.0;
  CHECK(mean == doctest::Approx(1.0).epsilon(0.1));

  auto same = ops::dropout(x, 0.25, rng, false);
  CHECK(same.get() == x.get());  // eval mode is the identity
}

TEST_CASE("forward ops keep finite inputs finite") {
  Rng rng(11);
  auto x = random_tensor({4, 4}, rng, false);
  BoolMatrix mask(4, 4, false);  // fully masked everywhere
  auto s = ops::masked_softmax(ops::scale(x, 1e18), mask);
  for (double v : s->data()) CHECK(std::isfinite(v));
  BoolMatrix one(4, 4, false);
  for (int i = 0; i < 4; ++i) one.set(i, 0, true);
  auto s2 = ops::masked_softmax(ops::scale(x, 1e18), one);
  for (double v : s2->data()) CHECK(std::isfinite(v));
}
