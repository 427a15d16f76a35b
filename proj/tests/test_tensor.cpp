#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "flock/optim.hpp"
#include "flock/tensor.hpp"

using namespace flock;
using nn::Array;
using nn::Parameter;
using nn::Tape;
using nn::Tensor;

namespace {

Array arr(int rows, int cols, std::initializer_list<double> values) {
  Array a(rows, cols);
  std::copy(values.begin(), values.end(), a.data.begin());
  return a;
}

Array random_array(int rows, int cols, Rng& rng, double scale = 1.0) {
  Array a(rows, cols);
  for (double& x : a.data) x = rng.normal(0.0, scale);
  return a;
}

}  // namespace

TEST_CASE("matmul forward") {
  Tape t;
  Tensor a = t.constant(arr(1, 2, {1, 2}));
  Tensor b = t.constant(arr(2, 1, {3, 4}));
  Tensor c = t.matmul(a, b);
  CHECK(c.value().data[0] == 11.0);
}

TEST_CASE("shape errors name both shapes") {
  Tape t;
  Tensor a = t.constant(Array(2, 3));
  Tensor b = t.constant(Array(2, 3));
  CHECK_THROWS_WITH_AS(t.matmul(a, b), doctest::Contains("[2x3]"), std::invalid_argument);
}

TEST_CASE("softmax basics") {
  Tape t;
  Tensor s = t.softmax_rows(t.constant(arr(1, 2, {0, 0})));
  CHECK(s.value().data[0] == doctest::Approx(0.5));
  CHECK(s.value().data[1] == doctest::Approx(0.5));

  Rng rng(3);
  Tensor r = t.softmax_rows(t.constant(random_array(5, 7, rng, 3.0)));
  for (int i = 0; i < 5; ++i) {
    double total = 0.0;
    for (int j = 0; j < 7; ++j) {
      double v = r.value().at(i, j);
      CHECK(v >= 0.0);
      total += v;
    }
    CHECK(std::fabs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("sigmoid at zero") {
  Tape t;
  Tensor y = t.sigmoid(t.constant(arr(1, 1, {0})));
  CHECK(y.value().data[0] == doctest::Approx(0.5));

  Parameter p("x", arr(1, 1, {0}));
  Tape t2;
  t2.backward(t2.sigmoid(t2.leaf(p)));
  CHECK(p.grad.data[0] == doctest::Approx(0.25));
}

TEST_CASE("rmsnorm values") {
  Tape t;
  Tensor gain = t.constant(arr(1, 2, {1, 1}));
  Tensor y = t.rmsnorm(t.constant(arr(1, 2, {3, 4})), gain, 0.0);
  double rms = std::sqrt(12.5);
  CHECK(y.value().data[0] == doctest::Approx(3.0 / rms));
  CHECK(y.value().data[1] == doctest::Approx(4.0 / rms));

  Tensor zero = t.rmsnorm(t.constant(Array(1, 2)), gain, 1e-6);
  CHECK(zero.value().data[0] == 0.0);

  Tensor zero_gain = t.rmsnorm(t.constant(arr(1, 2, {3, 4})), t.constant(Array(1, 2)), 0.0);
  CHECK(zero_gain.value().data[0] == 0.0);

  // unit RMS with unit gain on random nonzero rows
  Rng rng(4);
  Array x = random_array(6, 8, rng);
  Tensor n = t.rmsnorm(t.constant(x), t.constant(Array(1, 8, 1.0)), 0.0);
  for (int i = 0; i < 6; ++i) {
    double m = 0.0;
    for (int j = 0; j < 8; ++j) m += n.value().at(i, j) * n.value().at(i, j);
    CHECK(std::fabs(std::sqrt(m / 8) - 1.0) < 1e-9);
  }
}

TEST_CASE("swiglu scalar case") {
  // (x*w1) * swish(x*w2) * w3 with everything 1: swish(1) = sigmoid(1)
  Tape t;
  Tensor x = t.constant(arr(1, 1, {1}));
  Tensor one = t.constant(arr(1, 1, {1}));
  Tensor y = t.matmul(t.mul(t.matmul(x, one), t.swish(t.matmul(x, one))), one);
  CHECK(y.value().data[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
}

TEST_CASE("gradient checks per op") {
  Rng rng(7);
  auto check = [&](const char* name, const std::function<Tensor(Tape&, Tensor)>& f,
                   const Array& x) {
    double err = nn::gradient_check(f, x);
    INFO(name);
    CHECK(err < 1e-6);
  };

  Array x34 = random_array(3, 4, rng);
  Array c34 = random_array(3, 4, rng);
  Array c45 = random_array(4, 5, rng);
  Array row = random_array(1, 4, rng);
  Array c38 = random_array(3, 8, rng);
  Array c64 = random_array(6, 4, rng);
  Array c24 = random_array(2, 4, rng);
  Array c44 = random_array(4, 4, rng);

  check("matmul_lhs",
        [&](Tape& t, Tensor x) { return t.sum(t.matmul(x, t.constant(c45))); }, x34);
  check("matmul_rhs",
        [&](Tape& t, Tensor x) { return t.sum(t.matmul(t.constant(c34), x)); },
        random_array(4, 2, rng));
  check("add", [&](Tape& t, Tensor x) { return t.sum(t.add(x, t.constant(c34))); }, x34);
  check("add_row_broadcast",
        [&](Tape& t, Tensor x) { return t.sum(t.add(t.constant(c34), x)); }, row);
  check("sub", [&](Tape& t, Tensor x) { return t.sum(t.sub(t.constant(c34), x)); }, x34);
  check("mul", [&](Tape& t, Tensor x) { return t.sum(t.mul(x, t.constant(c34))); }, x34);
  check("scale", [&](Tape& t, Tensor x) { return t.sum(t.scale(x, -2.5)); }, x34);
  check("one_minus", [&](Tape& t, Tensor x) { return t.sum(t.one_minus(x)); }, x34);
  check("sigmoid", [&](Tape& t, Tensor x) { return t.sum(t.sigmoid(x)); }, x34);
  check("tanh", [&](Tape& t, Tensor x) { return t.sum(t.tanh(x)); }, x34);
  check("swish", [&](Tape& t, Tensor x) { return t.sum(t.swish(x)); }, x34);
  check("softmax", [&](Tape& t, Tensor x) {
    return t.sum(t.mul(t.softmax_rows(x), t.constant(c34)));
  }, x34);
  check("mean", [&](Tape& t, Tensor x) { return t.mean(x); }, x34);

  Array positive(3, 4);
  for (double& v : positive.data) v = 0.5 + std::fabs(rng.normal());
  check("log", [&](Tape& t, Tensor x) { return t.sum(t.log(x)); }, positive);
  check("clamp_interior", [&](Tape& t, Tensor x) { return t.sum(t.clamp(x, -50.0, 50.0)); },
        x34);
  check("rmsnorm_x", [&](Tape& t, Tensor x) {
    return t.sum(t.mul(t.rmsnorm(x, t.constant(row), 1e-6), t.constant(c34)));
  }, x34);
  check("rmsnorm_gain", [&](Tape& t, Tensor x) {
    return t.sum(t.mul(t.rmsnorm(t.constant(c34), x, 1e-6), t.constant(c34)));
  }, row);
  check("concat_cols", [&](Tape& t, Tensor x) {
    return t.sum(t.mul(t.concat_cols({x, t.constant(c34)}), t.constant(c38)));
  }, x34);
  check("concat_rows", [&](Tape& t, Tensor x) {
    return t.sum(t.mul(t.concat_rows({x, t.constant(c34)}), t.constant(c64)));
  }, x34);
  check("slice_rows", [&](Tape& t, Tensor x) {
    return t.sum(t.mul(t.slice_rows(x, 1, 3), t.constant(c24)));
  }, x34);
  check("gather", [&](Tape& t, Tensor x) {
    return t.sum(t.mul(t.gather_rows(x, {2, 0, 2, 1}), t.constant(c44)));
  }, x34);
  check("scatter", [&](Tape& t, Tensor x) {
    return t.sum(t.mul(t.scatter_add_rows(x, {4, 0, 4}, 6), t.constant(c64)));
  }, x34);
  check("repeat_row", [&](Tape& t, Tensor x) {
    return t.sum(t.mul(t.repeat_row(x, 3), t.constant(c34)));
  }, row);
  check("dot_const", [&](Tape& t, Tensor x) {
    return t.dot_const(x, {0.5, -1.0, 2.0, 0.25, 1.5, -0.5, 3.0, 0.1, -2.0, 1.0, 0.7, -0.3});
  }, x34);

  Array props = random_array(6, 4, rng);
  Array conf = random_array(6, 2, rng);
  std::vector<std::vector<int>> segments = {{0, 2, 5}, {1}, {}, {3, 4}};
  check("segment_pool_props", [&](Tape& t, Tensor x) {
    return t.sum(t.mul(t.segment_softmax_pool(x, t.constant(conf), segments, 2),
                       t.constant(c44)));
  }, props);
  check("segment_pool_conf", [&](Tape& t, Tensor x) {
    return t.sum(t.mul(t.segment_softmax_pool(t.constant(props), x, segments, 2),
                       t.constant(c44)));
  }, conf);
}

TEST_CASE("composite gradient matches finite differences") {
  // small sequence-processor-like composite: norm -> gru-ish gate -> pool
  Rng rng(11);
  Array x = random_array(4, 6, rng);
  Array w1 = random_array(6, 6, rng);
  Array w2 = random_array(6, 6, rng);
  auto f = [&](Tape& t, Tensor in) {
    Tensor g = t.sigmoid(t.matmul(in, t.constant(w1)));
    Tensor h = t.tanh(t.matmul(in, t.constant(w2)));
    Tensor mixed = t.add(t.mul(g, h), t.mul(t.one_minus(g), in));
    return t.mean(t.swish(mixed));
  };
  CHECK(nn::gradient_check(f, x) < 1e-6);
}

TEST_CASE("segment pool equals softmax average by hand") {
  // two proposals [1,0] and [0,1] with confidences 0 and ln 3, one head:
  // weights (1/4, 3/4) -> [0.25, 0.75]
  Tape t;
  Array props = arr(2, 2, {1, 0, 0, 1});
  Array conf(2, 1);
  conf.data = {0.0, std::log(3.0)};
  Tensor out = t.segment_softmax_pool(t.constant(props), t.constant(conf), {{0, 1}}, 1);
  CHECK(out.value().at(0, 0) == doctest::Approx(0.25));
  CHECK(out.value().at(0, 1) == doctest::Approx(0.75));

  // a single proposal passes through unchanged
  Tensor single = t.segment_softmax_pool(t.constant(props), t.constant(conf), {{1}}, 1);
  CHECK(single.value().at(0, 0) == doctest::Approx(0.0));
  CHECK(single.value().at(0, 1) == doctest::Approx(1.0));

  // equal confidences give the arithmetic mean
  Array eq_conf(2, 1);
  Tensor mean = t.segment_softmax_pool(t.constant(props), t.constant(eq_conf), {{0, 1}}, 1);
  CHECK(mean.value().at(0, 0) == doctest::Approx(0.5));
  CHECK(mean.value().at(0, 1) == doctest::Approx(0.5));
}

TEST_CASE("gru update arithmetic with zero weights") {
  // z = sigmoid(0) = 0.5, candidate = tanh(0) = 0 -> h' = 0.5 * h
  Tape t;
  Array h0 = arr(1, 2, {1, 0});
  Tensor h = t.constant(h0);
  Tensor zeros = t.constant(Array(1, 2));
  Tensor z = t.sigmoid(zeros);
  Tensor cand = t.tanh(zeros);
  Tensor next = t.add(t.mul(z, h), t.mul(t.one_minus(z), cand));
  CHECK(next.value().data[0] == doctest::Approx(0.5));
  CHECK(next.value().data[1] == doctest::Approx(0.0));
}

TEST_CASE("adamw") {
  SUBCASE("zero gradients and zero decay leave parameters unchanged") {
    Parameter p("p", arr(1, 2, {1.5, -2.0}));
    nn::AdamWConfig cfg;
    cfg.weight_decay = 0.0;
    nn::AdamW opt({&p}, cfg);
    opt.step();
    CHECK(p.value.data[0] == 1.5);
    CHECK(p.value.data[1] == -2.0);
  }
  SUBCASE("zero gradients with decay scale by 1 - lr*wd") {
    Parameter p("p", arr(1, 1, {2.0}));
    nn::AdamWConfig cfg;
    cfg.lr = 5e-4;
    cfg.weight_decay = 0.01;
    nn::AdamW opt({&p}, cfg);
    opt.step();
    CHECK(p.value.data[0] == doctest::Approx(2.0 * (1.0 - 5e-6)).epsilon(1e-12));
  }
  SUBCASE("first step with unit gradient moves by about -lr") {
    Parameter p("p", arr(1, 2, {0.0, 0.0}));
    nn::AdamWConfig cfg;
    cfg.lr = 1e-3;
    cfg.weight_decay = 0.0;
    nn::AdamW opt({&p}, cfg);
    p.grad.data = {1.0, 1.0};
    opt.step();
    CHECK(p.value.data[0] == doctest::Approx(-1e-3).epsilon(1e-6));
  }
  SUBCASE("non-finite gradient aborts with the parameter name") {
    Parameter p("embedding.weird", arr(1, 1, {0.0}));
    nn::AdamW opt({&p}, {});
    p.grad.data[0] = std::nan("");
    CHECK_THROWS_WITH_AS(opt.step(), doctest::Contains("embedding.weird"), std::runtime_error);
  }
}
