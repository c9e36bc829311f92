// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>
#include <set>

#include "asem/error.hpp"
#include "asem/optimizer.hpp"
#include "doctest.h"

using namespace asem;

namespace {

// Scalar Adam written out by hand for the reference trajectory.
struct ScalarAdam {
  double m = 0.0, v = 0.0;
  int t = 0;
  double step(double x, double g, double lr) {
    ++t;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double m_hat = m / (1.0 - std::pow(0.9, t));
    const double v_hat = v / (1.0 - std::pow(0.999, t));
    return x - lr * m_hat / (std::sqrt(v_hat) + 1e-8);
  }
};

void apply_one(AdamState& state, std::vector<double>& x, const std::vector<double>& g, double lr) {
  const std::span<double> p[] = {x};
  const std::span<const double> q[] = {g};
  state.apply(p, q, lr);
}

}  // namespace

TEST_CASE("zero gradient leaves parameters unchanged") {
  const std::size_t sizes[] = {3};
  AdamState state(sizes);
  std::vector<double> x{1.0, -2.0, 0.5};
  apply_one(state, x, {0, 0, 0}, 1e-3);
  CHECK(x == std::vector<double>{1.0, -2.0, 0.5});
  CHECK(state.step() == 1);
}

TEST_CASE("first step moves each coordinate by about lr") {
  const std::size_t sizes[] = {4};
  const double lr = 1e-3;
  for (double g : {1e-6, 0.3, -2.0, 50.0}) {
    AdamState state(sizes);
    std::vector<double> x(4, 0.0);
    apply_one(state, x, std::vector<double>(4, g), lr);
    const double expected = lr / (1.0 + 1e-8 / (std::abs(g)));
    for (double v : x) {
      CHECK(std::abs(std::abs(v) - expected) < 1e-15);
      CHECK((v < 0) == (g > 0));
    }
  }
}

TEST_CASE("three steps on a quadratic match the scalar reference") {
  // f(x) = (x - 3)^2, g = 2 (x - 3)
  const std::size_t sizes[] = {1};
  AdamState state(sizes);
  ScalarAdam ref;
  std::vector<double> x{0.0};
  double y = 0.0;
  for (int k = 0; k < 3; ++k) {
    apply_one(state, x, {2.0 * (x[0] - 3.0)}, 0.1);
    y = ref.step(y, 2.0 * (y - 3.0), 0.1);
    CHECK(std::abs(x[0] - y) < 1e-12);
  }
  CHECK(state.step() == 3);
  CHECK(state.first_moment(0)[0] == doctest::Approx(ref.m).epsilon(1e-12));
  CHECK(state.second_moment(0)[0] == doctest::Approx(ref.v).epsilon(1e-12));
}

TEST_CASE("adam errors") {
  const std::size_t sizes[] = {2, 3};
  AdamState state(sizes);
  std::vector<double> a(2), b(3), ga(2), gb(4);
  const std::span<double> p[] = {a, b};
  const std::span<const double> bad[] = {ga, gb};
  try {
    state.apply(p, bad, 1e-3);
    FAIL("expected ShapeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ShapeMismatch);
  }
  const std::span<double> one[] = {a};
  const std::span<const double> g_one[] = {ga};
  CHECK_THROWS_AS(state.apply(one, g_one, 1e-3), Error);
  std::vector<double> gb3(3);
  const std::span<const double> good[] = {ga, gb3};
  CHECK_THROWS_AS(state.apply(p, good, 0.0), Error);
  CHECK(state.step() == 0);
}

TEST_CASE("step magnitude bound and nonnegative second moment on random trajectories") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> scale(0.0, 3.0);
  std::uniform_real_distribution<double> lr_dist(1e-5, 1e-1);
  for (int traj = 0; traj < 50; ++traj) {
    const std::size_t sizes[] = {8};
    AdamState state(sizes);
    std::vector<double> x(8, 0.0);
    const double lr = lr_dist(rng);
    for (int t = 0; t < 200; ++t) {
      std::vector<double> g(8);
      // Heavy-tailed gradients: occasional spikes after long quiet runs.
      for (double& v : g) v = scale(rng) * std::pow(10.0, std::floor(scale(rng)));
      const auto before = x;
      apply_one(state, x, g, lr);
      for (std::size_t k = 0; k < 8; ++k) {
        CHECK(std::abs(x[k] - before[k]) <= lr / (1.0 - 0.9));
        CHECK(state.second_moment(0)[k] >= 0.0);
      }
    }
  }
}

TEST_CASE("identical inputs give identical updates") {
  const std::size_t sizes[] = {5};
  AdamState a(sizes), b(sizes);
  std::vector<double> x(5, 1.0), y(5, 1.0);
  const std::vector<double> g{0.1, -0.2, 0.3, 1e-9, -7.0};
  for (int k = 0; k < 5; ++k) {
    apply_one(a, x, g, 1e-3);
    apply_one(b, y, g, 1e-3);
  }
  CHECK(x == y);
}

TEST_CASE("lr_at_epoch") {
  LrSchedule s;
  CHECK(lr_at_epoch(s, 0) == 1e-4);
  CHECK(std::abs(lr_at_epoch(s, 20) - 1e-5) < 1e-20);
  CHECK(std::abs(lr_at_epoch(s, 40) - 1e-6) < 1e-21);
  CHECK(lr_at_epoch(s, 19) == 1e-4);
  s.base_lr = 5e-5;
  CHECK(lr_at_epoch(s, 19) == 5e-5);
  try {
    lr_at_epoch(s, 50);
    FAIL("expected EpochOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EpochOutOfRange);
  }
}

TEST_CASE("schedule is piecewise constant with ceil(total/every) levels") {
  for (std::size_t total : {1u, 19u, 20u, 21u, 50u, 100u}) {
    for (std::size_t every : {1u, 7u, 20u}) {
      const LrSchedule s{1e-4, 0.1, every, total};
      std::set<double> levels;
      double prev = INFINITY;
      for (std::size_t e = 0; e < total; ++e) {
        const double lr = lr_at_epoch(s, e);
        CHECK(lr <= prev);
        if (e % every != 0) CHECK(lr == prev);
        prev = lr;
        levels.insert(lr);
      }
      CHECK(levels.size() == (total + every - 1) / every);
    }
  }
}
