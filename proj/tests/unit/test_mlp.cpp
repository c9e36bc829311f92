// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <random>

#include "asem/checkpoint.hpp"
#include "asem/embedding.hpp"
#include "asem/error.hpp"
#include "asem/io.hpp"
#include "asem/mlp.hpp"
#include "asem/objectives.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace asem;
namespace fs = std::filesystem;

namespace {

MlpParams random_params(std::size_t d_in, std::size_t d_hidden, std::size_t d_out,
                        std::mt19937_64& rng) {
  MlpParams p = MlpParams::zeros(d_in, d_hidden, d_out);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto t : p.tensors())
    for (double& v : t) v = u(rng);
  return p;
}

bool all_zero(std::span<const double> v) {
  for (double x : v)
    if (x != 0.0) return false;
  return true;
}

// Smallest |pre-activation| over the hidden layer: distance to a ReLU kink.
double kink_distance(const MlpCache& cache) {
  double d = INFINITY;
  for (double v : cache.hidden_pre.values()) d = std::min(d, std::abs(v));
  return d;
}

std::vector<double> flat(std::span<const double> v) { return {v.begin(), v.end()}; }

fs::path temp_dir(const char* name) {
  auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("mlp_forward examples") {
  SUBCASE("zero parameters") {
    const auto [y, cache] = mlp_forward(MlpParams::zeros(3, 4, 2), Matrix{{1, -2, 3}, {4, 5, 6}});
    CHECK(y == Matrix(2, 2));
    CHECK(cache.hidden_pre == Matrix(2, 4));
  }
  SUBCASE("identity weights pass nonnegative inputs through") {
    MlpParams p = MlpParams::zeros(3, 3, 3);
    p.w1 = Matrix::identity(3);
    p.w2 = Matrix::identity(3);
    const Matrix x{{0.5, 0.0, 2.0}, {1.0, 3.0, 0.25}};
    CHECK(mlp_forward(p, x).first == x);
  }
  SUBCASE("matches the element-wise oracle") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
      const auto p = random_params(5, 7, 3, rng);
      const Matrix x = oracle::random_matrix(4, 5, rng);
      const auto y = mlp_forward(p, x).first;
      const auto expected = oracle::mlp_forward(oracle::to_grid(x), oracle::to_grid(p.w1), p.b1,
                                                oracle::to_grid(p.w2), p.b2);
      REQUIRE(y.rows() == 4);
      for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(y(r, c) - expected[r][c]) < 1e-12);
    }
  }
  SUBCASE("shape mismatch") {
    try {
      mlp_forward(MlpParams::zeros(3, 2, 2), Matrix(1, 4));
      FAIL("expected ShapeMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ShapeMismatch);
    }
  }
}

TEST_CASE("mlp_backward") {
  std::mt19937_64 rng(5);
  SUBCASE("zero upstream gradient") {
    const auto p = random_params(4, 6, 3, rng);
    const auto [y, cache] = mlp_forward(p, oracle::random_matrix(2, 4, rng));
    const auto [g, gx] = mlp_backward(p, cache, Matrix(2, 3));
    for (auto t : std::as_const(g).tensors()) CHECK(all_zero(t));
    CHECK(all_zero(gx.values()));
  }
  SUBCASE("all-positive hidden layer reduces to chained products") {
    MlpParams p = random_params(3, 4, 2, rng);
    for (double& v : p.b1) v = 10.0;  // keeps every pre-activation positive
    const Matrix x = oracle::random_matrix(2, 3, rng);
    const Matrix gy = oracle::random_matrix(2, 2, rng);
    const auto [y, cache] = mlp_forward(p, x);
    const auto [g, gx] = mlp_backward(p, cache, gy);
    const Matrix expected_gx = matmul_a_bt(matmul_a_bt(gy, p.w2), p.w1);
    const Matrix expected_gw2 = matmul_at_b(cache.hidden, gy);
    for (std::size_t k = 0; k < gx.size(); ++k)
      CHECK(std::abs(gx.values()[k] - expected_gx.values()[k]) < 1e-12);
    for (std::size_t k = 0; k < g.w2.size(); ++k)
      CHECK(std::abs(g.w2.values()[k] - expected_gw2.values()[k]) < 1e-12);
  }
  SUBCASE("ReLU derivative is zero at zero") {
    MlpParams p = MlpParams::zeros(1, 1, 1);
    p.w1 = Matrix{{1.0}};
    p.w2 = Matrix{{1.0}};
    const auto [y, cache] = mlp_forward(p, Matrix{{0.0}});
    const auto [g, gx] = mlp_backward(p, cache, Matrix{{1.0}});
    CHECK(gx(0, 0) == 0.0);
    CHECK(g.b1[0] == 0.0);
    CHECK(g.b2[0] == 1.0);
  }
  SUBCASE("finite differences on every parameter and the input") {
    int checked = 0;
    while (checked < 10) {
      const auto p = random_params(4, 5, 3, rng);
      const Matrix x = oracle::random_matrix(3, 4, rng);
      const Matrix gy = oracle::random_matrix(3, 3, rng);
      const auto [y, cache] = mlp_forward(p, x);
      if (kink_distance(cache) < 1e-3) continue;
      ++checked;
      const auto [g, gx] = mlp_backward(p, cache, gy);
      // Scalar loss L = <gy, y>.
      auto loss = [&](const MlpParams& q, const Matrix& in) {
        const Matrix out = mlp_forward(q, in).first;
        double total = 0.0;
        for (std::size_t k = 0; k < out.size(); ++k) total += out.values()[k] * gy.values()[k];
        return total;
      };
      const auto grads = std::as_const(g).tensors();
      for (std::size_t t = 0; t < grads.size(); ++t) {
        auto f = [&](const std::vector<double>& v) {
          MlpParams q = p;
          std::copy(v.begin(), v.end(), q.tensors()[t].begin());
          return loss(q, x);
        };
        const auto fd = oracle::central_difference(f, flat(p.tensors()[t]), 1e-5);
        CHECK(oracle::relative_error(flat(grads[t]), fd) < 1e-6);
      }
      auto fx = [&](const std::vector<double>& v) { return loss(p, Matrix(3, 4, v)); };
      CHECK(oracle::relative_error(flat(gx.values()),
                                   oracle::central_difference(fx, flat(x.values()), 1e-5)) < 1e-6);
    }
  }
  SUBCASE("cache mismatch") {
    const auto p = random_params(4, 5, 3, rng);
    const auto [y, cache] = mlp_forward(p, oracle::random_matrix(2, 4, rng));
    try {
      mlp_backward(p, cache, Matrix(3, 3));
      FAIL("expected CacheMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::CacheMismatch);
    }
    CHECK_THROWS_AS(mlp_backward(MlpParams::zeros(4, 6, 3), cache, Matrix(2, 3)), Error);
  }
}

TEST_CASE("mlp_init") {
  const auto a = mlp_init(100, 20, 10, 9);
  CHECK(a == mlp_init(100, 20, 10, 9));
  const double bound = std::sqrt(6.0 / 100.0);
  for (double v : a.w1.values()) CHECK(std::abs(v) <= bound);
  for (double v : a.w2.values()) CHECK(std::abs(v) <= std::sqrt(6.0 / 20.0));
  CHECK(all_zero(a.b1));
  CHECK(all_zero(a.b2));
  const auto b = mlp_init(100, 20, 10, 10);
  std::size_t differ = 0, total = 0;
  for (std::size_t t = 0; t < 4; t += 2) {
    const auto x = a.tensors()[t];
    const auto y = b.tensors()[t];
    for (std::size_t k = 0; k < x.size(); ++k, ++total) differ += x[k] != y[k];
  }
  CHECK(static_cast<double>(differ) >= 0.99 * static_cast<double>(total));
  CHECK(a.w1.rows() == 100);
  CHECK(a.w2.cols() == 10);
}

TEST_CASE("gradients through loss, similarity, normalization and both heads") {
  std::mt19937_64 rng(2718);
  const ObjectiveConfig cfg;
  for (Objective o : kAllObjectives) {
    const auto audio = random_params(5, 6, 4, rng);
    const auto text = random_params(3, 6, 4, rng);
    const Matrix xa = oracle::random_matrix(3, 5, rng);
    const Matrix xt = oracle::random_matrix(3, 3, rng);
    auto loss = [&](const MlpParams& pa, const MlpParams& pt) {
      const Matrix ya = mlp_forward(pa, xa).first;
      const Matrix yt = mlp_forward(pt, xt).first;
      return evaluate_objective(o, cosine_similarity_matrix(ya, yt), cfg).value;
    };
    const auto [ya, ca] = mlp_forward(audio, xa);
    const auto [yt, ct] = mlp_forward(text, xt);
    const auto s = cosine_similarity_matrix(ya, yt);
    const auto r = evaluate_objective(o, s, cfg);
    const auto [gya, gyt] = backprop_to_embeddings(r.grad_s, l2_normalize_rows(ya).value(),
                                                   l2_normalize_rows(yt).value(), ya, yt);
    const auto ga = mlp_backward(audio, ca, gya).first;
    const auto gt = mlp_backward(text, ct, gyt).first;
    for (int head = 0; head < 2; ++head) {
      const MlpParams& base = head == 0 ? audio : text;
      const auto grads = std::as_const(head == 0 ? ga : gt).tensors();
      for (std::size_t t = 0; t < grads.size(); ++t) {
        auto f = [&](const std::vector<double>& v) {
          MlpParams q = base;
          std::copy(v.begin(), v.end(), q.tensors()[t].begin());
          return head == 0 ? loss(q, text) : loss(audio, q);
        };
        const auto fd = oracle::central_difference(f, flat(base.tensors()[t]), 1e-5);
        // Skip tensors with no signal; a zero gradient matches trivially.
        double scale = 0.0;
        for (double v : fd) scale = std::max(scale, std::abs(v));
        if (scale < 1e-9) continue;
        CHECK_MESSAGE(oracle::relative_error(flat(grads[t]), fd) < 1e-5, to_string(o));
      }
    }
  }
}

TEST_CASE("checkpoint round trip") {
  Checkpoint ckpt{mlp_init(4, 3, 2, 1), mlp_init(5, 3, 2, 2), 77};
  const auto bytes = encode_checkpoint(ckpt);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "ASEM");
  const std::size_t params = 4 * 3 + 3 + 3 * 2 + 2 + 5 * 3 + 3 + 3 * 2 + 2;
  CHECK(bytes.size() == 4 + 4 + 4 + 6 * 8 + params * 8);
  Checkpoint back = decode_checkpoint(bytes, "mem");
  back.seed = 77;
  CHECK(back == ckpt);

  const auto dir = temp_dir("asem_test_ckpt");
  save_checkpoint(dir / "m.asem", ckpt);
  CHECK(fs::exists(dir / "m.asem.json"));
  CHECK(load_checkpoint(dir / "m.asem") == ckpt);
  CHECK(io::read_text(dir / "m.asem.json").find("\"seed\": 77") != std::string::npos);

  SUBCASE("corrupt inputs") {
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_checkpoint(bad, "mem"), Error);
    auto truncated = bytes;
    truncated.pop_back();
    try {
      decode_checkpoint(truncated, "mem");
      FAIL("expected BadFormat");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BadFormat);
    }
    auto versioned = bytes;
    versioned[4] = 9;
    CHECK_THROWS_AS(decode_checkpoint(versioned, "mem"), Error);
    try {
      load_checkpoint(dir / "absent.asem");
      FAIL("expected MissingFile");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MissingFile);
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("byte codec is little-endian") {
  io::ByteWriter w;
  w.u32(0x01020304u);
  w.f64(1.0);
  const auto& b = w.bytes();
  CHECK(b[0] == 0x04);
  CHECK(b[3] == 0x01);
  CHECK(b[11] == 0x3f);
  io::ByteReader r(b, "mem");
  CHECK(r.u32() == 0x01020304u);
  CHECK(r.f64() == 1.0);
  CHECK(r.remaining() == 0);
  CHECK_THROWS_AS(r.u64(), Error);
  CHECK(io::fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(io::fnv1a64("a") == 0xaf63dc4c8601ec8cull);
}
