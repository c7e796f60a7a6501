#include <doctest.h>

#include "oracles.hpp"
#include "psckit/hqs.hpp"

using namespace psckit;

namespace {

RadarConfig grid_config(std::size_t h, std::size_t w) {
  RadarConfig c;
  c.grid_h = h;
  c.grid_w = w;
  return c;
}

// Psi = I with an epsilon below half an ulp of 1, so 1 / (1 + eps) == 1.
Dictionary exact_identity(std::size_t h, std::size_t w) { return identity_dictionary(grid_config(h, w), 1e-20); }

}  // namespace

TEST_CASE("soft threshold scalar examples") {
  CHECK(soft_threshold(1.2, 0.5) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(soft_threshold(-0.3, 0.5) == 0.0);
  CHECK(soft_threshold(-2.0, 0.5) == -1.5);
  CHECK(soft_threshold(0.5, 0.5) == 0.0);
  for (double x : {-3.0, -0.1, 0.0, 1e-300, 7.25}) CHECK(soft_threshold(x, 0.0) == x);
  CHECK_THROWS_AS(soft_threshold(1.0, -0.1), ParameterError);
}

TEST_CASE("complex soft threshold shrinks the modulus") {
  const cplx x(3.0, 4.0);
  const cplx y = soft_threshold(x, 1.0);
  CHECK(std::abs(y) == doctest::Approx(4.0));
  CHECK(std::arg(y) == doctest::Approx(std::arg(x)));
  CHECK(soft_threshold(cplx(0.0, 0.0), 0.5) == cplx(0.0, 0.0));
  CHECK(soft_threshold(cplx(0.3, 0.3), 0.5) == cplx(0.0, 0.0));
  CHECK(soft_threshold(x, 0.0) == x);
}

TEST_CASE("soft threshold is non-expansive and sparsifying") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> rho_dist(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = oracle::random_real(64, rng);
    const auto y = oracle::random_real(64, rng);
    const double rho = rho_dist(rng);
    const auto sx = soft_threshold(std::span<const double>(x), rho);
    const auto sy = soft_threshold(std::span<const double>(y), rho);
    std::vector<double> dx(64), ds(64);
    for (std::size_t i = 0; i < 64; ++i) {
      dx[i] = x[i] - y[i];
      ds[i] = sx[i] - sy[i];
      if (std::abs(x[i]) <= rho) CHECK(sx[i] == 0.0);
    }
    CHECK(oracle::norm(ds) <= oracle::norm(dx) * (1.0 + 1e-15));

    const auto cx = oracle::random_complex(32, rng);
    const auto cy = oracle::random_complex(32, rng);
    const auto scx = soft_threshold(std::span<const cplx>(cx), rho);
    const auto scy = soft_threshold(std::span<const cplx>(cy), rho);
    std::vector<cplx> cdx(32), cds(32);
    for (std::size_t i = 0; i < 32; ++i) {
      cdx[i] = cx[i] - cy[i];
      cds[i] = scx[i] - scy[i];
      if (std::abs(cx[i]) <= rho) CHECK(scx[i] == cplx{});
    }
    CHECK(oracle::norm(cds) <= oracle::norm(cdx) * (1.0 + 1e-15));
  }
}

TEST_CASE("hqs step hand evaluation on a 1x1 identity") {
  const auto d = exact_identity(1, 1);
  HqsParams p;
  p.t = 0.1;
  p.rho = 0.05;
  p.mu = 0.5;
  const std::vector<double> r = {2.0};
  const std::vector<double> p0 = {0.0};
  const auto it = hqs_step<double>(d, r, p0, p);
  REQUIRE(it.o.size() == 1);
  CHECK(it.o[0] == 1.0);
  CHECK(it.p[0] == -0.05);

  p.rule = UpdateRule::Proximal;
  const auto prox = hqs_step<double>(d, r, p0, p);
  CHECK(prox.o[0] == 1.0);
  CHECK(prox.p[0] == 0.95);
}

TEST_CASE("hqs step fixed point at zero") {
  const auto d = build_dictionary(grid_config(16, 16));
  const std::vector<double> zero(256, 0.0);
  for (auto rule : {UpdateRule::AsPrinted, UpdateRule::Proximal}) {
    HqsParams p;
    p.rule = rule;
    const auto it = hqs_step<double>(d, zero, zero, p);
    CHECK(it.o == zero);
    CHECK(it.p == zero);
  }
}

TEST_CASE("hqs solve with zero measurement") {
  const auto d = build_dictionary(grid_config(16, 16));
  const std::vector<cplx> zero(256);
  HqsParams p;
  p.iterations = 7;
  const auto res = hqs_solve<cplx>(d, zero, p);
  CHECK(res.o == zero);
  CHECK(res.p == zero);
  REQUIRE(res.residual_trace.size() == 7);
  for (double v : res.residual_trace) CHECK(v == 0.0);
}

TEST_CASE("one data-fit step recovers the measurement when psi is the identity") {
  const auto d = exact_identity(6, 5);
  std::mt19937_64 rng(12);
  HqsParams p;
  p.mu = 1.0;
  p.iterations = 1;
  const auto r = oracle::random_real(30, rng);
  const auto res = hqs_solve<double>(d, r, p);
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(res.o[i] == doctest::Approx(r[i]).epsilon(1e-14));

  std::vector<double> sparse(30, 0.0);
  sparse[17] = 3.5;
  const auto one = hqs_solve<double>(d, sparse, p);
  for (std::size_t i = 0; i < sparse.size(); ++i) {
    CHECK(one.o[i] == doctest::Approx(sparse[i]).epsilon(1e-14));
  }
  CHECK(one.residual_trace[0] == doctest::Approx(0.0));
}

TEST_CASE("hqs is deterministic") {
  const auto d = build_dictionary(RadarConfig{});
  std::mt19937_64 rng(13);
  const auto r = oracle::random_real(d.size(), rng);
  HqsParams p;
  p.iterations = 10;
  p.rule = UpdateRule::Proximal;
  const auto a = hqs_solve<double>(d, r, p);
  const auto b = hqs_solve<double>(d, r, p);
  CHECK(a.o == b.o);
  CHECK(a.p == b.p);
  CHECK(a.residual_trace == b.residual_trace);
}

TEST_CASE("warm start continues the iteration") {
  const auto d = build_dictionary(grid_config(16, 16));
  std::mt19937_64 rng(14);
  const auto r = oracle::random_real(256, rng);
  HqsParams p;
  p.rule = UpdateRule::Proximal;
  p.mu = 0.3;
  p.rho = 0.01;
  p.iterations = 6;
  const auto full = hqs_solve<double>(d, r, p);
  p.iterations = 2;
  const auto head = hqs_solve<double>(d, r, p);
  p.iterations = 4;
  const auto tail = hqs_solve_from<double>(d, r, head.p, p);
  CHECK(tail.o == full.o);
  CHECK(tail.p == full.p);
}

TEST_CASE("proximal rule thresholds the data-fit iterate") {
  const auto d = build_dictionary(grid_config(16, 16));
  std::mt19937_64 rng(15);
  const auto r = oracle::random_real(256, rng);
  const auto p0 = oracle::random_real(256, rng);
  HqsParams p;
  p.rule = UpdateRule::Proximal;
  p.rho = 0.3;
  p.mu = 0.7;
  const auto it = hqs_step<double>(d, r, p0, p);
  CHECK(it.p == soft_threshold(std::span<const double>(it.o), p.rho));
}

TEST_CASE("printed rule matches a direct evaluation") {
  const auto d = build_dictionary(grid_config(16, 16));
  std::mt19937_64 rng(16);
  const auto r = oracle::random_real(256, rng);
  const auto p0 = oracle::random_real(256, rng);
  HqsParams p;
  p.t = 0.4;
  p.rho = 0.2;
  p.mu = 0.6;
  const auto it = hqs_step<double>(d, r, p0, p);
  const auto psi_p = d.apply(std::span<const double>(p0));
  std::vector<double> resid(256);
  for (std::size_t i = 0; i < 256; ++i) resid[i] = r[i] - psi_p[i];
  const auto g = d.adjoint(std::span<const double>(d.gram_inverse_apply(std::span<const double>(resid))));
  std::vector<double> o(256), diff(256);
  for (std::size_t i = 0; i < 256; ++i) {
    o[i] = p0[i] + p.mu * g[i];
    diff[i] = psi_p[i] - o[i];
  }
  const auto w = d.adjoint(std::span<const double>(diff));
  std::vector<double> z(256);
  for (std::size_t i = 0; i < 256; ++i) z[i] = p0[i] + p.t * w[i];
  const auto want_p = soft_threshold(std::span<const double>(z), p.rho);
  CHECK(oracle::rel_err(it.o, o) < 1e-9);
  CHECK(oracle::rel_err(it.p, want_p) < 1e-9);
}

TEST_CASE("hqs parameter validation") {
  HqsParams p;
  CHECK_NOTHROW(p.validate());
  p.rho = -0.1;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p = HqsParams{};
  p.t = 0.0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p = HqsParams{};
  p.mu = -1.0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p = HqsParams{};
  p.iterations = 0;
  CHECK_THROWS_AS(p.validate(), ParameterError);

  const auto d = exact_identity(2, 2);
  const std::vector<double> r(4, 1.0);
  const std::vector<double> bad(3, 0.0);
  CHECK_THROWS_AS(hqs_step<double>(d, r, bad, HqsParams{}), DimensionError);
}

TEST_CASE("hqs defaults and rule names") {
  const HqsParams p;
  CHECK(p.t == 0.001);
  CHECK(p.rho == 0.005);
  CHECK(p.mu == 0.001);
  CHECK(p.rule == UpdateRule::AsPrinted);
  CHECK(update_rule_from_string(to_string(UpdateRule::Proximal)) == UpdateRule::Proximal);
  CHECK(update_rule_from_string(to_string(UpdateRule::AsPrinted)) == UpdateRule::AsPrinted);
  CHECK_THROWS_AS(update_rule_from_string("fista"), ConfigError);
}
