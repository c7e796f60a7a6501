// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "psckit/cli.hpp"
#include "psckit/estimator.hpp"
#include "psckit/metrics.hpp"
#include "psckit/phy_losses.hpp"
#include "psckit/simulator.hpp"

using namespace psckit;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

RadarConfig grid_config(std::size_t h, std::size_t w) {
  RadarConfig c;
  c.grid_h = h;
  c.grid_w = w;
  return c;
}

cplx inner(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  cplx acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

Outcome forward_model_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  double worst_dense = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Dictionary d(grid_config(8, 8), ComplexImage(8, 8, oracle::random_complex(64, rng)), 1e-8);
    const std::vector<cplx> win(d.window_spectrum().data().begin(), d.window_spectrum().data().end());
    const auto psi = oracle::circulant(win, 8, 8);
    const auto o = oracle::random_complex(64, rng);
    worst_dense = std::max(worst_dense, oracle::rel_err(d.apply(std::span<const cplx>(o)), oracle::apply(psi, o)));
    worst_dense = std::max(worst_dense, oracle::rel_err(d.adjoint(std::span<const cplx>(o)),
                                                        oracle::apply(oracle::adjoint(psi), o)));
  }
  double worst_adjoint = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Dictionary d(grid_config(16, 16), ComplexImage(16, 16, oracle::random_complex(256, rng)), 1e-8);
    const auto o = oracle::random_complex(256, rng);
    const auto r = oracle::random_complex(256, rng);
    const cplx lhs = inner(d.apply(std::span<const cplx>(o)), r);
    const cplx rhs = inner(o, d.adjoint(std::span<const cplx>(r)));
    worst_adjoint = std::max(worst_adjoint, std::abs(lhs - rhs) / (oracle::norm(o) * oracle::norm(r)));
  }
  const double elapsed = seconds_since(start);
  return {worst_dense <= 1e-8 && worst_adjoint <= 1e-10 && elapsed < 30.0,
          fmt("dense rel err %.3g", worst_dense) + fmt(", adjoint err %.3g", worst_adjoint) +
              fmt(", %.2f s", elapsed)};
}

Outcome hqs_hand_example() {
  const auto d = identity_dictionary(grid_config(1, 1), 1e-20);
  HqsParams p;
  p.t = 0.1;
  p.rho = 0.05;
  p.mu = 0.5;
  const std::vector<double> r = {2.0};
  const std::vector<double> p0 = {0.0};
  const auto it = hqs_step<double>(d, r, p0, p);
  return {it.o[0] == 1.0 && it.p[0] == -0.05, fmt("o = %.17g", it.o[0]) + fmt(", p = %.17g", it.p[0])};
}

Outcome classical_support_recovery() {
  const auto start = Clock::now();
  SimConfig sc;
  sc.num_targets = 100;
  sc.seed = 7;
  const auto ds = gen_dataset(sc);
  const auto d = build_dictionary(sc.radar);
  HqsParams hp;
  hp.iterations = 50;
  std::size_t ok = 0;
  for (const auto& s : ds) {
    const auto res = hqs_solve<double>(d, vectorize(s.image), hp);
    const auto top =
        dominant_centers(extract_centers<double>(sc.radar, res.o), s.truth.centers.size(), sc.radar);
    bool all = true;
    for (const auto& t : s.truth.centers) {
      const auto tp = sc.radar.nearest_pixel(t.x, t.y);
      bool hit = false;
      for (const auto& e : top.centers) {
        const auto ep = sc.radar.nearest_pixel(e.x, e.y);
        hit |= std::abs(static_cast<long>(ep.row) - static_cast<long>(tp.row)) <= 1 &&
               std::abs(static_cast<long>(ep.col) - static_cast<long>(tp.col)) <= 1;
      }
      all &= hit;
    }
    ok += all ? 1 : 0;
  }
  const double elapsed = seconds_since(start);
  return {ok >= 80 && elapsed < 120.0,
          std::to_string(ok) + "/100 targets fully recovered" + fmt(", %.2f s", elapsed)};
}

Outcome gradient_check() {
  const auto d = build_dictionary(grid_config(16, 16));
  double worst = 0.0;
  std::size_t resampled = 0;
  for (auto rule : {UpdateRule::AsPrinted, UpdateRule::Proximal}) {
    const auto check = oracle::run_grad_check<double>(d, rule, 20, 202);
    worst = std::max(worst, check.worst_rel_err);
    resampled += check.resampled;
  }
  return {worst <= 1e-4, fmt("worst rel err %.3g", worst) + ", " + std::to_string(resampled) + " resampled"};
}

Outcome hqs_estimator_identity() {
  const auto d = build_dictionary(RadarConfig{});
  std::mt19937_64 rng(303);
  bool same = true;
  for (auto rule : {UpdateRule::AsPrinted, UpdateRule::Proximal}) {
    for (int k : {1, 2, 10}) {
      const auto r = oracle::random_real(d.size(), rng);
      HqsParams hp;
      hp.t = 0.25;
      hp.rho = 0.03;
      hp.mu = 0.6;
      hp.iterations = k;
      hp.rule = rule;
      const auto solved = hqs_solve<double>(d, r, hp);
      const auto trace = estimator_forward<double>(d, r, from_hqs(hp));
      same &= trace.o() == solved.o && trace.p() == solved.p;
    }
  }
  return {same, same ? "bit-identical" : "outputs differ"};
}

struct TrainingRun {
  double loss_init = 0.0;
  double loss_trained = 0.0;
  double relres_init = 0.0;
  double relres_trained = 0.0;
  double seconds = 0.0;
};

TrainingRun training_run(UpdateRule rule, double amplitude_scale) {
  const auto start = Clock::now();
  SimConfig sc;
  sc.num_targets = 64;
  sc.amplitude_min *= amplitude_scale;
  sc.amplitude_max *= amplitude_scale;
  const auto d = build_dictionary(sc.radar);
  auto as_vectors = [](const std::vector<Sample>& ds) {
    std::vector<std::vector<double>> out;
    for (const auto& s : ds) out.push_back(vectorize(s.image));
    return out;
  };
  sc.seed = 11;
  const auto train = as_vectors(gen_dataset(sc));
  sc.seed = 12;
  const auto held = as_vectors(gen_dataset(sc));

  EstimatorParams init;
  init.rule = rule;
  const auto result = train_estimator<double>(d, train, TrainConfig{}, init);
  auto relres = [&](const EstimatorParams& p) {
    double acc = 0.0;
    for (const auto& r : held) {
      const auto f = estimator_forward<double>(d, r, p);
      acc += residual_norm<double>(d, r, f.o()) / l2_norm<double>(r);
    }
    return acc / static_cast<double>(held.size());
  };
  TrainingRun out;
  out.loss_init = mean_loss<double>(d, held, init);
  out.loss_trained = mean_loss<double>(d, held, result.params);
  out.relres_init = relres(init);
  out.relres_trained = relres(result.params);
  out.seconds = seconds_since(start);
  return out;
}

std::string describe(const TrainingRun& t) {
  const double gain = (t.relres_init - t.relres_trained) / t.relres_init;
  return fmt("held-out loss %.6g", t.loss_init) + fmt(" -> %.6g", t.loss_trained) +
         fmt(", relative residual %.5f", t.relres_init) + fmt(" -> %.5f", t.relres_trained) +
         fmt(" (%.2f%% better)", 100.0 * gain) + fmt(", %.1f s", t.seconds);
}

Outcome training_improves() {
  const auto t = training_run(UpdateRule::AsPrinted, 1.0);
  const double gain = (t.relres_init - t.relres_trained) / t.relres_init;
  for (auto [rule, scale] : {std::pair{UpdateRule::Proximal, 1.0}, std::pair{UpdateRule::Proximal, 10.0}}) {
    const auto info = training_run(rule, scale);
    std::printf("INFO criterion 6 (%s rule, amplitude x%g): %s\n", to_string(rule), scale,
                describe(info).c_str());
  }
  return {t.loss_trained < t.loss_init && gain >= 0.10 && t.seconds < 300.0, describe(t)};
}

Outcome loss_exactness() {
  bool ok = true;
  const auto z = che_embed(0.0);
  const auto q = che_embed(std::numbers::pi / 2.0);
  const std::array<double, 10> want_z = {0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  const std::array<double, 10> want_q = {1, 0, 0, -1, -1, 0, 0, 1, 1, 0};
  for (std::size_t i = 0; i < 10; ++i) {
    ok &= std::abs(z[i] - want_z[i]) <= 1e-12;
    ok &= std::abs(q[i] - want_q[i]) <= 1e-12;
  }
  ok &= d_combine(1.0, 0.0, 0.6) == 0.6;
  ok &= std::abs(d_combine(0.37, 0.37, 0.25) - 0.37) <= 1e-15;

  const RealImage a(1, 2, {0, 0});
  const RealImage b(1, 2, {2, 0});
  ok &= loss_phy_s(a, b) == 2.0;
  const FeatureStack f3({FeatureMap(1, 1, 1, {3.0})});
  const FeatureStack f1({FeatureMap(1, 1, 1, {1.0})});
  const FeatureStack f0({FeatureMap(1, 1, 1, {0.5})});
  ok &= loss_phy_f(f3, f1) == 2.0;
  const PhyLossWeights w;
  ok &= w.alpha == 0.6 && w.beta == 1.0 && w.gamma == 10.0;
  ok &= loss_phy_g(a, b, f3, f1, w) == 22.0;
  ok &= loss_phy_d(f3, f1, f1, f0, w.gamma) == w.gamma * (loss_phy_f(f3, f1) + loss_phy_f(f1, f0));
  return {ok, ok ? "all closed forms exact" : "closed form mismatch"};
}

Outcome metric_oracles() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  auto random_image = [&] {
    std::vector<double> v(32 * 32);
    for (auto& x : v) x = u(rng);
    return RealImage(32, 32, std::move(v));
  };
  bool self = true;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto x = random_image();
    const auto y = random_image();
    self &= ssim(x, x, 255.0) == 1.0 && gmsd(x, x) == 0.0;
    worst = std::max(worst, std::abs(gmsd(x, y) - oracle::gmsd(x.values(), y.values(), 32, 32, 170.0)));
  }
  return {self && worst <= 1e-6, std::string(self ? "self-identity exact" : "self-identity broken") +
                                     fmt(", worst gmsd deviation %.3g", worst)};
}

int run_quiet(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  return run_cli(args, out, err);
}

Outcome cli_reproducible() {
  oracle::TempDir dir("acceptance_cli");
  SimConfig sc;
  sc.num_targets = 8;
  write_json_file(to_json(sc), dir / "sim.json");
  TrainConfig tc;
  tc.steps = 20;
  write_json_file(to_json(tc), dir / "train.json");
  bool ok = true;
  for (const char* run : {"a", "b"}) {
    const auto base = dir / run;
    ok &= run_quiet({"simulate", "--config", (dir / "sim.json").string(), "--out", (base / "data").string()}) == 0;
    ok &= run_quiet({"train", "--manifest", (base / "data" / "manifest.json").string(), "--train-config",
                     (dir / "train.json").string(), "--out", (base / "params.json").string()}) == 0;
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(dir / "a")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), dir / "a");
    ok &= oracle::read_bytes(entry.path()) == oracle::read_bytes(dir / "b" / rel);
    ++compared;
  }
  ok &= compared > 0;
  return {ok, std::to_string(compared) + " files compared"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"FFT operators match dense matrices", forward_model_oracle},
      {"HQS hand example", hqs_hand_example},
      {"classical HQS support recovery", classical_support_recovery},
      {"analytic gradients match finite differences", gradient_check},
      {"fixed-parameter estimator equals classical HQS", hqs_estimator_identity},
      {"training improves held-out loss and residual", training_improves},
      {"physics loss closed forms", loss_exactness},
      {"SSIM and GMSD oracles", metric_oracles},
      {"CLI outputs are reproducible", cli_reproducible},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
