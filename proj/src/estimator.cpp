#include "psckit/estimator.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <sstream>

namespace psckit {

namespace {

inline double re_mul_conj(double a, double b) noexcept { return a * b; }
inline double re_mul_conj(const cplx& a, const cplx& b) noexcept {
  return a.real() * b.real() + a.imag() * b.imag();
}

template <class T>
double re_inner(std::span<const T> a, std::span<const T> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += re_mul_conj(a[i], b[i]);
  return acc;
}

inline double unit(double x) noexcept { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }
inline cplx unit(const cplx& x) noexcept {
  const double a = std::abs(x);
  return a > 0.0 ? x / a : cplx{};
}

// Backward pass through p = S_rho(z). Returns d loss / d z and accumulates
// d loss / d rho.
inline double shrink_backward(double pbar, double z, double rho, double& rho_bar) noexcept {
  if (std::abs(z) <= rho) return 0.0;
  rho_bar -= unit(z) * pbar;
  return pbar;
}

inline cplx shrink_backward(const cplx& pbar, const cplx& z, double rho, double& rho_bar) noexcept {
  const double a = std::abs(z);
  if (a <= rho) return cplx{};
  const cplx u = z / a;
  const double s = re_mul_conj(u, pbar);
  rho_bar -= s;
  return pbar - (rho / a) * (pbar - s * u);
}

void check_stage(const StageParams& s, std::size_t k) {
  const std::string where = "stage " + std::to_string(k) + ": ";
  if (!(std::isfinite(s.t) && s.t > 0.0)) throw ParameterError(where + "t must be positive");
  if (!(std::isfinite(s.rho) && s.rho >= 0.0)) throw ParameterError(where + "rho must be non-negative");
  if (!(std::isfinite(s.mu) && s.mu > 0.0)) throw ParameterError(where + "mu must be positive");
}

}  // namespace

void StageParams::project() noexcept {
  t = std::max(t, kMinStep);
  rho = std::max(rho, 0.0);
  mu = std::max(mu, kMinStep);
}

void EstimatorParams::validate() const {
  if (stages.empty()) throw ParameterError("estimator needs at least one stage");
  for (std::size_t k = 0; k < stages.size(); ++k) check_stage(stages[k], k);
  if (!(std::isfinite(lambda1) && lambda1 >= 0.0)) throw ParameterError("lambda1 must be non-negative");
  if (!(std::isfinite(lambda2) && lambda2 >= 0.0)) throw ParameterError("lambda2 must be non-negative");
}

void EstimatorParams::project() noexcept {
  for (auto& s : stages) s.project();
}

EstimatorParams from_hqs(const HqsParams& params, double lambda1, double lambda2) {
  params.validate();
  EstimatorParams out;
  out.stages.assign(static_cast<std::size_t>(params.iterations), {params.t, params.rho, params.mu});
  out.lambda1 = lambda1;
  out.lambda2 = lambda2;
  out.rule = params.rule;
  return out;
}

json to_json(const EstimatorParams& params) {
  json stages = json::array();
  for (const auto& s : params.stages) stages.push_back({{"t", s.t}, {"rho", s.rho}, {"mu", s.mu}});
  return {{"stages", stages},
          {"lambda1", params.lambda1},
          {"lambda2", params.lambda2},
          {"update_rule", to_string(params.rule)}};
}

EstimatorParams estimator_params_from_json(const json& j, const std::string& path) {
  EstimatorParams out;
  const json& stages = jsonf::require(j, "stages", path);
  if (!stages.is_array()) throw ConfigError(jsonf::join(path, "stages") + ": expected an array");
  out.stages.clear();
  for (std::size_t k = 0; k < stages.size(); ++k) {
    const std::string sp = jsonf::join(path, "stages[" + std::to_string(k) + "]");
    out.stages.push_back({jsonf::number(stages[k], "t", sp), jsonf::number(stages[k], "rho", sp),
                          jsonf::number(stages[k], "mu", sp)});
  }
  out.lambda1 = jsonf::number(j, "lambda1", path);
  out.lambda2 = jsonf::number(j, "lambda2", path);
  if (j.contains("update_rule")) {
    out.rule = update_rule_from_string(jsonf::string(j, "update_rule", path));
  }
  try {
    out.validate();
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return out;
}

template <class T>
ForwardTrace<T> estimator_forward(const Dictionary& dict, std::span<const T> r,
                                  const EstimatorParams& params) {
  params.validate();
  ForwardTrace<T> trace;
  trace.stages.reserve(params.stages.size());
  std::vector<T> p0(dict.size(), T{});
  for (std::size_t k = 0; k < params.stages.size(); ++k) {
    const auto& sp = params.stages[k];
    std::span<const T> p_prev = k == 0 ? std::span<const T>(p0) : std::span<const T>(trace.stages.back().p);
    trace.stages.push_back(detail::run_stage(dict, r, p_prev, sp.t, sp.rho, sp.mu, params.rule));
  }
  return trace;
}

template <class T>
double loss_psc(const Dictionary& dict, std::span<const T> r, std::span<const T> o,
                std::span<const T> p, const EstimatorParams& params) {
  if (r.size() != dict.size() || o.size() != dict.size() || p.size() != dict.size()) {
    throw DimensionError("loss_psc operands do not match the dictionary grid");
  }
  const auto psi_o = dict.apply(o);
  double residual = 0.0;
  double consistency = 0.0;
  double l1 = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    residual += std::norm(r[i] - psi_o[i]);
    consistency += std::norm(o[i] - p[i]);
    l1 += std::abs(p[i]);
  }
  return residual + params.lambda1 * consistency + params.lambda2 * l1;
}

template <class T>
LossGradient loss_grad(const Dictionary& dict, std::span<const T> r, const EstimatorParams& params) {
  const auto trace = estimator_forward(dict, r, params);
  const std::size_t n = dict.size();
  const std::size_t num_stages = params.stages.size();
  const auto& o = trace.o();
  const auto& p = trace.p();

  LossGradient out;
  out.loss = loss_psc(dict, r, std::span<const T>(o), std::span<const T>(p), params);
  out.grad.assign(num_stages, StageParams{0.0, 0.0, 0.0});

  const auto psi_o = dict.apply(std::span<const T>(o));
  std::vector<T> e2(n);
  for (std::size_t i = 0; i < n; ++i) e2[i] = 2.0 * (r[i] - psi_o[i]);
  const auto psi_h_e2 = dict.adjoint(std::span<const T>(e2));

  std::vector<T> obar(n);
  std::vector<T> pbar(n);
  for (std::size_t i = 0; i < n; ++i) {
    const T diff = 2.0 * params.lambda1 * (o[i] - p[i]);
    obar[i] = diff - psi_h_e2[i];
    pbar[i] = params.lambda2 * unit(p[i]) - diff;
  }

  for (std::size_t kk = num_stages; kk-- > 0;) {
    const auto& st = trace.stages[kk];
    const auto& sp = params.stages[kk];
    StageParams& g = out.grad[kk];

    std::vector<T> zbar(n);
    for (std::size_t i = 0; i < n; ++i) zbar[i] = shrink_backward(pbar[i], st.z[i], sp.rho, g.rho);

    std::vector<T> prev_bar(n, T{});
    std::vector<T> obar_total = obar;
    if (params.rule == UpdateRule::AsPrinted) {
      g.t = re_inner(std::span<const T>(st.w), std::span<const T>(zbar));
      std::vector<T> wbar(n);
      for (std::size_t i = 0; i < n; ++i) wbar[i] = sp.t * zbar[i];
      const auto vbar = dict.apply(std::span<const T>(wbar));
      const auto psi_h_vbar = dict.adjoint(std::span<const T>(vbar));
      for (std::size_t i = 0; i < n; ++i) {
        prev_bar[i] += zbar[i] + psi_h_vbar[i];
        obar_total[i] -= vbar[i];
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) obar_total[i] += zbar[i];
    }

    g.mu = re_inner(std::span<const T>(st.g), std::span<const T>(obar_total));
    std::vector<T> gbar(n);
    for (std::size_t i = 0; i < n; ++i) gbar[i] = sp.mu * obar_total[i];
    const auto ubar = dict.pinv_adjoint(std::span<const T>(gbar));
    const auto psi_h_ubar = dict.adjoint(std::span<const T>(ubar));
    for (std::size_t i = 0; i < n; ++i) prev_bar[i] += obar_total[i] - psi_h_ubar[i];

    pbar = std::move(prev_bar);
    std::fill(obar.begin(), obar.end(), T{});
  }
  return out;
}

template <class T>
double kink_margin(const ForwardTrace<T>& trace, const EstimatorParams& params) {
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < trace.stages.size(); ++k) {
    const double rho = params.stages[k].rho;
    for (const T& z : trace.stages[k].z) margin = std::min(margin, std::abs(std::abs(z) - rho));
  }
  return margin;
}

void TrainConfig::validate() const {
  if (!(std::isfinite(learning_rate) && learning_rate >= 0.0)) {
    throw ConfigError("learning_rate must be non-negative");
  }
  if (!(std::isfinite(weight_decay) && weight_decay >= 0.0)) {
    throw ConfigError("weight_decay must be non-negative");
  }
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be positive");
}

json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"weight_decay", c.weight_decay},
          {"steps", c.steps},                 {"batch_size", c.batch_size},
          {"seed", c.seed},                   {"beta1", c.beta1},
          {"beta2", c.beta2},                 {"adam_eps", c.adam_eps}};
}

TrainConfig train_config_from_json(const json& j, const std::string& path) {
  TrainConfig c;
  c.learning_rate = jsonf::number_or(j, "learning_rate", path, c.learning_rate);
  c.weight_decay = jsonf::number_or(j, "weight_decay", path, c.weight_decay);
  c.steps = jsonf::count_or(j, "steps", path, c.steps);
  c.batch_size = jsonf::count_or(j, "batch_size", path, c.batch_size);
  c.seed = jsonf::count_or(j, "seed", path, c.seed);
  c.beta1 = jsonf::number_or(j, "beta1", path, c.beta1);
  c.beta2 = jsonf::number_or(j, "beta2", path, c.beta2);
  c.adam_eps = jsonf::number_or(j, "adam_eps", path, c.adam_eps);
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return c;
}

template <class T>
TrainResult train_estimator(const Dictionary& dict, const std::vector<std::vector<T>>& dataset,
                            const TrainConfig& config, EstimatorParams init) {
  if (dataset.empty()) throw ConfigError("training dataset is empty");
  config.validate();
  init.validate();

  TrainResult result;
  result.params = std::move(init);
  auto& params = result.params;
  const std::size_t np = params.num_parameters();

  auto flat = [&params](std::size_t j) -> double& {
    auto& s = params.stages[j / 3];
    return j % 3 == 0 ? s.t : (j % 3 == 1 ? s.rho : s.mu);
  };

  std::vector<double> m(np, 0.0);
  std::vector<double> v(np, 0.0);
  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, dataset.size() - 1);
  double b1_pow = 1.0;
  double b2_pow = 1.0;
  result.loss_history.reserve(config.steps);

  for (std::size_t step = 0; step < config.steps; ++step) {
    double loss = 0.0;
    std::vector<double> grad(np, 0.0);
    for (std::size_t b = 0; b < config.batch_size; ++b) {
      const auto& r = dataset[pick(rng)];
      const auto lg = loss_grad(dict, std::span<const T>(r), params);
      loss += lg.loss;
      for (std::size_t k = 0; k < lg.grad.size(); ++k) {
        grad[3 * k] += lg.grad[k].t;
        grad[3 * k + 1] += lg.grad[k].rho;
        grad[3 * k + 2] += lg.grad[k].mu;
      }
    }
    const double inv_b = 1.0 / static_cast<double>(config.batch_size);
    result.loss_history.push_back(loss * inv_b);
    if (!std::isfinite(loss)) throw NumericalError("training loss became non-finite");

    b1_pow *= config.beta1;
    b2_pow *= config.beta2;
    const double lr = config.learning_rate;
    for (std::size_t j = 0; j < np; ++j) {
      const double gj = grad[j] * inv_b;
      double& theta = flat(j);
      theta -= lr * config.weight_decay * theta;
      m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * gj;
      v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * gj * gj;
      const double m_hat = m[j] / (1.0 - b1_pow);
      const double v_hat = v[j] / (1.0 - b2_pow);
      theta -= lr * m_hat / (std::sqrt(v_hat) + config.adam_eps);
    }
    params.project();
  }
  return result;
}

template <class T>
double mean_loss(const Dictionary& dict, const std::vector<std::vector<T>>& dataset,
                 const EstimatorParams& params) {
  if (dataset.empty()) throw ConfigError("dataset is empty");
  double acc = 0.0;
  for (const auto& r : dataset) {
    const auto trace = estimator_forward(dict, std::span<const T>(r), params);
    acc += loss_psc(dict, std::span<const T>(r), std::span<const T>(trace.o()),
                    std::span<const T>(trace.p()), params);
  }
  return acc / static_cast<double>(dataset.size());
}

std::string loss_history_csv(std::span<const double> history) {
  std::ostringstream out;
  out.precision(17);
  out << "step,loss\n";
  for (std::size_t i = 0; i < history.size(); ++i) out << i << ',' << history[i] << '\n';
  return out.str();
}

template <class T>
PscSet extract_centers(const RadarConfig& config, std::span<const T> coeffs) {
  if (coeffs.size() != config.grid_size()) {
    throw DimensionError("coefficient grid does not match radar config");
  }
  PscSet out;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i] == T{}) continue;
    const auto [x, y] = config.pixel_center(i / config.grid_w, i % config.grid_w);
    out.centers.push_back({cplx(coeffs[i]), x, y});
  }
  return out;
}

namespace {

template <class T>
Estimate estimate_impl(const Dictionary& dict, const Image2D<T>& image, const EstimatorParams& params,
                       const std::optional<HqsParams>& refinement) {
  if (image.height() != dict.height() || image.width() != dict.width()) {
    throw DimensionError("image is " + std::to_string(image.height()) + "x" +
                         std::to_string(image.width()) + " but the dictionary grid is " +
                         std::to_string(dict.height()) + "x" + std::to_string(dict.width()));
  }
  const std::vector<T> r = vectorize(image);
  const std::span<const T> rs(r);
  const auto trace = estimator_forward(dict, rs, params);

  Estimate est;
  for (const auto& st : trace.stages) {
    est.residual_trace.push_back(residual_norm(dict, rs, std::span<const T>(st.o)));
  }
  std::vector<T> o = trace.o();
  std::vector<T> p = trace.p();
  if (refinement) {
    auto refined = hqs_solve_from(dict, rs, std::move(p), *refinement);
    o = std::move(refined.o);
    p = std::move(refined.p);
    est.residual_trace.insert(est.residual_trace.end(), refined.residual_trace.begin(),
                              refined.residual_trace.end());
  }
  for (const auto& v : o) {
    if (!is_finite(v)) throw NumericalError("estimator produced non-finite coefficients");
  }
  est.centers = extract_centers(dict.config(), std::span<const T>(p));
  est.reconstruction = reconstruct_image(dict, devectorize(dict.height(), dict.width(), std::span<const T>(o)));
  const double rnorm = l2_norm(rs);
  est.relative_residual = rnorm > 0.0 ? est.residual_trace.back() / rnorm : 0.0;
  return est;
}

}  // namespace

Estimate estimate_psc(const Dictionary& dict, const RealImage& image, const EstimatorParams& params,
                      const std::optional<HqsParams>& refinement) {
  return estimate_impl(dict, image, params, refinement);
}

Estimate estimate_psc(const Dictionary& dict, const ComplexImage& image,
                      const EstimatorParams& params, const std::optional<HqsParams>& refinement) {
  return estimate_impl(dict, image, params, refinement);
}

PscSet dominant_centers(const PscSet& set, std::size_t n, const RadarConfig& config,
                        std::size_t suppression_px) {
  std::vector<std::size_t> order(set.centers.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(set.centers[a].amplitude) > std::abs(set.centers[b].amplitude);
  });
  PscSet out;
  out.class_label = set.class_label;
  out.azimuth_deg = set.azimuth_deg;
  std::vector<PixelIndex> kept;
  for (std::size_t idx : order) {
    if (out.centers.size() >= n) break;
    const auto& c = set.centers[idx];
    const PixelIndex px = config.nearest_pixel(c.x, c.y);
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const PixelIndex& q) {
      const auto dr = px.row > q.row ? px.row - q.row : q.row - px.row;
      const auto dc = px.col > q.col ? px.col - q.col : q.col - px.col;
      return std::max(dr, dc) <= suppression_px;
    });
    if (suppressed) continue;
    kept.push_back(px);
    out.centers.push_back(c);
  }
  return out;
}

template ForwardTrace<double> estimator_forward(const Dictionary&, std::span<const double>,
                                                const EstimatorParams&);
template ForwardTrace<cplx> estimator_forward(const Dictionary&, std::span<const cplx>,
                                              const EstimatorParams&);
template double loss_psc(const Dictionary&, std::span<const double>, std::span<const double>,
                         std::span<const double>, const EstimatorParams&);
template double loss_psc(const Dictionary&, std::span<const cplx>, std::span<const cplx>,
                         std::span<const cplx>, const EstimatorParams&);
template LossGradient loss_grad(const Dictionary&, std::span<const double>, const EstimatorParams&);
template LossGradient loss_grad(const Dictionary&, std::span<const cplx>, const EstimatorParams&);
template double kink_margin(const ForwardTrace<double>&, const EstimatorParams&);
template double kink_margin(const ForwardTrace<cplx>&, const EstimatorParams&);
template TrainResult train_estimator(const Dictionary&, const std::vector<std::vector<double>>&,
                                     const TrainConfig&, EstimatorParams);
template TrainResult train_estimator(const Dictionary&, const std::vector<std::vector<cplx>>&,
                                     const TrainConfig&, EstimatorParams);
template double mean_loss(const Dictionary&, const std::vector<std::vector<double>>&,
                          const EstimatorParams&);
template double mean_loss(const Dictionary&, const std::vector<std::vector<cplx>>&,
                          const EstimatorParams&);
template PscSet extract_centers(const RadarConfig&, std::span<const double>);
template PscSet extract_centers(const RadarConfig&, std::span<const cplx>);

}  // namespace psckit
