#include "psckit/hqs.hpp"

#include <string>

namespace psckit {

namespace {

void check_rho(double rho) {
  if (!(rho >= 0.0)) throw ParameterError("soft-threshold rho must be non-negative");
}

template <class T>
void check_shapes(const Dictionary& dict, std::span<const T> r, std::span<const T> p) {
  if (r.size() != dict.size() || p.size() != dict.size()) {
    throw DimensionError("HQS operands have lengths " + std::to_string(r.size()) + " and " +
                         std::to_string(p.size()) + ", dictionary grid has " +
                         std::to_string(dict.size()));
  }
}

inline double shrink(double x, double rho) noexcept {
  const double a = std::abs(x);
  if (a <= rho) return 0.0;
  return x > 0.0 ? a - rho : rho - a;
}

inline cplx shrink(cplx x, double rho) noexcept {
  const double a = std::abs(x);
  if (a <= rho) return cplx{};
  return x * ((a - rho) / a);
}

template <class T>
std::vector<T> shrink_all(std::span<const T> x, double rho) {
  check_rho(rho);
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = shrink(x[i], rho);
  return out;
}

}  // namespace

double soft_threshold(double x, double rho) {
  check_rho(rho);
  return shrink(x, rho);
}

cplx soft_threshold(cplx x, double rho) {
  check_rho(rho);
  return shrink(x, rho);
}

std::vector<double> soft_threshold(std::span<const double> x, double rho) {
  return shrink_all(x, rho);
}

std::vector<cplx> soft_threshold(std::span<const cplx> x, double rho) { return shrink_all(x, rho); }

const char* to_string(UpdateRule rule) noexcept {
  return rule == UpdateRule::Proximal ? "proximal" : "printed";
}

UpdateRule update_rule_from_string(const std::string& name) {
  if (name == "printed") return UpdateRule::AsPrinted;
  if (name == "proximal") return UpdateRule::Proximal;
  throw ConfigError("unknown update rule \"" + name + "\" (expected printed or proximal)");
}

void HqsParams::validate() const {
  if (!(std::isfinite(t) && t > 0.0)) throw ParameterError("HQS t must be positive");
  if (!(std::isfinite(rho) && rho >= 0.0)) throw ParameterError("HQS rho must be non-negative");
  if (!(std::isfinite(mu) && mu > 0.0)) throw ParameterError("HQS mu must be positive");
  if (iterations < 1) throw ParameterError("HQS iterations must be at least 1");
}

namespace detail {

template <class T>
StageState<T> run_stage(const Dictionary& dict, std::span<const T> r, std::span<const T> p_prev,
                        double t, double rho, double mu, UpdateRule rule) {
  check_shapes(dict, r, p_prev);
  check_rho(rho);
  const std::size_t n = r.size();
  StageState<T> s;

  const std::vector<T> psi_p = dict.apply(p_prev);
  std::vector<T> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = r[i] - psi_p[i];
  s.g = dict.pinv_apply(std::span<const T>(u));
  s.o.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.o[i] = p_prev[i] + mu * s.g[i];

  if (rule == UpdateRule::AsPrinted) {
    std::vector<T> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = psi_p[i] - s.o[i];
    s.w = dict.adjoint(std::span<const T>(v));
    s.z.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.z[i] = p_prev[i] + t * s.w[i];
  } else {
    s.z = s.o;
  }
  s.p.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.p[i] = shrink(s.z[i], rho);
  return s;
}

template StageState<double> run_stage(const Dictionary&, std::span<const double>,
                                      std::span<const double>, double, double, double, UpdateRule);
template StageState<cplx> run_stage(const Dictionary&, std::span<const cplx>, std::span<const cplx>,
                                    double, double, double, UpdateRule);

}  // namespace detail

template <class T>
HqsIterate<T> hqs_step(const Dictionary& dict, std::span<const T> r, std::span<const T> p_prev,
                       const HqsParams& params) {
  params.validate();
  auto s = detail::run_stage(dict, r, p_prev, params.t, params.rho, params.mu, params.rule);
  return {std::move(s.o), std::move(s.p)};
}

template <class T>
HqsResult<T> hqs_solve_from(const Dictionary& dict, std::span<const T> r, std::vector<T> p0,
                            const HqsParams& params) {
  params.validate();
  check_shapes(dict, r, std::span<const T>(p0));
  HqsResult<T> result;
  result.p = std::move(p0);
  result.residual_trace.reserve(static_cast<std::size_t>(params.iterations));
  for (int k = 0; k < params.iterations; ++k) {
    auto s = detail::run_stage(dict, r, std::span<const T>(result.p), params.t, params.rho,
                               params.mu, params.rule);
    result.o = std::move(s.o);
    result.p = std::move(s.p);
    result.residual_trace.push_back(residual_norm(dict, r, std::span<const T>(result.o)));
  }
  return result;
}

template <class T>
HqsResult<T> hqs_solve(const Dictionary& dict, std::span<const T> r, const HqsParams& params) {
  return hqs_solve_from(dict, r, std::vector<T>(dict.size(), T{}), params);
}

template <class T>
double l2_norm(std::span<const T> v) {
  double acc = 0.0;
  for (const T& x : v) acc += std::norm(x);
  return std::sqrt(acc);
}

template <class T>
double residual_norm(const Dictionary& dict, std::span<const T> r, std::span<const T> o) {
  const auto y = dict.apply(o);
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += std::norm(r[i] - y[i]);
  return std::sqrt(acc);
}

template HqsIterate<double> hqs_step(const Dictionary&, std::span<const double>,
                                     std::span<const double>, const HqsParams&);
template HqsIterate<cplx> hqs_step(const Dictionary&, std::span<const cplx>, std::span<const cplx>,
                                   const HqsParams&);
template HqsResult<double> hqs_solve(const Dictionary&, std::span<const double>, const HqsParams&);
template HqsResult<cplx> hqs_solve(const Dictionary&, std::span<const cplx>, const HqsParams&);
template HqsResult<double> hqs_solve_from(const Dictionary&, std::span<const double>,
                                          std::vector<double>, const HqsParams&);
template HqsResult<cplx> hqs_solve_from(const Dictionary&, std::span<const cplx>, std::vector<cplx>,
                                        const HqsParams&);
template double l2_norm(std::span<const double>);
template double l2_norm(std::span<const cplx>);
template double residual_norm(const Dictionary&, std::span<const double>, std::span<const double>);
template double residual_norm(const Dictionary&, std::span<const cplx>, std::span<const cplx>);

}  // namespace psckit
