#pragma once

#include <span>
#include <string>
#include <vector>

#include "psckit/forward_model.hpp"
#include "psckit/types.hpp"

namespace psckit {

// S_rho(x) = sign(x) max(|x| - rho, 0); complex: x max(|x| - rho, 0) / |x|.
double soft_threshold(double x, double rho);
cplx soft_threshold(cplx x, double rho);
std::vector<double> soft_threshold(std::span<const double> x, double rho);
std::vector<cplx> soft_threshold(std::span<const cplx> x, double rho);

// Selects the p-update.
//   AsPrinted: p = S_rho(p_prev + t Psi^H (Psi p_prev - o))
//   Proximal:  p = S_rho(o), the textbook l1 proximal step (t unused).
enum class UpdateRule { AsPrinted, Proximal };

const char* to_string(UpdateRule rule) noexcept;
UpdateRule update_rule_from_string(const std::string& name);

struct HqsParams {
  double t = 0.001;
  double rho = 0.005;
  double mu = 0.001;
  int iterations = 50;
  UpdateRule rule = UpdateRule::AsPrinted;

  void validate() const;
};

template <class T>
struct HqsIterate {
  std::vector<T> o;
  std::vector<T> p;
};

template <class T>
struct HqsResult {
  std::vector<T> o;
  std::vector<T> p;
  std::vector<double> residual_trace;  // ||r - Psi o^(k)||_2, k = 1..K
};

// One iteration of the closed-form o/p updates:
//   o = p_prev + mu Psi^H (Psi Psi^H)^{-1} (r - Psi p_prev)
//   p = rule-dependent thresholded update
template <class T>
HqsIterate<T> hqs_step(const Dictionary& dict, std::span<const T> r, std::span<const T> p_prev,
                       const HqsParams& params);

// K iterations from p^(0) = 0.
template <class T>
HqsResult<T> hqs_solve(const Dictionary& dict, std::span<const T> r, const HqsParams& params);

// Continues iterating from a given p instead of zero.
template <class T>
HqsResult<T> hqs_solve_from(const Dictionary& dict, std::span<const T> r, std::vector<T> p0,
                            const HqsParams& params);

namespace detail {

// Every intermediate of one stage; the unrolled estimator keeps these for
// reverse-mode differentiation.
template <class T>
struct StageState {
  std::vector<T> g;  // Psi^H (Psi Psi^H)^{-1} (r - Psi p_prev)
  std::vector<T> o;  // p_prev + mu g
  std::vector<T> w;  // Psi^H (Psi p_prev - o); empty for the proximal rule
  std::vector<T> z;  // pre-threshold argument
  std::vector<T> p;  // S_rho(z)
};

template <class T>
StageState<T> run_stage(const Dictionary& dict, std::span<const T> r, std::span<const T> p_prev,
                        double t, double rho, double mu, UpdateRule rule);

}  // namespace detail

template <class T>
double l2_norm(std::span<const T> v);

template <class T>
double residual_norm(const Dictionary& dict, std::span<const T> r, std::span<const T> o);

}  // namespace psckit
