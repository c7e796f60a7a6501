#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "psckit/forward_model.hpp"
#include "psckit/hqs.hpp"
#include "psckit/io.hpp"
#include "psckit/types.hpp"

namespace psckit {

// Learnable (t, rho, mu) of one unrolled stage.
struct StageParams {
  double t = 0.001;
  double rho = 0.005;
  double mu = 0.001;

  void project() noexcept;
  friend bool operator==(const StageParams&, const StageParams&) = default;
};

inline constexpr double kMinStep = 1e-8;

struct EstimatorParams {
  std::vector<StageParams> stages = std::vector<StageParams>(2);
  double lambda1 = 100.0;
  double lambda2 = 200.0;
  UpdateRule rule = UpdateRule::AsPrinted;

  void validate() const;
  void project() noexcept;
  std::size_t num_parameters() const noexcept { return 3 * stages.size(); }
  friend bool operator==(const EstimatorParams&, const EstimatorParams&) = default;
};

// K identical stages built from fixed HQS parameters.
EstimatorParams from_hqs(const HqsParams& params, double lambda1 = 100.0, double lambda2 = 200.0);

json to_json(const EstimatorParams& params);
EstimatorParams estimator_params_from_json(const json& j, const std::string& path = "params");

template <class T>
struct ForwardTrace {
  std::vector<detail::StageState<T>> stages;

  const std::vector<T>& o() const { return stages.back().o; }
  const std::vector<T>& p() const { return stages.back().p; }
};

template <class T>
ForwardTrace<T> estimator_forward(const Dictionary& dict, std::span<const T> r,
                                  const EstimatorParams& params);

// ||r - Psi o||^2 + lambda1 ||o - p||^2 + lambda2 ||p||_1
template <class T>
double loss_psc(const Dictionary& dict, std::span<const T> r, std::span<const T> o,
                std::span<const T> p, const EstimatorParams& params);

struct LossGradient {
  double loss = 0.0;
  std::vector<StageParams> grad;  // d loss / d (t, rho, mu) per stage
};

// Reverse-mode gradient of loss_psc(estimator_forward(r)) w.r.t. every stage
// parameter. Soft-threshold subgradient is 0 at the kink |x| = rho.
template <class T>
LossGradient loss_grad(const Dictionary& dict, std::span<const T> r, const EstimatorParams& params);

// Smallest | |z| - rho | over every stage's pre-threshold arguments.
template <class T>
double kink_margin(const ForwardTrace<T>& trace, const EstimatorParams& params);

struct TrainConfig {
  double learning_rate = 0.002;
  double weight_decay = 0.005;
  std::size_t steps = 200;
  std::size_t batch_size = 8;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
};

json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const json& j, const std::string& path = "train");

struct TrainResult {
  EstimatorParams params;
  std::vector<double> loss_history;  // minibatch mean loss before each step
};

// AdamW with decoupled weight decay over minibatches drawn with replacement.
template <class T>
TrainResult train_estimator(const Dictionary& dict, const std::vector<std::vector<T>>& dataset,
                            const TrainConfig& config, EstimatorParams init);

template <class T>
double mean_loss(const Dictionary& dict, const std::vector<std::vector<T>>& dataset,
                 const EstimatorParams& params);

std::string loss_history_csv(std::span<const double> history);

struct Estimate {
  PscSet centers;
  RealImage reconstruction;
  std::vector<double> residual_trace;  // per stage, then per refinement iteration
  double relative_residual = 0.0;
};

// Runs the unrolled estimator (optionally followed by classical iterations
// warm-started from p^(K)) and extracts every nonzero coefficient of the
// final p as a scattering center placed at its pixel center.
Estimate estimate_psc(const Dictionary& dict, const RealImage& image, const EstimatorParams& params,
                      const std::optional<HqsParams>& refinement = std::nullopt);
Estimate estimate_psc(const Dictionary& dict, const ComplexImage& image,
                      const EstimatorParams& params,
                      const std::optional<HqsParams>& refinement = std::nullopt);

template <class T>
PscSet extract_centers(const RadarConfig& config, std::span<const T> coeffs);

// The n strongest centers, greedily skipping any center within
// `suppression_px` pixels (Chebyshev) of one already kept.
PscSet dominant_centers(const PscSet& set, std::size_t n, const RadarConfig& config,
                        std::size_t suppression_px = 2);

}  // namespace psckit
