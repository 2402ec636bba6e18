#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "mep/common.hpp"
#include "mep/rng.hpp"
#include "mep/targets.hpp"
#include "mep/variational.hpp"

namespace mep::pursuit {

using targets::TargetModel;
using variational::GaussianComponent;
using variational::MixtureApprox;

enum class AlphaMethod { closed_form, projected_sgd };

struct PursuitConfig {
  std::size_t max_components = 4;
  std::size_t steps_per_component = 1500;
  std::size_t mc_batch = 128;
  double learn_rate = 0.02;
  double adapt_beta1 = 0.9;
  double adapt_beta2 = 0.999;
  double adapt_eps = 1e-8;
  Vec lambda_schedule = {1.0};  // recycled when shorter than max_components
  AlphaMethod alpha_method = AlphaMethod::closed_form;
  double alpha_clip = 1e-3;
  std::size_t alpha_sgd_steps = 200;
  double alpha_learn_rate = 0.1;
  std::size_t elbo_eval_samples = 20000;
  double stop_tol = 1e-3;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PursuitStep {
  std::size_t component_index = 0;
  double lambda_used = 0.0;
  double alpha = 1.0;
  double elbo_before = 0.0;
  double elbo_after = 0.0;
  bool accepted = false;
  double wall_ms = 0.0;
};

struct PursuitTrace {
  std::vector<PursuitStep> steps;
  MixtureApprox mixture;
};

// Noise batch as a flat matrix: batch of standard-normal d-vectors.
using NoiseBatch = std::vector<Vec>;

// H[h] + lambda * mean[log L(theta) - log q_t(theta)] over reparameterized
// theta. Without q_t the -log q_t term is dropped (first component: plain
// entropy-plus-data objective, i.e. the ELBO at lambda = 1).
double maxent_objective(const GaussianComponent& h, const TargetModel& target,
                        const MixtureApprox* q_t, double lambda, const NoiseBatch& noise_batch);

struct MaxentGradient {
  Vec grad_mean;
  Vec grad_log_std;
};

// Pathwise gradients of maxent_objective under the same noise batch.
MaxentGradient maxent_gradient(const GaussianComponent& h, const TargetModel& target,
                               const MixtureApprox* q_t, double lambda,
                               const NoiseBatch& noise_batch);

// Adaptive-moment stochastic ascent on the maxent objective; returns the
// iterate with the best smoothed objective.
GaussianComponent fit_component(const TargetModel& target, const MixtureApprox* q_t, double lambda,
                                const PursuitConfig& config, Rng& rng);

// lambda * (log L(theta) - log q_t(theta)): unnormalized log of the tempered
// residual h* = (1/Z) [L/q_t]^lambda.
double residual_log_density(const TargetModel& target, const MixtureApprox& q_t, double lambda,
                            const Vec& theta);

// Estimator failed (denominator <= 0, non-finite, or h identical to q_t);
// caller falls back to alpha_sgd.
class AlphaDegenerateError : public std::runtime_error {
 public:
  explicit AlphaDegenerateError(const std::string& what) : std::runtime_error(what) {}
};

// Closed-form alpha* = -A/B by importance sampling with proposal
// rho = 0.5 q_t + 0.5 h, clipped into [alpha_clip, 1 - alpha_clip].
double alpha_closed_form(const TargetModel& target, const MixtureApprox& q_t,
                         const GaussianComponent& h, std::size_t n_samples, Rng& rng,
                         double alpha_clip = 1e-3);

// Projected SGD on KL((1-alpha) q_t + alpha h || p) over alpha.
double alpha_sgd(const TargetModel& target, const MixtureApprox& q_t, const GaussianComponent& h,
                 const PursuitConfig& config, Rng& rng);

// The greedy loop: fit component, fit weight, extend, accept/reject on ELBO
// gain.
PursuitTrace run_pursuit(const TargetModel& target, const PursuitConfig& config, Rng& rng);

std::string trace_to_csv(const PursuitTrace& trace);

}  // namespace mep::pursuit
