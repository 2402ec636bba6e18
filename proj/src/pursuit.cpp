#include "mep/pursuit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "mep/diagnostics.hpp"

namespace mep::pursuit {

void PursuitConfig::validate() const {
  if (max_components < 1 || steps_per_component < 1 || mc_batch < 1 || alpha_sgd_steps < 1 ||
      elbo_eval_samples < 1)
    throw ConfigError("PursuitConfig: counts must be >= 1");
  if (learn_rate <= 0.0 || alpha_learn_rate <= 0.0)
    throw ConfigError("PursuitConfig: learning rates must be positive");
  if (lambda_schedule.empty()) throw ConfigError("PursuitConfig: lambda_schedule must be nonempty");
  for (double l : lambda_schedule)
    if (l <= 0.0) throw ConfigError("PursuitConfig: lambda values must be positive");
  if (!(alpha_clip > 0.0 && alpha_clip < 0.5))
    throw ConfigError("PursuitConfig: alpha_clip must lie in (0, 0.5)");
  if (adapt_beta1 <= 0.0 || adapt_beta1 >= 1.0 || adapt_beta2 <= 0.0 || adapt_beta2 >= 1.0 ||
      adapt_eps <= 0.0)
    throw ConfigError("PursuitConfig: invalid adaptive-moment constants");
}

namespace {

struct BatchEval {
  double objective;
  Vec grad_mean;
  Vec grad_log_std;
};

// One pass over the noise batch producing the objective and its pathwise
// gradients; log L and its gradient are evaluated once per sample.
BatchEval eval_batch(const GaussianComponent& h, const TargetModel& target,
                     const MixtureApprox* q_t, double lambda, const NoiseBatch& noise_batch) {
  const std::size_t d = h.dim();
  const double inv = 1.0 / static_cast<double>(noise_batch.size());
  double data_sum = 0.0;
  Vec gm(d, 0.0), gs(d, 0.0);
  for (const auto& noise : noise_batch) {
    const Vec theta = variational::reparam_sample(h, noise);
    double val = target.log_density(theta);
    Vec g = target.grad_log_density(theta);
    if (q_t) {
      val -= variational::mixture_log_pdf(*q_t, theta);
      const Vec gq = variational::mixture_grad_log_pdf(*q_t, theta);
      for (std::size_t i = 0; i < d; ++i) g[i] -= gq[i];
    }
    data_sum += val;
    for (std::size_t i = 0; i < d; ++i) {
      gm[i] += g[i];
      gs[i] += g[i] * std::exp(h.log_std[i]) * noise[i];
    }
  }
  BatchEval out;
  out.objective = variational::component_entropy(h) + lambda * data_sum * inv;
  out.grad_mean.resize(d);
  out.grad_log_std.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    out.grad_mean[i] = lambda * gm[i] * inv;
    out.grad_log_std[i] = 1.0 + lambda * gs[i] * inv;
  }
  return out;
}

NoiseBatch draw_noise(Rng& rng, std::size_t batch, std::size_t d) {
  NoiseBatch out(batch);
  for (auto& n : out) n = rng.normal_vec(d);
  return out;
}

double clip(double x, double lo, double hi) { return std::min(hi, std::max(lo, x)); }

double log_mix_alpha(const MixtureApprox& q_t, const GaussianComponent& h, double alpha,
                     const Vec& theta) {
  const double a = std::log(alpha) + variational::component_log_pdf(h, theta);
  const double b = std::log1p(-alpha) + variational::mixture_log_pdf(q_t, theta);
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

double maxent_objective(const GaussianComponent& h, const TargetModel& target,
                        const MixtureApprox* q_t, double lambda, const NoiseBatch& noise_batch) {
  if (lambda <= 0.0) throw std::invalid_argument("maxent_objective: lambda must be positive");
  if (noise_batch.empty()) throw std::invalid_argument("maxent_objective: empty noise batch");
  return eval_batch(h, target, q_t, lambda, noise_batch).objective;
}

MaxentGradient maxent_gradient(const GaussianComponent& h, const TargetModel& target,
                               const MixtureApprox* q_t, double lambda,
                               const NoiseBatch& noise_batch) {
  if (lambda <= 0.0) throw std::invalid_argument("maxent_gradient: lambda must be positive");
  if (noise_batch.empty()) throw std::invalid_argument("maxent_gradient: empty noise batch");
  auto e = eval_batch(h, target, q_t, lambda, noise_batch);
  return {std::move(e.grad_mean), std::move(e.grad_log_std)};
}

double residual_log_density(const TargetModel& target, const MixtureApprox& q_t, double lambda,
                            const Vec& theta) {
  if (lambda <= 0.0) throw std::invalid_argument("residual_log_density: lambda must be positive");
  return lambda * (target.log_density(theta) - variational::mixture_log_pdf(q_t, theta));
}

GaussianComponent fit_component(const TargetModel& target, const MixtureApprox* q_t, double lambda,
                                const PursuitConfig& config, Rng& rng) {
  config.validate();
  const std::size_t d = static_cast<std::size_t>(target.dim);

  GaussianComponent h;
  h.log_std.assign(d, 0.0);
  if (!q_t) {
    h.mean.assign(d, 0.0);
  } else {
    // Residual-seeking start: best of 64 draws from q_t scored by
    // log L - log q_t.
    auto cands = variational::mixture_sample(*q_t, rng, 64);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& theta : cands) {
      const double score =
          target.log_density(theta) - variational::mixture_log_pdf(*q_t, theta);
      if (score > best) {
        best = score;
        h.mean = theta;
      }
    }
  }

  {
    auto probe = draw_noise(rng, std::min<std::size_t>(config.mc_batch, 16), d);
    if (!std::isfinite(eval_batch(h, target, q_t, lambda, probe).objective))
      throw std::runtime_error("fit_component: non-finite objective at initialization");
  }

  Vec m1_mean(d, 0.0), m2_mean(d, 0.0), m1_ls(d, 0.0), m2_ls(d, 0.0);
  GaussianComponent best_h = h;
  double smoothed = 0.0, best_smoothed = -std::numeric_limits<double>::infinity();
  constexpr double kEma = 0.95;

  // Tail (Polyak) average over the final quarter of the trajectory; the
  // averaged iterate cancels the stationary optimizer noise.
  const std::size_t tail_start = config.steps_per_component - config.steps_per_component / 4;
  GaussianComponent tail_h;
  tail_h.mean.assign(d, 0.0);
  tail_h.log_std.assign(d, 0.0);
  std::size_t tail_n = 0;

  for (std::size_t step = 0; step < config.steps_per_component; ++step) {
    auto noise = draw_noise(rng, config.mc_batch, d);
    auto e = eval_batch(h, target, q_t, lambda, noise);

    // Linear decay to 10% of the initial rate.
    const double lr = config.learn_rate *
                      (1.0 - 0.9 * static_cast<double>(step) /
                                 static_cast<double>(config.steps_per_component));
    const double bc1 = 1.0 - std::pow(config.adapt_beta1, static_cast<double>(step + 1));
    const double bc2 = 1.0 - std::pow(config.adapt_beta2, static_cast<double>(step + 1));
    for (std::size_t i = 0; i < d; ++i) {
      m1_mean[i] = config.adapt_beta1 * m1_mean[i] + (1.0 - config.adapt_beta1) * e.grad_mean[i];
      m2_mean[i] = config.adapt_beta2 * m2_mean[i] +
                   (1.0 - config.adapt_beta2) * e.grad_mean[i] * e.grad_mean[i];
      h.mean[i] += lr * (m1_mean[i] / bc1) / (std::sqrt(m2_mean[i] / bc2) + config.adapt_eps);

      m1_ls[i] = config.adapt_beta1 * m1_ls[i] + (1.0 - config.adapt_beta1) * e.grad_log_std[i];
      m2_ls[i] = config.adapt_beta2 * m2_ls[i] +
                 (1.0 - config.adapt_beta2) * e.grad_log_std[i] * e.grad_log_std[i];
      h.log_std[i] += lr * (m1_ls[i] / bc1) / (std::sqrt(m2_ls[i] / bc2) + config.adapt_eps);
      h.log_std[i] = clip(h.log_std[i], variational::kLogStdMin, variational::kLogStdMax);
    }

    smoothed = (step == 0) ? e.objective : kEma * smoothed + (1.0 - kEma) * e.objective;
    if (smoothed > best_smoothed) {
      best_smoothed = smoothed;
      best_h = h;
    }
    if (step >= tail_start) {
      for (std::size_t i = 0; i < d; ++i) {
        tail_h.mean[i] += h.mean[i];
        tail_h.log_std[i] += h.log_std[i];
      }
      ++tail_n;
    }
  }
  if (tail_n == 0) return best_h;
  for (std::size_t i = 0; i < d; ++i) {
    tail_h.mean[i] /= static_cast<double>(tail_n);
    tail_h.log_std[i] /= static_cast<double>(tail_n);
  }
  // Keep whichever of the averaged and smoothed-best iterates scores higher
  // on one fresh larger batch.
  auto probe = draw_noise(rng, 4 * config.mc_batch, d);
  const double obj_tail = eval_batch(tail_h, target, q_t, lambda, probe).objective;
  const double obj_best = eval_batch(best_h, target, q_t, lambda, probe).objective;
  return obj_tail >= obj_best ? tail_h : best_h;
}

double alpha_closed_form(const TargetModel& target, const MixtureApprox& q_t,
                         const GaussianComponent& h, std::size_t n_samples, Rng& rng,
                         double alpha_clip) {
  if (n_samples < 2) throw std::invalid_argument("alpha_closed_form: n_samples must be >= 2");
  check_dim(q_t.dim(), h.dim(), "alpha_closed_form");

  // Proposal rho = 0.5 q_t + 0.5 h covers both supports.
  MixtureApprox rho = variational::mixture_extend(q_t, h, 0.5);
  auto samples = variational::mixture_sample(rho, rng, n_samples);

  double sum_a = 0.0, sum_b = 0.0;
  std::size_t nonzero = 0;
  for (const auto& theta : samples) {
    const double lq = variational::mixture_log_pdf(q_t, theta);
    const double lh = variational::component_log_pdf(h, theta);
    const double lrho = variational::mixture_log_pdf(rho, theta);
    const double ll = target.log_density(theta);
    const double gap = std::abs(lh - lq);
    if (gap == 0.0) continue;
    // log |h - q_t| with max-subtraction
    const double ldiff = std::max(lh, lq) + std::log1p(-std::exp(-gap));
    const double sgn = (lh > lq) ? 1.0 : -1.0;
    sum_a += sgn * std::exp(lq + ldiff - ll - lrho);
    sum_b += std::exp(2.0 * ldiff - ll - lrho);
    ++nonzero;
  }
  if (nonzero == 0) throw AlphaDegenerateError("alpha_closed_form: h identical to q_t");
  const double inv = 1.0 / static_cast<double>(n_samples);
  const double a_hat = sum_a * inv, b_hat = sum_b * inv;
  if (!(b_hat > 0.0) || !std::isfinite(b_hat) || !std::isfinite(a_hat))
    throw AlphaDegenerateError("alpha_closed_form: degenerate denominator estimate");
  return clip(-a_hat / b_hat, alpha_clip, 1.0 - alpha_clip);
}

double alpha_sgd(const TargetModel& target, const MixtureApprox& q_t, const GaussianComponent& h,
                 const PursuitConfig& config, Rng& rng) {
  check_dim(q_t.dim(), h.dim(), "alpha_sgd");
  const std::size_t d = h.dim();
  double alpha = 0.5;
  for (std::size_t step = 0; step < config.alpha_sgd_steps; ++step) {
    double acc_h = 0.0, acc_q = 0.0;
    for (std::size_t s = 0; s < config.mc_batch; ++s) {
      const Vec th = variational::reparam_sample(h, rng.normal_vec(d));
      acc_h += log_mix_alpha(q_t, h, alpha, th) - target.log_density(th);
    }
    auto qs = variational::mixture_sample(q_t, rng, config.mc_batch);
    for (const auto& tq : qs) acc_q += log_mix_alpha(q_t, h, alpha, tq) - target.log_density(tq);
    const double grad = (acc_h - acc_q) / static_cast<double>(config.mc_batch);
    if (!std::isfinite(grad))
      throw std::runtime_error("alpha_sgd: non-finite gradient at step " + std::to_string(step));
    alpha = clip(alpha - config.alpha_learn_rate * grad, config.alpha_clip,
                 1.0 - config.alpha_clip);
  }
  return alpha;
}

PursuitTrace run_pursuit(const TargetModel& target, const PursuitConfig& config, Rng& rng) {
  config.validate();
  using clock = std::chrono::steady_clock;
  PursuitTrace trace;

  auto eval_elbo = [&](const MixtureApprox& q, std::uint64_t id) {
    Rng er = rng.derive(0xe1b0ull + id);
    return diagnostics::elbo_estimate(q, target, config.elbo_eval_samples, er);
  };

  // First component: plain entropy-plus-data fit, weight 1.
  auto t0 = clock::now();
  const double lambda0 = config.lambda_schedule[0];
  GaussianComponent h0 = fit_component(target, nullptr, lambda0, config, rng);
  MixtureApprox q{{h0}, {1.0}};
  auto e0 = eval_elbo(q, 0);
  trace.steps.push_back({0, lambda0, 1.0, std::numeric_limits<double>::quiet_NaN(), e0.value, true,
                         std::chrono::duration<double, std::milli>(clock::now() - t0).count()});

  for (std::size_t t = 1; t < config.max_components; ++t) {
    auto tstart = clock::now();
    const double lambda = config.lambda_schedule[t % config.lambda_schedule.size()];
    GaussianComponent h = fit_component(target, &q, lambda, config, rng);

    double alpha;
    if (config.alpha_method == AlphaMethod::closed_form) {
      try {
        Rng ar = rng.derive(0xa1f4ull + t);
        alpha = alpha_closed_form(target, q, h, config.elbo_eval_samples, ar, config.alpha_clip);
      } catch (const AlphaDegenerateError&) {
        alpha = alpha_sgd(target, q, h, config, rng);
      }
    } else {
      alpha = alpha_sgd(target, q, h, config, rng);
    }

    MixtureApprox candidate = variational::mixture_extend(q, h, alpha);
    // Common-seeded draws for before/after so the gain estimate shares noise.
    auto before = eval_elbo(q, t);
    auto after = eval_elbo(candidate, t);
    const bool accepted = (after.value - before.value) > config.stop_tol;

    trace.steps.push_back({t, lambda, alpha, before.value, after.value, accepted,
                           std::chrono::duration<double, std::milli>(clock::now() - tstart)
                               .count()});
    if (!accepted) break;
    q = std::move(candidate);
  }

  trace.mixture = std::move(q);
  return trace;
}

std::string trace_to_csv(const PursuitTrace& trace) {
  std::string out = "step,lambda,alpha,elbo_before,elbo_after,accepted,wall_ms\n";
  char buf[256];
  for (const auto& s : trace.steps) {
    // wall_ms is written as 0 so reruns with identical config and seed stay
    // byte-identical; measured timings live on the in-memory trace.
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%d,0\n", s.component_index,
                  s.lambda_used, s.alpha, s.elbo_before, s.elbo_after, s.accepted ? 1 : 0);
    out += buf;
  }
  return out;
}

}  // namespace mep::pursuit
