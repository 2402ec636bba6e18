#pragma once

#include <string>

#include "mep/common.hpp"
#include "mep/rng.hpp"

namespace mep::variational {

// Clamp range for log_std; keeps the optimizer away from degenerate scales.
constexpr double kLogStdMin = -20.0;
constexpr double kLogStdMax = 20.0;

// One diagonal-Gaussian base learner.
struct GaussianComponent {
  Vec mean;
  Vec log_std;

  std::size_t dim() const { return mean.size(); }
};

double component_log_pdf(const GaussianComponent& c, const Vec& theta);

// Closed form: d/2 (1 + ln 2pi) + sum log_std.
double component_entropy(const GaussianComponent& c);

// theta = mean + exp(log_std) * noise, noise a caller-supplied N(0, I) draw.
Vec reparam_sample(const GaussianComponent& c, const Vec& noise);

// Gradient of component_log_pdf w.r.t. theta.
Vec component_grad_log_pdf(const GaussianComponent& c, const Vec& theta);

// Finite mixture on the probability simplex.
struct MixtureApprox {
  std::vector<GaussianComponent> components;
  Vec weights;

  std::size_t size() const { return components.size(); }
  std::size_t dim() const { return components.empty() ? 0 : components.front().dim(); }
  void validate() const;
};

double mixture_log_pdf(const MixtureApprox& q, const Vec& theta);
Vec mixture_grad_log_pdf(const MixtureApprox& q, const Vec& theta);
std::vector<Vec> mixture_sample(const MixtureApprox& q, Rng& rng, std::size_t n);

// q_{t+1} = (1 - alpha) q_t + alpha h. Weights renormalized after the update.
MixtureApprox mixture_extend(const MixtureApprox& q, const GaussianComponent& h, double alpha);

// JSON round-trip: {dim, weights:[...], components:[{mean:[...], log_std:[...]}]}
std::string mixture_to_json(const MixtureApprox& q);
MixtureApprox mixture_from_json(const std::string& text);

}  // namespace mep::variational
