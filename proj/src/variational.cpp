#include "mep/variational.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace mep::variational {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454836;
}

double component_log_pdf(const GaussianComponent& c, const Vec& theta) {
  check_dim(c.dim(), theta.size(), "component_log_pdf");
  double acc = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double z = (theta[i] - c.mean[i]) * std::exp(-c.log_std[i]);
    acc += -0.5 * z * z - c.log_std[i];
  }
  return acc - 0.5 * static_cast<double>(theta.size()) * kLogTwoPi;
}

double component_entropy(const GaussianComponent& c) {
  double s = 0.0;
  for (double ls : c.log_std) s += ls;
  return 0.5 * static_cast<double>(c.dim()) * (1.0 + kLogTwoPi) + s;
}

Vec reparam_sample(const GaussianComponent& c, const Vec& noise) {
  check_dim(c.dim(), noise.size(), "reparam_sample");
  Vec theta(noise.size());
  for (std::size_t i = 0; i < noise.size(); ++i)
    theta[i] = c.mean[i] + std::exp(c.log_std[i]) * noise[i];
  return theta;
}

Vec component_grad_log_pdf(const GaussianComponent& c, const Vec& theta) {
  check_dim(c.dim(), theta.size(), "component_grad_log_pdf");
  Vec g(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i)
    g[i] = (c.mean[i] - theta[i]) * std::exp(-2.0 * c.log_std[i]);
  return g;
}

void MixtureApprox::validate() const {
  if (components.empty()) throw std::invalid_argument("MixtureApprox: empty mixture");
  if (weights.size() != components.size())
    throw std::invalid_argument("MixtureApprox: weight/component count mismatch");
  const std::size_t d = components.front().dim();
  double wsum = 0.0;
  for (std::size_t j = 0; j < components.size(); ++j) {
    if (components[j].dim() != d || components[j].log_std.size() != d)
      throw std::invalid_argument("MixtureApprox: component dimension mismatch");
    if (weights[j] < 0.0) throw std::invalid_argument("MixtureApprox: negative weight");
    wsum += weights[j];
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw std::invalid_argument("MixtureApprox: weights must sum to 1");
}

double mixture_log_pdf(const MixtureApprox& q, const Vec& theta) {
  check_dim(q.dim(), theta.size(), "mixture_log_pdf");
  double m = -std::numeric_limits<double>::infinity();
  Vec lj(q.size());
  for (std::size_t j = 0; j < q.size(); ++j) {
    lj[j] = (q.weights[j] > 0.0 ? std::log(q.weights[j]) + component_log_pdf(q.components[j], theta)
                                : -std::numeric_limits<double>::infinity());
    m = std::max(m, lj[j]);
  }
  double s = 0.0;
  for (double l : lj) s += std::exp(l - m);
  return m + std::log(s);
}

Vec mixture_grad_log_pdf(const MixtureApprox& q, const Vec& theta) {
  check_dim(q.dim(), theta.size(), "mixture_grad_log_pdf");
  const double lq = mixture_log_pdf(q, theta);
  Vec g(theta.size(), 0.0);
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (q.weights[j] <= 0.0) continue;
    const double r =
        std::exp(std::log(q.weights[j]) + component_log_pdf(q.components[j], theta) - lq);
    Vec gj = component_grad_log_pdf(q.components[j], theta);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += r * gj[i];
  }
  return g;
}

std::vector<Vec> mixture_sample(const MixtureApprox& q, Rng& rng, std::size_t n) {
  if (n == 0) throw std::invalid_argument("mixture_sample: n must be >= 1");
  std::vector<Vec> out;
  out.reserve(n);
  const std::size_t d = q.dim();
  for (std::size_t s = 0; s < n; ++s) {
    // Inverse-CDF draw over the component weights.
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t j = q.size() - 1;
    for (std::size_t c = 0; c < q.size(); ++c) {
      acc += q.weights[c];
      if (u < acc) {
        j = c;
        break;
      }
    }
    out.push_back(reparam_sample(q.components[j], rng.normal_vec(d)));
  }
  return out;
}

MixtureApprox mixture_extend(const MixtureApprox& q, const GaussianComponent& h, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("mixture_extend: alpha must lie in (0, 1)");
  check_dim(q.dim(), h.dim(), "mixture_extend");
  MixtureApprox out = q;
  for (double& w : out.weights) w *= 1.0 - alpha;
  out.components.push_back(h);
  out.weights.push_back(alpha);
  double wsum = 0.0;
  for (double w : out.weights) wsum += w;
  for (double& w : out.weights) w /= wsum;
  return out;
}

std::string mixture_to_json(const MixtureApprox& q) {
  nlohmann::json j;
  j["dim"] = q.dim();
  j["weights"] = q.weights;
  j["components"] = nlohmann::json::array();
  for (const auto& c : q.components)
    j["components"].push_back({{"mean", c.mean}, {"log_std", c.log_std}});
  return j.dump(2);
}

MixtureApprox mixture_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  MixtureApprox q;
  q.weights = j.at("weights").get<Vec>();
  for (const auto& cj : j.at("components"))
    q.components.push_back({cj.at("mean").get<Vec>(), cj.at("log_std").get<Vec>()});
  if (j.at("dim").get<std::size_t>() != q.dim())
    throw std::invalid_argument("mixture_from_json: dim field inconsistent with components");
  q.validate();
  return q;
}

}  // namespace mep::variational
