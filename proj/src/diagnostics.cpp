#include "mep/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace mep::diagnostics {

Vec GridDensity::point(std::size_t i) const {
  const std::size_t d = dim();
  Vec p(d);
  if (d == 1) {
    const double w = (box.bounds[0][1] - box.bounds[0][0]) / static_cast<double>(resolution);
    p[0] = box.bounds[0][0] + (static_cast<double>(i) + 0.5) * w;
  } else {
    const std::size_t row = i / resolution, col = i % resolution;
    const double w0 = (box.bounds[0][1] - box.bounds[0][0]) / static_cast<double>(resolution);
    const double w1 = (box.bounds[1][1] - box.bounds[1][0]) / static_cast<double>(resolution);
    p[0] = box.bounds[0][0] + (static_cast<double>(row) + 0.5) * w0;
    p[1] = box.bounds[1][0] + (static_cast<double>(col) + 0.5) * w1;
  }
  return p;
}

GridDensity grid_density_from_log(const std::function<double(const Vec&)>& log_f, const Box& box,
                                  std::size_t resolution) {
  const std::size_t d = box.dim();
  if (d == 0 || d > 2) throw std::invalid_argument("grid_density: dimension must be 1 or 2");
  if (resolution < 2) throw std::invalid_argument("grid_density: resolution too small");
  GridDensity g;
  g.box = box;
  g.resolution = resolution;
  g.cell_measure = box.volume() / std::pow(static_cast<double>(resolution), d);
  const std::size_t n = (d == 1) ? resolution : resolution * resolution;
  g.values.resize(n);
  Vec logs(n);
  for (std::size_t i = 0; i < n; ++i) logs[i] = log_f(g.point(i));
  const double m = *std::max_element(logs.begin(), logs.end());
  if (!std::isfinite(m)) throw std::runtime_error("grid_density: all-zero grid");
  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    g.values[i] = std::exp(logs[i] - m);
    mass += g.values[i] * g.cell_measure;
  }
  for (double& v : g.values) v /= mass;
  return g;
}

double grid_quadrature(const std::function<double(const Vec&)>& f, const Box& box,
                       std::size_t resolution) {
  const std::size_t d = box.dim();
  if (d == 0 || d > 2) throw std::invalid_argument("grid_quadrature: dimension must be 1 or 2");
  GridDensity proto{box, resolution, {}, 0.0};
  const std::size_t n = (d == 1) ? resolution : resolution * resolution;
  const double cell = box.volume() / std::pow(static_cast<double>(resolution), d);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += f(proto.point(i));
  return acc * cell;
}

ElboEstimate elbo_estimate(const MixtureApprox& q, const TargetModel& target, std::size_t n,
                           Rng& rng) {
  if (n < 2) throw std::invalid_argument("elbo_estimate: n must be >= 2");
  auto samples = variational::mixture_sample(q, rng, n);
  double sum = 0.0, sumsq = 0.0;
  for (const auto& theta : samples) {
    const double v = target.log_density(theta) - variational::mixture_log_pdf(q, theta);
    if (!std::isfinite(v)) throw std::runtime_error("elbo_estimate: non-finite sample value");
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(0.0, sumsq / static_cast<double>(n) - mean * mean);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

double kl_vs_target(const MixtureApprox& q, const TargetModel& target, std::size_t mc_fallback_n,
                    std::uint64_t mc_seed) {
  if (!target.log_normalizer)
    throw std::invalid_argument("kl_vs_target: target log_normalizer unknown");
  if (target.support_box && target.dim <= 2) {
    const double logz = *target.log_normalizer;
    // Widen the integration box so it also covers the approximation's own
    // tails; the integrand is weighted by q, not by the target.
    Box box = *target.support_box;
    for (std::size_t i = 0; i < box.bounds.size(); ++i) {
      for (const auto& c : q.components) {
        const double sd = std::exp(c.log_std[i]);
        box.bounds[i][0] = std::min(box.bounds[i][0], c.mean[i] - 10.0 * sd);
        box.bounds[i][1] = std::max(box.bounds[i][1], c.mean[i] + 10.0 * sd);
      }
    }
    auto f = [&](const Vec& theta) {
      const double lq = variational::mixture_log_pdf(q, theta);
      const double lp = target.log_density(theta) - logz;
      const double qv = std::exp(lq);
      return qv > 0.0 ? qv * (lq - lp) : 0.0;
    };
    return grid_quadrature(f, box, 4001);
  }
  Rng rng(mc_seed);
  return *target.log_normalizer - elbo_estimate(q, target, mc_fallback_n, rng).value;
}

GridDensity temperature_map(const GridDensity& p, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("temperature_map: lambda must be positive");
  GridDensity out = p;
  Vec logs(p.values.size());
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    logs[i] = lambda * (p.values[i] > 0.0 ? std::log(p.values[i])
                                          : -std::numeric_limits<double>::infinity());
    m = std::max(m, logs[i]);
  }
  if (!std::isfinite(m)) throw std::runtime_error("temperature_map: all-zero grid");
  double mass = 0.0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    out.values[i] = std::exp(logs[i] - m);
    mass += out.values[i] * out.cell_measure;
  }
  for (double& v : out.values) v /= mass;
  return out;
}

namespace {
// D_KL(U || g) for U uniform on g's box, by grid sum.
double kl_uniform_vs(const GridDensity& g) {
  const double u = 1.0 / g.box.volume();
  double acc = 0.0;
  for (std::size_t i = 0; i < g.n_cells(); ++i)
    acc += u * (std::log(u) - std::log(g.values[i])) * g.cell_measure;
  return acc;
}
}  // namespace

std::vector<TemperatureRow> temperature_kl_report(const GridDensity& p, const Vec& lambda_list) {
  std::vector<TemperatureRow> rows;
  const double kl_up = kl_uniform_vs(p);
  for (double lambda : lambda_list)
    rows.push_back({lambda, kl_uniform_vs(temperature_map(p, lambda)), kl_up});
  return rows;
}

TaylorGapRow taylor_gap(const TargetModel& target, const MixtureApprox& q_t,
                        const GaussianComponent& h, double alpha, const Box& box,
                        std::size_t resolution) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("taylor_gap: alpha in (0,1)");
  auto f_of = [&](const Vec& theta, double a) {
    const double lq = variational::mixture_log_pdf(q_t, theta);
    const double lh = variational::component_log_pdf(h, theta);
    const double qv = std::exp(lq), hv = std::exp(lh);
    const double qa = (1.0 - a) * qv + a * hv;
    if (qa <= 0.0) return 0.0;
    return qa * (target.log_density(theta) - std::log(qa));
  };
  const double f_qt = grid_quadrature([&](const Vec& t) { return f_of(t, 0.0); }, box, resolution);
  const double f_qa = grid_quadrature([&](const Vec& t) { return f_of(t, alpha); }, box, resolution);

  const double first = grid_quadrature(
      [&](const Vec& theta) {
        const double lq = variational::mixture_log_pdf(q_t, theta);
        const double lh = variational::component_log_pdf(h, theta);
        return (std::exp(lh) - std::exp(lq)) * (target.log_density(theta) - lq);
      },
      box, resolution);
  const double second = grid_quadrature(
      [&](const Vec& theta) {
        const double qv = std::exp(variational::mixture_log_pdf(q_t, theta));
        const double hv = std::exp(variational::component_log_pdf(h, theta));
        const double diff = hv - qv;
        return qv > 0.0 ? diff * diff / qv : 0.0;
      },
      box, resolution);

  TaylorGapRow row;
  row.alpha = alpha;
  row.delta = f_qa - f_qt;
  row.model = alpha * first - alpha * alpha * second;
  row.ratio = std::abs(row.delta - row.model) / alpha;
  return row;
}

CornercaseResult cornercase_decomposition_check(const GaussianComponent& h,
                                                const TargetModel& target, const MixtureApprox& q_t,
                                                std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("cornercase_decomposition_check: n must be >= 1");
  double sum_ll = 0.0, sum_lh = 0.0, sum_lq = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const Vec theta = variational::reparam_sample(h, rng.normal_vec(h.dim()));
    sum_ll += target.log_density(theta);
    sum_lh += variational::component_log_pdf(h, theta);
    sum_lq += variational::mixture_log_pdf(q_t, theta);
  }
  const double inv = 1.0 / static_cast<double>(n);
  // MC-entropy form of the lambda = 1 objective, then its rearrangement into
  // the ELBO term plus the -log q_t penalty term, both on the same batch.
  const double lhs = -sum_lh * inv + (sum_ll - sum_lq) * inv;
  const double term1 = (sum_ll - sum_lh) * inv;
  const double term2 = -sum_lq * inv;
  const double rhs = term1 + term2;
  return {lhs, rhs, std::abs(lhs - rhs)};
}

}  // namespace mep::diagnostics
