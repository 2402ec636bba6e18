#pragma once

#include <functional>
#include <utility>

#include "mep/common.hpp"
#include "mep/rng.hpp"
#include "mep/targets.hpp"
#include "mep/variational.hpp"

namespace mep::diagnostics {

using targets::TargetModel;
using variational::GaussianComponent;
using variational::MixtureApprox;

// Normalized density tabulated at cell midpoints of a d in {1,2} box.
struct GridDensity {
  Box box;
  std::size_t resolution = 0;  // points per dimension
  Vec values;                  // row-major for d = 2
  double cell_measure = 0.0;

  std::size_t dim() const { return box.dim(); }
  std::size_t n_cells() const { return values.size(); }
  // Midpoint coordinates of flat cell index i.
  Vec point(std::size_t i) const;
};

// Tabulate exp(log_f) on the box and normalize to a proper grid density.
GridDensity grid_density_from_log(const std::function<double(const Vec&)>& log_f, const Box& box,
                                  std::size_t resolution);

// Midpoint-rule integral of f over the box (d <= 2).
double grid_quadrature(const std::function<double(const Vec&)>& f, const Box& box,
                       std::size_t resolution);

struct ElboEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Monte Carlo mean and standard error of log L(theta) - log q(theta), theta ~ q.
ElboEstimate elbo_estimate(const MixtureApprox& q, const TargetModel& target, std::size_t n,
                           Rng& rng);

// KL(q || p). Quadrature over target.support_box when available (d <= 2),
// otherwise log_normalizer - ELBO with the given sample budget.
double kl_vs_target(const MixtureApprox& q, const TargetModel& target,
                    std::size_t mc_fallback_n = 100000, std::uint64_t mc_seed = 0);

// T_lambda: p -> p^lambda / Z on the grid.
GridDensity temperature_map(const GridDensity& p, double lambda);

struct TemperatureRow {
  double lambda;
  double kl_uniform_vs_tempered;
  double kl_uniform_vs_p;
};

// D_KL(U || T_lambda p) vs D_KL(U || p) for U uniform on p's box. Reported,
// not asserted.
std::vector<TemperatureRow> temperature_kl_report(const GridDensity& p, const Vec& lambda_list);

struct TaylorGapRow {
  double alpha;
  double delta;  // F[(1-alpha) q_t + alpha h] - F[q_t], quadrature
  double model;  // alpha <h - q_t, log(L/q_t)> - alpha^2 int (h - q_t)^2 / q_t
  double ratio;  // |delta - model| / alpha
};

// Quadrature check of the first-order expansion quality at a given alpha.
TaylorGapRow taylor_gap(const TargetModel& target, const MixtureApprox& q_t,
                        const GaussianComponent& h, double alpha, const Box& box,
                        std::size_t resolution);

struct CornercaseResult {
  double lhs;
  double rhs;
  double diff;
};

// Same-batch identity at lambda = 1: the MC maxent objective (MC entropy)
// equals [MC of int h log(L/h)] + [MC of -int h log q_t].
CornercaseResult cornercase_decomposition_check(const GaussianComponent& h,
                                                const TargetModel& target, const MixtureApprox& q_t,
                                                std::size_t n, Rng& rng);

}  // namespace mep::diagnostics
