#pragma once

#include <functional>
#include <optional>

#include "mep/common.hpp"

namespace mep::targets {

// Unnormalized log-density L(theta) = p(X|theta) p(theta) with analytic
// gradient. log_normalizer is only ever used by oracles and diagnostics,
// never by the pursuit algorithm itself.
struct TargetModel {
  int dim = 0;
  std::function<double(const Vec&)> log_density;
  std::function<Vec(const Vec&)> grad_log_density;
  std::optional<double> log_normalizer;
  std::optional<Box> support_box;
};

struct LabeledDataset {
  std::vector<Vec> features;
  std::vector<int> labels;
  int n_classes = 0;

  std::size_t size() const { return features.size(); }
  std::size_t n_features() const { return features.empty() ? 0 : features.front().size(); }
  void validate() const;
};

// Normalized diagonal-Gaussian mixture density (log_normalizer = 0).
TargetModel make_gaussian_mixture_target(const std::vector<Vec>& means,
                                         const std::vector<Vec>& diag_vars,
                                         const Vec& weights);

// 2-D banana shape: log L = -t1^2/(2 s^2) - (t2 - c (t1^2 - s^2))^2 / 2.
// Known normalizer log(2 pi s) via change of variables.
TargetModel make_banana_target(double curvature, double scale);

// Multiclass logistic regression posterior. theta layout: flattened
// n_classes x (n_features + 1) row-major, each row = [weights..., bias].
TargetModel make_logreg_target(const LabeledDataset& data,
                               std::function<double(const Vec&)> prior_log_pdf,
                               std::function<Vec(const Vec&)> prior_grad);

// Fully factorized standard normal prior over a d-dimensional theta.
double std_normal_log_pdf(const Vec& theta);
Vec std_normal_grad(const Vec& theta);

}  // namespace mep::targets
