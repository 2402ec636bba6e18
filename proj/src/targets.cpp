#include "mep/targets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mep::targets {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454836;

double logsumexp(const Vec& v) {
  double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}
}  // namespace

void LabeledDataset::validate() const {
  if (features.empty()) throw std::invalid_argument("LabeledDataset: empty dataset");
  if (features.size() != labels.size())
    throw std::invalid_argument("LabeledDataset: feature/label count mismatch");
  const std::size_t nf = features.front().size();
  for (const auto& row : features) {
    if (row.size() != nf) throw std::invalid_argument("LabeledDataset: ragged feature matrix");
    for (double x : row)
      if (!std::isfinite(x)) throw std::invalid_argument("LabeledDataset: non-finite feature");
  }
  for (int y : labels)
    if (y < 0 || y >= n_classes) throw std::invalid_argument("LabeledDataset: label out of range");
}

TargetModel make_gaussian_mixture_target(const std::vector<Vec>& means,
                                         const std::vector<Vec>& diag_vars,
                                         const Vec& weights) {
  const std::size_t k = means.size();
  if (k == 0 || diag_vars.size() != k || weights.size() != k)
    throw std::invalid_argument("gaussian_mixture_target: component list length mismatch");
  const std::size_t d = means.front().size();
  double wsum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    if (means[j].size() != d || diag_vars[j].size() != d)
      throw std::invalid_argument("gaussian_mixture_target: dimension mismatch");
    for (double v : diag_vars[j])
      if (v <= 0.0) throw std::invalid_argument("gaussian_mixture_target: non-positive variance");
    if (weights[j] < 0.0) throw std::invalid_argument("gaussian_mixture_target: negative weight");
    wsum += weights[j];
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw std::invalid_argument("gaussian_mixture_target: weights must sum to 1");

  // Precompute per-component log-normalizers.
  Vec log_w(k), log_norm(k);
  for (std::size_t j = 0; j < k; ++j) {
    log_w[j] = std::log(weights[j]);
    double s = 0.0;
    for (double v : diag_vars[j]) s += std::log(v);
    log_norm[j] = -0.5 * (static_cast<double>(d) * kLogTwoPi + s);
  }

  auto comp_logs = [=](const Vec& theta) {
    Vec lj(k);
    for (std::size_t j = 0; j < k; ++j) {
      double quad = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double z = theta[i] - means[j][i];
        quad += z * z / diag_vars[j][i];
      }
      lj[j] = log_w[j] + log_norm[j] - 0.5 * quad;
    }
    return lj;
  };

  TargetModel t;
  t.dim = static_cast<int>(d);
  t.log_normalizer = 0.0;
  t.log_density = [=](const Vec& theta) {
    check_dim(d, theta.size(), "gaussian_mixture_target");
    return logsumexp(comp_logs(theta));
  };
  t.grad_log_density = [=](const Vec& theta) {
    check_dim(d, theta.size(), "gaussian_mixture_target");
    Vec lj = comp_logs(theta);
    const double lse = logsumexp(lj);
    Vec g(d, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      const double r = std::exp(lj[j] - lse);  // responsibility
      for (std::size_t i = 0; i < d; ++i)
        g[i] += r * (means[j][i] - theta[i]) / diag_vars[j][i];
    }
    return g;
  };
  // A generous box for quadrature oracles (d <= 2 usage).
  if (d <= 2) {
    Box box;
    for (std::size_t i = 0; i < d; ++i) {
      double lo = means[0][i], hi = means[0][i], smax = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        lo = std::min(lo, means[j][i]);
        hi = std::max(hi, means[j][i]);
        smax = std::max(smax, std::sqrt(diag_vars[j][i]));
      }
      box.bounds.push_back({lo - 8.0 * smax, hi + 8.0 * smax});
    }
    t.support_box = box;
  }
  return t;
}

TargetModel make_banana_target(double curvature, double scale) {
  if (scale <= 0.0) throw std::invalid_argument("banana_target: scale must be positive");
  const double c = curvature, s = scale;
  TargetModel t;
  t.dim = 2;
  t.log_normalizer = std::log(2.0 * std::numbers::pi * s);
  t.log_density = [=](const Vec& theta) {
    check_dim(2, theta.size(), "banana_target");
    const double u = theta[1] - c * (theta[0] * theta[0] - s * s);
    return -theta[0] * theta[0] / (2.0 * s * s) - 0.5 * u * u;
  };
  t.grad_log_density = [=](const Vec& theta) {
    check_dim(2, theta.size(), "banana_target");
    const double u = theta[1] - c * (theta[0] * theta[0] - s * s);
    return Vec{-theta[0] / (s * s) + 2.0 * c * theta[0] * u, -u};
  };
  t.support_box = Box{{{-6.0 * s, 6.0 * s}, {-6.0 - c * 4.0 * s * s, 6.0 + c * 4.0 * s * s}}};
  return t;
}

TargetModel make_logreg_target(const LabeledDataset& data,
                               std::function<double(const Vec&)> prior_log_pdf,
                               std::function<Vec(const Vec&)> prior_grad) {
  data.validate();
  const int nc = data.n_classes;
  const std::size_t nf = data.n_features();
  const std::size_t dim = static_cast<std::size_t>(nc) * (nf + 1);
  auto feats = data.features;
  auto labels = data.labels;

  // logits[c] = row_c(theta) . [x, 1]
  auto logits_of = [=](const Vec& theta, const Vec& x) {
    Vec z(nc);
    for (int cidx = 0; cidx < nc; ++cidx) {
      const double* row = theta.data() + static_cast<std::size_t>(cidx) * (nf + 1);
      double acc = row[nf];  // bias
      for (std::size_t i = 0; i < nf; ++i) acc += row[i] * x[i];
      z[cidx] = acc;
    }
    return z;
  };

  TargetModel t;
  t.dim = static_cast<int>(dim);
  t.log_density = [=](const Vec& theta) {
    check_dim(dim, theta.size(), "logreg_target");
    double ll = 0.0;
    for (std::size_t n = 0; n < feats.size(); ++n) {
      Vec z = logits_of(theta, feats[n]);
      ll += z[labels[n]] - logsumexp(z);
    }
    return ll + prior_log_pdf(theta);
  };
  t.grad_log_density = [=](const Vec& theta) {
    check_dim(dim, theta.size(), "logreg_target");
    Vec g = prior_grad(theta);
    for (std::size_t n = 0; n < feats.size(); ++n) {
      Vec z = logits_of(theta, feats[n]);
      const double lse = logsumexp(z);
      for (int cidx = 0; cidx < nc; ++cidx) {
        const double resid = (cidx == labels[n] ? 1.0 : 0.0) - std::exp(z[cidx] - lse);
        double* row = g.data() + static_cast<std::size_t>(cidx) * (nf + 1);
        for (std::size_t i = 0; i < nf; ++i) row[i] += resid * feats[n][i];
        row[nf] += resid;
      }
    }
    return g;
  };
  return t;
}

double std_normal_log_pdf(const Vec& theta) {
  double q = 0.0;
  for (double x : theta) q += x * x;
  return -0.5 * q - 0.5 * static_cast<double>(theta.size()) * kLogTwoPi;
}

Vec std_normal_grad(const Vec& theta) {
  Vec g(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) g[i] = -theta[i];
  return g;
}

}  // namespace mep::targets
