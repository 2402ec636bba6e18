#include "mep/continual.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>

namespace mep::continual {

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("load_idx: truncated file: " + path);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

}  // namespace

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw std::runtime_error("load_idx: cannot open " + images_path);
  if (read_be32(img, images_path) != 0x00000803u)
    throw std::runtime_error("load_idx: wrong magic in images file " + images_path);
  const std::uint32_t n_img = read_be32(img, images_path);
  const std::uint32_t rows = read_be32(img, images_path);
  const std::uint32_t cols = read_be32(img, images_path);

  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw std::runtime_error("load_idx: cannot open " + labels_path);
  if (read_be32(lab, labels_path) != 0x00000801u)
    throw std::runtime_error("load_idx: wrong magic in labels file " + labels_path);
  const std::uint32_t n_lab = read_be32(lab, labels_path);
  if (n_img != n_lab)
    throw std::runtime_error("load_idx: image/label count mismatch between " + images_path +
                             " and " + labels_path);

  LabeledDataset out;
  const std::size_t npix = std::size_t(rows) * cols;
  std::vector<unsigned char> buf(npix);
  out.features.reserve(n_img);
  for (std::uint32_t i = 0; i < n_img; ++i) {
    img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(npix));
    if (!img) throw std::runtime_error("load_idx: truncated file: " + images_path);
    Vec row(npix);
    for (std::size_t p = 0; p < npix; ++p) row[p] = static_cast<double>(buf[p]) / 255.0;
    out.features.push_back(std::move(row));
  }
  out.labels.resize(n_lab);
  int maxlab = 0;
  for (std::uint32_t i = 0; i < n_lab; ++i) {
    unsigned char b;
    lab.read(reinterpret_cast<char*>(&b), 1);
    if (!lab) throw std::runtime_error("load_idx: truncated file: " + labels_path);
    out.labels[i] = static_cast<int>(b);
    maxlab = std::max(maxlab, out.labels[i]);
  }
  out.n_classes = maxlab + 1;
  out.validate();
  return out;
}

std::pair<LabeledDataset, Projection> reduce_features(const LabeledDataset& data,
                                                      std::size_t out_dim,
                                                      const std::optional<Projection>& basis) {
  data.validate();
  const std::size_t nf = data.n_features();
  if (out_dim > nf) throw std::invalid_argument("reduce_features: out_dim exceeds n_features");

  Projection proj;
  if (basis) {
    proj = *basis;
    if (proj.basis.size() < out_dim || proj.mean.size() != nf)
      throw std::invalid_argument("reduce_features: basis shape mismatch");
  } else {
    const std::size_t n = data.size();
    proj.mean.assign(nf, 0.0);
    for (const auto& row : data.features)
      for (std::size_t i = 0; i < nf; ++i) proj.mean[i] += row[i];
    for (double& m : proj.mean) m /= static_cast<double>(n);

    std::vector<Vec> cov(nf, Vec(nf, 0.0));
    for (const auto& row : data.features)
      for (std::size_t i = 0; i < nf; ++i) {
        const double ci = row[i] - proj.mean[i];
        for (std::size_t j = i; j < nf; ++j) cov[i][j] += ci * (row[j] - proj.mean[j]);
      }
    double trace = 0.0;
    for (std::size_t i = 0; i < nf; ++i) {
      for (std::size_t j = i; j < nf; ++j) {
        cov[i][j] /= static_cast<double>(n);
        cov[j][i] = cov[i][j];
      }
      trace += cov[i][i];
    }

    // Deflated power iteration for the top out_dim directions.
    Rng prng(0x9ca0u);
    for (std::size_t k = 0; k < out_dim; ++k) {
      Vec v = prng.normal_vec(nf);
      // Start inside the orthogonal complement of the recovered directions.
      for (const auto& u : proj.basis) {
        double dot = 0.0;
        for (std::size_t i = 0; i < nf; ++i) dot += v[i] * u[i];
        for (std::size_t i = 0; i < nf; ++i) v[i] -= dot * u[i];
      }
      {
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm < 1e-300)
          throw std::runtime_error("reduce_features: covariance rank below out_dim");
        for (double& x : v) x /= norm;
      }
      for (std::size_t it = 0; it < 300; ++it) {
        Vec w(nf, 0.0);
        for (std::size_t i = 0; i < nf; ++i)
          for (std::size_t j = 0; j < nf; ++j) w[i] += cov[i][j] * v[j];
        for (const auto& u : proj.basis) {
          double dot = 0.0;
          for (std::size_t i = 0; i < nf; ++i) dot += w[i] * u[i];
          for (std::size_t i = 0; i < nf; ++i) w[i] -= dot * u[i];
        }
        double norm = 0.0;
        for (double x : w) norm += x * x;
        norm = std::sqrt(norm);
        // The deflated operator annihilates v only when no variance is left.
        if (norm < 1e-300)
          throw std::runtime_error("reduce_features: covariance rank below out_dim");
        for (std::size_t i = 0; i < nf; ++i) v[i] = w[i] / norm;
      }
      double eig = 0.0;
      for (std::size_t i = 0; i < nf; ++i) {
        double cv = 0.0;
        for (std::size_t j = 0; j < nf; ++j) cv += cov[i][j] * v[j];
        eig += v[i] * cv;
      }
      if (eig <= 1e-10 * std::max(1e-300, trace))
        throw std::runtime_error("reduce_features: covariance rank below out_dim");
      proj.basis.push_back(v);
    }
  }

  LabeledDataset reduced;
  reduced.labels = data.labels;
  reduced.n_classes = data.n_classes;
  reduced.features.reserve(data.size());
  for (const auto& row : data.features) {
    Vec r(out_dim);
    for (std::size_t k = 0; k < out_dim; ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < nf; ++i) acc += (row[i] - proj.mean[i]) * proj.basis[k][i];
      r[k] = acc;
    }
    reduced.features.push_back(std::move(r));
  }
  return {std::move(reduced), std::move(proj)};
}

TaskSequence split_tasks(const LabeledDataset& train, const LabeledDataset& test,
                         const std::vector<std::vector<int>>& class_sets) {
  train.validate();
  test.validate();
  std::set<int> seen;
  for (const auto& cs : class_sets)
    for (int c : cs)
      if (!seen.insert(c).second)
        throw std::invalid_argument("split_tasks: class sets must be disjoint");

  TaskSequence tasks;
  tasks.class_map = class_sets;
  std::set<int> cumulative;
  for (const auto& cs : class_sets) {
    cumulative.insert(cs.begin(), cs.end());
    TaskStage stage;
    stage.train.n_classes = train.n_classes;
    stage.cumulative_test.n_classes = test.n_classes;
    for (std::size_t i = 0; i < train.size(); ++i)
      if (std::find(cs.begin(), cs.end(), train.labels[i]) != cs.end()) {
        stage.train.features.push_back(train.features[i]);
        stage.train.labels.push_back(train.labels[i]);
      }
    for (std::size_t i = 0; i < test.size(); ++i)
      if (cumulative.count(test.labels[i])) {
        stage.cumulative_test.features.push_back(test.features[i]);
        stage.cumulative_test.labels.push_back(test.labels[i]);
      }
    if (stage.train.features.empty())
      throw std::invalid_argument("split_tasks: a stage has no training samples");
    tasks.stages.push_back(std::move(stage));
  }
  return tasks;
}

TaskSequence make_synthetic_tasks(std::size_t n_per_class_train, std::size_t n_per_class_test,
                                  double noise_std, Rng& rng) {
  // 4 clusters at the corners of a square; stages {0,1} then {2,3}.
  const std::vector<Vec> centers = {{-4.0, -4.0}, {4.0, 4.0}, {-4.0, 4.0}, {4.0, -4.0}};
  auto gen = [&](std::size_t per_class) {
    LabeledDataset d;
    d.n_classes = 4;
    for (int c = 0; c < 4; ++c)
      for (std::size_t i = 0; i < per_class; ++i) {
        d.features.push_back(
            {centers[c][0] + noise_std * rng.normal(), centers[c][1] + noise_std * rng.normal()});
        d.labels.push_back(c);
      }
    return d;
  };
  return split_tasks(gen(n_per_class_train), gen(n_per_class_test), {{0, 1}, {2, 3}});
}

namespace {

// Softmax class probabilities under one weight vector, theta laid out as
// n_classes x (n_features + 1).
Vec class_probs(const Vec& theta, const Vec& x, int n_classes) {
  const std::size_t nf = x.size();
  Vec z(n_classes);
  for (int c = 0; c < n_classes; ++c) {
    const double* row = theta.data() + static_cast<std::size_t>(c) * (nf + 1);
    double acc = row[nf];
    for (std::size_t i = 0; i < nf; ++i) acc += row[i] * x[i];
    z[c] = acc;
  }
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    s += v;
  }
  for (double& v : z) v /= s;
  return z;
}

Vec accuracy_by_stage(const LabeledDataset& test, const std::vector<int>& preds,
                      const std::vector<std::vector<int>>& class_map, std::size_t upto_stage,
                      double& mean_acc) {
  std::size_t correct = 0;
  Vec per_stage(upto_stage + 1, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t s = 0; s <= upto_stage; ++s) {
    std::size_t n = 0, ok = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
      const auto& cs = class_map[s];
      if (std::find(cs.begin(), cs.end(), test.labels[i]) == cs.end()) continue;
      ++n;
      if (preds[i] == test.labels[i]) ++ok;
    }
    per_stage[s] = n ? static_cast<double>(ok) / static_cast<double>(n)
                     : std::numeric_limits<double>::quiet_NaN();
  }
  for (std::size_t i = 0; i < test.size(); ++i)
    if (preds[i] == test.labels[i]) ++correct;
  mean_acc = static_cast<double>(correct) / static_cast<double>(test.size());
  return per_stage;
}

}  // namespace

double predictive_accuracy(const MixtureApprox& q, const LabeledDataset& test,
                           std::size_t ensemble_n, Rng& rng) {
  if (ensemble_n < 1) throw std::invalid_argument("predictive_accuracy: ensemble_n must be >= 1");
  test.validate();
  const std::size_t dim = static_cast<std::size_t>(test.n_classes) * (test.n_features() + 1);
  check_dim(dim, q.dim(), "predictive_accuracy");

  auto thetas = variational::mixture_sample(q, rng, ensemble_n);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    Vec avg(test.n_classes, 0.0);
    for (const auto& theta : thetas) {
      Vec p = class_probs(theta, test.features[i], test.n_classes);
      for (int c = 0; c < test.n_classes; ++c) avg[c] += p[c];
    }
    int pred = 0;
    for (int c = 1; c < test.n_classes; ++c)
      if (avg[c] > avg[pred]) pred = c;  // ties keep the smaller index
    if (pred == test.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

std::vector<StageResult> continual_run(const TaskSequence& tasks,
                                       const pursuit::PursuitConfig& config,
                                       std::size_t ensemble_n) {
  if (tasks.stages.empty()) throw std::invalid_argument("continual_run: no stages");
  std::vector<StageResult> results;
  std::optional<MixtureApprox> prior_mixture;

  for (std::size_t k = 0; k < tasks.stages.size(); ++k) {
    const auto& stage = tasks.stages[k];
    std::function<double(const Vec&)> prior_lp;
    std::function<Vec(const Vec&)> prior_grad;
    if (!prior_mixture) {
      prior_lp = targets::std_normal_log_pdf;
      prior_grad = targets::std_normal_grad;
    } else {
      MixtureApprox prev = *prior_mixture;
      prior_lp = [prev](const Vec& th) { return variational::mixture_log_pdf(prev, th); };
      prior_grad = [prev](const Vec& th) { return variational::mixture_grad_log_pdf(prev, th); };
    }

    auto target = targets::make_logreg_target(stage.train, prior_lp, prior_grad);
    Rng stage_rng(config.seed + k);
    auto trace = pursuit::run_pursuit(target, config, stage_rng);

    StageResult res;
    res.stage = k;
    res.posterior = trace.mixture;

    // Ensemble predictions on the cumulative test set.
    Rng ens_rng = stage_rng.derive(0xaccu);
    auto thetas = variational::mixture_sample(res.posterior, ens_rng, ensemble_n);
    const auto& test = stage.cumulative_test;
    std::vector<int> preds(test.size(), 0);
    for (std::size_t i = 0; i < test.size(); ++i) {
      Vec avg(test.n_classes, 0.0);
      for (const auto& theta : thetas) {
        Vec p = class_probs(theta, test.features[i], test.n_classes);
        for (int c = 0; c < test.n_classes; ++c) avg[c] += p[c];
      }
      int pred = 0;
      for (int c = 1; c < test.n_classes; ++c)
        if (avg[c] > avg[pred]) pred = c;
      preds[i] = pred;
    }
    res.per_stage_acc = accuracy_by_stage(test, preds, tasks.class_map, k, res.mean_acc);

    prior_mixture = res.posterior;
    results.push_back(std::move(res));
  }
  return results;
}

std::vector<BaselineStageResult> naive_map_baseline(const TaskSequence& tasks, std::size_t steps,
                                                    double learn_rate) {
  if (tasks.stages.empty()) throw std::invalid_argument("naive_map_baseline: no stages");
  const auto& first = tasks.stages.front().train;
  const std::size_t dim =
      static_cast<std::size_t>(first.n_classes) * (first.n_features() + 1);
  Vec theta(dim, 0.0);
  std::vector<BaselineStageResult> results;

  for (std::size_t k = 0; k < tasks.stages.size(); ++k) {
    const auto& stage = tasks.stages[k];
    auto target = targets::make_logreg_target(stage.train, targets::std_normal_log_pdf,
                                              targets::std_normal_grad);
    // Full-batch Adam ascent from the carried-over weights.
    Vec m1(dim, 0.0), m2(dim, 0.0);
    for (std::size_t step = 0; step < steps; ++step) {
      Vec g = target.grad_log_density(theta);
      const double bc1 = 1.0 - std::pow(0.9, static_cast<double>(step + 1));
      const double bc2 = 1.0 - std::pow(0.999, static_cast<double>(step + 1));
      for (std::size_t i = 0; i < dim; ++i) {
        m1[i] = 0.9 * m1[i] + 0.1 * g[i];
        m2[i] = 0.999 * m2[i] + 0.001 * g[i] * g[i];
        theta[i] += learn_rate * (m1[i] / bc1) / (std::sqrt(m2[i] / bc2) + 1e-8);
      }
    }

    BaselineStageResult res;
    res.stage = k;
    const auto& test = stage.cumulative_test;
    std::vector<int> preds(test.size(), 0);
    for (std::size_t i = 0; i < test.size(); ++i) {
      Vec p = class_probs(theta, test.features[i], test.n_classes);
      int pred = 0;
      for (int c = 1; c < test.n_classes; ++c)
        if (p[c] > p[pred]) pred = c;
      preds[i] = pred;
    }
    res.per_stage_acc = accuracy_by_stage(test, preds, tasks.class_map, k, res.mean_acc);
    results.push_back(std::move(res));
  }
  return results;
}

}  // namespace mep::continual
