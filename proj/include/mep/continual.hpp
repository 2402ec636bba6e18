#pragma once

#include <optional>
#include <string>

#include "mep/pursuit.hpp"
#include "mep/targets.hpp"

namespace mep::continual {

using targets::LabeledDataset;
using variational::MixtureApprox;

// IDX ingestion (big-endian MNIST container). Pixel bytes scaled to [0, 1].
LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path);

// Frozen PCA basis: features project as (x - mean) . basis_j.
struct Projection {
  Vec mean;
  std::vector<Vec> basis;  // out_dim rows of length n_features
};

// Projects onto the top-out_dim principal directions. Without a basis the
// directions are computed from `data` (the first stage's training set) and
// returned for reuse on every later stage and test set.
std::pair<LabeledDataset, Projection> reduce_features(const LabeledDataset& data,
                                                      std::size_t out_dim,
                                                      const std::optional<Projection>& basis = {});

struct TaskStage {
  LabeledDataset train;
  LabeledDataset cumulative_test;
};

struct TaskSequence {
  std::vector<TaskStage> stages;
  std::vector<std::vector<int>> class_map;  // class indices introduced per stage
};

TaskSequence split_tasks(const LabeledDataset& train, const LabeledDataset& test,
                         const std::vector<std::vector<int>>& class_sets);

// Bundled no-download path: 4 well-separated 2-D Gaussian class clusters,
// split into 2 stages of 2 classes each.
TaskSequence make_synthetic_tasks(std::size_t n_per_class_train, std::size_t n_per_class_test,
                                  double noise_std, Rng& rng);

// Ensemble-averaged softmax prediction; ties break toward the smallest class
// index.
double predictive_accuracy(const MixtureApprox& q, const LabeledDataset& test,
                           std::size_t ensemble_n, Rng& rng);

struct StageResult {
  std::size_t stage = 0;
  double mean_acc = 0.0;
  Vec per_stage_acc;  // accuracy restricted to each earlier stage's classes
  MixtureApprox posterior;
};

// Sequential pursuit: stage 0 prior is the fully factorized standard normal;
// each later stage's prior is the previous stage's fitted mixture posterior.
std::vector<StageResult> continual_run(const TaskSequence& tasks,
                                       const pursuit::PursuitConfig& config,
                                       std::size_t ensemble_n);

struct BaselineStageResult {
  std::size_t stage = 0;
  double mean_acc = 0.0;
  Vec per_stage_acc;
};

// Naive sequential MAP: weights carry over between stages but the prior is
// reset to the standard normal, so earlier tasks are forgotten.
std::vector<BaselineStageResult> naive_map_baseline(const TaskSequence& tasks, std::size_t steps,
                                                    double learn_rate);

}  // namespace mep::continual
