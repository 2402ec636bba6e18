#include "mep/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "mep/continual.hpp"
#include "mep/diagnostics.hpp"

namespace mep::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

fs::path prepare_output_dir(const RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("output_dir: cannot create " + cfg.output_dir);
  return dir;
}

targets::TargetModel require_target(const RunConfig& cfg) {
  if (!cfg.target) throw ConfigError("target: missing (required by this command)");
  return build_target(*cfg.target);
}

}  // namespace

void run_fit(const RunConfig& cfg) {
  auto dir = prepare_output_dir(cfg);
  auto target = require_target(cfg);

  Rng rng(cfg.seed);
  auto trace = pursuit::run_pursuit(target, cfg.pursuit, rng);

  write_file(dir / "trace.csv", pursuit::trace_to_csv(trace));
  write_file(dir / "mixture.json", variational::mixture_to_json(trace.mixture));

  Rng er = Rng(cfg.seed).derive(0x50ffa);
  auto elbo = diagnostics::elbo_estimate(trace.mixture, target, cfg.pursuit.elbo_eval_samples, er);
  nlohmann::json summary;
  summary["final_elbo"] = elbo.value;
  summary["elbo_std_error"] = elbo.std_error;
  summary["component_count"] = trace.mixture.size();
  summary["accepted_steps"] = [&] {
    std::size_t n = 0;
    for (const auto& s : trace.steps) n += s.accepted ? 1 : 0;
    return n;
  }();
  if (target.log_normalizer && target.support_box && target.dim <= 2)
    summary["kl_vs_target"] = diagnostics::kl_vs_target(trace.mixture, target);
  write_file(dir / "summary.json", summary.dump(2) + "\n");
}

void run_diagnose(const RunConfig& cfg) {
  auto dir = prepare_output_dir(cfg);
  auto target = require_target(cfg);
  const auto& dc = cfg.diagnostics;

  Box box;
  if (dc.box)
    box = *dc.box;
  else if (target.support_box)
    box = *target.support_box;
  else
    throw ConfigError("diagnostics.box: required when the target carries no support box");
  if (box.dim() != static_cast<std::size_t>(target.dim))
    throw ConfigError("diagnostics.box: dimension does not match target");
  if (target.dim > 2) throw ConfigError("diagnostics: grid reports need a d <= 2 target");

  std::string csv = "check,param,lhs,rhs,diff\n";

  // Temperature report: D_KL(U || T_lambda p) vs D_KL(U || p) on the gridded
  // (hence truncated, renormalized) target.
  auto grid = diagnostics::grid_density_from_log(target.log_density, box,
                                                 target.dim == 2 ? 301 : dc.resolution);
  for (const auto& row : diagnostics::temperature_kl_report(grid, dc.lambda_list))
    csv += "temperature," + fmt(row.lambda) + "," + fmt(row.kl_uniform_vs_tempered) + "," +
           fmt(row.kl_uniform_vs_p) + "," + fmt(row.kl_uniform_vs_tempered - row.kl_uniform_vs_p) +
           "\n";

  // Taylor-gap rows on a fixed (q_t, h) fixture for 1-D targets.
  if (target.dim == 1) {
    variational::MixtureApprox q_t{{{{0.0}, {std::log(2.0)}}}, {1.0}};
    variational::GaussianComponent h{{1.0}, {0.0}};
    for (double alpha : dc.taylor_alphas) {
      auto row = diagnostics::taylor_gap(target, q_t, h, alpha, box, dc.resolution);
      csv += "taylor_gap," + fmt(alpha) + "," + fmt(row.delta) + "," + fmt(row.model) + "," +
             fmt(row.ratio) + "\n";
    }
  }

  // Corner-case (lambda = 1) same-batch decomposition identity.
  {
    const std::size_t d = static_cast<std::size_t>(target.dim);
    variational::MixtureApprox q_t{{{Vec(d, 0.0), Vec(d, std::log(2.0))}}, {1.0}};
    variational::GaussianComponent h{Vec(d, 0.5), Vec(d, 0.0)};
    Rng rng = Rng(cfg.seed).derive(0xc0de);
    auto res =
        diagnostics::cornercase_decomposition_check(h, target, q_t, cfg.pursuit.mc_batch, rng);
    csv += "cornercase," + fmt(static_cast<double>(cfg.pursuit.mc_batch)) + "," + fmt(res.lhs) +
           "," + fmt(res.rhs) + "," + fmt(res.diff) + "\n";
  }

  write_file(dir / "diagnostics.csv", csv);
}

void run_continual(const RunConfig& cfg) {
  auto dir = prepare_output_dir(cfg);
  const auto& cc = cfg.continual;

  continual::TaskSequence tasks;
  if (cc.data_dir) {
    const fs::path base(*cc.data_dir);
    auto pick = [&](const char* a, const char* b) {
      return fs::exists(base / a) ? (base / a).string() : (base / b).string();
    };
    auto train = continual::load_idx(pick("train-images-idx3-ubyte", "train-images.idx3-ubyte"),
                                     pick("train-labels-idx1-ubyte", "train-labels.idx1-ubyte"));
    auto test = continual::load_idx(pick("t10k-images-idx3-ubyte", "t10k-images.idx3-ubyte"),
                                    pick("t10k-labels-idx1-ubyte", "t10k-labels.idx1-ubyte"));
    tasks = continual::split_tasks(train, test, cc.class_pairs);
    // PCA basis frozen from the first stage's training data.
    auto [stage0, proj] = continual::reduce_features(tasks.stages[0].train, cc.pca_dim);
    tasks.stages[0].train = std::move(stage0);
    for (std::size_t k = 0; k < tasks.stages.size(); ++k) {
      if (k > 0)
        tasks.stages[k].train =
            continual::reduce_features(tasks.stages[k].train, cc.pca_dim, proj).first;
      tasks.stages[k].cumulative_test =
          continual::reduce_features(tasks.stages[k].cumulative_test, cc.pca_dim, proj).first;
    }
  } else {
    Rng data_rng = Rng(cfg.seed).derive(0xda7a);
    tasks = continual::make_synthetic_tasks(cc.synthetic_train_per_class,
                                            cc.synthetic_test_per_class, cc.synthetic_noise_std,
                                            data_rng);
  }

  auto pursuit_rows = continual::continual_run(tasks, cfg.pursuit, cc.ensemble_n);
  auto baseline_rows =
      continual::naive_map_baseline(tasks, cc.baseline_steps, cc.baseline_learn_rate);

  const std::size_t n_stages = tasks.stages.size();
  std::string csv = "method,stage,mean_acc";
  for (std::size_t s = 0; s < n_stages; ++s) csv += ",acc_stage" + std::to_string(s);
  csv += "\n";
  auto emit = [&](const std::string& method, std::size_t stage, double mean_acc,
                  const Vec& per_stage) {
    csv += method + "," + std::to_string(stage) + "," + fmt(mean_acc);
    for (std::size_t s = 0; s < n_stages; ++s)
      csv += "," + (s < per_stage.size() ? fmt(per_stage[s]) : std::string("nan"));
    csv += "\n";
  };
  for (const auto& r : pursuit_rows) {
    emit("pursuit", r.stage, r.mean_acc, r.per_stage_acc);
    write_file(dir / ("stage_" + std::to_string(r.stage) + "_mixture.json"),
               variational::mixture_to_json(r.posterior));
  }
  for (const auto& r : baseline_rows) emit("naive_map", r.stage, r.mean_acc, r.per_stage_acc);
  write_file(dir / "accuracy.csv", csv);
}

}  // namespace mep::cli
