#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mep.h"

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

const char* kFitConfig = R"({
  "target": {"name": "std_normal"},
  "pursuit": {"max_components": 2, "steps_per_component": 200, "mc_batch": 32,
              "elbo_eval_samples": 2000},
  "seed": 21
})";

fs::path fresh_dir(const char* name) {
  auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("capi: version and error state") {
  CHECK(mep_version() != nullptr);
  CHECK(std::strlen(mep_version()) > 0);
}

TEST_CASE("capi: config parse failures return MEP_ERR_CONFIG with a message") {
  mep_config* cfg = nullptr;
  CHECK(mep_config_parse("{broken", &cfg) == MEP_ERR_CONFIG);
  CHECK(cfg == nullptr);
  CHECK(std::strlen(mep_last_error()) > 0);

  CHECK(mep_config_parse(R"({"target":{"name":"nope"},"seed":1})", &cfg) == MEP_ERR_CONFIG);
  CHECK(std::string(mep_last_error()).find("target.name") != std::string::npos);

  CHECK(mep_config_parse(nullptr, &cfg) == MEP_ERR_CONFIG);
}

TEST_CASE("capi: fit writes artifacts and is byte-identical across reruns") {
  mep_config* cfg = nullptr;
  REQUIRE(mep_config_parse(kFitConfig, &cfg) == MEP_OK);

  auto dir1 = fresh_dir("mep_capi_fit1");
  auto dir2 = fresh_dir("mep_capi_fit2");
  REQUIRE(mep_config_set_output_dir(cfg, dir1.string().c_str()) == MEP_OK);
  REQUIRE(mep_run_fit(cfg) == MEP_OK);
  REQUIRE(mep_config_set_output_dir(cfg, dir2.string().c_str()) == MEP_OK);
  REQUIRE(mep_run_fit(cfg) == MEP_OK);

  for (const char* f : {"trace.csv", "mixture.json", "summary.json"}) {
    CHECK(fs::exists(dir1 / f));
    CHECK(slurp(dir1 / f) == slurp(dir2 / f));
  }

  // A different seed changes the artifacts.
  auto dir3 = fresh_dir("mep_capi_fit3");
  REQUIRE(mep_config_set_seed(cfg, 99) == MEP_OK);
  REQUIRE(mep_config_set_output_dir(cfg, dir3.string().c_str()) == MEP_OK);
  REQUIRE(mep_run_fit(cfg) == MEP_OK);
  CHECK(slurp(dir1 / "mixture.json") != slurp(dir3 / "mixture.json"));

  mep_config_free(cfg);
}

TEST_CASE("capi: mixture artifact round trip and evaluation") {
  mep_config* cfg = nullptr;
  REQUIRE(mep_config_parse(kFitConfig, &cfg) == MEP_OK);
  auto dir = fresh_dir("mep_capi_mix");
  REQUIRE(mep_config_set_output_dir(cfg, dir.string().c_str()) == MEP_OK);
  REQUIRE(mep_run_fit(cfg) == MEP_OK);
  mep_config_free(cfg);

  const std::string doc = slurp(dir / "mixture.json");
  mep_mixture* q = nullptr;
  REQUIRE(mep_mixture_parse(doc.c_str(), &q) == MEP_OK);
  CHECK(mep_mixture_dim(q) == 1);
  CHECK(mep_mixture_components(q) >= 1);

  double lp = 0.0;
  const double theta = 0.0;
  REQUIRE(mep_mixture_log_pdf(q, &theta, 1, &lp) == MEP_OK);
  // fitted to a standard normal: near the N(0,1) mode value
  CHECK(lp == doctest::Approx(-0.9189385).epsilon(0.1));

  double bad = 0.0;
  const double theta2[2] = {0.0, 0.0};
  CHECK(mep_mixture_log_pdf(q, theta2, 2, &bad) != MEP_OK);
  mep_mixture_free(q);

  CHECK(mep_mixture_parse("{}", &q) != MEP_OK);
}

TEST_CASE("capi: diagnose emits the report") {
  mep_config* cfg = nullptr;
  const char* diag_config = R"({
    "target": {"name": "std_normal"},
    "diagnostics": {"lambda_list": [0.5, 1.0, 2.0], "box": [[-5.0, 5.0]], "resolution": 2001},
    "seed": 3
  })";
  REQUIRE(mep_config_parse(diag_config, &cfg) == MEP_OK);
  auto dir = fresh_dir("mep_capi_diag");
  REQUIRE(mep_config_set_output_dir(cfg, dir.string().c_str()) == MEP_OK);
  REQUIRE(mep_run_diagnose(cfg) == MEP_OK);
  const std::string csv = slurp(dir / "diagnostics.csv");
  CHECK(csv.find("temperature") != std::string::npos);
  CHECK(csv.find("taylor_gap") != std::string::npos);
  CHECK(csv.find("cornercase") != std::string::npos);
  mep_config_free(cfg);
}

TEST_CASE("capi: continual on the synthetic tasks") {
  mep_config* cfg = nullptr;
  const char* cont_config = R"({
    "pursuit": {"max_components": 2, "steps_per_component": 300, "mc_batch": 32,
                "elbo_eval_samples": 2000},
    "continual": {"synthetic_train_per_class": 60, "synthetic_test_per_class": 30,
                  "ensemble_n": 8, "baseline_steps": 200},
    "seed": 5
  })";
  REQUIRE(mep_config_parse(cont_config, &cfg) == MEP_OK);
  auto dir1 = fresh_dir("mep_capi_cont1");
  auto dir2 = fresh_dir("mep_capi_cont2");
  REQUIRE(mep_config_set_output_dir(cfg, dir1.string().c_str()) == MEP_OK);
  REQUIRE(mep_run_continual(cfg) == MEP_OK);
  REQUIRE(mep_config_set_output_dir(cfg, dir2.string().c_str()) == MEP_OK);
  REQUIRE(mep_run_continual(cfg) == MEP_OK);

  const std::string csv = slurp(dir1 / "accuracy.csv");
  CHECK(csv.find("pursuit,0,") != std::string::npos);
  CHECK(csv.find("pursuit,1,") != std::string::npos);
  CHECK(csv.find("naive_map,1,") != std::string::npos);
  CHECK(slurp(dir2 / "accuracy.csv") == csv);
  CHECK(fs::exists(dir1 / "stage_0_mixture.json"));
  CHECK(fs::exists(dir1 / "stage_1_mixture.json"));
  mep_config_free(cfg);
}

TEST_CASE("capi: missing data directory reported with the path") {
  mep_config* cfg = nullptr;
  const char* bad = R"({
    "continual": {"data_dir": "/nonexistent/mnist"},
    "seed": 1
  })";
  REQUIRE(mep_config_parse(bad, &cfg) == MEP_OK);
  auto dir = fresh_dir("mep_capi_baddata");
  REQUIRE(mep_config_set_output_dir(cfg, dir.string().c_str()) == MEP_OK);
  CHECK(mep_run_continual(cfg) == MEP_ERR_RUNTIME);
  CHECK(std::string(mep_last_error()).find("/nonexistent/mnist") != std::string::npos);
  mep_config_free(cfg);
}
