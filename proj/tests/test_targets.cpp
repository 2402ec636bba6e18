#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mep/diagnostics.hpp"
#include "mep/rng.hpp"
#include "mep/targets.hpp"
#include "oracles.hpp"

using namespace mep;
using namespace mep::targets;

namespace {

void check_fd_agreement(const TargetModel& t, std::size_t n_points, Rng& rng, double tol = 1e-5) {
  for (std::size_t p = 0; p < n_points; ++p) {
    Vec theta = rng.normal_vec(t.dim);
    for (double& x : theta) x *= 2.0;
    const Vec analytic = t.grad_log_density(theta);
    const Vec fd = oracles::fd_grad(t.log_density, theta);
    CHECK(oracles::max_rel_err(analytic, fd) < tol);
  }
}

}  // namespace

TEST_CASE("gaussian mixture target: standard normal values") {
  auto t = make_gaussian_mixture_target({{0.0}}, {{1.0}}, {1.0});
  CHECK(t.log_density({0.0}) == doctest::Approx(-0.9189385).epsilon(1e-6));
  CHECK(t.grad_log_density({1.0})[0] == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(t.log_normalizer.value() == 0.0);
}

TEST_CASE("gaussian mixture target: symmetry of two-mode mixture") {
  auto t = make_gaussian_mixture_target({{-2.0}, {2.0}}, {{1.0}, {1.0}}, {0.5, 0.5});
  for (double x : {0.3, 1.7, 4.0})
    CHECK(t.log_density({x}) == doctest::Approx(t.log_density({-x})).epsilon(1e-12));
}

TEST_CASE("gaussian mixture target: single component log pdf closed form") {
  auto t = make_gaussian_mixture_target({{1.5, -0.5}}, {{2.0, 0.5}}, {1.0});
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    Vec theta = rng.normal_vec(2);
    const double lhs = t.log_density(theta) + 0.5 * 2.0 * std::log(2.0 * std::numbers::pi) +
                       0.5 * (std::log(2.0) + std::log(0.5));
    const double rhs = -0.5 * ((theta[0] - 1.5) * (theta[0] - 1.5) / 2.0 +
                               (theta[1] + 0.5) * (theta[1] + 0.5) / 0.5);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("gaussian mixture target: input validation") {
  CHECK_THROWS(make_gaussian_mixture_target({}, {}, {}));
  CHECK_THROWS(make_gaussian_mixture_target({{0.0}}, {{-1.0}}, {1.0}));
  CHECK_THROWS(make_gaussian_mixture_target({{0.0}}, {{1.0}}, {0.9}));
  CHECK_THROWS(make_gaussian_mixture_target({{0.0}, {1.0, 2.0}}, {{1.0}, {1.0, 1.0}}, {0.5, 0.5}));
}

TEST_CASE("banana target: values and gradient at origin") {
  auto flat = make_banana_target(0.0, 1.0);
  CHECK(flat.log_density({0.0, 0.0}) == doctest::Approx(0.0).epsilon(1e-15));
  auto t = make_banana_target(1.0, 1.0);
  auto g = t.grad_log_density({0.0, 0.0});
  CHECK(g[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(g[1] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK_THROWS(make_banana_target(1.0, 0.0));
}

TEST_CASE("banana target: quadrature mass matches known normalizer") {
  auto t = make_banana_target(1.0, 1.0);
  // theta2 tracks theta1^2 - 1, so the ridge needs headroom on the upper side
  Box box{{{-6.0, 6.0}, {-8.0, 40.0}}};
  const double mass = diagnostics::grid_quadrature(
      [&](const Vec& th) { return std::exp(t.log_density(th)); }, box, 2001);
  CHECK(mass == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-3));
  CHECK(std::exp(t.log_normalizer.value()) == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-12));
}

TEST_CASE("logreg target: value at zero weights") {
  LabeledDataset data;
  data.n_classes = 3;
  data.features = {{1.0, 0.0}, {0.0, 1.0}, {0.5, -0.5}, {-1.0, 2.0}};
  data.labels = {0, 1, 2, 1};
  auto t = make_logreg_target(data, std_normal_log_pdf, std_normal_grad);
  const double expected = 4.0 * std::log(1.0 / 3.0) + 3.0 * 3.0 * (-0.9189385332046727);
  CHECK(t.log_density(Vec(9, 0.0)) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("logreg target: single-sample gradient at zero") {
  LabeledDataset data;
  data.n_classes = 2;
  data.features = {{2.0, -1.0}};
  data.labels = {0};
  auto t = make_logreg_target(
      data, [](const Vec&) { return 0.0; }, [](const Vec& th) { return Vec(th.size(), 0.0); });
  auto g = t.grad_log_density(Vec(6, 0.0));
  // softmax residual 1/2 for the true class row
  CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g[1] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(g[2] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(g[3] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("logreg target: dimension mismatch rejected") {
  LabeledDataset data;
  data.n_classes = 2;
  data.features = {{1.0}};
  data.labels = {0};
  auto t = make_logreg_target(data, std_normal_log_pdf, std_normal_grad);
  CHECK_THROWS(t.log_density(Vec(3, 0.0)));
}

TEST_CASE("finite-difference gradient agreement for all registered targets") {
  Rng rng(7);
  SUBCASE("gaussian mixture") {
    auto t = make_gaussian_mixture_target({{-1.0, 0.5}, {2.0, -2.0}}, {{0.7, 1.3}, {2.0, 0.4}},
                                          {0.3, 0.7});
    check_fd_agreement(t, 100, rng);
  }
  SUBCASE("banana") {
    auto t = make_banana_target(0.8, 1.2);
    check_fd_agreement(t, 100, rng);
  }
  SUBCASE("logreg at 50 random points") {
    LabeledDataset data;
    data.n_classes = 3;
    Rng drng(11);
    for (int i = 0; i < 12; ++i) {
      data.features.push_back(drng.normal_vec(2));
      data.labels.push_back(static_cast<int>(drng.index(3)));
    }
    auto t = make_logreg_target(data, std_normal_log_pdf, std_normal_grad);
    check_fd_agreement(t, 50, rng);
  }
}

TEST_CASE("dataset validation") {
  LabeledDataset d;
  d.n_classes = 2;
  CHECK_THROWS(d.validate());
  d.features = {{1.0}};
  d.labels = {5};
  CHECK_THROWS(d.validate());
  d.labels = {1};
  CHECK_NOTHROW(d.validate());
  d.features = {{std::numeric_limits<double>::infinity()}};
  CHECK_THROWS(d.validate());
}
