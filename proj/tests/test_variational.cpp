#include <doctest.h>

#include <cmath>

#include "mep/diagnostics.hpp"
#include "mep/variational.hpp"
#include "oracles.hpp"

using namespace mep;
using namespace mep::variational;

TEST_CASE("component log pdf closed-form values") {
  CHECK(component_log_pdf({{0.0}, {0.0}}, {0.0}) == doctest::Approx(-0.9189385).epsilon(1e-6));
  CHECK(component_log_pdf({{0.0, 0.0}, {0.0, 0.0}}, {0.0, 0.0}) ==
        doctest::Approx(-1.8378771).epsilon(1e-6));
  CHECK(component_log_pdf({{1.0}, {std::log(2.0)}}, {1.0}) ==
        doctest::Approx(-0.9189385 - 0.6931472).epsilon(1e-6));
  CHECK_THROWS(component_log_pdf({{0.0}, {0.0}}, {0.0, 1.0}));
}

TEST_CASE("component entropy closed form") {
  CHECK(component_entropy({{0.0}, {0.0}}) == doctest::Approx(1.4189385).epsilon(1e-6));
  CHECK(component_entropy({{0.0, 0.0}, {0.0, 0.0}}) == doctest::Approx(2.8378771).epsilon(1e-6));
  CHECK(component_entropy({{0.0}, {std::log(2.0)}}) == doctest::Approx(2.1120857).epsilon(1e-6));
}

TEST_CASE("reparam sample") {
  CHECK(reparam_sample({{3.0}, {0.0}}, {0.0})[0] == 3.0);
  CHECK(reparam_sample({{0.0}, {0.0}}, {1.7})[0] == 1.7);
  CHECK(reparam_sample({{3.0}, {std::log(2.0)}}, {1.0})[0] == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("mixture log pdf") {
  GaussianComponent c{{0.0}, {0.0}};
  MixtureApprox single{{c}, {1.0}};
  CHECK(mixture_log_pdf(single, {0.4}) ==
        doctest::Approx(component_log_pdf(c, {0.4})).epsilon(1e-14));

  MixtureApprox twin{{c, c}, {0.5, 0.5}};
  CHECK(mixture_log_pdf(twin, {0.4}) ==
        doctest::Approx(component_log_pdf(c, {0.4})).epsilon(1e-14));

  MixtureApprox m{{{{-2.0}, {0.0}}, {{2.0}, {0.0}}}, {0.3, 0.7}};
  CHECK(mixture_log_pdf(m, {0.0}) == doctest::Approx(-2.9189385).epsilon(1e-6));
}

TEST_CASE("mixture grad log pdf") {
  MixtureApprox single{{{{0.0}, {0.0}}}, {1.0}};
  CHECK(mixture_grad_log_pdf(single, {1.0})[0] == doctest::Approx(-1.0).epsilon(1e-12));

  MixtureApprox sym{{{{-3.0}, {0.0}}, {{3.0}, {0.0}}}, {0.5, 0.5}};
  CHECK(mixture_grad_log_pdf(sym, {0.0})[0] == doctest::Approx(0.0).epsilon(1e-12));

  MixtureApprox m{{{{-1.0, 0.3}, {0.1, -0.2}}, {{0.5, 1.2}, {-0.4, 0.3}}, {{2.0, -1.0}, {0.0, 0.5}}},
                  {0.2, 0.5, 0.3}};
  Rng rng(13);
  for (int i = 0; i < 20; ++i) {
    Vec theta = rng.normal_vec(2);
    auto fd = oracles::fd_grad([&](const Vec& t) { return mixture_log_pdf(m, t); }, theta);
    CHECK(oracles::max_rel_err(mixture_grad_log_pdf(m, theta), fd) < 1e-5);
  }
}

TEST_CASE("mixture sampling statistics") {
  SUBCASE("degenerate scale collapses to the mean") {
    MixtureApprox q{{{{1.5, -2.0}, {-20.0, -20.0}}}, {1.0}};
    Rng rng(1);
    for (const auto& s : mixture_sample(q, rng, 5)) {
      CHECK(std::abs(s[0] - 1.5) < 1e-6);
      CHECK(std::abs(s[1] + 2.0) < 1e-6);
    }
  }
  SUBCASE("empirical mean of standard normal draws") {
    MixtureApprox q{{{{0.0}, {0.0}}}, {1.0}};
    Rng rng(2);
    double acc = 0.0;
    const std::size_t n = 1000000;
    for (const auto& s : mixture_sample(q, rng, n)) acc += s[0];
    CHECK(std::abs(acc / static_cast<double>(n)) < 3e-3);
  }
  SUBCASE("component frequencies match weights") {
    MixtureApprox q{{{{-100.0}, {0.0}}, {{100.0}, {0.0}}}, {0.3, 0.7}};
    Rng rng(3);
    std::size_t low = 0;
    const std::size_t n = 100000;
    for (const auto& s : mixture_sample(q, rng, n))
      if (s[0] < 0.0) ++low;
    CHECK(std::abs(static_cast<double>(low) / static_cast<double>(n) - 0.3) < 1e-2);
  }
}

TEST_CASE("mixture extend") {
  MixtureApprox q{{{{0.0}, {0.0}}}, {1.0}};
  GaussianComponent h{{1.0}, {0.0}};
  auto q2 = mixture_extend(q, h, 0.5);
  CHECK(q2.weights[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(q2.weights[1] == doctest::Approx(0.5).epsilon(1e-15));

  MixtureApprox q3{{{{0.0}, {0.0}}, {{1.0}, {0.0}}}, {0.6, 0.4}};
  auto q4 = mixture_extend(q3, h, 0.25);
  CHECK(q4.weights[0] == doctest::Approx(0.45).epsilon(1e-14));
  CHECK(q4.weights[1] == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(q4.weights[2] == doctest::Approx(0.25).epsilon(1e-14));

  CHECK_THROWS(mixture_extend(q, h, 0.0));
  CHECK_THROWS(mixture_extend(q, h, 1.0));

  // pointwise convex combination of pdfs
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    Vec theta = rng.normal_vec(1);
    const double lhs = std::exp(mixture_log_pdf(q2, theta));
    const double rhs =
        0.5 * std::exp(mixture_log_pdf(q, theta)) + 0.5 * std::exp(component_log_pdf(h, theta));
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("monte carlo entropy consistency") {
  GaussianComponent c{{0.5, -1.0}, {0.3, -0.4}};
  MixtureApprox q{{c}, {1.0}};
  Rng rng(6);
  const std::size_t n = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (const auto& s : mixture_sample(q, rng, n)) {
    const double v = -component_log_pdf(c, s);
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sumsq / n - mean * mean) / n);
  CHECK(std::abs(mean - component_entropy(c)) < 3.0 * se);
}

TEST_CASE("mixture pdf integrates to one (quadrature)") {
  MixtureApprox q{{{{-1.0}, {0.2}}, {{2.0}, {-0.3}}}, {0.4, 0.6}};
  Box box{{{-12.0, 12.0}}};
  const double mass = diagnostics::grid_quadrature(
      [&](const Vec& th) { return std::exp(mixture_log_pdf(q, th)); }, box, 4001);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("json round trip is bit-faithful") {
  MixtureApprox q{{{{0.1234567890123456, -2.0 / 3.0}, {0.3, -0.4}},
                   {{1e-9, 17.5}, {std::log(2.0), 0.0}}},
                  {1.0 / 3.0, 2.0 / 3.0}};
  auto q2 = mixture_from_json(mixture_to_json(q));
  REQUIRE(q2.size() == q.size());
  CHECK(q2.weights == q.weights);
  for (std::size_t j = 0; j < q.size(); ++j) {
    CHECK(q2.components[j].mean == q.components[j].mean);
    CHECK(q2.components[j].log_std == q.components[j].log_std);
  }
}

TEST_CASE("mixture validation") {
  MixtureApprox bad{{{{0.0}, {0.0}}}, {0.5}};
  CHECK_THROWS(bad.validate());
  MixtureApprox ok{{{{0.0}, {0.0}}}, {1.0}};
  CHECK_NOTHROW(ok.validate());
}
