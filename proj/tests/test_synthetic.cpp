#include <doctest.h>

#include <cmath>
#include <set>

#include "irtgrid/errors.hpp"
#include "irtgrid/synthetic.hpp"
#include "support/oracles.hpp"

using namespace irtgrid;

TEST_CASE("single-cell generator emits one record") {
  const auto data = generate_synthetic(1, 1, CurveVariant::OnePL, {}, 1.0, 9);
  REQUIRE(data.records.size() == 1);
  CHECK(data.records[0].model_id == data.model_ids[0]);
  CHECK(data.records[0].item_id == data.item_ids[0]);
  CHECK((data.records[0].correct == 0 || data.records[0].correct == 1));
}

TEST_CASE("density controls the exact observation count") {
  const auto data = generate_synthetic(100, 200, CurveVariant::OnePL, {}, 0.3, 4);
  CHECK(data.records.size() == static_cast<std::size_t>(std::llround(0.3 * 100 * 200)));

  std::set<std::pair<std::string, std::string>> distinct;
  for (const auto& rec : data.records) {
    distinct.emplace(rec.model_id, rec.item_id);
  }
  CHECK(distinct.size() == data.records.size());  // sampled without replacement
}

TEST_CASE("generation is deterministic for a fixed seed") {
  const auto a = generate_synthetic(20, 30, CurveVariant::TwoPL, {}, 0.5, 321);
  const auto b = generate_synthetic(20, 30, CurveVariant::TwoPL, {}, 0.5, 321);
  CHECK(a.thetas == b.thetas);
  CHECK(a.items == b.items);
  CHECK(a.records == b.records);

  const auto c = generate_synthetic(20, 30, CurveVariant::TwoPL, {}, 0.5, 322);
  CHECK(a.records != c.records);
}

TEST_CASE("curve variants populate exactly their parameters") {
  const auto one = generate_synthetic(2, 50, CurveVariant::OnePL, {}, 1.0, 1);
  for (const auto& p : one.items) {
    CHECK(p.alpha == 1.0);
    CHECK(p.c == 0.0);
    CHECK(p.d == 1.0);
  }
  const auto two = generate_synthetic(2, 50, CurveVariant::TwoPL, {}, 1.0, 1);
  bool any_alpha = false;
  for (const auto& p : two.items) {
    any_alpha = any_alpha || p.alpha != 1.0;
    CHECK(p.c == 0.0);
  }
  CHECK(any_alpha);
  const auto four = generate_synthetic(2, 50, CurveVariant::FourPL, {}, 1.0, 1);
  bool any_c = false, any_d = false;
  for (const auto& p : four.items) {
    CHECK_NOTHROW(p.validate());
    any_c = any_c || p.c > 0.0;
    any_d = any_d || p.d < 1.0;
  }
  CHECK(any_c);
  CHECK(any_d);
}

TEST_CASE("empirical facility matches the quadrature expectation") {
  // 10k models on a handful of items: the observed fraction correct should
  // sit within binomial noise of E_theta[icc(theta)].
  const std::size_t n_models = 10000;
  for (const auto variant :
       {CurveVariant::OnePL, CurveVariant::TwoPL, CurveVariant::ThreePL, CurveVariant::FourPL}) {
    const auto data = generate_synthetic(n_models, 3, variant, {}, 1.0, 2024);
    std::vector<std::size_t> correct(3, 0);
    for (const auto& rec : data.records) {
      const std::size_t i = rec.item_id.back() - '0';
      correct[i] += static_cast<std::size_t>(rec.correct);
    }
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& p = data.items[i];
      const double expected =
          oracles::gauss_expect([&](double theta) { return icc(theta, p); }, 0.0, 1.0);
      const double observed = static_cast<double>(correct[i]) / static_cast<double>(n_models);
      const double sigma = std::sqrt(expected * (1.0 - expected) / n_models);
      // 4 sigma: the 10k sampled abilities add noise beyond the pure
      // binomial term.
      CHECK(std::abs(observed - expected) < 4.0 * sigma + 1e-12);
    }
  }
}

TEST_CASE("invalid generator arguments are rejected") {
  CHECK_THROWS_AS(generate_synthetic(0, 5, CurveVariant::OnePL, {}, 1.0, 1), PreconditionError);
  CHECK_THROWS_AS(generate_synthetic(5, 5, CurveVariant::OnePL, {}, 0.0, 1), PreconditionError);
  CHECK_THROWS_AS(generate_synthetic(5, 5, CurveVariant::OnePL, {}, 1.1, 1), PreconditionError);
  SamplerSpec bad;
  bad.theta_sd = 0.0;
  CHECK_THROWS_AS(generate_synthetic(5, 5, CurveVariant::OnePL, bad, 1.0, 1), PreconditionError);
  SamplerSpec overlap;
  overlap.c_max = 0.8;  // collides with d_min
  CHECK_THROWS_AS(generate_synthetic(5, 5, CurveVariant::FourPL, overlap, 1.0, 1),
                  PreconditionError);
}
