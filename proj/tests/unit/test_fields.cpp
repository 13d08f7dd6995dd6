#include <cmath>
#include <vector>

#include "doctest.h"
#include "qfclt/error.hpp"
#include "qfclt/fields.hpp"
#include "qfclt/stats.hpp"

using namespace qfclt;

namespace {

const SeedContext kCtx{123, 456, 7};
const auto kGauss = InnovationSpec::gaussian(1.0);

std::vector<FieldModel> small_models(int d) {
  std::vector<FieldModel> out;
  out.push_back(FieldModel::linear(d, CoefficientFamily::delta(), 1));
  out.push_back(FieldModel::linear(d, CoefficientFamily::geometric(0.5), 3));
  out.push_back(FieldModel::linear(d, CoefficientFamily::polynomial(1.2), 2));
  out.push_back(FieldModel::volterra(d, CoefficientFamily::geometric(0.6), 2));
  MultiIndex u(d), v(d, 1);
  MultiIndex w(d);
  w[0] = 2;
  out.push_back(FieldModel::volterra_explicit(d, {{u, v, 1.0}, {w, u, -0.5}, {v, w, 0.25}}));
  out.push_back(FieldModel::iid_diff(d));
  return out;
}

}  // namespace

TEST_CASE("field_eval examples") {
  const auto delta = FieldModel::linear(2, CoefficientFamily::delta(), 1);
  const MultiIndex k{3, -1};
  CHECK(field_eval(delta, kGauss, kCtx, k) == innovation_at(kGauss, kCtx, k));

  const auto v = FieldModel::volterra_explicit(2, {{MultiIndex{0, 0}, MultiIndex{1, 1}, 1.0}});
  CHECK(field_eval(v, kGauss, kCtx, k) ==
        doctest::Approx(innovation_at(kGauss, kCtx, k) * innovation_at(kGauss, kCtx, k - MultiIndex{1, 1})));

  const auto geo = FieldModel::linear(2, CoefficientFamily::geometric(0.5), 20);
  double s = 0.0;
  for (int a = 0; a <= 20; ++a)
    for (int b = 0; b <= 20; ++b)
      s += std::pow(0.5, a + b) * innovation_at(kGauss, kCtx, MultiIndex{k[0] - a, k[1] - b});
  CHECK(field_eval(geo, kGauss, kCtx, k) == doctest::Approx(s).epsilon(1e-13));
  CHECK(field_eval(FieldModel::iid_diff(2), kGauss, kCtx, k) == innovation_at(kGauss, kCtx, k));
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(FieldModel::volterra_explicit(2, {{MultiIndex{1, 1}, MultiIndex{1, 1}, 1.0}}), Error);
  CHECK_THROWS_AS(FieldModel::linear(2, CoefficientFamily::geometric(1.5), 3), Error);
  CHECK_THROWS_AS(FieldModel::linear(2, CoefficientFamily::explicit_list({{MultiIndex{-1, 0}, 1.0}}), 1), Error);
  CHECK_THROWS_AS(FieldModel::linear(2, CoefficientFamily::geometric(0.5), 0), Error);
  const auto e = FieldModel::linear(2, CoefficientFamily::explicit_list({{MultiIndex{3, 1}, 2.0}}), 1);
  CHECK(e.radius() == 3);
  CHECK(e.as_linear()->coef(MultiIndex{3, 1}) == 2.0);
}

TEST_CASE("family tails") {
  const auto g = CoefficientFamily::geometric(0.5);
  CHECK(g.tail_pow(0, 1) == doctest::Approx(2.0));
  CHECK(g.tail_pow(3, 2) == doctest::Approx(std::pow(0.25, 3) / 0.75));
  const auto p = CoefficientFamily::polynomial(1.0);
  CHECK(std::isinf(p.tail_pow(0, 1)));
  double direct = 0.0;
  for (int t = 5; t < 2000000; ++t) direct += std::pow(1.0 + t, -2.0);
  CHECK(p.tail_pow(5, 2) == doctest::Approx(direct + 1.0 / 2000001.0).epsilon(1e-9));
  CHECK(CoefficientFamily::delta().tail_pow(-1, 2) == 1.0);
  CHECK(CoefficientFamily::delta().tail_pow(1, 2) == 0.0);
}

TEST_CASE("conditional expectation of sums over corners") {
  const auto iid = FieldModel::iid_diff(2);
  const Rect n(MultiIndex{4, 3});
  CHECK(cond_expect_sum(iid, kGauss, kCtx, n, MultiIndex{4, 0}) == 0.0);
  const auto delta = FieldModel::linear(2, CoefficientFamily::delta(), 1);
  CHECK(cond_expect_sum(delta, kGauss, kCtx, n, MultiIndex{0, 0}) == 0.0);
  try {
    cond_expect_sum(delta, kGauss, kCtx, n, MultiIndex{2, 0});
    FAIL("expected invalid corner");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_corner);
  }
  CHECK(cond_expect_sum(delta, kGauss, kCtx, n, MultiIndex{4, 3}) ==
        doctest::Approx(cond_expect_sum(delta, kGauss, kCtx, n, MultiIndex{4, 3})));
}

TEST_CASE("conditional expectation matches a resampling oracle") {
  // E[S_n | F_c] for c = (3,0): keep innovations u <= c, redraw the rest.
  const auto geo = FieldModel::linear(2, CoefficientFamily::geometric(0.5), 6);
  const Rect n(MultiIndex{3, 3});
  const MultiIndex c{3, 0};
  const double exact = cond_expect_sum(geo, kGauss, kCtx, n, c);
  const int reps = 4000;
  std::vector<double> vals(reps);
  for (int r = 0; r < reps; ++r) {
    const SeedContext fresh{derive_seed(9, r), derive_seed(10, r), 77};
    double s = 0.0;
    for (const auto& k : rect_iter(n))
      for (const auto& t : geo.as_linear()->terms) {
        const MultiIndex w = k - t.lag;
        s += t.a * (precedes(w, c) ? innovation_at(kGauss, kCtx, w) : innovation_at(kGauss, fresh, w));
      }
    vals[r] = s;
  }
  const double m = mean(vals), se = std::sqrt(sample_variance(vals) / reps);
  CHECK(std::abs(m - exact) <= 4.0 * se);
}

TEST_CASE("Volterra conditional expectation keeps only both-measurable products") {
  const auto v = FieldModel::volterra_explicit(2, {{MultiIndex{0, 0}, MultiIndex{1, 0}, 1.0}});
  const MultiIndex k{1, 1};
  // factors xi_{(1,1)} xi_{(0,1)}
  CHECK(cond_expect_field(v, kGauss, kCtx, k, MultiIndex{1, 1}) == doctest::Approx(field_eval(v, kGauss, kCtx, k)));
  CHECK(cond_expect_field(v, kGauss, kCtx, k, MultiIndex{0, 1}) == 0.0);
  CHECK(cond_expect_field(v, kGauss, kCtx, k, MultiIndex{0, 0}) == 0.0);
}

TEST_CASE("projection equals the inclusion-exclusion oracle") {
  for (int d : {2, 3}) {
    for (const auto& model : small_models(d)) {
      int checked = 0;
      for_each_in_box(MultiIndex(d, -2), MultiIndex(d, 2), [&](const MultiIndex& j) {
        for_each_in_box(MultiIndex(d, -2), MultiIndex(d, 2), [&](const MultiIndex& k) {
          const double a = projection(model, kGauss, kCtx, j, k);
          const double b = projection_oracle(model, kGauss, kCtx, j, k);
          CHECK(std::abs(a - b) <= 1e-12);
          ++checked;
        });
      });
      CHECK(checked > 0);
    }
  }
}

TEST_CASE("projection closed forms") {
  const auto geo = FieldModel::linear(2, CoefficientFamily::geometric(0.5), 3);
  const MultiIndex zero(2);
  const double xi0 = innovation_at(kGauss, kCtx, zero);
  CHECK(projection(geo, kGauss, kCtx, zero, MultiIndex{1, 2}) == doctest::Approx(0.125 * xi0));
  CHECK(projection(geo, kGauss, kCtx, zero, MultiIndex{-1, 2}) == 0.0);
  const auto iid = FieldModel::iid_diff(2);
  const MultiIndex k{2, 1};
  CHECK(projection(iid, kGauss, kCtx, k, k) == innovation_at(kGauss, kCtx, k));
  CHECK(projection(iid, kGauss, kCtx, zero, k) == 0.0);
  // d = 2 expansion has four signed terms
  const MultiIndex j{1, 1};
  const double manual = cond_expect_field(geo, kGauss, kCtx, k, j) - cond_expect_field(geo, kGauss, kCtx, k, j - unit(2, 0)) -
                        cond_expect_field(geo, kGauss, kCtx, k, j - unit(2, 1)) +
                        cond_expect_field(geo, kGauss, kCtx, k, j - MultiIndex{1, 1});
  CHECK(projection_oracle(geo, kGauss, kCtx, j, k) == doctest::Approx(manual));
  CHECK(projection_oracle(geo, kGauss, kCtx, MultiIndex{3, 0}, k) == 0.0);
}

TEST_CASE("regularity and reconstruction") {
  for (const auto& model : small_models(2)) {
    const MultiIndex k{1, 2};
    const int R = std::max(model.radius(), 1);
    double s = 0.0;
    for_each_in_box(k - MultiIndex(2, R), k, [&](const MultiIndex& j) { s += projection(model, kGauss, kCtx, j, k); });
    CHECK(std::abs(s - field_eval(model, kGauss, kCtx, k)) <= 1e-12);
    if (model.kind() == ModelKind::Linear) {
      CHECK(projection(model, kGauss, kCtx, MultiIndex{2, 0}, k) == 0.0);
      CHECK(projection(model, kGauss, kCtx, MultiIndex{0, 3}, k) == 0.0);
    }
  }
}

TEST_CASE("projections at distinct sites are orthogonal") {
  const auto v = FieldModel::volterra(2, CoefficientFamily::geometric(0.6), 2);
  const MultiIndex j1{0, 0}, j2{1, 0}, k1{1, 1}, k2{2, 1};
  const int reps = 10000;
  std::vector<double> prod(reps);
  for (int r = 0; r < reps; ++r) {
    const SeedContext c{derive_seed(1, r), derive_seed(2, r), 0};
    prod[r] = projection(v, kGauss, c, j1, k1) * projection(v, kGauss, c, j2, k2);
  }
  CHECK(std::abs(mean(prod)) <= 4.0 * std::sqrt(sample_variance(prod) / reps));
}

TEST_CASE("sigma2 of the reference models") {
  CHECK(sigma2_theoretical(FieldModel::linear(2, CoefficientFamily::delta(), 1), InnovationSpec::gaussian(2.0)).sigma2 ==
        doctest::Approx(4.0));
  CHECK(sigma2_theoretical(FieldModel::iid_diff(3), InnovationSpec::rademacher()).sigma2 == 1.0);
  const auto rep = sigma2_theoretical(FieldModel::linear(2, CoefficientFamily::geometric(0.5), 20), kGauss);
  const double s = (2.0 - std::pow(0.5, 20)) * (2.0 - std::pow(0.5, 20));
  CHECK(rep.sigma2 == doctest::Approx(s * s).epsilon(1e-14));
  REQUIRE(rep.sigma2_limit.has_value());
  CHECK(*rep.sigma2_limit == doctest::Approx(16.0));
  CHECK_FALSE(rep.d0_description.empty());
}

TEST_CASE("Volterra sigma2 agrees with simulated D_0") {
  const auto v = FieldModel::volterra(2, CoefficientFamily::geometric(0.5), 2);
  const auto rep = sigma2_theoretical(v, kGauss);
  CHECK(rep.sigma2 > 0.0);
  const int reps = 20000;
  std::vector<double> sq(reps);
  for (int r = 0; r < reps; ++r) {
    const SeedContext c{derive_seed(3, r), 0, 0};
    double d0 = 0.0;
    for_each_in_box(MultiIndex(2), MultiIndex(2, 2), [&](const MultiIndex& i) { d0 += projection(v, kGauss, c, MultiIndex(2), i); });
    CHECK(d0 == doctest::Approx(chaos_eval(rep.d0, kGauss, c)));
    sq[r] = d0 * d0;
  }
  CHECK(std::abs(mean(sq) - rep.sigma2) <= 4.0 * std::sqrt(sample_variance(sq) / reps));
}

TEST_CASE("chaos utilities") {
  const Chaos c = {{MultiIndex{0, 0}, std::nullopt, 1.0}, {MultiIndex{0, 0}, std::nullopt, 2.0},
                   {MultiIndex{1, 0}, MultiIndex{0, 1}, 1.5}, {MultiIndex{0, 1}, MultiIndex{1, 0}, -1.5}};
  const auto cc = canonicalize(c);
  REQUIRE(cc.size() == 1);
  CHECK(cc[0].coef == 3.0);
  CHECK(chaos_l2_norm(c, InnovationSpec::gaussian(2.0)) == doctest::Approx(6.0));
  const Chaos q = {{MultiIndex{0, 0}, MultiIndex{0, 1}, 1.0}};
  CHECK(chaos_l2_norm(q, InnovationSpec::gaussian(2.0)) == doctest::Approx(4.0));
  const auto xs = chaos_samples(q, kGauss, 20000, 5, true);
  CHECK(sample_variance(xs) == doctest::Approx(1.0).epsilon(0.05));
}
