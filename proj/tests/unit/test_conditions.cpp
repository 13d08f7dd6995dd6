#include <cmath>

#include "doctest.h"
#include "qfclt/conditions.hpp"
#include "qfclt/error.hpp"
#include "qfclt/orlicz.hpp"

using namespace qfclt;

namespace {

const auto kGauss = InnovationSpec::gaussian(1.0);

FieldModel geometric(int d = 2) { return FieldModel::linear(d, CoefficientFamily::geometric(0.5), 8); }

}  // namespace

TEST_CASE("delta model Hannan series is constant after the first level") {
  const auto delta = FieldModel::linear(2, CoefficientFamily::delta(), 1);
  const auto diag = check_condition(delta, InnovationSpec::gaussian(2.0), ConditionKind::Hannan2, 5);
  for (double p : diag.partial_sums) CHECK(p == doctest::Approx(2.0));
  CHECK(diag.verdict == Verdict::Converges);
}

TEST_CASE("geometric linear model converges on every applicable series") {
  for (auto which : {ConditionKind::Hannan2, ConditionKind::HannanPhi, ConditionKind::RatioL2, ConditionKind::RatioPhi,
                     ConditionKind::CondLin, ConditionKind::CondLinPractical}) {
    const auto diag = check_condition(geometric(), kGauss, which, 6);
    CHECK_MESSAGE(diag.verdict == Verdict::Converges, to_string(which));
    for (std::size_t i = 1; i < diag.partial_sums.size(); ++i) CHECK(diag.partial_sums[i] >= diag.partial_sums[i - 1]);
  }
  const auto pr = check_condition(geometric(), kGauss, ConditionKind::CondLinPractical, 6);
  CHECK(pr.increments.back() < 1e-3);
}

TEST_CASE("Hannan partial sums equal the coefficient sums") {
  const auto m = geometric();
  const auto diag = check_condition(m, InnovationSpec::laplace(1.0), ConditionKind::Hannan2, 4);
  const double l2 = InnovationSpec::laplace(1.0).l2_norm();
  for (std::size_t l = 0; l < diag.levels.size(); ++l) {
    double s = 0.0;
    for (std::int64_t a = 0; a < diag.levels[l]; ++a)
      for (std::int64_t b = 0; b < diag.levels[l]; ++b) s += std::pow(0.5, static_cast<double>(a + b));
    CHECK(std::abs(diag.partial_sums[l] - l2 * s) <= 1e-12);
  }
}

TEST_CASE("slow decay never converges") {
  const auto neg = slow_decay_control(2);
  for (auto which : {ConditionKind::Hannan2, ConditionKind::HannanPhi, ConditionKind::RatioL2, ConditionKind::RatioPhi,
                     ConditionKind::CondLin, ConditionKind::CondLinPractical}) {
    const auto diag = check_condition(neg, kGauss, which, 6);
    CHECK_MESSAGE(diag.verdict != Verdict::Converges, to_string(which));
  }
  CHECK(check_condition(neg, kGauss, ConditionKind::CondLin, 6).verdict == Verdict::Diverges);
}

TEST_CASE("verdicts do not flip from converges to diverges as K grows") {
  for (const auto& m : {geometric(), slow_decay_control(2), FieldModel::linear(2, CoefficientFamily::polynomial(2.0), 4)}) {
    for (auto which : {ConditionKind::Hannan2, ConditionKind::CondLin, ConditionKind::RatioL2}) {
      bool converged = false;
      for (int K = 3; K <= 7; ++K) {
        const auto v = check_condition(m, kGauss, which, K).verdict;
        if (converged) CHECK(v != Verdict::Diverges);
        converged = converged || v == Verdict::Converges;
      }
    }
  }
}

TEST_CASE("unsupported pairs are not computable") {
  const auto v = FieldModel::volterra(2, CoefficientFamily::geometric(0.5), 2);
  try {
    check_condition(v, kGauss, ConditionKind::CondLin, 3);
    FAIL("expected not-computable");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::not_computable);
  }
  CHECK_THROWS_AS(check_condition(geometric(), kGauss, ConditionKind::CondVolt, 3), Error);
  CHECK_THROWS_AS(condition_implication_check(v, kGauss, 3), Error);
  CHECK_THROWS_AS(check_condition(geometric(), kGauss, ConditionKind::Hannan2, 0), Error);
}

TEST_CASE("Volterra series") {
  const auto v = FieldModel::volterra(2, CoefficientFamily::geometric(0.5), 2);
  for (auto which : {ConditionKind::Hannan2, ConditionKind::RatioL2, ConditionKind::CondVolt, ConditionKind::CondVoltPractical}) {
    const auto diag = check_condition(v, kGauss, which, 5);
    CHECK_MESSAGE(diag.verdict == Verdict::Converges, to_string(which));
  }
  ConditionOptions opts;
  opts.mc_samples = 1500;
  const auto hp = check_condition(v, kGauss, ConditionKind::HannanPhi, 4, opts);
  CHECK(hp.monte_carlo);
  CHECK(hp.verdict == Verdict::Converges);
  const auto rp = check_condition(v, kGauss, ConditionKind::RatioPhi, 4, opts);
  CHECK(rp.verdict == Verdict::Converges);
}

TEST_CASE("implication check") {
  for (const auto& m : {geometric(), FieldModel::linear(2, CoefficientFamily::delta(), 1), slow_decay_control(2)}) {
    const auto rep = condition_implication_check(m, kGauss, 5);
    CHECK(rep.consistent);
  }
  const auto g = condition_implication_check(geometric(), kGauss, 5);
  CHECK(g.ratio_phi.verdict == Verdict::Converges);
  CHECK(g.hannan_phi.verdict == Verdict::Converges);
  CHECK(condition_implication_check(slow_decay_control(2), kGauss, 5).ratio_phi.verdict != Verdict::Converges);
}

TEST_CASE("non-Gaussian ratioPhi uses sampled norms") {
  ConditionOptions opts;
  opts.mc_samples = 2000;
  const auto diag = check_condition(geometric(), InnovationSpec::rademacher(), ConditionKind::RatioPhi, 4, opts);
  CHECK(diag.monte_carlo);
  CHECK(diag.verdict == Verdict::Converges);
}

TEST_CASE("innovation Phi norms") {
  const double c1 = young_inverse(YoungFamily(2), InverseKind::Phi, 1.0);
  CHECK(innovation_phi_norm(InnovationSpec::rademacher(), 2) == doctest::Approx(1.0 / c1));
  const auto xs = innovation_samples(kGauss, 400000, 17);
  CHECK(innovation_phi_norm(kGauss, 2) == doctest::Approx(luxemburg_point(YoungFamily(2), xs)).epsilon(0.01));
  const auto us = innovation_samples(InnovationSpec::uniform(1.0), 400000, 17);
  CHECK(innovation_phi_norm(InnovationSpec::uniform(1.0), 3) ==
        doctest::Approx(luxemburg_point(YoungFamily(3), us)).epsilon(0.01));
  CHECK(std::isinf(innovation_phi_norm(InnovationSpec::heavy_tail(2.0), 2)));
  // homogeneity
  CHECK(innovation_phi_norm(InnovationSpec::gaussian(3.0), 2) == doctest::Approx(3.0 * innovation_phi_norm(kGauss, 2)).epsilon(1e-8));
}

TEST_CASE("classification rule") {
  CHECK(classify_increments({1.0, 0.0, 0.0}) == Verdict::Converges);
  CHECK(classify_increments({1.0, 2.0, 3.0}) == Verdict::Diverges);
  CHECK(classify_increments({1.0, 0.8, 0.7}) == Verdict::Inconclusive);
  CHECK(classify_increments({1.0, 0.4, 0.1}) == Verdict::Converges);
  CHECK(classify_increments({1.0, std::numeric_limits<double>::infinity(), 0.0}) == Verdict::Diverges);
  CHECK(classify_increments({1.0, 0.4}) == Verdict::Inconclusive);
  CHECK(classify_increments({1.0, 0.4, 0.3}, {0.0, 0.0, 0.2}) == Verdict::Converges);
}

TEST_CASE("practical weight dominance is reported per level") {
  const auto dom = practical_dominance(geometric(), 6);
  REQUIRE(dom.size() == 6);
  for (const auto& l : dom) CHECK(l.terms_dominate);
  // 1/Phi_2^{-1}(2) exceeds (log 2 / 2)^{1/2}: the first level does not dominate
  CHECK_FALSE(dom.front().weight_dominates);
}
