#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "fdx/procedure.hpp"
#include "fdx/stepdown.hpp"
#include "fdx/weighting.hpp"
#include "support/oracle.hpp"

using namespace fdx;
using doctest::Approx;

TEST_CASE("weight profile") {
  const WeightProfile wp({1.0, 3.0, 0.0, 2.0});
  CHECK(wp.mean() == Approx(1.5));
  CHECK(wp.sorted_desc() == std::vector<double>{3.0, 2.0, 1.0, 0.0});
  CHECK(wp.top_mean(1) == 3.0);
  CHECK(wp.top_mean(2) == 2.5);
  CHECK(wp.top_mean(4) == wp.mean());
  CHECK_THROWS_AS(WeightProfile({}), std::invalid_argument);
  CHECK_THROWS_AS(WeightProfile({1.0, -1.0}), std::invalid_argument);
  CHECK_THROWS_AS(WeightProfile({0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("AM weighted p-values") {
  const WeightProfile wp({2.0, 1.0, 1.0});  // mean 4/3
  const auto p = weighted_pvalues_am(std::vector<double>{0.1, 0.9, 0.3}, wp);
  CHECK(p[0] == Approx(0.0666667).epsilon(1e-6));
  CHECK(p[1] == 1.0);
  CHECK(p[2] == Approx(0.4).epsilon(1e-14));
  const WeightProfile flat({2.0, 2.0});
  CHECK(weighted_pvalues_am(std::vector<double>{0.1, 0.7}, flat) == std::vector<double>{0.1, 0.7});
  const WeightProfile zero({0.0, 2.0});
  CHECK(weighted_pvalues_am(std::vector<double>{0.01, 0.5}, zero)[0] == 1.0);
}

TEST_CASE("GM weighted p-values") {
  const WeightProfile wp({2.0, 1.0, 1.0});
  const auto p = weighted_pvalues_gm(std::vector<double>{0.1, 0.0, 1.0}, wp);
  CHECK(p[0] == Approx(1.0 - std::pow(0.9, 2.0 / 3.0)).epsilon(1e-14));
  CHECK(p[0] == Approx(0.067830).epsilon(1e-5));
  CHECK(p[1] == 0.0);
  CHECK(p[2] == 1.0);
  const WeightProfile flat({2.0, 2.0});
  CHECK(weighted_pvalues_gm(std::vector<double>{0.1, 0.7}, flat) == std::vector<double>{0.1, 0.7});
  const WeightProfile zero({0.0, 2.0});
  CHECK(weighted_pvalues_gm(std::vector<double>{0.01, 0.5}, zero)[0] == 1.0);
  CHECK(weighted_pvalues_gm(std::vector<double>{0.0, 0.5}, zero)[0] == 0.0);
}

TEST_CASE("AM and GM CDFs agree to first order near zero") {
  const WeightProfile wp({0.5, 1.0, 3.0, 0.2});
  const auto am = am_family(wp);
  const auto gm = gm_family(wp);
  for (std::size_t i = 0; i < 4; ++i) {
    double prev_gap = 1.0;
    for (const double t : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
      const double ratio = am[i](t) / gm[i](t);
      const double gap = std::abs(ratio - 1.0);
      CHECK(gap < prev_gap);
      CHECK(gap <= 5.0 * t);
      prev_gap = gap;
    }
  }
}

TEST_CASE("wLR-AM closed form") {
  const std::size_t m = 2;
  const WeightProfile wp({2.0, 0.0});
  const auto cv = wlr_am_critical_values(m, 0.05, 0.5, wp);
  CHECK(cv.tau[0] == Approx(0.25).epsilon(1e-14));

  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t mm = 1 + rep * 3;
    const auto w = oracle::random_weights(rng, mm);
    const WeightProfile prof(w);
    const auto closed = wlr_am_critical_values(mm, 0.1, 0.4, prof);
    const auto lr = critical_values(make_transform(ProcedureSpec{Procedure::LR, 0.1, 0.4, std::nullopt, nullptr}, mm), 0.4);
    const auto generic = critical_values(make_transform(ProcedureSpec{Procedure::WLR_AM, 0.1, 0.4, w, nullptr}, mm), 0.4);
    for (std::size_t l = 0; l < mm; ++l) {
      CHECK(std::abs(closed.tau[l] - generic.tau[l]) <= 1e-9);
      const double k = static_cast<double>(AlphaLevel(0.1).floor_times(l + 1) + 1);
      const double lr_exact = 0.4 * k / static_cast<double>(m_of_ell(l + 1, mm, 0.1));
      CHECK(closed.tau[l] <= lr_exact * (1.0 + 1e-15));
    }
    const std::vector<double> ones(mm, 1.0);
    const auto unit = wlr_am_critical_values(mm, 0.1, 0.4, WeightProfile(ones));
    for (std::size_t l = 0; l < mm; ++l) CHECK(std::abs(unit.tau[l] - lr.tau[l]) <= 1e-9);
  }
}

TEST_CASE("wGR-GM closed form") {
  const auto gr10 = critical_values(make_transform(ProcedureSpec{Procedure::GR, 0.05, 0.5, std::nullopt, nullptr}, 10), 0.5);
  // Exponent 0.5 applied to tau^GR_1 = 1 - 0.5^(1/10): exactly 1 - 0.5^(1/20) = 0.0340637...
  CHECK(std::abs(1.0 - std::pow(1.0 - gr10.tau[0], 0.5) - (1.0 - std::pow(0.5, 0.05))) <= 1e-12);

  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t mm = 1 + rep * 3;
    const auto w = oracle::random_weights(rng, mm);
    const WeightProfile prof(w);
    const auto closed = wgr_gm_critical_values(mm, 0.1, 0.4, prof);
    const auto gr = critical_values(make_transform(ProcedureSpec{Procedure::GR, 0.1, 0.4, std::nullopt, nullptr}, mm), 0.4);
    const auto generic = critical_values(make_transform(ProcedureSpec{Procedure::WGR_GM, 0.1, 0.4, w, nullptr}, mm), 0.4);
    for (std::size_t l = 0; l < mm; ++l) {
      CHECK(std::abs(closed.tau[l] - generic.tau[l]) <= 1e-9);
      CHECK(closed.tau[l] <= gr.tau[l] + 1e-15);
    }
    const std::vector<double> ones(mm, 1.0);
    const auto unit = wgr_gm_critical_values(mm, 0.1, 0.4, WeightProfile(ones));
    for (std::size_t l = 0; l < mm; ++l) CHECK(std::abs(unit.tau[l] - gr.tau[l]) <= 1e-9);
  }
}

TEST_CASE("wGR-GM rejections: closed form and generic HGR on the GM family") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t m = 5 + rep % 60;
    const auto w = oracle::random_weights(rng, m);
    const WeightProfile prof(w);
    std::vector<double> raw(m);
    for (auto& p : raw) p = std::pow(u(rng), 1.0 + 4.0 * u(rng));
    const double zeta = 0.1 + 0.8 * u(rng);

    const auto weighted = weighted_pvalues_gm(raw, prof);
    const auto via_closed = stepdown_explicit(weighted, wgr_gm_critical_values(m, 0.1, zeta, prof));
    const auto generic = run_procedure(ProcedureSpec{Procedure::WGR_GM, 0.1, zeta, w, nullptr}, raw);
    auto hgr_spec = ProcedureSpec{Procedure::HGR, 0.1, zeta, std::nullopt,
                                  std::make_shared<const CdfFamily>(gm_family(prof))};
    const auto hgr = reject(weighted, make_transform(hgr_spec, m), zeta);
    CHECK(via_closed.rejected == generic.result.rejected);
    CHECK(hgr.rejected == generic.result.rejected);
  }
}

TEST_CASE("prepare_pvalues") {
  const std::vector<double> p{0.1, 0.4};
  const std::vector<double> w{2.0, 1.0};
  CHECK(prepare_pvalues(Procedure::PB, p, nullptr) == p);
  CHECK(prepare_pvalues(Procedure::WLR_AM, p, &w) == weighted_pvalues_am(p, WeightProfile(w)));
  CHECK(prepare_pvalues(Procedure::WGR_GM, p, &w) == weighted_pvalues_gm(p, WeightProfile(w)));
  CHECK_THROWS(prepare_pvalues(Procedure::WGR_GM, p, nullptr));
}
