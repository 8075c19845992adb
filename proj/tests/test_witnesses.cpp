#include "catch_amalgamated.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include "fockwitness/oracle.hpp"
#include "fockwitness/states.hpp"
#include "fockwitness/witnesses.hpp"

using namespace fockwitness;
using namespace fockwitness::witnesses;
using Catch::Approx;
using cplx = std::complex<double>;

namespace {

MomentTable table(const StateSpec& s, int order = 6) { return states::analytic_moments(s, order); }

MomentTable coherent_table(cplx alpha, int order = 6) {
  return oracle::oracle_moments(oracle::coherent_state(alpha), order);
}

const auto kPsat11 = StateSpec::thermal(1.0, EngineeringOp::psa(1, 1));

}  // namespace

TEST_CASE("mandel Q", "[witnesses]") {
  REQUIRE(mandel_q(table(StateSpec::thermal(1.0)), 2) == Approx(1.0).epsilon(1e-14));
  REQUIRE(mandel_q(table(kPsat11), 2) == Approx(17.0 / 39).epsilon(1e-12));
  REQUIRE_THROWS_AS(mandel_q(table(StateSpec::thermal(0.0)), 2), ZeroMeanPhoton);

  SECTION("subtract-first dips below zero at small rbar") {
    bool negative = false;
    for (double r = 0.01; r <= 5.0; r += 0.01) negative |= mandel_q(table(StateSpec::thermal(r, EngineeringOp::psa(1, 1))), 2) < -1e-10;
    REQUIRE(negative);
  }
  SECTION("reduces to the variance identity") {
    for (const auto& spec : {kPsat11, StateSpec::thermal(2.0, EngineeringOp::pas(2, 1)),
                             StateSpec::even_coherent(1.3, EngineeringOp::psa(1, 2)), StateSpec::even_coherent(0.4)}) {
      const auto t = table(spec);
      const double n = t.diagonal(1);
      const double n2 = t.diagonal(2) + n;
      REQUIRE(mandel_q(t, 2) * n == Approx(n2 - n * n - n).epsilon(1e-10));
    }
  }
}

TEST_CASE("higher-order antibunching", "[witnesses]") {
  REQUIRE(hoa(table(kPsat11), 2) == Approx(17.0 / 9).epsilon(1e-12));
  REQUIRE(hoa(table(StateSpec::thermal(0.05, EngineeringOp::psa(1, 1))), 2) < 0.0);
  for (double a : {0.5, 1.0, 2.0})
    for (int l = 2; l <= 5; ++l) REQUIRE(hoa(coherent_table(a), l) == Approx(0.0).margin(1e-9 * std::pow(a, 2 * l)));
}

TEST_CASE("higher-order sub-poissonian statistics", "[witnesses]") {
  REQUIRE(hosps(table(StateSpec::thermal(1.0)), 2) == Approx(1.0).epsilon(1e-12));
  for (double a : {0.5, 1.0, 2.0})
    for (int l = 2; l <= 4; ++l) REQUIRE(hosps(coherent_table(a), l) == Approx(0.0).margin(1e-9));

  SECTION("direct definition") {
    // <(dn)^l> - <(dn)^l> of a Poisson law with the same mean
    for (const auto& spec : {kPsat11, StateSpec::thermal(0.5, EngineeringOp::pas(1, 2)),
                             StateSpec::even_coherent(1.2, EngineeringOp::pas(2, 1))})
      for (int l = 2; l <= 4; ++l) {
        const auto t = table(spec);
        const double direct = central_number_moment(t, l) - oracle::oracle_poissonian_central_moment(t.diagonal(1), l);
        INFO(spec.canonical() << " l=" << l);
        REQUIRE(hosps(t, l) == Approx(direct).epsilon(1e-10).margin(1e-12));
        REQUIRE(hosps_printed(t, l) == Approx((l % 2 ? -1 : 1) * direct).epsilon(1e-10).margin(1e-12));
      }
  }
}

TEST_CASE("higher-order squeezing", "[witnesses]") {
  REQUIRE(hos(table(StateSpec::thermal(1.0)), 2) == Approx(2.0).epsilon(1e-12));
  REQUIRE(hos(coherent_table(0.0), 2) == Approx(0.0).margin(1e-12));
  REQUIRE_THROWS_AS(hos(table(StateSpec::thermal(1.0)), 3), OddOrder);
  for (double a : {0.5, 1.0, 2.0}) {
    REQUIRE(hos(coherent_table(a), 2) == Approx(0.0).margin(1e-9));
    REQUIRE(hos(coherent_table(cplx(0.3, a)), 4) == Approx(0.0).margin(1e-8));
  }
  SECTION("bare thermal closed form") {
    // <(dX)^l> = (l-1)!! ((1+2 rbar)/2)^{l/2}
    for (double r : {0.5, 2.0})
      for (int l : {2, 4, 6}) {
        const double half = specfun::double_factorial(l - 1) / std::pow(2.0, l / 2);
        const double q = specfun::double_factorial(l - 1) * std::pow((1 + 2 * r) / 2, l / 2);
        REQUIRE(hos(table(StateSpec::thermal(r)), l) == Approx((q - half) / half).epsilon(1e-10));
      }
  }
}

TEST_CASE("agarwal-tara parameter", "[witnesses]") {
  REQUIRE(agarwal_tara(table(StateSpec::thermal(1.0))) == Approx(1.0 / 7).epsilon(1e-12));
  REQUIRE(agarwal_tara(table(StateSpec::thermal(1.0)), AgarwalTaraVariant::power_of_mean) ==
          Approx(-1.0).epsilon(1e-12));
  for (double r : {0.5, 1.0, 2.0, 5.0}) REQUIRE(agarwal_tara(table(StateSpec::thermal(r))) > 0.0);
  for (double a : {0.5, 1.0, 2.0}) {
    REQUIRE_THROWS_AS(agarwal_tara(coherent_table(a)), SingularDenominator);
    REQUIRE_THROWS_AS(agarwal_tara(coherent_table(a), AgarwalTaraVariant::power_of_mean), SingularDenominator);
  }
  REQUIRE_THROWS_AS(agarwal_tara(table(StateSpec::thermal(1.0), 3)), InvalidArgument);
  REQUIRE(parse_agarwal_tara_variant("power_of_mean") == AgarwalTaraVariant::power_of_mean);
  REQUIRE_THROWS_AS(parse_agarwal_tara_variant("other"), InvalidArgument);
}

TEST_CASE("klyshko criterion", "[witnesses]") {
  REQUIRE(klyshko(StateSpec::thermal(1.0), 2) == Approx(1.0 / 256).epsilon(1e-13));
  // no population above the single-photon level
  REQUIRE(klyshko(StateSpec::thermal(0.0, EngineeringOp::pas(0, 1)), 3) == 0.0);
  REQUIRE_THROWS_AS(klyshko(StateSpec::thermal(0.0, EngineeringOp::psa(1, 1)), 0), DegenerateState);

  SECTION("geometric distributions") {
    for (double r : {0.5, 1.0, 2.0}) {
      const double x = r / (1 + r);
      const double amp = 1 / (1 + r);
      for (int m = 0; m <= 6; ++m)
        REQUIRE(klyshko(StateSpec::thermal(r), m) == Approx(amp * amp * std::pow(x, 2 * m + 2)).epsilon(1e-12));
    }
  }
  SECTION("subtract-first even coherent goes negative at m = 4") {
    bool negative = false;
    for (double a = 0.05; a <= 3.0; a += 0.05)
      negative |= klyshko(StateSpec::even_coherent(a, EngineeringOp::psa(2, 1)), 4) < -1e-10;
    REQUIRE(negative);
  }
}

TEST_CASE("husimi zeros", "[witnesses]") {
  Grid g;
  g.steps = 81;
  SECTION("thermal: only tail points, no isolated minima") {
    const auto spec = StateSpec::thermal(1.0);
    for (const auto& z : husimi_zero_scan(spec, g, 1e-6)) REQUIRE(std::max(std::abs(z.real()), std::abs(z.imag())) > 3.0);
    const auto values = witnesses::husimi_grid([&](cplx b) { return states::husimi(spec, b); }, g);
    const auto w = husimi_zero_witness(values, g, 1e-6, Provenance::analytic);
    REQUIRE(w.value == 0.0);
    REQUIRE_FALSE(w.nonclassical);
  }
  SECTION("subtract-first thermal with q > p vanishes at the origin") {
    const auto zeros = husimi_zero_scan(StateSpec::thermal(1.0, EngineeringOp::psa(1, 3)), g, 1e-6);
    REQUIRE(std::find(zeros.begin(), zeros.end(), cplx(0.0, 0.0)) != zeros.end());
  }
  SECTION("add-first even coherent has zeros") {
    Grid w4;
    w4.steps = 121;
    const auto spec = StateSpec::even_coherent(2.0, EngineeringOp::pas(2, 4));
    REQUIRE_FALSE(husimi_zero_scan(spec, w4, 1e-6).empty());
    const auto values = witnesses::husimi_grid([&](cplx b) { return states::husimi(spec, b); }, w4);
    REQUIRE(husimi_zero_witness(values, w4, 1e-6, Provenance::analytic).nonclassical);
  }
  SECTION("grid validation and ordering") {
    Grid bad;
    bad.steps = 1;
    REQUIRE_THROWS_AS(bad.validate(), InvalidArgument);
    bad.steps = 5;
    bad.re_min = 1.0;
    bad.re_max = 0.0;
    REQUIRE_THROWS_AS(bad.validate(), InvalidArgument);
    Grid small{-1, 1, -1, 1, 3};
    // row-major: Im outer
    const std::vector<double> v = {1, 1, 1, 0, 1, 1, 1, 1, 0};
    const auto z = zeros_in_grid(v, small, 0.5);
    REQUIRE(z == std::vector<cplx>{{-1, 0}, {1, 1}});
  }
}

TEST_CASE("witness dispatch", "[witnesses]") {
  REQUIRE(parse_witness("mandel") == Witness::mandel);
  REQUIRE(parse_witness("a3") == Witness::agarwal_tara);
  REQUIRE(parse_witness("husimi_zero") == Witness::husimi_zero);
  REQUIRE_THROWS_AS(parse_witness("wigner"), InvalidArgument);
  for (auto w : {Witness::mandel, Witness::hoa, Witness::hosps, Witness::hos, Witness::husimi_zero,
                 Witness::agarwal_tara, Witness::klyshko})
    REQUIRE(parse_witness(to_string(w)) == w);

  const auto t = table(kPsat11);
  const auto r = evaluate(Witness::mandel, t, 2);
  REQUIRE(r.order == 2);
  REQUIRE(r.value == Approx(17.0 / 39));
  REQUIRE_FALSE(r.nonclassical);
  REQUIRE(r.provenance == Provenance::analytic);
  REQUIRE(evaluate(Witness::agarwal_tara, table(StateSpec::thermal(1.0)), 0, AgarwalTaraVariant::power_of_mean).nonclassical);
  REQUIRE_THROWS_AS(evaluate(Witness::klyshko, t, 2), InvalidArgument);
}

TEST_CASE("analytic and oracle witnesses agree", "[witnesses]") {
  for (const auto& spec : {kPsat11, StateSpec::thermal(0.3, EngineeringOp::pas(2, 1)),
                           StateSpec::even_coherent(1.5, EngineeringOp::pas(1, 2)),
                           StateSpec::even_coherent(0.8, EngineeringOp::psa(2, 2))}) {
    oracle::BuildOptions o;
    o.tail_tol = 1e-18;
    o.moment_weight = 12;
    const auto ot = oracle::oracle_moments(oracle::build_truncated(spec, o), 6);
    const auto at = table(spec);
    INFO(spec.canonical());
    for (int l = 2; l <= 4; ++l) {
      REQUIRE(mandel_q(at, l) == Approx(mandel_q(ot, l)).epsilon(1e-8).margin(1e-10));
      REQUIRE(hoa(at, l) == Approx(hoa(ot, l)).epsilon(1e-8).margin(1e-10));
      REQUIRE(hosps(at, l) == Approx(hosps(ot, l)).epsilon(1e-8).margin(1e-10));
    }
    for (int l : {2, 4, 6}) REQUIRE(hos(at, l) == Approx(hos(ot, l)).epsilon(1e-8).margin(1e-10));
    REQUIRE(agarwal_tara(at) == Approx(agarwal_tara(ot)).epsilon(1e-8).margin(1e-10));
  }
}
