#include "catch_amalgamated.hpp"

#include <cmath>
#include <complex>
#include <cstdlib>
#include <numbers>
#include <sstream>

#include "fockwitness/oracle.hpp"
#include "fockwitness/states.hpp"
#include "support/reference.hpp"

using namespace fockwitness;
using namespace fockwitness::oracle;
using Catch::Approx;
using cplx = std::complex<double>;

TEST_CASE("ladder matrices", "[oracle]") {
  const int dim = GENERATE(2, 10, 64);
  const Eigen::MatrixXd a = ladder_matrix(dim);
  const Eigen::MatrixXd comm = a * a.transpose() - a.transpose() * a;
  // identity on the interior block up to sqrt(k)^2 rounding; the edge entry carries the truncation
  const Eigen::MatrixXd off = comm.topLeftCorner(dim - 1, dim - 1) - Eigen::MatrixXd::Identity(dim - 1, dim - 1);
  REQUIRE(off.cwiseAbs().maxCoeff() <= 1e-13);
  REQUIRE(comm(dim - 1, dim - 1) == Approx(1.0 - dim));
}

TEST_CASE("bare thermal build", "[oracle]") {
  const auto st = build_truncated(StateSpec::thermal(1.0), 1e-12);
  REQUIRE(st.is_diagonal());
  REQUIRE(st.cutoff() >= 40);
  REQUIRE(st.cutoff() <= 128);
  REQUIRE(st.tail_mass() < 1e-12);
  REQUIRE(st.trace() == Approx(1.0).epsilon(1e-14));
  for (int r = 0; r < 30; ++r) REQUIRE(st.diagonal()(r) == Approx(std::ldexp(1.0, -(r + 1))).epsilon(1e-11));
  REQUIRE(oracle_moment(st, 1, 1).real() == Approx(1.0).margin(1e-10));
  REQUIRE(oracle_photon_prob(st, 0) == Approx(0.5).epsilon(1e-11));
  REQUIRE(oracle_photon_prob(st, st.cutoff() + 3) == 0.0);
  REQUIRE(oracle_husimi(st, 0.0) == Approx(1.0 / (2 * std::numbers::pi)).margin(1e-10));
}

TEST_CASE("engineered thermal weights", "[oracle]") {
  SECTION("add-first with p = q = 1") {
    const auto st = build_truncated(StateSpec::thermal(1.0, EngineeringOp::pas(1, 1)), 1e-14);
    // (r+1)^2 2^-r normalized by 12
    for (int r = 0; r < 40; ++r)
      REQUIRE(st.diagonal()(r) == Approx((r + 1.0) * (r + 1.0) * std::ldexp(1.0, -r) / 12.0).epsilon(1e-12));
    REQUIRE(oracle_moment(st, 1, 1).real() == Approx(10.0 / 3).margin(1e-9));
  }
  SECTION("literal weight sequence") {
    for (double rbar : {0.1, 1.0, 2.5, 5.0})
      for (int p = 0; p <= 3; ++p)
        for (int q = 0; q <= 3; ++q) {
          const auto spec = StateSpec::thermal(rbar, EngineeringOp::pas(p, q));
          const auto st = build_truncated(spec, 1e-16);
          const auto ref = reftest::thermal_populations(spec, 4000);
          long double total = 0.0L;
          for (auto v : ref) total += v;
          INFO(spec.canonical());
          for (int k = 0; k < st.cutoff(); ++k)
            REQUIRE(std::abs(st.diagonal()(k) - static_cast<double>(ref[static_cast<std::size_t>(k)] / total)) <= 1e-12);
        }
  }
  SECTION("subtraction from vacuum") {
    REQUIRE_THROWS_AS(build_truncated(StateSpec::thermal(0.0, EngineeringOp::psa(1, 0))), DegenerateState);
    REQUIRE_THROWS_AS(build_truncated(StateSpec::even_coherent(0.0, EngineeringOp::psa(2, 2))), DegenerateState);
  }
}

TEST_CASE("cutoff limits", "[oracle]") {
  BuildOptions opts;
  opts.max_cutoff = 64;
  opts.tail_tol = 1e-16;
  REQUIRE_THROWS_AS(build_truncated(StateSpec::thermal(5.0), opts), CutoffExceeded);

  const auto small = build_truncated(StateSpec::even_coherent(0.3), 1e-12);
  REQUIRE_THROWS_AS(oracle_moment(small, small.cutoff() / 2, 0), CutoffExceeded);
  REQUIRE_THROWS_AS(oracle_husimi(small, cplx(0.5 * small.cutoff(), 0.0)), CutoffExceeded);

  SECTION("environment override") {
    ::setenv("FOCKWITNESS_MAX_CUTOFF", "128", 1);
    REQUIRE(max_cutoff_from_env() == 128);
    ::setenv("FOCKWITNESS_MAX_CUTOFF", "junk", 1);
    REQUIRE(max_cutoff_from_env() == kDefaultMaxCutoff);
    ::unsetenv("FOCKWITNESS_MAX_CUTOFF");
    REQUIRE(max_cutoff_from_env() == kDefaultMaxCutoff);
  }
}

TEST_CASE("pure and density-matrix paths agree", "[oracle]") {
  BuildOptions dm;
  dm.tail_tol = 1e-16;
  dm.representation = Representation::density_matrix;
  for (const cplx alpha : {cplx(0.7, 0), cplx(1.2, -0.4), cplx(2.0, 0)})
    for (const auto& op : {EngineeringOp::none(), EngineeringOp::pas(2, 1), EngineeringOp::psa(1, 3)}) {
      const auto spec = StateSpec::even_coherent(alpha, op);
      const auto pure = build_truncated(spec, 1e-16);
      const auto dens = build_truncated(spec, dm);
      REQUIRE(pure.is_pure());
      REQUIRE(dens.is_density());
      INFO(spec.canonical());
      REQUIRE(dens.trace() == Approx(1.0).epsilon(1e-12));
      // Hermitian and positive
      REQUIRE((dens.density() - dens.density().adjoint()).cwiseAbs().maxCoeff() < 1e-14);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dens.density());
      REQUIRE(es.eigenvalues().minCoeff() > -1e-10);
      for (int m = 0; m <= 3; ++m)
        for (int n = 0; n <= 3; ++n) REQUIRE(std::abs(oracle_moment(pure, m, n) - oracle_moment(dens, m, n)) < 1e-12 * std::max(1.0, std::abs(oracle_moment(pure, m, n))));
      for (int k = 0; k < 10; ++k) REQUIRE(oracle_photon_prob(pure, k) == Approx(oracle_photon_prob(dens, k)).margin(1e-12));
      REQUIRE(oracle_husimi(pure, {0.4, 0.9}) == Approx(oracle_husimi(dens, {0.4, 0.9})).margin(1e-12));
    }
}

TEST_CASE("even coherent quantities", "[oracle]") {
  const auto bare = build_truncated(StateSpec::even_coherent(1.0), 1e-16);
  REQUIRE(oracle_moment(bare, 1, 1).real() == Approx(std::tanh(1.0)).epsilon(1e-12));
  REQUIRE(oracle_moment(bare, 2, 0).real() == Approx(1.0).epsilon(1e-12));
  REQUIRE(std::abs(oracle_moment(bare, 1, 0)) < 1e-14);

  const auto psa = build_truncated(StateSpec::even_coherent(1.0, EngineeringOp::psa(1, 1)), 1e-16);
  for (int m = 1; m < 15; m += 2) REQUIRE(oracle_photon_prob(psa, m) < 1e-14);

  SECTION("vacuum husimi") {
    const auto vac = build_truncated(StateSpec::thermal(0.0), 1e-16);
    for (const cplx b : {cplx(0, 0), cplx(0.5, 0.5), cplx(-1.2, 2.0)})
      REQUIRE(oracle_husimi(vac, b) == Approx(std::exp(-std::norm(b)) / std::numbers::pi).epsilon(1e-12));
  }
}

TEST_CASE("cutoff stability", "[oracle]") {
  for (const auto& spec : {StateSpec::thermal(2.0, EngineeringOp::psa(2, 3)), StateSpec::thermal(5.0, EngineeringOp::pas(3, 1)),
                           StateSpec::even_coherent(2.0, EngineeringOp::pas(2, 4))}) {
    BuildOptions opts;
    opts.tail_tol = 1e-16;
    opts.moment_weight = 8;
    const auto a = build_truncated(spec, opts);
    opts.min_cutoff = 2 * a.cutoff();
    const auto b = build_truncated(spec, opts);
    INFO(spec.canonical());
    for (int k = 0; k <= 3; ++k) {
      const cplx va = oracle_moment(a, k, k);
      REQUIRE(std::abs(va - oracle_moment(b, k, k)) < 1e-10 * std::abs(va));
    }
    REQUIRE(oracle_husimi(a, {1.0, 0.3}) == Approx(oracle_husimi(b, {1.0, 0.3})).epsilon(1e-10));
  }
}

TEST_CASE("poissonian central moments", "[oracle]") {
  for (double mu : {0.2, 1.0, 3.5, 12.0}) {
    REQUIRE(oracle_poissonian_central_moment(mu, 1) == Approx(0.0).margin(1e-12));
    REQUIRE(oracle_poissonian_central_moment(mu, 2) == Approx(mu).epsilon(1e-12));
    REQUIRE(oracle_poissonian_central_moment(mu, 3) == Approx(mu).epsilon(1e-12));
    REQUIRE(oracle_poissonian_central_moment(mu, 4) == Approx(mu * (1 + 3 * mu)).epsilon(1e-12));
  }
  REQUIRE(oracle_poissonian_central_moment(1.0, 3) == Approx(1.0).epsilon(1e-12));
  REQUIRE(oracle_poissonian_central_moment(0.0, 2) == 0.0);
}

TEST_CASE("fixtures", "[oracle]") {
  SECTION("round trip") {
    const std::vector<Fixture> fx = {{"thermal:rbar=1.0:bare", "prob(0)", 64, 0.5},
                                     {"ecs:alpha=(1.0,0):PAS(1,1)", "moment(1,1)", 32, 2.0556401277852747}};
    std::stringstream ss;
    write_fixtures(ss, fx);
    REQUIRE(read_fixtures(ss) == fx);
    std::istringstream bad("thermal:rbar=1.0:bare prob(0)\n");
    REQUIRE_THROWS_AS(read_fixtures(bad), InvalidArgument);
    REQUIRE_THROWS_AS(read_fixtures(std::string("/nonexistent/fixtures.txt")), InvalidArgument);
  }
  SECTION("quantity ids") {
    REQUIRE(parse_quantity("moment(3,1)").kind == Quantity::Kind::moment);
    REQUIRE(parse_quantity("moment(3,1)").n == 1);
    REQUIRE(parse_quantity("prob(7)").m == 7);
    REQUIRE(parse_quantity("husimi(0.5,-0.5)").beta == cplx(0.5, -0.5));
    REQUIRE_THROWS_AS(parse_quantity("wigner(0,0)"), InvalidArgument);
  }
  SECTION("frozen values reproduce") {
    const auto fx = read_fixtures(std::string(FOCKWITNESS_DEFAULT_FIXTURES));
    REQUIRE(fx.size() >= 10);
    for (const auto& f : fx) {
      const auto spec = StateSpec::parse(f.spec);
      const auto q = parse_quantity(f.quantity);
      BuildOptions base;
      base.tail_tol = 1e-18;
      const auto st = build_truncated(spec, options_for(q, base));
      INFO(f.spec << " " << f.quantity);
      REQUIRE(evaluate(st, q) == Approx(f.value).epsilon(1e-10).margin(1e-300));
    }
  }
  SECTION("freezing requires cutoff stability") {
    const auto spec = StateSpec::thermal(1.0, EngineeringOp::pas(1, 1));
    const auto f = freeze_fixture(spec, "moment(1,1)", [](const TruncatedState& s) { return oracle_moment(s, 1, 1).real(); });
    REQUIRE(f.spec == "thermal:rbar=1.0:PAS(1,1)");
    REQUIRE(f.value == Approx(10.0 / 3).epsilon(1e-10));
    // a quantity that depends on the cutoff itself can never be frozen
    REQUIRE_THROWS_AS(freeze_fixture(spec, "cutoff", [](const TruncatedState& s) { return double(s.cutoff()); }),
                      NonConvergent);
  }
}
