// Regenerates the golden oracle values. Each value is frozen only after it is
// stable under doubling the cutoff.
//
//   freeze_fixtures [output-file]

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "fockwitness/oracle.hpp"

using namespace fockwitness;

int main(int argc, char** argv) {
  const std::vector<std::pair<StateSpec, std::string>> wanted = {
      {StateSpec::thermal(1.0), "moment(1,1)"},
      {StateSpec::thermal(1.0), "prob(0)"},
      {StateSpec::thermal(1.0, EngineeringOp::pas(1, 1)), "moment(1,1)"},
      {StateSpec::thermal(1.0, EngineeringOp::psa(1, 1)), "moment(1,1)"},
      {StateSpec::thermal(1.0, EngineeringOp::psa(1, 1)), "moment(2,2)"},
      {StateSpec::thermal(1.0, EngineeringOp::pas(2, 1)), "prob(0)"},
      {StateSpec::thermal(2.0, EngineeringOp::psa(2, 4)), "husimi(0.5,-0.5)"},
      {StateSpec::even_coherent(1.0), "moment(2,0)"},
      {StateSpec::even_coherent(1.0, EngineeringOp::pas(1, 1)), "moment(1,1)"},
      {StateSpec::even_coherent(1.0, EngineeringOp::psa(1, 1)), "prob(2)"},
      {StateSpec::even_coherent(0.7, EngineeringOp::psa(3, 2)), "moment(3,1)"},
      {StateSpec::even_coherent(2.0, EngineeringOp::pas(2, 4)), "husimi(1.0,0)"},
  };

  oracle::BuildOptions base;
  base.tail_tol = 1e-18;

  std::vector<oracle::Fixture> out;
  try {
    for (const auto& [spec, id] : wanted) {
      const auto q = oracle::parse_quantity(id);
      out.push_back(oracle::freeze_fixture(
          spec, id, [&](const oracle::TruncatedState& st) { return oracle::evaluate(st, q); },
          oracle::options_for(q, base)));
    }
  } catch (const std::exception& e) {
    std::cerr << "freeze_fixtures: " << e.what() << '\n';
    return 1;
  }

  if (argc > 1) {
    std::ofstream os(argv[1]);
    if (!os) {
      std::cerr << "freeze_fixtures: cannot write " << argv[1] << '\n';
      return 1;
    }
    oracle::write_fixtures(os, out);
  } else {
    oracle::write_fixtures(std::cout, out);
  }
  return 0;
}
