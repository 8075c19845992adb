#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fockwitness/fockwitness.hpp"

#ifndef FOCKWITNESS_DEFAULT_FIXTURES
#define FOCKWITNESS_DEFAULT_FIXTURES "tests/fixtures/golden.txt"
#endif

namespace fockwitness::cli {

enum ExitCode : int {
  kOk = 0,
  kVerifyFailed = 1,
  kConfigError = 2,
  kDegenerate = 3,
  kNonConvergent = 4,
  kSingular = 5,
};

/// Parsed command line; flags win over --config values, which win over defaults.
struct CliConfig {
  std::string command;

  std::optional<std::string> family;
  std::string op = "none";
  int p = 0;
  int q = 0;
  std::optional<double> rbar;
  std::optional<double> alpha_re;
  double alpha_im = 0.0;

  std::optional<int> m;
  std::optional<int> n;
  int l = 2;
  std::string name;
  std::string variant = "number_moments";
  std::string engine = "analytic";

  std::vector<std::string> variants;
  std::optional<double> range_min;
  std::optional<double> range_max;
  std::optional<int> steps;
  bool bare = false;

  double grid_min = -4.0;
  double grid_max = 4.0;
  int grid_steps = 121;
  double threshold = 1e-6;

  std::string figure_id;
  std::optional<std::string> out;
  double tol = 1e-8;
  std::vector<std::string> suites;
  std::string fixtures = FOCKWITNESS_DEFAULT_FIXTURES;
};

inline Family parse_family(const std::string& s) {
  if (s == "thermal") return Family::thermal;
  if (s == "ecs" || s == "even_coherent") return Family::even_coherent;
  throw InvalidArgument("unknown family '" + s + "'");
}

inline EngineeringOp op_from(const CliConfig& c) {
  EngineeringOp op;
  if (c.op == "none")
    op = EngineeringOp::none();
  else if (c.op == "pas")
    op = EngineeringOp::pas(c.p, c.q);
  else if (c.op == "psa")
    op = EngineeringOp::psa(c.p, c.q);
  else
    throw InvalidArgument("unknown op '" + c.op + "'");
  if (op.order == OpOrder::none && (c.p != 0 || c.q != 0))
    throw InvalidArgument("--p/--q need --op pas or --op psa");
  op.validate();
  return op;
}

inline Family require_family(const CliConfig& c) {
  if (!c.family) throw InvalidArgument("--family is required");
  return parse_family(*c.family);
}

/// Single state from the flags; thermal needs --rbar, ecs needs --alpha.
inline StateSpec spec_from(const CliConfig& c) {
  const Family f = require_family(c);
  const EngineeringOp op = op_from(c);
  StateSpec spec;
  if (f == Family::thermal) {
    if (!c.rbar) throw InvalidArgument("thermal state needs --rbar");
    if (c.alpha_re || c.alpha_im != 0.0) throw InvalidArgument("thermal state does not take --alpha");
    spec = StateSpec::thermal(*c.rbar, op);
  } else {
    if (!c.alpha_re) throw InvalidArgument("even coherent state needs --alpha");
    if (c.rbar) throw InvalidArgument("even coherent state does not take --rbar");
    spec = StateSpec::even_coherent({*c.alpha_re, c.alpha_im}, op);
  }
  spec.validate();
  return spec;
}

inline witnesses::Grid grid_from(const CliConfig& c) {
  witnesses::Grid g{c.grid_min, c.grid_max, c.grid_min, c.grid_max, c.grid_steps};
  g.validate();
  return g;
}

// ---------------------------------------------------------------------------

inline int cmd_moment(const CliConfig& c, std::ostream& out, std::ostream& err) {
  const StateSpec spec = spec_from(c);
  if (!c.m || !c.n) throw InvalidArgument("moment needs --m and --n");
  const int m = *c.m;
  const int n = *c.n;
  if (m < 0 || n < 0) throw InvalidArgument("--m and --n must be >= 0");
  const auto engine = sweep::parse_engine(c.engine);

  std::complex<double> value;
  if (engine == sweep::Engine::oracle) {
    const auto st = oracle::build_truncated(spec, verify::tight_options(m + n));
    value = oracle::oracle_moment(st, m, n);
  } else {
    value = states::moment(spec, m, n);
    if (engine == sweep::Engine::both) {
      const auto st = oracle::build_truncated(spec, verify::tight_options(m + n));
      err << "oracle deviation " << format_real(verify::rel_dev(value, oracle::oracle_moment(st, m, n))) << '\n';
    }
  }
  out << m << ',' << n << ',' << format_real(value.real()) << ',' << format_real(value.imag()) << '\n';
  return kOk;
}

inline int cmd_witness(const CliConfig& c, std::ostream& out, std::ostream& err) {
  if (c.name.empty()) throw InvalidArgument("witness needs --name");
  const auto w = witnesses::parse_witness(c.name);
  const StateSpec spec = spec_from(c);
  const auto engine = sweep::parse_engine(c.engine);
  const auto at_variant = witnesses::parse_agarwal_tara_variant(c.variant);
  const Provenance prov = engine == sweep::Engine::oracle ? Provenance::oracle : Provenance::analytic;

  witnesses::WitnessResult r;
  if (w == witnesses::Witness::husimi_zero) {
    const auto grid = grid_from(c);
    std::vector<double> values;
    if (engine == sweep::Engine::oracle) {
      values = sweep::husimi_grid(spec, grid, sweep::Engine::oracle).values;
    } else {
      values = witnesses::husimi_grid([&](std::complex<double> b) { return states::husimi(spec, b); }, grid);
    }
    r = witnesses::husimi_zero_witness(values, grid, c.threshold, prov);
  } else {
    const int order = w == witnesses::Witness::klyshko ? c.m.value_or(0) : c.l;
    const sweep::PointRequest req{w, order, at_variant};
    if (w == witnesses::Witness::hos && order % 2 != 0) throw OddOrder("hos: order must be even");
    const double value =
        engine == sweep::Engine::oracle ? sweep::evaluate_oracle(spec, req) : sweep::evaluate_analytic(spec, req);
    if (engine == sweep::Engine::both)
      err << "oracle deviation " << format_real(sweep::deviation(value, sweep::evaluate_oracle(spec, req))) << '\n';
    r = witnesses::make_result(w, w == witnesses::Witness::agarwal_tara ? 0 : order, value, prov);
  }
  out << witnesses::to_string(r.witness) << ',' << r.order << ',' << format_real(r.value) << ','
      << (r.nonclassical ? "true" : "false") << '\n';
  return kOk;
}

inline int cmd_sweep(const CliConfig& c, std::ostream& out, std::ostream& err) {
  if (c.name.empty()) throw InvalidArgument("sweep needs --name");
  const Family family = require_family(c);
  sweep::SweepRequest req;
  req.point.witness = witnesses::parse_witness(c.name);
  req.point.order = req.point.witness == witnesses::Witness::klyshko ? c.m.value_or(0) : c.l;
  req.point.variant = witnesses::parse_agarwal_tara_variant(c.variant);
  if (req.point.witness == witnesses::Witness::hos && req.point.order % 2 != 0)
    throw OddOrder("hos: order must be even");
  req.family = family;
  req.engine = sweep::parse_engine(c.engine);
  req.include_bare = c.bare;
  req.range = sweep::default_range(family);
  if (c.range_min) req.range.min = *c.range_min;
  if (c.range_max) req.range.max = *c.range_max;
  if (c.steps) req.range.steps = *c.steps;
  if (c.variants.empty()) {
    req.variants = {op_from(c)};
  } else {
    for (const auto& v : c.variants) req.variants.push_back(EngineeringOp::parse_label(v));
  }

  const auto table = sweep::sweep(req);
  if (c.out) {
    std::ofstream os(*c.out, std::ios::binary);
    if (!os) throw InvalidArgument("cannot write " + *c.out);
    sweep::write_csv(os, table);
  } else {
    sweep::write_csv(out, table);
  }
  if (table.max_deviation) {
    err << "max deviation " << format_real(*table.max_deviation) << '\n';
    if (!(*table.max_deviation <= c.tol)) return kVerifyFailed;
  }
  return kOk;
}

inline int cmd_figure(const CliConfig& c, std::ostream& out, std::ostream&) {
  sweep::FigureOptions opt;
  opt.engine = sweep::parse_engine(c.engine);
  opt.variant = witnesses::parse_agarwal_tara_variant(c.variant);
  if (c.steps) opt.steps = *c.steps;
  opt.husimi_steps = c.grid_steps;
  const auto bundle = sweep::figure_pack(c.figure_id, opt);
  const std::filesystem::path dir = c.out.value_or(".");
  const auto files = sweep::write_bundle(bundle, dir);

  bool ok = true;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto& panel = bundle.panels[i];
    out << (dir / files[i]).string() << ',' << panel.caption;
    if (const auto dev = panel.max_deviation()) {
      out << ",max_deviation=" << format_real(*dev);
      ok = ok && *dev <= c.tol;
    }
    out << '\n';
  }
  return ok ? kOk : kVerifyFailed;
}

inline int cmd_verify(const CliConfig& c, std::ostream& out, std::ostream&) {
  verify::Options o;
  o.tol = c.tol;
  o.suites = c.suites;
  o.fixture_path = c.fixtures;
  return verify::run(o, out) ? kOk : kVerifyFailed;
}

// ---------------------------------------------------------------------------

/// Full command-line entry point; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CliConfig c;
  CLI::App app{"Nonclassicality witnesses for photon-added/subtracted thermal and even coherent states",
               "fockwitness"};
  app.set_config("--config", "", "flat key=value file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--family", c.family, "thermal | ecs");
  app.add_option("--op", c.op, "none | pas | psa")->check(CLI::IsMember({"none", "pas", "psa"}));
  app.add_option("--p", c.p, "photons subtracted");
  app.add_option("--q", c.q, "photons added");
  app.add_option("--rbar", c.rbar, "thermal mean photon number");
  app.add_option("--alpha,--alpha-re", c.alpha_re, "even coherent amplitude (real part)");
  app.add_option("--alpha-im", c.alpha_im, "even coherent amplitude (imaginary part)");
  app.add_option("--m", c.m, "creation power for moment; m for klyshko");
  app.add_option("--n", c.n, "annihilation power for moment");
  app.add_option("--l", c.l, "witness order");
  app.add_option("--name", c.name, "mandel | hoa | hosps | hos | a3 | klyshko | husimi_zero");
  app.add_option("--variant", c.variant, "Agarwal-Tara variant: number_moments | power_of_mean");
  app.add_option("--engine", c.engine, "analytic | oracle | both")
      ->check(CLI::IsMember({"analytic", "oracle", "both"}));
  app.add_option("--variants", c.variants, "sweep variants, e.g. 'PAS(1,1)' 'PSA(1,1)'");
  app.add_option("--min", c.range_min, "sweep start");
  app.add_option("--max", c.range_max, "sweep end");
  app.add_option("--steps", c.steps, "sweep points");
  app.add_flag("--bare", c.bare, "add the bare-state series");
  app.add_option("--grid-min", c.grid_min, "Husimi window lower bound (both axes)");
  app.add_option("--grid-max", c.grid_max, "Husimi window upper bound (both axes)");
  app.add_option("--grid-steps", c.grid_steps, "Husimi points per axis");
  app.add_option("--threshold", c.threshold, "Husimi zero threshold relative to the grid maximum");
  app.add_option("--out", c.out, "output file (sweep) or directory (figure)");
  app.add_option("--tol", c.tol, "deviation tolerance");
  app.add_option("--suite", c.suites, "verify suites to run (default all)")->delimiter(',');
  app.add_option("--fixtures", c.fixtures, "golden fixture file");

  app.add_subcommand("moment", "print m,n,re,im of <a_dag^m a^n>");
  app.add_subcommand("witness", "print witness,order,value,nonclassical");
  app.add_subcommand("sweep", "CSV of a witness across rbar or alpha");
  auto* figure = app.add_subcommand("figure", "write the CSV panels of one figure");
  figure->add_option("id", c.figure_id, "fig1 .. fig14")->required();
  app.add_subcommand("verify", "run the self-check suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }
  c.command = app.get_subcommands().front()->get_name();

  try {
    if (c.command == "moment") return cmd_moment(c, out, err);
    if (c.command == "witness") return cmd_witness(c, out, err);
    if (c.command == "sweep") return cmd_sweep(c, out, err);
    if (c.command == "figure") return cmd_figure(c, out, err);
    return cmd_verify(c, out, err);
  } catch (const DegenerateState& e) {
    err << "error: " << e.what() << '\n';
    return kDegenerate;
  } catch (const NonConvergent& e) {
    err << "error: " << e.what() << '\n';
    return kNonConvergent;
  } catch (const CutoffExceeded& e) {
    err << "error: " << e.what() << '\n';
    return kNonConvergent;
  } catch (const SingularDenominator& e) {
    err << "error: " << e.what() << '\n';
    return kSingular;
  } catch (const ZeroMeanPhoton& e) {
    err << "error: " << e.what() << '\n';
    return kSingular;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace fockwitness::cli
