#pragma once

// Command-line front end. Exit codes: 0 success / member / feasible, 1 certified non-member,
// 2 undetermined, 64 usage error, 65 malformed input.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "scone/conic.hpp"

namespace scone::cli {

enum ExitCode : int { Success = 0, NonMember = 1, Undetermined = 2, Usage = 64, DataError = 65 };

enum class Command { Circuits, Check, CheckDual, Build, Witness };

struct CliConfig {
  Command command = Command::Circuits;
  std::string input;
  std::string point;
  bool reduced_only = false;
  std::size_t max_outer = 0;
  unsigned threads = 1;
  double tol = 1e-6;
  std::size_t max_iter = 50000;
  double witness_tol = 1e-9;
  std::string side = "primal";
  std::string format = "json";
  std::string output;
  long circuit = -1;
  bool json = false;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

using json = nlohmann::ordered_json;

inline std::string load_input(const std::string& arg) {
  if (arg.empty() || arg.front() != '@') return arg;
  std::ifstream in(arg.substr(1), std::ios::binary);
  if (!in) throw UsageError("cannot open input file " + arg.substr(1));
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
  return text;
}

inline std::vector<Rational> parse_point(std::string text) {
  std::erase_if(text, [](char ch) { return ch == '(' || ch == ')' || ch == '[' || ch == ']' || ch == ' '; });
  std::vector<Rational> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string piece = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (piece.empty()) throw ParseError("empty coordinate in point", start);
    try {
      out.push_back(parse_rational(piece));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), start + e.position());
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline json points_json(const std::vector<ExponentVector>& pts) {
  json arr = json::array();
  for (const auto& e : pts) {
    json coords = json::array();
    for (const auto& x : e.coords()) coords.push_back(to_string(x));
    arr.push_back(std::move(coords));
  }
  return arr;
}

inline json circuit_json(const Circuit& c, std::size_t index, const ReducedFlag& flag) {
  json lam = json::array();
  for (const auto& l : c.bary.lambda) lam.push_back(to_string(l));
  json inner = json::array();
  for (const auto& x : c.inner.coords()) inner.push_back(to_string(x));
  return {{"index", index},
          {"id", c.id()},
          {"outer", points_json(c.outer)},
          {"inner", std::move(inner)},
          {"parity", to_string(c.parity)},
          {"lambda", std::move(lam)},
          {"p", c.bary.p},
          {"p_alpha", c.bary.p_alpha},
          {"m", c.bary.m},
          {"reduced", flag.is_reduced},
          {"blockers", points_json(flag.blockers)}};
}

inline std::string lambda_text(const Circuit& c) {
  std::string s;
  for (std::size_t i = 0; i < c.bary.lambda.size(); ++i) s += (i ? "," : "") + to_string(c.bary.lambda[i]);
  return s;
}

inline std::string points_text(const std::vector<ExponentVector>& pts) {
  std::string s;
  for (std::size_t i = 0; i < pts.size(); ++i) s += (i ? "," : "") + to_string(pts[i]);
  return s;
}

inline AssembleOptions assemble_options(const CliConfig& cfg) { return {cfg.max_outer, cfg.threads}; }

inline int run_circuits(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const Support s = parse_support(load_input(cfg.input));
  const std::size_t max_outer = cfg.max_outer ? cfg.max_outer : s.dim() + 1;
  std::vector<Circuit> list;
  if (cfg.reduced_only) {
    list = enumerate_reduced(s, max_outer, cfg.threads).all();
  } else {
    list = enumerate_circuits(s, s.abs_points(), s.abs_points(), max_outer, cfg.threads);
    auto odd = enumerate_circuits(s, s.abs_points(), s.odd_points(), max_outer, cfg.threads);
    list.insert(list.end(), odd.begin(), odd.end());
  }
  json arr = json::array();
  err << "idx  circuit  parity  lambda  p  p_alpha  reduced\n";
  for (std::size_t i = 0; i < list.size(); ++i) {
    const Circuit& c = list[i];
    const ReducedFlag flag = is_reduced(c, s);
    std::string pa;
    for (std::size_t j = 0; j < c.bary.p_alpha.size(); ++j) pa += (j ? "," : "") + std::to_string(c.bary.p_alpha[j]);
    err << i << "  " << to_string(c) << "  " << to_string(c.parity) << "  (" << lambda_text(c) << ")  " << c.bary.p
        << "  (" << pa << ")  " << (flag.is_reduced ? "true" : "false");
    if (!flag.is_reduced) err << " blocked by " << points_text(flag.blockers);
    err << "\n";
    arr.push_back(circuit_json(c, i, flag));
  }
  if (cfg.json)
    out << json{{"circuits", std::move(arr)}}.dump() << "\n";
  else
    out << list.size() << " circuits\n";
  return Success;
}

inline const char* verdict_text(int code) {
  switch (code) {
    case Success: return "member";
    case NonMember: return "non-member";
    default: return "undetermined";
  }
}

inline json feasibility_json(const FeasibilityResult& r) {
  return {{"status", to_string(r.status)}, {"iterations", r.iterations}, {"residual", r.residual}, {"note", r.note}};
}

inline int run_check(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const AGForm f = parse_form(load_input(cfg.input));
  const Support& s = f.support();
  const ReducedCircuits reduced = enumerate_reduced(s, cfg.max_outer, cfg.threads);
  const auto circuits = reduced.all();

  json rows = json::array();
  bool all_accepted = true;
  err << "idx  circuit  parity  c_beta  circuit_number  accepted\n";
  for (std::size_t i = 0; i < circuits.size(); ++i) {
    const Circuit& c = circuits[i];
    const CircuitCoefficients cc = restrict_to(f, c);
    const bool outer_ok = std::none_of(cc.outer.begin(), cc.outer.end(), [](const Rational& x) { return x < 0; });
    const bool accepted = outer_ok && check_primal_circuit(cc, c);
    const double number = outer_ok ? circuit_number(cc, c) : std::numeric_limits<double>::quiet_NaN();
    all_accepted = all_accepted && accepted;
    err << i << "  " << to_string(c) << "  " << to_string(c.parity) << "  " << to_string(cc.inner) << "  " << number
        << "  " << (accepted ? "yes" : "no") << "\n";
    rows.push_back({{"index", i}, {"circuit", to_string(c)}, {"id", c.id()}, {"parity", to_string(c.parity)},
                    {"c_beta", to_string(cc.inner)}, {"circuit_number", outer_ok ? json(number) : json(nullptr)},
                    {"accepted", accepted}});
  }

  const ConicProblem prob = assemble_primal(f, assemble_options(cfg));
  int code = Undetermined;
  std::string method;
  json feas = nullptr;
  bool nonneg_only = true;
  for (const auto& a : s.abs_points()) nonneg_only = nonneg_only && f.coeff(a) >= 0;
  for (const auto& b : s.odd_points()) nonneg_only = nonneg_only && f.coeff(b) == 0;

  if (prob.infeasible_reason) {
    code = NonMember;
    method = "exact: " + *prob.infeasible_reason;
  } else if (nonneg_only) {
    code = Success;
    method = "exact: all coefficients nonnegative";
  } else if (circuits.size() == 1) {
    code = all_accepted ? Success : NonMember;
    method = "exact: single reduced circuit";
  } else {
    const FeasibilityResult r = feasibility(prob, {}, {cfg.max_iter, cfg.tol});
    feas = feasibility_json(r);
    method = std::string("feasibility: ") + to_string(r.status);
    code = r.status == FeasibilityStatus::Feasible ? Success : Undetermined;
    if (r.status == FeasibilityStatus::InfeasibleHint) method += " (likely non-member, not certified)";
  }
  err << "verdict: " << verdict_text(code) << " (" << method << ")\n";
  if (cfg.json)
    out << json{{"circuits", std::move(rows)}, {"verdict", verdict_text(code)}, {"method", method}, {"feasibility", feas}}
               .dump()
        << "\n";
  else
    out << verdict_text(code) << "\n";
  return code;
}

inline int run_check_dual(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const Support s = parse_support(load_input(cfg.input));
  const auto pts = s.all_points();
  const std::vector<Rational> v = parse_point(cfg.point);
  if (v.size() != pts.size())
    throw UsageError("--point has " + std::to_string(v.size()) + " coordinates, support has " +
                     std::to_string(pts.size()) + " points (" + points_text(pts) + ")");
  std::map<ExponentVector, Rational> value;
  for (std::size_t i = 0; i < pts.size(); ++i) value[pts[i]] = v[i];

  bool member = true;
  json rows = json::array();
  for (const auto& a : s.abs_points())
    if (value[a] < 0) {
      member = false;
      err << "v" << to_string(a) << " = " << to_string(value[a]) << " is negative\n";
    }
  const auto circuits = enumerate_reduced(s, cfg.max_outer, cfg.threads).all();
  err << "idx  circuit  parity  accepted\n";
  for (std::size_t i = 0; i < circuits.size(); ++i) {
    const Circuit& c = circuits[i];
    CircuitCoefficients cv;
    for (const auto& a : c.outer) cv.outer.push_back(value[a]);
    cv.inner = value[c.inner];
    const bool ok = check_dual_circuit(cv, c);
    member = member && ok;
    err << i << "  " << to_string(c) << "  " << to_string(c.parity) << "  " << (ok ? "yes" : "no") << "\n";
    rows.push_back({{"index", i}, {"circuit", to_string(c)}, {"id", c.id()}, {"accepted", ok}});
  }

  const ConicProblem prob = assemble_dual(s, assemble_options(cfg));
  Assignment pins;
  for (std::size_t i = 0; i < pts.size(); ++i) pins.set(vars::dual_coord(pts[i]), to_double(v[i]));
  const FeasibilityResult r = feasibility(prob, pins, {cfg.max_iter, cfg.tol});
  const int code = member ? Success : NonMember;
  err << "assembled feasibility: " << to_string(r.status) << " after " << r.iterations << " iterations\n";
  err << "verdict: " << verdict_text(code) << " (exact)\n";
  if (cfg.json)
    out << json{{"circuits", std::move(rows)}, {"verdict", verdict_text(code)}, {"feasibility", feasibility_json(r)}}
               .dump()
        << "\n";
  else
    out << verdict_text(code) << "\n";
  return code;
}

inline const Circuit& pick_circuit(const std::vector<Circuit>& circuits, long index) {
  if (index < 0 || static_cast<std::size_t>(index) >= circuits.size())
    throw UsageError("--circuit " + std::to_string(index) + " out of range (" + std::to_string(circuits.size()) +
                     " reduced circuits)");
  return circuits[static_cast<std::size_t>(index)];
}

inline int run_build(const CliConfig& cfg, std::ostream& out, std::ostream&) {
  const ExportFormat format = parse_format(cfg.format);
  if (cfg.side != "primal" && cfg.side != "dual") throw UsageError("--side must be primal or dual");
  const std::string text = load_input(cfg.input);
  ConicProblem prob;
  if (cfg.side == "primal") {
    AGForm f = parse_form(text);
    if (cfg.circuit >= 0) {
      const auto circuits = enumerate_reduced(f.support(), cfg.max_outer, cfg.threads).all();
      const Circuit& c = pick_circuit(circuits, cfg.circuit);
      std::map<ExponentVector, Rational> coeffs;
      std::vector<ExponentVector> abs = c.outer, odd;
      for (const auto& a : c.outer) coeffs[a] = f.coeff(a);
      coeffs[c.inner] = f.coeff(c.inner);
      (c.parity == Parity::Odd ? odd : abs).push_back(c.inner);
      f = AGForm(Support(f.support().dim(), abs, odd), coeffs);
    }
    prob = assemble_primal(f, assemble_options(cfg));
  } else {
    Support s = parse_support(text);
    if (cfg.circuit >= 0) {
      const auto circuits = enumerate_reduced(s, cfg.max_outer, cfg.threads).all();
      const Circuit& c = pick_circuit(circuits, cfg.circuit);
      std::vector<ExponentVector> abs = c.outer, odd;
      (c.parity == Parity::Odd ? odd : abs).push_back(c.inner);
      s = Support(s.dim(), abs, odd);
    }
    prob = assemble_dual(s, assemble_options(cfg));
  }
  std::string payload = export_problem(prob, format);
  if (format == ExportFormat::Json) payload += "\n";
  if (cfg.output.empty()) {
    out << payload;
  } else {
    std::ofstream file(cfg.output, std::ios::binary);
    if (!file) throw UsageError("cannot write " + cfg.output);
    file << payload;
  }
  return Success;
}

inline int run_witness(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const AGForm f = parse_form(load_input(cfg.input));
  const auto circuits = enumerate_reduced(f.support(), cfg.max_outer, cfg.threads).all();
  const Circuit& c = pick_circuit(circuits, cfg.circuit);
  const CircuitCoefficients cc = restrict_to(f, c);
  for (const auto& x : cc.outer)
    if (x < 0) {
      err << "circuit " << to_string(c) << " has a negative outer coefficient; no witness\n";
      return NonMember;
    }
  const CircuitMatrix mat = primal_circuit_matrix(c);
  const auto w = complete_primal_witness(cc, mat);
  if (!w) {
    err << "circuit " << to_string(c) << " fails the exact test; no witness\n";
    if (cfg.json) out << json{{"circuit", to_string(c)}, {"witness", nullptr}}.dump() << "\n";
    return NonMember;
  }
  const VerifyReport rep = verify_assignment(mat, *w, cfg.witness_tol);
  err << "circuit " << to_string(c) << "\n";
  for (const auto& [id, value] : w->values()) err << "  " << id << " = " << value << "\n";
  err << "verify: " << (rep.ok ? "ok" : "FAILED") << ", worst block " << to_string(rep.worst_block) << ", margin "
      << rep.worst_margin << "\n";
  json j = witness_to_json(*w, rep);
  j["circuit"] = to_string(c);
  out << j.dump() << "\n";
  return rep.ok ? Success : Undetermined;
}

}  // namespace detail

/// Runs one invocation. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliConfig cfg;
  CLI::App app{"Second-order representations of S-cones: circuits, certificates, lifts, conic programs"};
  app.name("scone");
  app.require_subcommand(1);

  auto add_input = [&](CLI::App* sub, const char* what) {
    sub->add_option("input", cfg.input, what)->required();
    sub->add_option("--max-outer", cfg.max_outer, "largest outer set size (default dim + 1)");
    sub->add_option("--threads", cfg.threads, "threads for circuit enumeration")->check(CLI::PositiveNumber);
  };
  auto add_feasibility = [&](CLI::App* sub) {
    sub->add_option("--tol", cfg.tol, "feasibility tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", cfg.max_iter, "feasibility iteration cap");
  };

  auto* circuits = app.add_subcommand("circuits", "list circuits with barycentric data and reducedness");
  add_input(circuits, "form or support, inline or @file");
  circuits->add_flag("--reduced", cfg.reduced_only, "only reduced circuits");
  circuits->add_flag("--json", cfg.json, "JSON on stdout");

  auto* check = app.add_subcommand("check", "exact per-circuit certificates and overall membership");
  add_input(check, "form, inline or @file");
  add_feasibility(check);
  check->add_flag("--json", cfg.json, "JSON on stdout");

  auto* check_dual = app.add_subcommand("check-dual", "dual cone membership of a point");
  add_input(check_dual, "support, inline or @file");
  check_dual->add_option("--point", cfg.point, "comma-separated values in support order (abs points, then odd)")
      ->required();
  add_feasibility(check_dual);
  check_dual->add_flag("--json", cfg.json, "JSON on stdout");

  auto* build = app.add_subcommand("build", "emit the assembled second-order program");
  add_input(build, "form (primal) or support (dual), inline or @file");
  build->add_option("--side", cfg.side, "primal or dual")->check(CLI::IsMember({"primal", "dual"}));
  build->add_option("--format", cfg.format, "json or socptext")->check(CLI::IsMember({"json", "socptext"}));
  build->add_option("-o,--output", cfg.output, "output file (default stdout)");
  build->add_option("--circuit", cfg.circuit, "restrict to one reduced circuit (index as listed by circuits --reduced)");

  auto* witness = app.add_subcommand("witness", "complete and verify a primal lift witness for one circuit");
  add_input(witness, "form, inline or @file");
  witness->add_option("--circuit", cfg.circuit, "reduced circuit index (even circuits first, then odd)")->required();
  witness->add_option("--verify-tol", cfg.witness_tol, "verification tolerance");
  witness->add_flag("--json", cfg.json, "ignored; witness output is always JSON");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return Success;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return Usage;
  }

  try {
    if (*circuits) return detail::run_circuits(cfg, out, err);
    if (*check) return detail::run_check(cfg, out, err);
    if (*check_dual) return detail::run_check_dual(cfg, out, err);
    if (*build) return detail::run_build(cfg, out, err);
    if (*witness) return detail::run_witness(cfg, out, err);
  } catch (const ParseError& e) {
    err << "parse error at position " << e.position() << ": " << e.what() << "\n";
    return DataError;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return Usage;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return DataError;
  } catch (const nlohmann::json::exception& e) {
    err << "input error: " << e.what() << "\n";
    return DataError;
  }
  return Usage;
}

}  // namespace scone::cli
