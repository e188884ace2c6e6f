// qcp: batch front-end for the quantum-complex-plane workbench.
//
// Subcommands: normalize, verify, rep-build, export, norm, separate,
// confluence.  Reports are JSON lines written in sorted order; a fixed
// config (including the seed) yields byte-identical output.
// Exit codes: 0 pass, 1 verification failure, 2 usage/parse error,
// 3 I/O error.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <qcp/config.hpp>
#include <qcp/matrix_market.hpp>
#include <qcp/parse.hpp>
#include <qcp/rewrite.hpp>

using json = nlohmann::ordered_json;
using namespace qcp;

namespace {

constexpr const char* kSchema = "qcp.report/1";

struct Report {
  std::vector<std::string> lines;
  bool pass = true;

  void add(json j, bool line_pass) {
    j["pass"] = line_pass;
    lines.push_back(j.dump());
    pass = pass && line_pass;
  }

  int write(const std::string& out) {
    std::sort(lines.begin(), lines.end());
    std::ostringstream buf;
    for (const std::string& l : lines) buf << l << "\n";
    if (out.empty() || out == "-") {
      std::cout << buf.str();
    } else {
      std::ofstream f(out);
      if (!f) {
        std::cerr << "cannot open output file: " << out << "\n";
        return 3;
      }
      f << buf.str();
      if (!f) return 3;
    }
    return pass ? 0 : 1;
  }
};

json line(const char* suite) {
  json j;
  j["schema"] = kSchema;
  j["suite"] = suite;
  return j;
}

void add_config_flags(CLI::App* cmd, RunConfig& cfg, std::string& config_path,
                      std::string& out_path) {
  cmd->add_option("--config", config_path, "key=value config file");
  cmd->add_option("--n", cfg.n, "dimension");
  cmd->add_option("--q", cfg.q_text, "deformation parameter (rational or decimal)");
  cmd->add_option("--N", cfg.unilateral, "unilateral window");
  cmd->add_option("--M", cfg.bilateral, "bilateral window");
  cmd->add_option("--d", cfg.margin, "interior margin");
  cmd->add_option("--fibers", cfg.fibers, "fiber spectrum samples");
  cmd->add_option("--tol", cfg.tolerance, "residual tolerance");
  cmd->add_option("--sweep", cfg.sweep, "truncation sweep (N=M values)");
  cmd->add_option("--seed", cfg.seed, "RNG seed");
  cmd->add_option("--out", out_path, "report file ('-' = stdout)");
}

// flags override file values: keep only the options the user passed
RunConfig effective_config(const CLI::App* cmd, const RunConfig& parsed,
                           const std::string& config_path) {
  if (config_path.empty()) return parsed;
  RunConfig cfg = RunConfig::from_file(config_path);
  const auto passed = [&](const char* name) { return cmd->count(name) > 0; };
  if (passed("--n")) cfg.n = parsed.n;
  if (passed("--q")) cfg.q_text = parsed.q_text;
  if (passed("--N")) cfg.unilateral = parsed.unilateral;
  if (passed("--M")) cfg.bilateral = parsed.bilateral;
  if (passed("--d")) cfg.margin = parsed.margin;
  if (passed("--fibers")) cfg.fibers = parsed.fibers;
  if (passed("--tol")) cfg.tolerance = parsed.tolerance;
  if (passed("--sweep")) cfg.sweep = parsed.sweep;
  if (passed("--seed")) cfg.seed = parsed.seed;
  return cfg;
}

void run_symbolic_suite(const RunConfig& cfg, Report& rep) {
  const int n = cfg.n;
  const auto push = [&](const std::string& item, const IdentityCheck& chk) {
    json j = line("symbolic");
    j["n"] = n;
    j["item"] = item;
    if (!chk.holds) j["residual"] = chk.residual.str();
    rep.add(std::move(j), chk.holds);
  };
  const auto z = [&](int j) { return QPolynomial::generator(n, j, false); };
  const auto zs = [&](int j) { return QPolynomial::generator(n, j, true); };
  const LaurentPoly q2 = LaurentPoly::q(2);
  for (int k = 1; k <= n; ++k) {
    QPolynomial lhs = z(k) * zs(k) - q2 * (zs(k) * z(k));
    QPolynomial rhs = k < n ? -(LaurentPoly(1) - q2) * build_Q(k + 1, n)
                            : QPolynomial::zero(n);
    push("zzQ[" + std::to_string(k) + "]", verify_identity(lhs, rhs));
    QPolynomial Qk = build_Q(k, n);
    for (int i = 1; i < k; ++i) {
      push("zQ[" + std::to_string(i) + "," + std::to_string(k) + "]",
           verify_identity(z(i) * Qk, Qk * z(i)));
      push("zQ*[" + std::to_string(i) + "," + std::to_string(k) + "]",
           verify_identity(zs(i) * Qk, Qk * zs(i)));
    }
    for (int j = k; j <= n; ++j) {
      push("Qz[" + std::to_string(j) + "," + std::to_string(k) + "]",
           verify_identity(z(j) * Qk, q2 * (Qk * z(j))));
      push("Qz*[" + std::to_string(j) + "," + std::to_string(k) + "]",
           verify_identity(zs(j) * Qk, LaurentPoly::q(-2) * (Qk * zs(j))));
    }
    for (int e = 0; e <= 3; ++e) {
      QPolynomial p = Qk.pow(e);
      for (int i = 1; i < k; ++i)
        push("zpQ[" + std::to_string(i) + "," + std::to_string(k) + ",^" +
                 std::to_string(e) + "]",
             verify_identity(z(i) * p, p * z(i)));
      for (int j = k; j <= n; ++j)
        push("pQz[" + std::to_string(j) + "," + std::to_string(k) + ",^" +
                 std::to_string(e) + "]",
             verify_identity(z(j) * p, LaurentPoly::q(2 * e) * (p * z(j))));
    }
  }
}

void run_relation_suite(const RunConfig& cfg, Report& rep) {
  const double qv = cfg.q_value();
  const TruncationSpec t = cfg.truncation();
  const FiberSpectrum f = cfg.filtered_fibers();
  for (int k = 0; k <= cfg.n; ++k) {
    RepComponent comp = build_component_abstract(k, t, f);
    VerificationReport vr = verify_relations(comp, cfg.tolerance);
    for (const auto& e : vr.entries) {
      json j = line("relations");
      j["component"] = e.component;
      j["relation"] = e.relation;
      j["q"] = qv;
      j["max_residual"] = e.max_residual;
      j["interior_size"] = e.interior_size;
      rep.add(std::move(j), e.max_residual <= cfg.tolerance);
    }
  }
}

CrossedSymbol random_symbol(DetRng& rng, int n) {
  CrossedSymbol s(n);
  const int terms = 1 + static_cast<int>(rng.below(2));
  for (int t = 0; t < terms; ++t) {
    std::vector<int> m(n);
    for (int j = 0; j < n; ++j) m[j] = static_cast<int>(rng.range(-2, 2));
    const int axis = 1 + static_cast<int>(rng.below(n));
    FunctionExpr g = FunctionExpr::constant(rng.uniform(-1.5, 1.5)) *
                     FunctionExpr::exp_neg(FunctionExpr::coordinate(axis));
    s.add_term(m, g);
  }
  return s;
}

void run_cstar_suite(const RunConfig& cfg, Report& rep) {
  const TruncationSpec t = cfg.truncation();
  const FiberSpectrum f = cfg.filtered_fibers();
  RepComponent top = build_component_abstract(cfg.n, t, f);
  DetRng rng(cfg.seed);
  for (int trial = 0; trial < 10; ++trial) {
    const double dev =
        symbol_vs_matrix(random_symbol(rng, cfg.n), random_symbol(rng, cfg.n), top);
    json j = line("cstar");
    j["item"] = "symbol_vs_matrix[" + std::to_string(trial) + "]";
    j["deviation"] = dev;
    rep.add(std::move(j), dev <= cfg.tolerance);
  }
  ComponentFamily fam = ComponentFamily::build(t, f);
  FunctionExpr decay = FunctionExpr::coordinate(1);
  for (int j = 2; j <= cfg.n; ++j) decay = decay + FunctionExpr::coordinate(j);
  decay = FunctionExpr::exp_neg(decay);
  std::vector<GeneratorTerm> probes;
  probes.push_back({decay, std::vector<int>(cfg.n, 0)});
  {
    std::vector<int> l(cfg.n, 0);
    l[0] = 1;
    probes.push_back({FunctionExpr::coordinate(1) * decay, l});
  }
  for (std::size_t i = 0; i < probes.size(); ++i) {
    double worst = 0.0;
    for (const RepComponent& block : fam.blocks)
      worst = std::max(worst,
                       (pi_k(probes[i].star(), block) - pi_k(probes[i], block).adjoint())
                           .max_abs());
    json j = line("cstar");
    j["item"] = "pi_star_compat[" + std::to_string(i) + "]";
    j["deviation"] = worst;
    rep.add(std::move(j), worst <= cfg.tolerance);
  }
  // the vanishing gate must reject a non-vanishing shifted term
  bool rejected = false;
  try {
    std::vector<int> l(cfg.n, 0);
    l[0] = 1;
    pi_k(GeneratorTerm{decay, l}, fam.blocks.back());
  } catch (const TermRejected&) {
    rejected = true;
  }
  json j = line("cstar");
  j["item"] = "vanishing_reject";
  rep.add(std::move(j), rejected);
}

int cmd_verify(const RunConfig& cfg, const std::string& out) {
  Report rep;
  if (cfg.suite_symbolic) run_symbolic_suite(cfg, rep);
  if (cfg.suite_rep) run_relation_suite(cfg, rep);
  if (cfg.suite_cstar) run_cstar_suite(cfg, rep);
  return rep.write(out);
}

int cmd_rep_build(const RunConfig& cfg, const std::string& out) {
  Report rep;
  const TruncationSpec t = cfg.truncation();
  const FiberSpectrum f = cfg.filtered_fibers();
  const MeasureSpec m = MeasureSpec::equal_weight(f.samples);
  for (int k = 0; k <= cfg.n; ++k) {
    RepComponent ra = build_component_abstract(k, t, f);
    RepComponent rl = build_component_lattice(k, t, m);
    double agree = 0.0;
    for (int j = 1; j <= cfg.n; ++j)
      agree = std::max(agree, relative_entry_diff(ra.z(j), rl.z(j)));
    json j = line("rep-build");
    j["component"] = k;
    j["dim"] = ra.dim();
    j["interior_size"] = ra.interior_set().size();
    j["builder_agreement"] = agree;
    rep.add(std::move(j), agree <= 1e-12);
  }
  return rep.write(out);
}

int cmd_export(const RunConfig& cfg, const std::string& what,
               const std::string& outdir, const std::string& term_file, int term_id) {
  namespace fs = std::filesystem;
  fs::create_directories(outdir);
  const TruncationSpec t = cfg.truncation();
  const FiberSpectrum f = cfg.filtered_fibers();
  std::vector<std::string> written;
  const auto emit = [&](const std::string& name, const SparseOperator& op) {
    const std::string path = (fs::path(outdir) / (name + ".mtx")).string();
    write_matrix_market(path, op);
    written.push_back(path);
  };
  if (what == "gen") {
    const std::vector<GeneratorTerm> terms = load_generator_terms(term_file, cfg.n);
    if (term_id < 0 || term_id >= static_cast<int>(terms.size()))
      throw CLI::ValidationError("--id", "term id out of range");
    for (int k = 0; k <= cfg.n; ++k) {
      RepComponent comp = build_component_abstract(k, t, f);
      emit("gen" + std::to_string(term_id) + "_k" + std::to_string(k),
           pi_k(terms[term_id], comp));
    }
  } else {
    for (int k = 0; k <= cfg.n; ++k) {
      RepComponent comp = build_component_abstract(k, t, f);
      for (int j = 1; j <= cfg.n; ++j) {
        const std::string name = what + std::to_string(j) + "_k" + std::to_string(k);
        if (what == "z")
          emit(name, comp.z(j));
        else if (what == "Q")
          emit(name, comp.Q(j));
        else if (what == "S")
          emit(name, comp.shift(j));
        else if (what == "w" && j < k)
          emit(name, comp.w(j));
      }
    }
  }
  for (const std::string& p : written) std::cout << p << "\n";
  return 0;
}

int cmd_norm(const RunConfig& cfg, const std::string& term_file, const std::string& out) {
  const std::vector<GeneratorTerm> terms = load_generator_terms(term_file, cfg.n);
  std::vector<TruncationSpec> sweep;
  for (int w : cfg.sweep)
    sweep.push_back(
        TruncationSpec(cfg.n, cfg.q_value(), w, w, std::min(cfg.margin, w - 1)));
  const auto rows = norm_estimate(terms, cfg.filtered_fibers(), sweep, 400, cfg.seed);
  Report rep;
  for (const auto& row : rows) {
    for (int k = 0; k < static_cast<int>(row.block_lb.size()); ++k) {
      json j = line("norm");
      j["term_id"] = row.term_id;
      j["k"] = k;
      j["norm_lb"] = row.block_lb[k];
      j["truncation"] = row.window;
      rep.add(std::move(j), true);
    }
    json j = line("norm");
    j["term_id"] = row.term_id;
    j["k"] = -1;  // sup over the blocks
    j["norm_lb"] = row.sup_lb;
    j["truncation"] = row.window;
    rep.add(std::move(j), true);
  }
  return rep.write(out);
}

int cmd_separate(const RunConfig& cfg, const std::string& term_file,
                 std::size_t pair_count, const std::string& out) {
  const double qv = cfg.q_value();
  std::vector<GeneratorTerm> family = term_file.empty()
                                          ? standard_separating_family(cfg.n)
                                          : load_generator_terms(term_file, cfg.n);
  DetRng rng(cfg.seed);
  std::vector<std::pair<PolarPoint, PolarPoint>> pairs;
  for (std::size_t i = 0; i < pair_count; ++i) {
    PolarPoint a, b;
    for (int j = 0; j < cfg.n; ++j) {
      a.modulus.push_back(rng.uniform(0.0, 2.0));
      a.phase.push_back(rng.uniform(0.0, 6.283185307179586));
      b.modulus.push_back(rng.uniform(0.0, 2.0));
      b.phase.push_back(rng.uniform(0.0, 6.283185307179586));
    }
    pairs.emplace_back(std::move(a), std::move(b));
  }
  const SeparationReport sr = classical_separation(pairs, family, cfg.n, qv);
  Report rep;
  json j = line("separate");
  j["n"] = cfg.n;
  j["pairs"] = sr.pairs_checked;
  j["family_size"] = family.size();
  j["unseparated"] = sr.unseparated;
  rep.add(std::move(j), sr.unseparated.empty());
  return rep.write(out);
}

int cmd_confluence(int n, int max_len, const std::string& out) {
  const ConfluenceReport cr = check_local_confluence(n, max_len);
  Report rep;
  json j = line("confluence");
  j["n"] = n;
  j["max_len"] = max_len;
  j["words_checked"] = cr.words_checked;
  j["exhaustive"] = cr.exhaustive;
  j["divergent"] = cr.divergent.size();
  rep.add(std::move(j), cr.confluent());
  return rep.write(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"verification workbench for the quantum complex plane"};
  app.require_subcommand(1);

  auto* normalize =
      app.add_subcommand("normalize", "print the normal form of an expression");
  std::string expr_text;
  int norm_n = 2;
  normalize->add_option("expr", expr_text, "expression over z1..zn, '#' = adjoint")
      ->required();
  normalize->add_option("--n", norm_n, "dimension");

  RunConfig cfg;
  std::string config_path, out_path;

  auto* verify = app.add_subcommand("verify", "run the verification suites");
  add_config_flags(verify, cfg, config_path, out_path);

  auto* repb =
      app.add_subcommand("rep-build", "build components and cross-check builders");
  add_config_flags(repb, cfg, config_path, out_path);

  auto* exp = app.add_subcommand("export", "export operators as Matrix Market files");
  std::string what, outdir = "export", term_file;
  int term_id = 0;
  add_config_flags(exp, cfg, config_path, out_path);
  exp->add_option("--what", what, "z | Q | S | w | gen")
      ->required()
      ->check(CLI::IsMember({"z", "Q", "S", "w", "gen"}));
  exp->add_option("--outdir", outdir, "output directory");
  exp->add_option("--terms", term_file, "generator-term file (for --what gen)");
  exp->add_option("--id", term_id, "generator term id (for --what gen)");

  auto* norm =
      app.add_subcommand("norm", "norm lower bounds across the truncation sweep");
  std::string norm_terms;
  add_config_flags(norm, cfg, config_path, out_path);
  norm->add_option("--terms", norm_terms, "generator-term file")->required();

  auto* sep = app.add_subcommand("separate", "classical point-separation check");
  std::size_t pair_count = 100;
  std::string sep_terms;
  add_config_flags(sep, cfg, config_path, out_path);
  sep->add_option("--pairs", pair_count, "number of seeded random pairs");
  sep->add_option("--terms", sep_terms,
                  "family file (default: built-in 12-term family)");

  auto* conf = app.add_subcommand("confluence", "two-path local confluence probe");
  int conf_n = 2, conf_len = 4;
  conf->add_option("--n", conf_n, "dimension");
  conf->add_option("--max-len", conf_len, "maximum word length");
  conf->add_option("--out", out_path, "report file ('-' = stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (normalize->parsed()) {
      try {
        std::cout << normal_form(parse_expr(expr_text, norm_n)).str() << "\n";
        return 0;
      } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
      } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
      }
    }
    if (verify->parsed())
      return cmd_verify(effective_config(verify, cfg, config_path), out_path);
    if (repb->parsed())
      return cmd_rep_build(effective_config(repb, cfg, config_path), out_path);
    if (exp->parsed())
      return cmd_export(effective_config(exp, cfg, config_path), what, outdir,
                        term_file, term_id);
    if (norm->parsed())
      return cmd_norm(effective_config(norm, cfg, config_path), norm_terms, out_path);
    if (sep->parsed())
      return cmd_separate(effective_config(sep, cfg, config_path), sep_terms,
                          pair_count, out_path);
    if (conf->parsed()) return cmd_confluence(conf_n, conf_len, out_path);
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    std::cerr << msg << "\n";
    return msg.find("cannot open") != std::string::npos ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 2;
}
