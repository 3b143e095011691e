// cbnq: exact interventional/counterfactual queries over causal Bayesian
// networks: evaluate formulas, compute PN/PS/PNS, compile to functional
// models, sample observational data, and estimate from it.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "causal/counterfactual.hpp"
#include "causal/functional.hpp"
#include "causal/functional_io.hpp"
#include "causal/model_io.hpp"
#include "causal/parser.hpp"
#include "causal/semantics.hpp"

using namespace causal;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string model_path;
  std::string output = "human";
  std::uint64_t cap = std::uint64_t(1) << 24;
  std::string language = "L";

  bool records() const { return output == "records"; }
  Language lang() const {
    return language == "L+" || language == "l+" ? Language::l_plus
                                                : Language::l;
  }
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_model = true) {
  auto* model =
      cmd->add_option("--model", opts.model_path, "cbn/1 model file (JSON)");
  if (needs_model) model->required();
  cmd->add_option("--output", opts.output, "human|records")
      ->check(CLI::IsMember({"human", "records"}));
  cmd->add_option("--cap", opts.cap, "enumeration cap");
  cmd->add_option("--language", opts.language,
                  "L (endogenous only) or L+ (exogenous symbols allowed)")
      ->check(CLI::IsMember({"L", "L+", "l", "l+"}));
}

void emit(const CommonOpts& opts, const json& record,
          const std::string& human) {
  if (opts.records()) {
    std::cout << record.dump() << "\n";
  } else {
    std::cout << human;
  }
}

FormulaRef parse_checked(const std::string& text, const Cbn& m,
                         const CommonOpts& opts) {
  try {
    return parse_formula(text, m, opts.lang());
  } catch (const ParseError& e) {
    std::cerr << caret_message(text, e) << "\n";
    throw;
  }
}

std::string fraction_and_decimal(const Rat& p) {
  return to_fraction_string(p) + " = " + to_decimal_string(p);
}

// ---- eval -------------------------------------------------------------------

int cmd_eval(const CommonOpts& opts, const std::string& formula_text,
             const std::string& given_text, bool prune) {
  auto m = load_cbn(opts.model_path);
  auto f = parse_checked(formula_text, m, opts);
  EnumerationOptions eopts;
  eopts.cap = opts.cap;
  eopts.prune = prune;

  auto start = std::chrono::steady_clock::now();
  json record{{"command", "eval"}, {"formula", to_string(f)}};
  std::string human;
  if (given_text.empty()) {
    auto result = evaluate(m, *f, eopts);
    record["exact"] = to_fraction_string(result.probability);
    record["decimal"] = to_double(result.probability);
    record["mode"] =
        result.mode == SelectionMode::fccce ? "fccce" : "ccce";
    record["entailing"] = result.entailing;
    record["enumerated"] = result.enumerated;
    double ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count();
    std::ostringstream text;
    text << "Pr(" << to_string(f)
         << ") = " << fraction_and_decimal(result.probability) << "\n"
         << "  entailed by " << result.entailing << " of " << result.enumerated
         << (result.mode == SelectionMode::fccce ? " fccces" : " ccces")
         << "  [" << ms << " ms]\n";
    human = text.str();
  } else {
    auto given = parse_checked(given_text, m, opts);
    record["given"] = to_string(given);
    Rat p = conditional_probability(m, f, given, eopts);
    record["exact"] = to_fraction_string(p);
    record["decimal"] = to_double(p);
    double ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count();
    std::ostringstream text;
    text << "Pr(" << to_string(f) << " | " << to_string(given)
         << ") = " << fraction_and_decimal(p) << "  [" << ms << " ms]\n";
    human = text.str();
  }
  emit(opts, record, human);
  return 0;
}

// ---- counterfactual ----------------------------------------------------------

int cmd_counterfactual(const CommonOpts& opts, const std::string& query,
                       const std::string& cause, const std::string& effect,
                       const std::string& data_path, int replicates,
                       std::uint64_t seed) {
  auto m = load_cbn(opts.model_path);
  json record{{"command", "counterfactual"},
              {"query", query},
              {"cause", cause},
              {"effect", effect}};
  std::ostringstream human;

  auto run_exact = [&](CounterfactualKind kind) -> Rat {
    switch (kind) {
      case CounterfactualKind::pn: return pn_exact(m, cause, effect);
      case CounterfactualKind::ps: return ps_exact(m, cause, effect);
      default: return pns_exact(m, cause, effect);
    }
  };
  auto kind = query == "pn"   ? CounterfactualKind::pn
              : query == "ps" ? CounterfactualKind::ps
                              : CounterfactualKind::pns;
  Rat exact = run_exact(kind);
  record["exact"] = to_fraction_string(exact);
  record["decimal"] = to_double(exact);
  human << query << "(" << cause << " -> " << effect
        << ") = " << fraction_and_decimal(exact) << "\n";

  if (kind == CounterfactualKind::pns) {
    ExactSource src(m);
    int x = m.require_var(cause), y = m.require_var(effect);
    Rat p00 = *src.joint(std::vector<std::pair<int, int>>{{x, 0}, {y, 0}});
    Rat p11 = *src.joint(std::vector<std::pair<int, int>>{{x, 1}, {y, 1}});
    Rat ps = p00 == 0 ? Rat(0) : ps_exact(m, cause, effect);
    Rat pn = p11 == 0 ? Rat(0) : pn_exact(m, cause, effect);
    Rat identity = ps * p00 + pn * p11;
    record["identity"] = {{"ps", to_fraction_string(ps)},
                          {"pn", to_fraction_string(pn)},
                          {"p00", to_fraction_string(p00)},
                          {"p11", to_fraction_string(p11)},
                          {"value", to_fraction_string(identity)},
                          {"holds", identity == exact}};
    human << "  identity PS*Pr(X=0,Y=0) + PN*Pr(X=1,Y=1) = "
          << fraction_and_decimal(identity)
          << (identity == exact ? "  (holds)" : "  (VIOLATED)") << "\n";
  }

  if (!data_path.empty()) {
    auto data = read_csv_file(data_path);
    EstimateOptions eopts;
    eopts.replicates = replicates;
    eopts.seed = seed;
    auto est = estimate_query(data, m, kind, cause, effect, eopts);
    record["estimate"] = to_double(est.value);
    if (est.stderr_) record["stderr"] = *est.stderr_;
    record["n_terms"] = est.stats.terms;
    record["skipped_terms"] = est.stats.missing_data;
    human << "  estimate from " << data.rows.size()
          << " rows = " << to_decimal_string(est.value, 6);
    if (est.stderr_) human << "  (stderr " << *est.stderr_ << ")";
    if (est.stats.missing_data > 0) {
      human << "  [" << est.stats.missing_data
            << " term(s) missing: insufficient data]";
    }
    human << "\n";
  }
  emit(opts, record, human.str());
  return 0;
}

// ---- compile / sample --------------------------------------------------------

int cmd_compile(const CommonOpts& opts, const std::string& out_path) {
  auto m = load_cbn(opts.model_path);
  CompileOptions copts;
  copts.cap = opts.cap;
  auto fm = compile(m, copts);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot open '" + out_path + "' for writing");
    write_fcm(fm, out);
  }
  json record{{"command", "compile"},
              {"positive_contexts", fm.positive_context_count().str()},
              {"out", out_path}};
  std::ostringstream human;
  human << "compiled functional model: " << fm.positive_context_count()
        << " positive-measure contexts";
  if (!out_path.empty()) human << ", written to " << out_path;
  human << "\n";
  emit(opts, record, human.str());
  return 0;
}

int cmd_sample(const CommonOpts& opts, std::uint64_t n, std::uint64_t seed,
               const std::string& out_path) {
  auto m = load_cbn(opts.model_path);
  CompileOptions copts;
  copts.cap = opts.cap;
  auto data = sample(compile(m, copts), n, seed);
  if (out_path.empty()) {
    write_csv(data, std::cout);
  } else {
    write_csv(data, out_path);
  }
  if (!out_path.empty()) {
    json record{{"command", "sample"},
                {"rows", data.rows.size()},
                {"seed", seed},
                {"out", out_path}};
    std::ostringstream human;
    human << "wrote " << data.rows.size() << " rows to " << out_path << "\n";
    emit(opts, record, human.str());
  }
  return 0;
}

// ---- estimate ------------------------------------------------------------------

int cmd_estimate(const CommonOpts& opts, const std::string& formula_text,
                 const std::string& query, const std::string& cause,
                 const std::string& effect, const std::string& data_path,
                 int replicates, std::uint64_t seed) {
  auto m = load_cbn(opts.model_path);
  auto data = read_csv_file(data_path);
  EstimateOptions eopts;
  eopts.replicates = replicates;
  eopts.seed = seed;

  EstimateResult est;
  json record{{"command", "estimate"}};
  std::string label;
  if (!formula_text.empty()) {
    auto f = parse_checked(formula_text, m, opts);
    est = estimate_observational(data, m, f, eopts);
    label = "Pr(" + to_string(f) + ")";
    record["formula"] = to_string(f);
  } else {
    auto kind = query == "pn"   ? CounterfactualKind::pn
                : query == "ps" ? CounterfactualKind::ps
                                : CounterfactualKind::pns;
    est = estimate_query(data, m, kind, cause, effect, eopts);
    label = query + "(" + cause + " -> " + effect + ")";
    record["query"] = query;
    record["cause"] = cause;
    record["effect"] = effect;
  }
  record["estimate"] = to_double(est.value);
  record["exact_fraction"] = to_fraction_string(est.value);
  if (est.stderr_) record["stderr"] = *est.stderr_;
  record["n_terms"] = est.stats.terms;
  record["skipped_terms"] = est.stats.missing_data;
  record["rows"] = data.rows.size();

  std::ostringstream human;
  human << label << " ~= " << to_decimal_string(est.value, 6) << " from "
        << data.rows.size() << " rows";
  if (est.stderr_) human << "  (bootstrap stderr " << *est.stderr_ << ")";
  human << "\n";
  if (est.stats.missing_data > 0) {
    human << "  " << est.stats.missing_data
          << " term(s) had empty conditioning cells (insufficient data)\n";
  }
  emit(opts, record, human.str());
  return 0;
}

// ---- check ---------------------------------------------------------------------

int cmd_check(const CommonOpts& opts) {
  auto m = load_cbn(opts.model_path);
  CompileOptions copts;
  copts.cap = opts.cap;
  auto fm = compile(m, copts);
  json record{{"command", "check"}};
  std::ostringstream human;
  bool all_ok = true;

  // compatibility: every cpt entry reproduced by the compiled model
  struct Entry {
    FormulaRef f;
    Rat value;
    int var, setting;
  };
  std::vector<Entry> entries;
  std::size_t checked = 0;
  bool compat = true;
  for (int v = 0; v < m.var_count() && compat; ++v) {
    if (m.has_context_table() && m.var(v).kind == VarKind::exogenous) continue;
    std::vector<int> pv(m.parents(v).size());
    for (int s = 0; s < m.setting_count(v); ++s) {
      m.setting_values(v, s, pv);
      std::vector<Assignment> assigns;
      for (std::size_t k = 0; k < pv.size(); ++k) {
        int p = m.parents(v)[k];
        assigns.push_back({m.var(p).name, m.var(p).domain[pv[k]]});
      }
      for (int val = 0; val < m.domain_size(v); ++val) {
        auto ev = Formula::make_event(m.var(v).name, m.var(v).domain[val]);
        auto f = assigns.empty()
                     ? ev
                     : Formula::make_do(InterventionSet(assigns), ev);
        compat = compat && oracle_probability(fm, *f) == m.cpt(v, s, val);
        ++checked;
        if (m.cpt(v, s, val) != 0 && m.cpt(v, s, val) != 1 &&
            entries.size() < 48) {
          entries.push_back({f, m.cpt(v, s, val), v, s});
        }
      }
    }
  }
  human << "audit compatibility: " << (compat ? "pass" : "FAIL") << " ("
        << checked << " entries)\n";
  record["compatibility"] = compat;
  all_ok = all_ok && compat;

  // independence: cross-variable and cross-setting pairs factorize
  bool indep = true;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < entries.size() && indep; ++i) {
    for (std::size_t j = i + 1; j < entries.size() && indep; ++j) {
      const auto& a = entries[i];
      const auto& b = entries[j];
      if (a.var == b.var && a.setting == b.setting) continue;
      auto conj = Formula::make_and({a.f, b.f});
      indep = oracle_probability(fm, *conj) == a.value * b.value;
      ++pairs;
    }
  }
  human << "audit independence: " << (indep ? "pass" : "FAIL") << " (" << pairs
        << " pairs)\n";
  record["independence"] = indep;
  all_ok = all_ok && indep;

  // oracle equivalence: the ccce semantics, the compiled-model oracle, and
  // the observational expansion agree on a formula battery
  bool equiv = true;
  std::size_t formulas = 0;
  std::vector<FormulaRef> battery;
  for (int v = 0; v < m.var_count(); ++v) {
    if (m.var(v).kind != VarKind::endogenous) continue;
    battery.push_back(Formula::make_event(m.var(v).name, m.var(v).domain[0]));
    battery.push_back(Formula::make_not(
        Formula::make_event(m.var(v).name, m.var(v).domain.back())));
  }
  for (const auto& e : entries) {
    if (battery.size() >= 28) break;
    battery.push_back(e.f);
  }
  // conjunctions and disjunctions mixing entries and events
  for (std::size_t i = 0; i + 1 < entries.size() && battery.size() < 40;
       i += 2) {
    battery.push_back(Formula::make_and({entries[i].f, entries[i + 1].f}));
    battery.push_back(Formula::make_or({entries[i].f, entries[i + 1].f}));
  }
  for (const auto& f : battery) {
    EnumerationOptions eo;
    eo.cap = opts.cap;
    Rat s = probability(m, *f, eo);
    equiv = equiv && s == oracle_probability(fm, *f, opts.cap);
    if (in_language_l(*f, m)) {
      equiv = equiv && s == evaluate_observational(m, f);
    }
    ++formulas;
    if (!equiv) break;
  }
  human << "audit oracle-equivalence: " << (equiv ? "pass" : "FAIL") << " ("
        << formulas << " formulas)\n";
  record["oracle_equivalence"] = equiv;
  all_ok = all_ok && equiv;

  emit(opts, record, human.str());
  return all_ok ? 0 : 1;
}

// ---- canon ---------------------------------------------------------------------

int cmd_canon(const CommonOpts& opts, const std::string& formula_text) {
  auto m = load_cbn(opts.model_path);
  auto f = parse_checked(formula_text, m, opts);
  auto dnf = to_canonical_dnf(f, m);
  json record{{"command", "canon"},
              {"formula", to_string(f)},
              {"disjuncts", json::array()}};
  std::ostringstream human;
  human << "canonical DNF of " << to_string(f) << ": " << dnf.disjuncts.size()
        << " mutually exclusive disjunct(s)\n";
  for (std::size_t i = 0; i < dnf.disjuncts.size(); ++i) {
    auto simplified = simplify_disjunct(dnf.disjuncts[i], m);
    json dj{{"disjunct", to_string(dnf.disjuncts[i])},
            {"simplified", to_string(simplified)},
            {"feasible", simplified.feasible}};
    record["disjuncts"].push_back(dj);
    human << "  " << (i + 1) << ". " << to_string(dnf.disjuncts[i]) << "\n"
          << "     simplified: " << to_string(simplified) << "\n";
  }
  emit(opts, record, human.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "cbnq: exact probabilities of interventional and counterfactual "
      "formulas over causal Bayesian networks"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string formula_text, given_text, query, cause, effect, data_path,
      out_path;
  bool prune = false;
  std::uint64_t n = 1000, seed = 1;
  int replicates = 200;

  auto* eval = app.add_subcommand("eval", "evaluate Pr(formula [| given])");
  add_common(eval, opts);
  eval->add_option("--formula", formula_text)->required();
  eval->add_option("--given", given_text, "conditioning formula");
  eval->add_flag("--prune", prune, "marginalize irrelevant variables");

  auto* cf = app.add_subcommand("counterfactual", "PN / PS / PNS queries");
  add_common(cf, opts);
  cf->add_option("--query", query)->required()->check(
      CLI::IsMember({"pn", "ps", "pns"}));
  cf->add_option("--cause", cause)->required();
  cf->add_option("--effect", effect)->required();
  cf->add_option("--data", data_path, "CSV for a side-by-side estimate");
  cf->add_option("--replicates", replicates, "bootstrap replicates");
  cf->add_option("--seed", seed, "bootstrap seed");

  auto* comp = app.add_subcommand("compile", "compile to a functional model");
  add_common(comp, opts);
  comp->add_option("--out", out_path, "fcm/1 output path");

  auto* smp = app.add_subcommand("sample", "sample observational rows (CSV)");
  add_common(smp, opts);
  smp->add_option("--n", n, "row count")->required();
  smp->add_option("--seed", seed, "rng seed");
  smp->add_option("--out", out_path, "CSV output path (stdout if omitted)");

  auto* est = app.add_subcommand("estimate", "estimate from observational data");
  add_common(est, opts);
  est->add_option("--formula", formula_text);
  est->add_option("--query", query)->check(CLI::IsMember({"pn", "ps", "pns"}));
  est->add_option("--cause", cause);
  est->add_option("--effect", effect);
  est->add_option("--data", data_path)->required();
  est->add_option("--replicates", replicates, "bootstrap replicates");
  est->add_option("--seed", seed, "bootstrap seed");

  auto* chk = app.add_subcommand("check", "run the i-compatibility audits");
  add_common(chk, opts);

  auto* can = app.add_subcommand("canon", "dump the canonical DNF");
  add_common(can, opts);
  can->add_option("--formula", formula_text)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (eval->parsed()) return cmd_eval(opts, formula_text, given_text, prune);
    if (cf->parsed()) {
      return cmd_counterfactual(opts, query, cause, effect, data_path,
                                replicates, seed);
    }
    if (comp->parsed()) return cmd_compile(opts, out_path);
    if (smp->parsed()) return cmd_sample(opts, n, seed, out_path);
    if (est->parsed()) {
      if (formula_text.empty() == query.empty()) {
        std::cerr << "estimate needs exactly one of --formula or --query\n";
        return 2;
      }
      if (!query.empty() && (cause.empty() || effect.empty())) {
        std::cerr << "--query needs --cause and --effect\n";
        return 2;
      }
      return cmd_estimate(opts, formula_text, query, cause, effect, data_path,
                          replicates, seed);
    }
    if (chk->parsed()) return cmd_check(opts);
    if (can->parsed()) return cmd_canon(opts, formula_text);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
