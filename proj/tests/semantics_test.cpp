#include <doctest.h>

#include "causal/parser.hpp"
#include "causal/semantics.hpp"
#include "support/chainrule.hpp"
#include "support/fixtures.hpp"

using namespace causal;
using namespace causal::testing;

namespace {

const Rat a(1, 3), b(2, 5), c(1, 4), d(3, 7), e(1, 6);

Rat example2_closed_form(const Rat& a_, const Rat& b_, const Rat& c_,
                         const Rat& d_, const Rat& e_) {
  return a_ * b_ * d_ * (1 - e_) + (1 - a_) * c_ * d_ * (1 - e_);
}

}  // namespace

TEST_CASE("selection counts: 32/16 for the chain, 128/16 with the extra edge") {
  auto ms = mstar(a, b, c, d, e);
  CHECK(count_ccces(ms) == 32);
  CHECK(count_fccces(ms) == 16);

  auto md = mdag(a, b, c, Rat(1, 2), Rat(1, 3), Rat(1, 4), Rat(1, 5));
  CHECK(count_ccces(md) == 128);
  CHECK(count_fccces(md) == 16);

  // single binary root: two fccces with the root's probabilities
  CbnSpec root;
  root.variables = {bvar("U", VarKind::exogenous)};
  root.cpts = {bincpt("U", {}, {Rat(2, 7)})};
  auto mu = Cbn::compile(root);
  std::vector<Rat> probs;
  for_each_fccce(mu, [&](const Selection& sel) {
    probs.push_back(sel.probability());
    return true;
  });
  CHECK(probs == std::vector<Rat>{Rat(2, 7), Rat(5, 7)});
}

TEST_CASE("enumeration partitions: probabilities sum to one") {
  for (const Cbn& m : {mstar(a, b, c, d, e), vee(), diamond()}) {
    Rat fsum = 0, csum = 0;
    for_each_fccce(m, [&](const Selection& s) {
      fsum += s.probability();
      return true;
    });
    for_each_ccce(m, [&](const Selection& s) {
      csum += s.probability();
      return true;
    });
    CHECK(fsum == Rat(1));
    CHECK(csum == Rat(1));
  }
}

TEST_CASE("each fccce is the disjunction of the ccces extending it") {
  auto m = mstar(a, b, c, d, e);
  std::vector<std::pair<std::vector<ConditionalEvent>, Rat>> fccces;
  std::vector<int> fctx;
  for_each_fccce(m, [&](const Selection& s) {
    fccces.emplace_back(s.events(), s.probability());
    fccces.back().first.push_back(
        {m.var_id("U"), 0, s.context_value(m.var_id("U"))});
    return true;
  });
  for (auto& [f_events, f_prob] : fccces) {
    Rat extension_sum = 0;
    for_each_ccce(m, [&](const Selection& s) {
      auto events = s.events();
      events.push_back({m.var_id("U"), 0, s.context_value(m.var_id("U"))});
      bool extends = true;
      for (const auto& fe : f_events) {
        if (std::find(events.begin(), events.end(), fe) == events.end()) {
          extends = false;
          break;
        }
      }
      if (extends) extension_sum += s.probability();
      return true;
    });
    CHECK(extension_sum == f_prob);
  }
}

TEST_CASE("exactly one fccce of the U=0 branch entails the running formula") {
  auto m = mstar(a, b, c, d, e);
  auto f = parse_formula("X=0 & Y=0 & [X<-1](Y=1)");
  auto complement = parse_formula("[X<-1](Y=0)");
  auto fixed = parse_formula("[X<-1](X=1)");
  int found = 0;
  for_each_fccce(m, [&](const Selection& s) {
    // fccce (a): U=0, X=0 | U=0, Y=0 | X=0, Y=1 | X=1
    int u = m.var_id("U"), x = m.var_id("X"), y = m.var_id("Y");
    bool is_a = s.context_value(u) == 0 && s.chosen(x, 0) == 0 &&
                s.chosen(y, 0) == 0 && s.chosen(y, 1) == 1;
    if (is_a) {
      ++found;
      CHECK(entails(m, s, *f));
      CHECK_FALSE(entails(m, s, *complement));
      CHECK(s.probability() == a * b * d * (1 - e));
    }
    CHECK(entails(m, s, *fixed));  // any fccce entails [X<-1](X=1)
    // dichotomy: exactly one of f, !f
    CHECK(entails(m, s, *f) != entails(m, s, *Formula::make_not(f)));
    return true;
  });
  CHECK(found == 1);
}

TEST_CASE("Example 2: the closed form abd(1-e) + (1-a)cd(1-e)") {
  auto m = mstar(a, b, c, d, e);
  auto f = parse_formula("X=0 & Y=0 & [X<-1](Y=1)");
  auto result = evaluate(m, *f);
  CHECK(result.mode == SelectionMode::fccce);
  CHECK(result.enumerated == 16);
  CHECK(result.entailing == 2);
  CHECK(result.probability == example2_closed_form(a, b, c, d, e));
}

TEST_CASE("Example 3: abf1(1-f2) + (1-a)cf3(1-f4)") {
  Rat f1(2, 9), f2(1, 8), f3(5, 6), f4(3, 11);
  auto m = mdag(a, b, c, f1, f2, f3, f4);
  auto f = parse_formula("X=0 & Y=0 & [X<-1](Y=1)");
  CHECK(probability(m, *f) ==
        a * b * f1 * (1 - f2) + (1 - a) * c * f3 * (1 - f4));
}

TEST_CASE("the footnote chain: Pr(X=1 | X=1) = 1, not 1/2") {
  auto m = footnote_chain();
  auto x1 = parse_formula("X=1");
  CHECK(probability(m, *x1) == Rat(1, 2));
  CHECK(conditional_probability(m, x1, x1) == Rat(1));
}

TEST_CASE("intervention-free formulas agree with chain-rule inference") {
  for (const Cbn& m :
       {mstar(a, b, c, d, e), vee(), diamond(), footnote_chain()}) {
    for (const char* text :
         {"X=0", "Y=1", "X=0 & Y=0", "X=1 | Y=0", "!(X=1 & Y=1)"}) {
      FormulaRef f;
      try {
        f = parse_formula(text, m, Language::l);
      } catch (const QueryError&) {
        continue;  // fixture without that variable
      }
      CHECK(probability(m, *f) == chain_rule_probability(m, *f));
    }
  }
}

TEST_CASE("fccce and ccce routes agree on L formulas") {
  auto m = mdag(a, b, c, Rat(2, 9), Rat(1, 8), Rat(5, 6), Rat(3, 11));
  for (const char* text :
       {"X=0 & Y=0 & [X<-1](Y=1)", "[X<-0](Y=1) | Y=0",
        "!([X<-1](Y=1)) & X=1"}) {
    auto f = parse_formula(text, m, Language::l);
    EnumerationOptions as_fccce, as_ccce;
    as_fccce.force_mode = SelectionMode::fccce;
    as_ccce.force_mode = SelectionMode::ccce;
    CHECK(probability(m, *f, as_fccce) == probability(m, *f, as_ccce));
  }
}

TEST_CASE("L+ formulas route to ccce enumeration") {
  auto m = mstar(a, b, c, d, e);
  auto lp = parse_formula("U=0 & [X<-1](Y=1)", m, Language::l_plus);
  auto result = evaluate(m, *lp);
  CHECK(result.mode == SelectionMode::ccce);
  CHECK(result.enumerated == 32);

  // forcing fccce mode on an exogenous intervention trips the missing-cell
  // error when a probed setting is outside the fixed context
  auto probe = parse_formula("[U<-1](Y=1)", m, Language::l_plus);
  EnumerationOptions forced;
  forced.force_mode = SelectionMode::fccce;
  CHECK_THROWS_AS(probability(m, *probe, forced), QueryError);
}

TEST_CASE("interventions on exogenous variables evaluate in L+") {
  auto m = mstar(a, b, c, d, e);
  // [U<-0](X=0) has the probability of the cpt entry b
  CHECK(probability(m, *parse_formula("[U<-0](X=0)")) == b);
  CHECK(probability(m, *parse_formula("[U<-1](X=0)")) == c);
}

TEST_CASE("conditional probability basics") {
  auto m = mstar(a, b, c, d, e);
  auto f = parse_formula("[X<-1](Y=0)");
  auto given = parse_formula("Y=1");
  auto taut = parse_formula("Y=0 | Y=1");

  CHECK(conditional_probability(m, f, taut) == probability(m, *f));
  CHECK(conditional_probability(m, f, f) == Rat(1));

  auto never = parse_formula("Y=0 & Y=1");
  CHECK_THROWS_AS(conditional_probability(m, f, never),
                  UndefinedConditional);
}

TEST_CASE("the conversion example's conditional: Pr([X<-1](Y=0) | Y=1) = 1/4") {
  auto m = mstar_converted();
  CHECK(conditional_probability(m, parse_formula("[X<-1](Y=0)"),
                                parse_formula("Y=1")) == Rat(1, 4));
  CHECK(probability(m, *parse_formula("Y=1")) == Rat(1, 2));
}

TEST_CASE("pruning marginalizes irrelevant variables without changing values") {
  auto m = diamond();
  for (const char* text :
       {"Y=1", "[X1<-1](Y=1)", "X2=0 & [X1<-1, X3<-1](Y=1)", "X3=1"}) {
    auto f = parse_formula(text, m, Language::l);
    EnumerationOptions pruned;
    pruned.prune = true;
    auto full = evaluate(m, *f);
    auto lean = evaluate(m, *f, pruned);
    CHECK(full.probability == lean.probability);
    CHECK(lean.enumerated <= full.enumerated);
  }
  // pruning pays off: X3=1 only needs X1 and X3
  EnumerationOptions pruned;
  pruned.prune = true;
  auto f = parse_formula("X3=1");
  CHECK(evaluate(m, *f, pruned).enumerated <
        evaluate(m, *f).enumerated);
}

TEST_CASE("the enumeration cap throws with a helpful message") {
  auto m = diamond();
  EnumerationOptions tiny;
  tiny.cap = 8;
  CHECK_THROWS_AS(probability(m, *parse_formula("Y=1"), tiny), CapExceeded);
}

TEST_CASE("zero-probability selections are skipped") {
  // deterministic Y=U chain: only 4 fccces carry positive probability
  auto m = footnote_chain();
  std::uint64_t n = 0;
  for_each_fccce(m, [&](const Selection&) {
    ++n;
    return true;
  });
  CHECK(n == 4);
}

TEST_CASE("selection trace rendering") {
  auto m = mstar_half();
  std::string first;
  for_each_fccce(m, [&](const Selection& s) {
    first = s.str();
    return false;  // early stop
  });
  CHECK(first == "U=0 ∧ (X=0 | U=0) ∧ (Y=0 | X=0) ∧ (Y=0 | X=1)");
}

TEST_CASE("joint context table changes probabilities only via correlation") {
  // two exogenous coins driving X = U1 XOR U2 deterministically
  CbnSpec spec;
  spec.variables = {bvar("U1", VarKind::exogenous),
                    bvar("U2", VarKind::exogenous),
                    bvar("X", VarKind::endogenous)};
  spec.cpts = {bincpt("X", {"U1", "U2"}, {Rat(1), Rat(0), Rat(0), Rat(1)})};
  spec.context_table = {{{{"U1", "0"}, {"U2", "0"}}, Rat(1, 4)},
                        {{{"U1", "0"}, {"U2", "1"}}, Rat(1, 4)},
                        {{{"U1", "1"}, {"U2", "0"}}, Rat(1, 4)},
                        {{{"U1", "1"}, {"U2", "1"}}, Rat(1, 4)}};
  auto independent = Cbn::compile(spec);
  CHECK(probability(independent, *parse_formula("X=1")) == Rat(1, 2));

  spec.context_table = {{{{"U1", "0"}, {"U2", "0"}}, Rat(1, 2)},
                        {{{"U1", "0"}, {"U2", "1"}}, Rat(0)},
                        {{{"U1", "1"}, {"U2", "0"}}, Rat(0)},
                        {{{"U1", "1"}, {"U2", "1"}}, Rat(1, 2)}};
  auto correlated = Cbn::compile(spec);
  CHECK(probability(correlated, *parse_formula("X=1")) == Rat(0));

  // pruning merges joint-table contexts by projection
  EnumerationOptions pruned;
  pruned.prune = true;
  for (const char* text : {"X=1", "U1=0", "U1=1 & X=0"}) {
    auto f = parse_formula(text);
    CHECK(probability(correlated, *f, pruned) == probability(correlated, *f));
  }
}
