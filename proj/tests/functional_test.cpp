#include <doctest.h>

#include <map>
#include <sstream>

#include "causal/functional.hpp"
#include "causal/functional_io.hpp"
#include "causal/parser.hpp"
#include "support/fixtures.hpp"

using namespace causal;
using namespace causal::testing;

TEST_CASE("conversion example: 16 contexts, each of measure 1/16") {
  auto fm = compile(mstar_converted());
  CHECK(fm.positive_context_count() == 16);
  int n = 0;
  fm.for_each_context([&](const ExtendedContext& ctx, const Rat& p) {
    CHECK(p == Rat(1, 16));
    CHECK(ctx.exo_values[0] == 0);  // Pr(U=0) = 1
    ++n;
    return true;
  });
  CHECK(n == 16);
}

TEST_CASE("response function codes decode lexicographically") {
  auto fm = compile(mstar_half());
  int x = fm.base().var_id("X");
  // four functions f00, f01, f10, f11 over the single parent U
  REQUIRE(fm.support(x).size() == 4);
  std::vector<std::pair<int, int>> seen;
  for (const auto& [code, p] : fm.support(x)) {
    auto rf = fm.response(x, code);
    seen.emplace_back(rf.output(0), rf.output(1));
    CHECK(p == Rat(1, 4));
  }
  CHECK(seen == std::vector<std::pair<int, int>>{
                    {0, 0}, {0, 1}, {1, 0}, {1, 1}});
}

TEST_CASE("deterministic cpts leave a single response function") {
  auto fm = compile(footnote_chain());
  int y = fm.base().var_id("Y");
  REQUIRE(fm.support(y).size() == 1);  // Y = U has one positive function
  auto rf = fm.response(y, fm.support(y).front().first);
  CHECK(rf.output(0) == 0);
  CHECK(rf.output(1) == 1);
  CHECK(fm.support(y).front().second == Rat(1));
}

TEST_CASE("the marginal of Pr' on U equals the exogenous distribution") {
  auto m = mstar(Rat(1, 3), Rat(2, 5), Rat(1, 4), Rat(3, 7), Rat(1, 6));
  auto fm = compile(m);
  std::map<int, Rat> marginal;
  fm.for_each_context([&](const ExtendedContext& ctx, const Rat& p) {
    marginal[ctx.exo_values[0]] += p;
    return true;
  });
  CHECK(marginal[0] == Rat(1, 3));
  CHECK(marginal[1] == Rat(2, 3));
}

TEST_CASE("satisfies: the (U=0, f0i, g10) contexts pick out Y=1 & [X<-1](Y=0)") {
  auto fm = compile(mstar_converted());
  auto f = parse_formula("Y=1 & [X<-1](Y=0)");
  int x = fm.base().var_id("X"), y = fm.base().var_id("Y");
  int hits = 0;
  fm.for_each_context([&](const ExtendedContext& ctx, const Rat&) {
    auto fx = fm.response(x, ctx.codes[fm.endo_position(x)]);
    auto gy = fm.response(y, ctx.codes[fm.endo_position(y)]);
    bool expected = fx.output(0) == 0 && gy.output(0) == 1 && gy.output(1) == 0;
    CHECK(satisfies(fm, ctx, *f) == expected);
    if (expected) ++hits;
    return true;
  });
  CHECK(hits == 2);

  // any context satisfies [X<-x](X=x); conjunction splits classically
  auto fixed = parse_formula("[X<-1](X=1)");
  auto conj = parse_formula("Y=1 & [X<-1](X=1)");
  auto part = parse_formula("Y=1");
  fm.for_each_context([&](const ExtendedContext& ctx, const Rat&) {
    CHECK(satisfies(fm, ctx, *fixed));
    CHECK(satisfies(fm, ctx, *conj) == satisfies(fm, ctx, *part));
    return true;
  });
}

TEST_CASE("oracle on the conversion example") {
  auto fm = compile(mstar_converted());
  CHECK(oracle_probability(fm, *parse_formula("Y=1")) == Rat(1, 2));
  CHECK(oracle_conditional(fm, parse_formula("[X<-1](Y=0)"),
                           parse_formula("Y=1")) == Rat(1, 4));
  CHECK(oracle_probability(fm, *parse_formula("Y=0 | Y=1")) == Rat(1));
}

TEST_CASE("extended contexts are in probability-preserving bijection with ccces") {
  auto m = mdag(Rat(1, 3), Rat(2, 5), Rat(1, 4), Rat(2, 9), Rat(1, 8),
                Rat(5, 6), Rat(3, 11));
  auto fm = compile(m);

  // collect context probabilities keyed by (u, all response outputs)
  std::map<std::string, Rat> by_key;
  fm.for_each_context([&](const ExtendedContext& ctx, const Rat& p) {
    std::string key = std::to_string(ctx.exo_values[0]);
    for (int v : fm.endogenous()) {
      auto rf = fm.response(v, ctx.codes[fm.endo_position(v)]);
      for (int s = 0; s < fm.base().setting_count(v); ++s) {
        key += "," + std::to_string(rf.output(s));
      }
    }
    by_key[key] = p;
    return true;
  });
  CHECK(by_key.size() == 128);

  // ccces map to the same keys with the same probabilities
  std::size_t matched = 0;
  for_each_ccce(m, [&](const Selection& sel) {
    std::string key = std::to_string(sel.context_value(m.var_id("U")));
    for (int v : fm.endogenous()) {
      for (int s = 0; s < m.setting_count(v); ++s) {
        key += "," + std::to_string(sel.chosen(v, s));
      }
    }
    REQUIRE(by_key.count(key) == 1);
    CHECK(by_key[key] == sel.probability());
    ++matched;
    return true;
  });
  CHECK(matched == 128);
}

TEST_CASE("oracle equals the ccce semantics on assorted formulas") {
  auto m = mstar(Rat(1, 3), Rat(2, 5), Rat(1, 4), Rat(3, 7), Rat(1, 6));
  auto fm = compile(m);
  for (const char* text :
       {"X=0 & Y=0 & [X<-1](Y=1)", "[X<-0](Y=1) | [X<-1](Y=1)",
        "!([X<-1](Y=1)) & Y=1", "U=1 & [U<-0](X=0)", "X=1"}) {
    auto f = parse_formula(text);
    CAPTURE(text);
    CHECK(oracle_probability(fm, *f) == probability(m, *f));
  }
}

TEST_CASE("compatibility audit: every cpt entry is reproduced exactly") {
  auto m = mdag(Rat(1, 3), Rat(2, 5), Rat(1, 4), Rat(2, 9), Rat(1, 8),
                Rat(5, 6), Rat(3, 11));
  auto fm = compile(m);
  for (int v = 0; v < m.var_count(); ++v) {
    std::vector<int> pv(m.parents(v).size());
    for (int s = 0; s < m.setting_count(v); ++s) {
      m.setting_values(v, s, pv);
      for (int val = 0; val < m.domain_size(v); ++val) {
        std::vector<Assignment> assigns;
        for (std::size_t i = 0; i < pv.size(); ++i) {
          int p = m.parents(v)[i];
          assigns.push_back({m.var(p).name, m.var(p).domain[pv[i]]});
        }
        auto ev = Formula::make_event(m.var(v).name, m.var(v).domain[val]);
        auto corresponding =
            assigns.empty()
                ? ev
                : Formula::make_do(InterventionSet(assigns), ev);
        CHECK(oracle_probability(fm, *corresponding) == m.cpt(v, s, val));
      }
    }
  }
}

TEST_CASE("independence audit: cross-variable and cross-setting products") {
  auto m = mstar(Rat(1, 3), Rat(2, 5), Rat(1, 4), Rat(3, 7), Rat(1, 6));
  auto fm = compile(m);
  // different settings of one variable
  auto f1 = parse_formula("[X<-0](Y=0)");
  auto f2 = parse_formula("[X<-1](Y=1)");
  CHECK(oracle_probability(fm, *Formula::make_and(
                                   {parse_formula("[X<-0](Y=0)"),
                                    parse_formula("[X<-1](Y=1)")})) ==
        oracle_probability(fm, *f1) * oracle_probability(fm, *f2));
  // different variables
  auto g1 = parse_formula("[U<-0](X=0)");
  auto g2 = parse_formula("[X<-1](Y=0)");
  CHECK(oracle_probability(fm, *Formula::make_and(
                                   {parse_formula("[U<-0](X=0)"),
                                    parse_formula("[X<-1](Y=0)")})) ==
        oracle_probability(fm, *g1) * oracle_probability(fm, *g2));
}

TEST_CASE("sampling is deterministic and statistically sane") {
  auto fm = compile(mstar_half());
  auto d1 = sample(fm, 2000, 42);
  auto d2 = sample(fm, 2000, 42);
  CHECK(d1.rows == d2.rows);
  auto d3 = sample(fm, 2000, 43);
  CHECK(d1.rows != d3.rows);

  REQUIRE(d1.columns == std::vector<std::string>{"U", "X", "Y"});
  int y1 = 0;
  for (const auto& row : d1.rows) y1 += row[2] == "1";
  // Pr(Y=1) = 1/2; 3 sigma for n=2000 is about 67
  CHECK(std::abs(y1 - 1000) < 100);
}

TEST_CASE("sampled joint matches the chain-rule probabilities") {
  auto m = mstar(Rat(1, 3), Rat(2, 5), Rat(1, 4), Rat(3, 7), Rat(1, 6));
  auto fm = compile(m);
  const int n = 20000;
  auto data = sample(fm, n, 7);
  std::map<std::pair<std::string, std::string>, int> counts;
  for (const auto& row : data.rows) ++counts[{row[1], row[2]}];
  for (const auto& [xy, count] : counts) {
    auto f = Formula::make_and({Formula::make_event("X", xy.first),
                                Formula::make_event("Y", xy.second)});
    double expect = to_double(probability(m, *f));
    double sigma = std::sqrt(expect * (1 - expect) / n);
    CHECK(std::abs(double(count) / n - expect) < 5 * sigma);
  }
}

TEST_CASE("fcm/1 export lists response variables with their distributions") {
  auto fm = compile(mstar_half());
  auto j = fcm_to_json(fm);
  CHECK(j["format"] == "fcm/1");
  REQUIRE(j["response_variables"].size() == 2);
  const auto& ux = j["response_variables"][0];
  CHECK(ux["name"] == "U_X");
  CHECK(ux["child"] == "X");
  CHECK(ux["distribution"].size() == 4);
  CHECK(ux["distribution"][0]["p"] == "1/4");
}

TEST_CASE("compile cap") {
  CompileOptions tiny;
  tiny.cap = 4;
  CHECK_THROWS_AS(compile(mstar_half(), tiny), CapExceeded);
}
