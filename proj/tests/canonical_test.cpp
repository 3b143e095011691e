#include <doctest.h>

#include "causal/canonical.hpp"
#include "causal/parser.hpp"
#include "support/fixtures.hpp"

using namespace causal;
using namespace causal::testing;

namespace {

CbnSpec four_vars_spec() {
  CbnSpec spec;
  for (const char* n : {"A", "B", "C", "D"}) {
    spec.variables.push_back(bvar(n, VarKind::endogenous));
    spec.cpts.push_back(bincpt(n, {}, {Rat(1, 2)}));
  }
  return spec;
}

}  // namespace

TEST_CASE("push_negations moves negation through do and the connectives") {
  auto m = mstar_half();
  static_cast<void>(m);

  auto f = push_negations(parse_formula("!([X<-1](Y=1))"));
  REQUIRE(f->kind() == Formula::Kind::intervention);
  CHECK(f->body()->kind() == Formula::Kind::negation);

  CHECK(equal(*push_negations(parse_formula("!!X=0")), *parse_formula("X=0")));
  CHECK(equal(*push_negations(parse_formula("!(A=1 & B=1)")),
              *parse_formula("!A=1 | !B=1")));
  CHECK(equal(*push_negations(parse_formula("!(A=1 | !B=1)")),
              *parse_formula("!A=1 & B=1")));
}

TEST_CASE("merge_same_interventions groups do-atoms by intervention set") {
  auto f = merge_same_interventions(
      parse_formula("[X<-0](Y=1) & [X<-0](Z=1)"));
  REQUIRE(f->kind() == Formula::Kind::intervention);
  CHECK(equal(*f, *parse_formula("[X<-0](Y=1 & Z=1)")));

  // distinct sets stay apart
  auto g = merge_same_interventions(
      parse_formula("[X<-0](Y=1) & [X<-1](Y=1)"));
  CHECK(g->kind() == Formula::Kind::conjunction);

  // canonical ordering identifies syntactically reordered sets
  auto h = merge_same_interventions(
      parse_formula("[X<-0, Z<-1](Y=1) & [Z<-1, X<-0](W=1)"));
  REQUIRE(h->kind() == Formula::Kind::intervention);
  CHECK(h->intervention_set() == InterventionSet({{"X", "0"}, {"Z", "1"}}));
}

TEST_CASE("the two-conjunct disjunction expands to 7 exclusive disjuncts") {
  // (p1 & p2) | (p3 & p4) over four independent atoms
  auto m = Cbn::compile(four_vars_spec());
  auto f = parse_formula("(A=1 & B=1) | (C=1 & D=1)");
  auto dnf = to_canonical_dnf(f, m);
  CHECK(dnf.disjuncts.size() == 7);
  CHECK(pairwise_exclusive(dnf));
  // every disjunct carries the full sign pattern over all four atoms
  for (const auto& d : dnf.disjuncts) {
    CHECK(d.simple.size() == 4);
    CHECK(d.parts.empty());
  }
}

TEST_CASE("a single event is one disjunct with no intervention part") {
  auto m = mstar_half();
  auto dnf = to_canonical_dnf(parse_formula("X=0"), m);
  REQUIRE(dnf.disjuncts.size() == 1);
  CHECK(dnf.disjuncts[0].parts.empty());
  REQUIRE(dnf.disjuncts[0].simple.size() == 1);
  CHECK(dnf.disjuncts[0].simple[0].ev == Event{"X", "0"});
  CHECK_FALSE(dnf.disjuncts[0].simple[0].negated);
}

TEST_CASE("intervention atoms group by their set inside a disjunct") {
  auto m = vee();
  auto dnf =
      to_canonical_dnf(parse_formula("[X<-1](Y=1) & [X<-1](Y=0)"), m);
  // contradictory under one intervention set: Y=1 and Y=0 both positive
  CHECK(dnf.disjuncts.empty());

  auto dnf2 = to_canonical_dnf(parse_formula("[X<-1](Y=1) & [Z<-1](Y=1)"), m);
  REQUIRE(dnf2.disjuncts.size() == 1);
  CHECK(dnf2.disjuncts[0].parts.size() == 2);
}

TEST_CASE("multi-valued negations expand to sibling values") {
  CbnSpec spec;
  spec.variables = {{"X", VarKind::endogenous, {"a", "b", "c"}}};
  CptSpec c;
  c.child = "X";
  c.rows.push_back(
      {{}, {{"a", Rat(1, 3)}, {"b", Rat(1, 3)}, {"c", Rat(1, 3)}}});
  spec.cpts = {c};
  auto m = Cbn::compile(spec);

  auto dnf = to_canonical_dnf(parse_formula("!X=a"), m);
  // satisfying sign patterns over {X=b, X=c}, minus the impossible (1,1)
  CHECK(dnf.disjuncts.size() == 2);
  CHECK(pairwise_exclusive(dnf));
}

TEST_CASE("atom cap guards the exponential expansion") {
  auto m = Cbn::compile(four_vars_spec());
  CanonicalOptions tight;
  tight.max_atoms = 3;
  CHECK_THROWS_AS(
      to_canonical_dnf(parse_formula("(A=1 & B=1) | (C=1 & D=1)"), m, tight),
      CapExceeded);
}

TEST_CASE("simplify drops a redundant intervention and re-merges") {
  auto m = vee();  // X and Z are roots, Y their child
  Disjunct d;
  d.simple = {{{"X", "0"}, false}};
  d.parts = {{InterventionSet({{"X", "0"}, {"Z", "1"}}),
              {{{"Y", "1"}, false}}}};
  auto s = simplify_disjunct(d, m);
  CHECK(s.feasible);
  REQUIRE(s.parts.size() == 1);
  CHECK(s.parts[0].iv == InterventionSet({{"Z", "1"}}));

  // after dropping, the two sets coincide and merge
  Disjunct d2;
  d2.simple = {{{"X", "0"}, false}};
  d2.parts = {{InterventionSet({{"X", "0"}, {"Z", "1"}}),
               {{{"Y", "1"}, false}}},
              {InterventionSet({{"Z", "1"}}), {{{"Y", "0"}, true}}}};
  auto s2 = simplify_disjunct(d2, m);
  REQUIRE(s2.parts.size() == 1);
  CHECK(s2.parts[0].iv == InterventionSet({{"Z", "1"}}));
  CHECK(s2.parts[0].body.size() == 2);
}

TEST_CASE("the drop is guarded when the variable descends from the rest") {
  // A -> B -> C: forcing A can move B, so B<-1 is not redundant in
  // [A<-1, B<-1] even when the simple part asserts B=1.
  auto m = chain3(Rat(1, 2), Rat(1, 2), Rat(1, 2), Rat(1, 2), Rat(1, 2));
  Disjunct d;
  d.simple = {{{"B", "1"}, false}};
  d.parts = {{InterventionSet({{"A", "1"}, {"B", "1"}}),
              {{{"C", "1"}, false}}}};
  auto s = simplify_disjunct(d, m);
  REQUIRE(s.parts.size() == 1);
  CHECK(s.parts[0].iv == InterventionSet({{"A", "1"}, {"B", "1"}}));

  // whereas A<-1 with A=1 asserted does drop (A descends from nothing)
  Disjunct d2;
  d2.simple = {{{"A", "1"}, false}};
  d2.parts = {{InterventionSet({{"A", "1"}, {"B", "1"}}),
               {{{"C", "1"}, false}}}};
  auto s2 = simplify_disjunct(d2, m);
  REQUIRE(s2.parts.size() == 1);
  CHECK(s2.parts[0].iv == InterventionSet({{"B", "1"}}));
}

TEST_CASE("non-descendant conjuncts are pulled out of the intervention") {
  auto m = vee();
  Disjunct d;
  d.parts = {{InterventionSet({{"X", "1"}}),
              {{{"Z", "1"}, false}, {{"Y", "1"}, false}}}};
  auto s = simplify_disjunct(d, m);
  REQUIRE(s.parts.size() == 1);
  CHECK(s.parts[0].body.size() == 1);  // only Y=1 stays under the do
  CHECK(s.parts[0].body[0].ev == Event{"Y", "1"});
  REQUIRE(s.simple.size() == 1);
  CHECK(s.simple[0].ev == Event{"Z", "1"});

  // a child of an intervened variable stays put
  Disjunct d2;
  d2.parts = {{InterventionSet({{"X", "1"}}), {{{"Y", "1"}, false}}}};
  auto s2 = simplify_disjunct(d2, m);
  CHECK(s2 == d2);
}

TEST_CASE("body literals on intervened variables are decided statically") {
  auto m = vee();
  Disjunct tautology;
  tautology.parts = {{InterventionSet({{"X", "1"}}), {{{"X", "1"}, false}}}};
  auto s = simplify_disjunct(tautology, m);
  CHECK(s.feasible);
  CHECK(s.parts.empty());  // [X<-1](X=1) is trivially true

  Disjunct contradiction;
  contradiction.parts = {{InterventionSet({{"X", "1"}}),
                          {{{"X", "0"}, false}}}};
  CHECK_FALSE(simplify_disjunct(contradiction, m).feasible);
}

TEST_CASE("an emptied intervention set folds into the simple part") {
  auto m = vee();
  Disjunct d;
  d.simple = {{{"X", "0"}, false}};
  d.parts = {{InterventionSet({{"X", "0"}}), {{{"Y", "1"}, false}}}};
  auto s = simplify_disjunct(d, m);
  CHECK(s.parts.empty());
  CHECK(s.simple.size() == 2);
}

TEST_CASE("contradictory simple parts are flagged infeasible") {
  auto m = vee();
  Disjunct d;
  d.simple = {{{"X", "0"}, false}, {{"X", "1"}, false}};
  CHECK_FALSE(simplify_disjunct(d, m).feasible);

  Disjunct d2;
  d2.simple = {{{"X", "0"}, true}, {{"X", "1"}, true}};  // binary: nothing left
  CHECK_FALSE(simplify_disjunct(d2, m).feasible);
}
