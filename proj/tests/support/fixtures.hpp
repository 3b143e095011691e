#pragma once

#include <string>
#include <vector>

#include "causal/model.hpp"

namespace causal::testing {

inline Variable bvar(std::string name, VarKind kind) {
  return {std::move(name), kind, {"0", "1"}};
}

// Binary cpt from P(child=0 | setting) per parent setting, settings in
// lexicographic order with the first parent most significant.
inline CptSpec bincpt(std::string child, std::vector<std::string> parents,
                      std::vector<Rat> p0) {
  CptSpec c;
  c.child = std::move(child);
  c.parents = std::move(parents);
  int settings = 1 << c.parents.size();
  for (int s = 0; s < settings; ++s) {
    CptRow row;
    for (std::size_t i = 0; i < c.parents.size(); ++i) {
      int bit = (s >> (c.parents.size() - 1 - i)) & 1;
      row.given.push_back({c.parents[i], bit ? "1" : "0"});
    }
    row.dist.emplace_back("0", p0[s]);
    row.dist.emplace_back("1", 1 - p0[s]);
    c.rows.push_back(std::move(row));
  }
  return c;
}

// U -> X -> Y, all binary: P(U=0)=a, P(X=0|U=0)=b, P(X=0|U=1)=c,
// P(Y=0|X=0)=d, P(Y=0|X=1)=e.
inline Cbn mstar(const Rat& a, const Rat& b, const Rat& c, const Rat& d,
                 const Rat& e) {
  CbnSpec spec;
  spec.variables = {bvar("U", VarKind::exogenous),
                    bvar("X", VarKind::endogenous),
                    bvar("Y", VarKind::endogenous)};
  spec.cpts = {bincpt("U", {}, {a}), bincpt("X", {"U"}, {b, c}),
               bincpt("Y", {"X"}, {d, e})};
  return Cbn::compile(spec);
}

inline Cbn mstar_half() {
  return mstar(Rat(1, 2), Rat(1, 2), Rat(1, 2), Rat(1, 2), Rat(1, 2));
}

// The conversion example: Pr(U=0) = 1 and every other entry 1/2.
inline Cbn mstar_converted() {
  return mstar(Rat(1), Rat(1, 2), Rat(1, 2), Rat(1, 2), Rat(1, 2));
}

// Like M* but U is also a parent of Y: P(Y=0|U=0,X=0)=f1, P(Y=0|U=0,X=1)=f2,
// P(Y=0|U=1,X=0)=f3, P(Y=0|U=1,X=1)=f4.
inline Cbn mdag(const Rat& a, const Rat& b, const Rat& c, const Rat& f1,
                const Rat& f2, const Rat& f3, const Rat& f4) {
  CbnSpec spec;
  spec.variables = {bvar("U", VarKind::exogenous),
                    bvar("X", VarKind::endogenous),
                    bvar("Y", VarKind::endogenous)};
  spec.cpts = {bincpt("U", {}, {a}), bincpt("X", {"U"}, {b, c}),
               bincpt("Y", {"U", "X"}, {f1, f2, f3, f4})};
  return Cbn::compile(spec);
}

// The chain U -> Y -> X with P(U=1)=1, Y=U deterministically, and
// P(X=1|Y) = 1/2 for both values of Y.
inline Cbn footnote_chain() {
  CbnSpec spec;
  spec.variables = {bvar("U", VarKind::exogenous),
                    bvar("Y", VarKind::endogenous),
                    bvar("X", VarKind::endogenous)};
  spec.cpts = {bincpt("U", {}, {Rat(0)}),
               bincpt("Y", {"U"}, {Rat(1), Rat(0)}),
               bincpt("X", {"Y"}, {Rat(1, 2), Rat(1, 2)})};
  return Cbn::compile(spec);
}

// X -> Y <- Z with independent roots; X is not a descendant of Z.
inline Cbn vee() {
  CbnSpec spec;
  spec.variables = {bvar("X", VarKind::endogenous),
                    bvar("Z", VarKind::endogenous),
                    bvar("Y", VarKind::endogenous)};
  spec.cpts = {bincpt("X", {}, {Rat(2, 5)}), bincpt("Z", {}, {Rat(3, 7)}),
               bincpt("Y", {"X", "Z"},
                      {Rat(1, 3), Rat(2, 5), Rat(1, 2), Rat(3, 7)})};
  return Cbn::compile(spec);
}

// X1 -> X2, X1 -> X3, X2 -> Y, X3 -> Y.
inline Cbn diamond() {
  CbnSpec spec;
  spec.variables = {bvar("X1", VarKind::endogenous),
                    bvar("X2", VarKind::endogenous),
                    bvar("X3", VarKind::endogenous),
                    bvar("Y", VarKind::endogenous)};
  spec.cpts = {bincpt("X1", {}, {Rat(1, 3)}),
               bincpt("X2", {"X1"}, {Rat(1, 4), Rat(2, 3)}),
               bincpt("X3", {"X1"}, {Rat(3, 5), Rat(1, 5)}),
               bincpt("Y", {"X2", "X3"},
                      {Rat(1, 2), Rat(2, 7), Rat(3, 8), Rat(4, 5)})};
  return Cbn::compile(spec);
}

// A -> B -> C chain of endogenous variables with adjustable entries; used
// for the simplification guard cases.
inline Cbn chain3(const Rat& pa0, const Rat& pb0_a0, const Rat& pb0_a1,
                  const Rat& pc0_b0, const Rat& pc0_b1) {
  CbnSpec spec;
  spec.variables = {bvar("A", VarKind::endogenous),
                    bvar("B", VarKind::endogenous),
                    bvar("C", VarKind::endogenous)};
  spec.cpts = {bincpt("A", {}, {pa0}),
               bincpt("B", {"A"}, {pb0_a0, pb0_a1}),
               bincpt("C", {"B"}, {pc0_b0, pc0_b1})};
  return Cbn::compile(spec);
}

}  // namespace causal::testing
