#pragma once

#include <vector>

#include "causal/formula.hpp"
#include "causal/model.hpp"

namespace causal::testing {

// Independent oracle for simple (intervention-free) formulas: enumerate
// every complete state, weight it by the chain rule, and add up the states
// where the formula holds.  Deliberately shares no code with the library's
// enumeration or evaluation paths.
inline bool holds_in_state(const Formula& f, const Cbn& m,
                           const std::vector<int>& state) {
  switch (f.kind()) {
    case Formula::Kind::event: {
      int var = m.var_id(f.event().var);
      return state[var] == m.value_id(var, f.event().value);
    }
    case Formula::Kind::negation:
      return !holds_in_state(*f.child(), m, state);
    case Formula::Kind::conjunction:
      for (const auto& c : f.children())
        if (!holds_in_state(*c, m, state)) return false;
      return true;
    case Formula::Kind::disjunction:
      for (const auto& c : f.children())
        if (holds_in_state(*c, m, state)) return true;
      return false;
    case Formula::Kind::intervention:
      throw QueryError("chain-rule oracle only handles simple formulas");
  }
  return false;
}

inline Rat chain_rule_probability(const Cbn& m, const Formula& f) {
  Rat total = 0;
  int n = m.var_count();
  std::vector<int> state(n, 0);
  auto recurse = [&](auto&& self, int i) -> void {
    if (i == n) {
      Rat p = 1;
      for (int v = 0; v < n; ++v) {
        if (m.var(v).kind == VarKind::exogenous) continue;
        std::vector<int> pv;
        for (int parent : m.parents(v)) pv.push_back(state[parent]);
        p *= m.cpt(v, m.setting_index(v, pv), state[v]);
      }
      // exogenous part: product of root cpts or the joint table
      Rat exo_p = 0;
      for (const auto& [vals, cp] : m.contexts()) {
        bool match = true;
        for (std::size_t k = 0; k < m.exogenous_vars().size(); ++k) {
          if (state[m.exogenous_vars()[k]] != vals[k]) {
            match = false;
            break;
          }
        }
        if (match) exo_p += cp;
      }
      p *= exo_p;
      if (p != 0 && holds_in_state(f, m, state)) total += p;
      return;
    }
    for (int val = 0; val < m.domain_size(i); ++val) {
      state[i] = val;
      self(self, i + 1);
    }
  };
  recurse(recurse, 0);
  return total;
}

}  // namespace causal::testing
