#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "causal/formula.hpp"

namespace causal {

// --- Negation pushing -------------------------------------------------------
//
// Rewrites a formula so that no negation is applied to an intervention or a
// connective: !([iv]b) ~ [iv](!b), !(a & b) ~ !a | !b, !!a ~ a.  The result
// is logically equivalent and negations sit directly on primitive events.

namespace detail {

inline FormulaRef push_neg(const FormulaRef& f, bool negate) {
  switch (f->kind()) {
    case Formula::Kind::event:
      return negate ? Formula::make_not(f) : f;
    case Formula::Kind::negation:
      return push_neg(f->child(), !negate);
    case Formula::Kind::conjunction:
    case Formula::Kind::disjunction: {
      std::vector<FormulaRef> parts;
      parts.reserve(f->children().size());
      for (const auto& c : f->children()) parts.push_back(push_neg(c, negate));
      bool keep_and = (f->kind() == Formula::Kind::conjunction) != negate;
      return keep_and ? Formula::make_and(std::move(parts))
                      : Formula::make_or(std::move(parts));
    }
    case Formula::Kind::intervention:
      return Formula::make_do(f->intervention_set(),
                              push_neg(f->body(), negate));
  }
  return f;
}

}  // namespace detail

inline FormulaRef push_negations(const FormulaRef& f) {
  return detail::push_neg(f, false);
}

// --- Merging identical interventions ----------------------------------------
//
// Within every conjunction, [iv]b1 & [iv]b2 collapses to [iv](b1 & b2).
// Expects negation-pushed input (a negated [iv] would hide a mergeable atom).

inline FormulaRef merge_same_interventions(const FormulaRef& f) {
  switch (f->kind()) {
    case Formula::Kind::event:
    case Formula::Kind::negation:
    case Formula::Kind::intervention:
      return f;
    case Formula::Kind::disjunction: {
      std::vector<FormulaRef> parts;
      for (const auto& c : f->children())
        parts.push_back(merge_same_interventions(c));
      return Formula::make_or(std::move(parts));
    }
    case Formula::Kind::conjunction: {
      std::vector<FormulaRef> rest;
      std::vector<std::pair<InterventionSet, std::vector<FormulaRef>>> groups;
      for (const auto& c0 : f->children()) {
        auto c = merge_same_interventions(c0);
        if (c->kind() == Formula::Kind::intervention) {
          auto it = std::find_if(groups.begin(), groups.end(), [&](auto& g) {
            return g.first == c->intervention_set();
          });
          if (it == groups.end()) {
            groups.push_back({c->intervention_set(), {c->body()}});
          } else {
            it->second.push_back(c->body());
          }
        } else {
          rest.push_back(std::move(c));
        }
      }
      for (auto& [iv, bodies] : groups) {
        rest.push_back(Formula::make_do(iv, Formula::make_and(std::move(bodies))));
      }
      return Formula::make_and(std::move(rest));
    }
  }
  return f;
}

// --- Canonical mutually exclusive DNF ---------------------------------------

struct EventLiteral {
  Event ev;
  bool negated = false;
  friend bool operator==(const EventLiteral&, const EventLiteral&) = default;
  friend auto operator<=>(const EventLiteral&, const EventLiteral&) = default;
};

struct InterventionPart {
  InterventionSet iv;
  std::vector<EventLiteral> body;
  friend bool operator==(const InterventionPart&,
                         const InterventionPart&) = default;
};

// One disjunct of the canonical form: a conjunction of event literals (the
// simple part) plus intervention parts with pairwise distinct intervention
// sets.  `feasible` is cleared when simplification proves the disjunct
// unsatisfiable.
struct Disjunct {
  std::vector<EventLiteral> simple;
  std::vector<InterventionPart> parts;
  bool feasible = true;
  friend bool operator==(const Disjunct&, const Disjunct&) = default;
};

struct CanonicalDnf {
  std::vector<Disjunct> disjuncts;
};

struct CanonicalOptions {
  // 2^max_atoms sign patterns are enumerated; above this the transformation
  // fails with CapExceeded rather than blowing up.
  int max_atoms = 20;
};

namespace detail {

// A modal atom is a primitive event under an intervention set (the empty set
// for plain events).  The intervention equivalences let every formula be
// rewritten as a Boolean combination of modal atoms.
struct ModalAtom {
  InterventionSet iv;
  Event ev;
  friend bool operator==(const ModalAtom&, const ModalAtom&) = default;
};

struct PropNode {
  enum class Kind { leaf, conj, disj } kind = Kind::leaf;
  int atom = -1;
  std::vector<PropNode> children;

  bool eval(std::uint64_t mask) const {
    switch (kind) {
      case Kind::leaf:
        return (mask >> atom) & 1;
      case Kind::conj:
        for (const auto& c : children)
          if (!c.eval(mask)) return false;
        return true;
      case Kind::disj:
        for (const auto& c : children)
          if (c.eval(mask)) return true;
        return false;
    }
    return false;
  }
};

class AtomRegistry {
 public:
  explicit AtomRegistry(const Cbn& m) : model_(m) {}

  int id_of(const InterventionSet& iv, const Event& ev) {
    ModalAtom atom{iv, ev};
    for (std::size_t i = 0; i < atoms_.size(); ++i)
      if (atoms_[i] == atom) return static_cast<int>(i);
    atoms_.push_back(std::move(atom));
    return static_cast<int>(atoms_.size()) - 1;
  }

  // !(iv, X=x) expands to the disjunction of the sibling values of X; this
  // is where multi-valued negations are traded for positive atoms.
  PropNode expand_negation(const InterventionSet& iv, const Event& ev) {
    int var = model_.require_var(ev.var);
    model_.require_value(var, ev.value);
    PropNode node;
    node.kind = PropNode::Kind::disj;
    for (const auto& label : model_.var(var).domain) {
      if (label == ev.value) continue;
      PropNode leaf;
      leaf.atom = id_of(iv, {ev.var, label});
      node.children.push_back(std::move(leaf));
    }
    return node;
  }

  const std::vector<ModalAtom>& atoms() const { return atoms_; }

 private:
  const Cbn& model_;
  std::vector<ModalAtom> atoms_;
};

inline PropNode to_prop(const FormulaRef& f, const InterventionSet& iv,
                        AtomRegistry& reg) {
  switch (f->kind()) {
    case Formula::Kind::event: {
      PropNode leaf;
      leaf.atom = reg.id_of(iv, f->event());
      return leaf;
    }
    case Formula::Kind::negation:
      // negation-pushed input: the child is a primitive event
      return reg.expand_negation(iv, f->child()->event());
    case Formula::Kind::conjunction:
    case Formula::Kind::disjunction: {
      PropNode node;
      node.kind = f->kind() == Formula::Kind::conjunction
                      ? PropNode::Kind::conj
                      : PropNode::Kind::disj;
      for (const auto& c : f->children())
        node.children.push_back(to_prop(c, iv, reg));
      return node;
    }
    case Formula::Kind::intervention:
      return to_prop(f->body(), f->intervention_set(), reg);
  }
  return {};
}

}  // namespace detail

// Transforms a formula into an equivalent disjunction of pairwise mutually
// exclusive disjuncts.  Every satisfying sign pattern over the formula's
// modal atoms becomes one disjunct carrying all atoms with their signs, so
// any two disjuncts disagree on at least one literal.  Patterns that are
// internally contradictory (they would hold in no world) are dropped.
inline CanonicalDnf to_canonical_dnf(const FormulaRef& f, const Cbn& m,
                                     CanonicalOptions options = {}) {
  detail::AtomRegistry reg(m);
  auto prop = detail::to_prop(push_negations(f), InterventionSet(), reg);
  const auto& atoms = reg.atoms();
  int n = static_cast<int>(atoms.size());
  if (n > options.max_atoms || n > 62) {
    throw CapExceeded("canonical DNF over " + std::to_string(n) +
                      " distinct modal atoms exceeds the cap of " +
                      std::to_string(std::min(options.max_atoms, 62)));
  }

  // Atoms grouped by (intervention set, variable); used to reject sign
  // patterns no world can realize: a variable with two positive values under
  // the same intervention set, or with every value excluded.
  std::map<std::pair<InterventionSet, std::string>, std::vector<int>> by_var;
  for (int i = 0; i < n; ++i) {
    by_var[{atoms[i].iv, atoms[i].ev.var}].push_back(i);
  }

  CanonicalDnf out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << n); ++mask) {
    if (!prop.eval(mask)) continue;

    bool consistent = true;
    for (const auto& [key, ids] : by_var) {
      int positives = 0;
      std::set<std::string> excluded;
      for (int i : ids) {
        if ((mask >> i) & 1) {
          ++positives;
        } else {
          excluded.insert(atoms[i].ev.value);
        }
      }
      if (positives > 1) consistent = false;
      if (positives == 0) {
        int var = m.require_var(atoms[ids.front()].ev.var);
        if (static_cast<int>(excluded.size()) == m.domain_size(var))
          consistent = false;
      }
    }
    if (!consistent) continue;

    Disjunct d;
    std::vector<std::pair<InterventionSet, std::vector<EventLiteral>>> groups;
    for (int i = 0; i < n; ++i) {
      EventLiteral lit{atoms[i].ev, ((mask >> i) & 1) == 0};
      if (atoms[i].iv.empty()) {
        d.simple.push_back(std::move(lit));
        continue;
      }
      auto it = std::find_if(groups.begin(), groups.end(), [&](auto& g) {
        return g.first == atoms[i].iv;
      });
      if (it == groups.end()) {
        groups.push_back({atoms[i].iv, {std::move(lit)}});
      } else {
        it->second.push_back(std::move(lit));
      }
    }
    for (auto& [iv, body] : groups) {
      d.parts.push_back({std::move(iv), std::move(body)});
    }
    std::sort(d.parts.begin(), d.parts.end(),
              [](const InterventionPart& a, const InterventionPart& b) {
                return a.iv < b.iv;
              });
    out.disjuncts.push_back(std::move(d));
  }
  return out;
}

// --- Per-disjunct simplification ---------------------------------------------
//
// Brings a disjunct to the evaluation form: no redundant interventions, and
// every event left under an intervention mentions a descendant of an
// intervened variable.  Dropping the assignment X<-x requires both that the
// simple part asserts X=x and that X is not a descendant of another variable
// in the same intervention set; otherwise the remaining interventions could
// move X away from x and the dropped assignment would not be a no-op.
inline Disjunct simplify_disjunct(const Disjunct& input, const Cbn& m) {
  Disjunct d = input;
  auto dedupe = [](std::vector<EventLiteral>& lits) {
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
  };

  bool changed = true;
  while (changed && d.feasible) {
    changed = false;

    for (auto& part : d.parts) {
      std::vector<EventLiteral> keep;
      for (auto& lit : part.body) {
        auto forced = part.iv.value_of(lit.ev.var);
        if (forced) {
          // The intervention pins this variable; the literal is decided.
          bool truth = (*forced == lit.ev.value) != lit.negated;
          if (!truth) d.feasible = false;
          changed = true;
          continue;
        }
        int var = m.require_var(lit.ev.var);
        bool descendant = false;
        for (const auto& a : part.iv.items()) {
          if (m.is_descendant(var, m.require_var(a.var))) descendant = true;
        }
        if (!descendant) {
          // Unaffected by the intervention: pull it out of the modality.
          d.simple.push_back(lit);
          changed = true;
          continue;
        }
        keep.push_back(lit);
      }
      part.body = std::move(keep);
    }
    if (!d.feasible) break;
    std::erase_if(d.parts,
                  [&](const InterventionPart& p) { return p.body.empty(); });

    // Redundant interventions: X<-x with X=x asserted by the simple part.
    for (auto& part : d.parts) {
      for (const auto& a : std::vector<Assignment>(part.iv.items())) {
        bool asserted =
            std::any_of(d.simple.begin(), d.simple.end(), [&](const auto& l) {
              return !l.negated && l.ev.var == a.var && l.ev.value == a.value;
            });
        if (!asserted) continue;
        int var = m.require_var(a.var);
        bool guarded = false;
        for (const auto& other : part.iv.items()) {
          if (other.var != a.var &&
              m.is_descendant(var, m.require_var(other.var))) {
            guarded = true;
          }
        }
        if (!guarded) {
          part.iv = part.iv.without(a.var);
          changed = true;
        }
      }
    }

    // An emptied intervention set means the body talks about the actual
    // world; fold it into the simple part.
    for (auto& part : d.parts) {
      if (part.iv.empty()) {
        d.simple.insert(d.simple.end(), part.body.begin(), part.body.end());
        part.body.clear();
        changed = true;
      }
    }
    std::erase_if(d.parts,
                  [&](const InterventionPart& p) { return p.body.empty(); });

    // Dropping assignments can make two intervention sets equal; re-merge.
    std::sort(d.parts.begin(), d.parts.end(),
              [](const InterventionPart& a, const InterventionPart& b) {
                return a.iv < b.iv;
              });
    for (std::size_t i = 0; i + 1 < d.parts.size();) {
      if (d.parts[i].iv == d.parts[i + 1].iv) {
        d.parts[i].body.insert(d.parts[i].body.end(),
                               d.parts[i + 1].body.begin(),
                               d.parts[i + 1].body.end());
        d.parts.erase(d.parts.begin() + i + 1);
        changed = true;
      } else {
        ++i;
      }
    }
    for (auto& part : d.parts) dedupe(part.body);
  }

  dedupe(d.simple);
  // Contradictory simple part: conflicting positives, a value both asserted
  // and denied, or every domain value denied.
  std::map<std::string, std::vector<const EventLiteral*>> by_var;
  for (const auto& l : d.simple) by_var[l.ev.var].push_back(&l);
  for (const auto& [name, lits] : by_var) {
    int var = m.require_var(name);
    std::set<std::string> positives, negatives;
    for (const auto* l : lits) {
      (l->negated ? negatives : positives).insert(l->ev.value);
    }
    if (positives.size() > 1) d.feasible = false;
    for (const auto& v : positives) {
      if (negatives.count(v)) d.feasible = false;
    }
    if (positives.empty() &&
        static_cast<int>(negatives.size()) == m.domain_size(var)) {
      d.feasible = false;
    }
  }
  return d;
}

// --- Utilities ----------------------------------------------------------------

inline FormulaRef to_formula(const EventLiteral& lit) {
  auto ev = Formula::make_event(lit.ev.var, lit.ev.value);
  return lit.negated ? Formula::make_not(ev) : ev;
}

inline FormulaRef to_formula(const Disjunct& d) {
  std::vector<FormulaRef> conj;
  for (const auto& l : d.simple) conj.push_back(to_formula(l));
  for (const auto& part : d.parts) {
    std::vector<FormulaRef> body;
    for (const auto& l : part.body) body.push_back(to_formula(l));
    conj.push_back(Formula::make_do(part.iv, Formula::make_and(std::move(body))));
  }
  if (conj.empty()) {
    // An empty disjunct is the tautology; no grammar constant exists, so it
    // should not occur for formulas produced by to_canonical_dnf.
    throw QueryError("empty disjunct has no formula rendering");
  }
  return Formula::make_and(std::move(conj));
}

inline FormulaRef to_formula(const CanonicalDnf& dnf) {
  std::vector<FormulaRef> parts;
  for (const auto& d : dnf.disjuncts) parts.push_back(to_formula(d));
  if (parts.empty()) throw QueryError("empty DNF has no formula rendering");
  return Formula::make_or(std::move(parts));
}

inline std::string to_string(const Disjunct& d) {
  if (!d.feasible) return "<unsatisfiable>";
  if (d.simple.empty() && d.parts.empty()) return "<true>";
  return to_string(*to_formula(d));
}

// Literal-scan mutual exclusivity: two disjuncts are exclusive when some
// modal literal occurs positively in one and negated in the other.
inline bool mutually_exclusive_by_literals(const Disjunct& a,
                                           const Disjunct& b) {
  auto clashes = [](const std::vector<EventLiteral>& x,
                    const std::vector<EventLiteral>& y) {
    for (const auto& lx : x) {
      for (const auto& ly : y) {
        if (lx.ev == ly.ev && lx.negated != ly.negated) return true;
      }
    }
    return false;
  };
  if (clashes(a.simple, b.simple)) return true;
  for (const auto& pa : a.parts) {
    for (const auto& pb : b.parts) {
      if (pa.iv == pb.iv && clashes(pa.body, pb.body)) return true;
    }
  }
  return false;
}

inline bool pairwise_exclusive(const CanonicalDnf& dnf) {
  for (std::size_t i = 0; i < dnf.disjuncts.size(); ++i) {
    for (std::size_t j = i + 1; j < dnf.disjuncts.size(); ++j) {
      if (!mutually_exclusive_by_literals(dnf.disjuncts[i], dnf.disjuncts[j]))
        return false;
    }
  }
  return true;
}

}  // namespace causal
