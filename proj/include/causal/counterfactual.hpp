#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "causal/canonical.hpp"
#include "causal/dataset.hpp"
#include "causal/model.hpp"
#include "causal/random.hpp"

namespace causal {

// Everything in this module consumes intervention-free conditional
// probabilities only.  The interface can express a cpt cell or a joint of
// primitive events, and nothing else, so no factor can smuggle in a
// counterfactual: exact evaluation and frequency-based estimation differ
// only in which source is plugged in.
class ConditionalSource {
 public:
  virtual ~ConditionalSource() = default;
  // P(var = value | parents(var) = setting); nullopt when the source cannot
  // estimate the cell (empty frequency cell).
  virtual std::optional<Rat> conditional(int var, int value,
                                         int setting) const = 0;
  // P(conjunction of var=value); nullopt when not estimable.
  virtual std::optional<Rat> joint(
      std::span<const std::pair<int, int>> assignment) const = 0;
};

// Chain-rule inference over the model's cpts.
class ExactSource final : public ConditionalSource {
 public:
  explicit ExactSource(const Cbn& m) : m_(m) {}

  std::optional<Rat> conditional(int var, int value,
                                 int setting) const override {
    return m_.cpt(var, setting, value);
  }

  std::optional<Rat> joint(
      std::span<const std::pair<int, int>> assignment) const override {
    std::vector<int> required(m_.var_count(), -1);
    for (const auto& [var, val] : assignment) {
      if (required[var] >= 0 && required[var] != val) return Rat(0);
      required[var] = val;
    }
    Rat total = 0;
    const auto& exo = m_.exogenous_vars();
    std::vector<int> state(m_.var_count(), -1);
    std::vector<int> parent_vals;
    for (const auto& [exo_vals, cp] : m_.contexts()) {
      bool ok = true;
      for (std::size_t i = 0; i < exo.size(); ++i) {
        if (required[exo[i]] >= 0 && required[exo[i]] != exo_vals[i]) {
          ok = false;
          break;
        }
        state[exo[i]] = exo_vals[i];
      }
      if (!ok) continue;
      auto recurse = [&](auto&& self, std::size_t k, const Rat& p) -> void {
        if (k == m_.topological_order().size()) {
          total += p;
          return;
        }
        int v = m_.topological_order()[k];
        if (m_.var(v).kind == VarKind::exogenous) {
          self(self, k + 1, p);
          return;
        }
        const auto& parents = m_.parents(v);
        parent_vals.resize(parents.size());
        for (std::size_t j = 0; j < parents.size(); ++j)
          parent_vals[j] = state[parents[j]];
        int setting = m_.setting_index(v, parent_vals);
        for (int val = 0; val < m_.domain_size(v); ++val) {
          if (required[v] >= 0 && required[v] != val) continue;
          const Rat& q = m_.cpt(v, setting, val);
          if (q == 0) continue;
          state[v] = val;
          self(self, k + 1, p * q);
        }
        state[v] = -1;
      };
      recurse(recurse, 0, cp);
    }
    return total;
  }

 private:
  const Cbn& m_;
};

// Empirical frequencies from a contingency table; the model supplies only
// structure (parent sets and domains), never its cpts.
class FrequencySource final : public ConditionalSource {
 public:
  FrequencySource(const FreqTable& table, const Cbn& m)
      : table_(table), m_(m) {}

  std::optional<Rat> conditional(int var, int value,
                                 int setting) const override {
    const auto& parents = m_.parents(var);
    std::vector<int> parent_vals(parents.size());
    m_.setting_values(var, setting, parent_vals);
    std::vector<std::pair<int, int>> cond;
    for (std::size_t i = 0; i < parents.size(); ++i) {
      cond.emplace_back(parents[i], parent_vals[i]);
    }
    Rat den = cond.empty() ? table_.total() : table_.weight_of(cond, m_);
    if (den == 0) return std::nullopt;
    cond.emplace_back(var, value);
    return table_.weight_of(cond, m_) / den;
  }

  std::optional<Rat> joint(
      std::span<const std::pair<int, int>> assignment) const override {
    if (table_.total() == 0) return std::nullopt;
    return table_.weight_of(assignment, m_) / table_.total();
  }

 private:
  const FreqTable& table_;
  const Cbn& m_;
};

struct TermStats {
  std::uint64_t terms = 0;
  std::uint64_t skipped_infeasible = 0;  // inconsistent event combinations
  std::uint64_t missing_data = 0;        // empty frequency cells
};

namespace detail {

struct CellEvent {
  int var;
  int setting;
  int value;
  friend bool operator==(const CellEvent&, const CellEvent&) = default;
  friend auto operator<=>(const CellEvent&, const CellEvent&) = default;
};

// Per-disjunct expansion of the probability into sums of products of
// conditional events, over full states of the simple part and
// post-intervention settings of the intervened variables' descendants.
// Distinct conditional events are independent, so each term is the product
// over the *deduplicated* event set; a term whose events contradict each
// other (two values demanded of one cell) has probability zero and is
// skipped.
class DisjunctEngine {
 public:
  DisjunctEngine(const Cbn& m, const Disjunct& d, const ConditionalSource& src,
                 TermStats* stats)
      : m_(m), src_(src), stats_(stats) {
    feasible_ = d.feasible;
    if (!feasible_) return;

    allowed_.resize(m.var_count());
    for (int v = 0; v < m.var_count(); ++v) {
      for (int val = 0; val < m.domain_size(v); ++val)
        allowed_[v].push_back(val);
    }
    for (const auto& lit : d.simple) {
      int var = m.require_var(lit.ev.var);
      int val = m.require_value(var, lit.ev.value);
      restrict(allowed_[var], val, lit.negated);
      if (allowed_[var].empty()) feasible_ = false;
    }

    for (const auto& part : d.parts) {
      Part p;
      for (const auto& a : part.iv.items()) {
        int var = m.require_var(a.var);
        p.forced.emplace_back(var, m.require_value(var, a.value));
      }
      for (int v = 0; v < m.var_count(); ++v) {
        bool is_forced = std::any_of(p.forced.begin(), p.forced.end(),
                                     [&](auto& f) { return f.first == v; });
        if (is_forced) continue;
        bool desc = std::any_of(p.forced.begin(), p.forced.end(), [&](auto& f) {
          return m.is_descendant(v, f.first);
        });
        if (desc) {
          p.desc.push_back(v);
          p.allowed.push_back(allowed_all(v));
        }
      }
      for (const auto& lit : part.body) {
        int var = m.require_var(lit.ev.var);
        int val = m.require_value(var, lit.ev.value);
        auto it = std::find(p.desc.begin(), p.desc.end(), var);
        if (it == p.desc.end()) {
          throw QueryError(
              "disjunct is not in simplified form: an intervention body "
              "mentions a non-descendant of the intervened variables");
        }
        auto& slot = p.allowed[it - p.desc.begin()];
        restrict(slot, val, lit.negated);
        if (slot.empty()) feasible_ = false;
      }
      parts_.push_back(std::move(p));
    }
  }

  Rat run() {
    if (!feasible_) return 0;
    state_.assign(m_.var_count(), 0);
    post_.assign(parts_.size(), {});
    Rat total = 0;
    enumerate_state(0, total);
    return total;
  }

 private:
  struct Part {
    std::vector<std::pair<int, int>> forced;
    std::vector<int> desc;
    std::vector<std::vector<int>> allowed;
  };

  static void restrict(std::vector<int>& set, int val, bool negated) {
    if (negated) {
      std::erase(set, val);
    } else {
      if (std::find(set.begin(), set.end(), val) == set.end()) {
        set.clear();
      } else {
        set.assign(1, val);
      }
    }
  }

  std::vector<int> allowed_all(int var) const {
    std::vector<int> out;
    for (int val = 0; val < m_.domain_size(var); ++val) out.push_back(val);
    return out;
  }

  void enumerate_state(int var, Rat& total) {
    if (var == m_.var_count()) {
      enumerate_part(0, total);
      return;
    }
    for (int val : allowed_[var]) {
      state_[var] = val;
      enumerate_state(var + 1, total);
    }
  }

  void enumerate_part(std::size_t j, Rat& total) {
    if (j == parts_.size()) {
      emit_term(total);
      return;
    }
    auto& world = post_[j];
    world = state_;
    for (const auto& [var, val] : parts_[j].forced) world[var] = val;
    enumerate_desc(j, 0, total);
  }

  void enumerate_desc(std::size_t j, std::size_t k, Rat& total) {
    const Part& part = parts_[j];
    if (k == part.desc.size()) {
      enumerate_part(j + 1, total);
      return;
    }
    for (int val : part.allowed[k]) {
      post_[j][part.desc[k]] = val;
      enumerate_desc(j, k + 1, total);
    }
  }

  void emit_term(Rat& total) {
    events_.clear();
    std::vector<int> parent_vals;
    auto add_events = [&](const std::vector<int>& world,
                          const std::vector<int>* only) {
      auto add_one = [&](int v) {
        const auto& parents = m_.parents(v);
        parent_vals.resize(parents.size());
        for (std::size_t i = 0; i < parents.size(); ++i)
          parent_vals[i] = world[parents[i]];
        events_.push_back(
            {v, m_.setting_index(v, parent_vals), world[v]});
      };
      if (only) {
        for (int v : *only) add_one(v);
      } else {
        for (int v = 0; v < m_.var_count(); ++v) {
          if (m_.var(v).kind == VarKind::exogenous) continue;
          add_one(v);
        }
      }
    };

    add_events(state_, nullptr);
    for (std::size_t j = 0; j < parts_.size(); ++j) {
      add_events(post_[j], &parts_[j].desc);
    }

    std::sort(events_.begin(), events_.end());
    for (std::size_t i = 1; i < events_.size(); ++i) {
      if (events_[i].var == events_[i - 1].var &&
          events_[i].setting == events_[i - 1].setting &&
          events_[i].value != events_[i - 1].value) {
        if (stats_) ++stats_->skipped_infeasible;
        return;  // contradictory demands on one conditional event
      }
    }
    events_.erase(std::unique(events_.begin(), events_.end()), events_.end());

    Rat p = 1;
    // Exogenous part of the state: per-variable root events, or the joint
    // context probability when the model has a context table.
    if (m_.has_context_table()) {
      std::vector<std::pair<int, int>> exo_assign;
      for (int v : m_.exogenous_vars()) exo_assign.emplace_back(v, state_[v]);
      auto q = src_.joint(exo_assign);
      if (!q) {
        if (stats_) ++stats_->missing_data;
        return;
      }
      p = *q;
    } else {
      for (int v : m_.exogenous_vars()) {
        auto q = src_.conditional(v, state_[v], 0);
        if (!q) {
          if (stats_) ++stats_->missing_data;
          return;
        }
        p *= *q;
      }
    }
    for (const auto& ev : events_) {
      if (p == 0) break;
      auto q = src_.conditional(ev.var, ev.value, ev.setting);
      if (!q) {
        if (stats_) ++stats_->missing_data;
        return;
      }
      p *= *q;
    }
    if (stats_) ++stats_->terms;
    total += p;
  }

  const Cbn& m_;
  const ConditionalSource& src_;
  TermStats* stats_;
  bool feasible_ = true;
  std::vector<std::vector<int>> allowed_;
  std::vector<Part> parts_;
  std::vector<int> state_;
  std::vector<std::vector<int>> post_;
  std::vector<CellEvent> events_;
};

}  // namespace detail

// Probability of one simplified canonical disjunct from intervention-free
// factors only.
inline Rat disjunct_probability(const Cbn& m, const Disjunct& d,
                                const ConditionalSource& src,
                                TermStats* stats = nullptr) {
  return detail::DisjunctEngine(m, d, src, stats).run();
}

struct ObservationalOptions {
  CanonicalOptions canonical{};
};

struct ObservationalResult {
  Rat value;
  TermStats stats;
  std::size_t disjuncts = 0;
};

// Pr_M(f) computed via the canonical mutually exclusive DNF and the
// per-disjunct expansion; every consumed factor is an intervention-free
// conditional probability, so the same pipeline runs off observational
// frequencies.
inline ObservationalResult evaluate_observational_detail(
    const Cbn& m, const FormulaRef& f, const ConditionalSource& src,
    ObservationalOptions options = {}) {
  auto dnf = to_canonical_dnf(f, m, options.canonical);
  ObservationalResult out;
  out.disjuncts = dnf.disjuncts.size();
  for (const auto& d : dnf.disjuncts) {
    auto simplified = simplify_disjunct(d, m);
    out.value += disjunct_probability(m, simplified, src, &out.stats);
  }
  return out;
}

inline Rat evaluate_observational(const Cbn& m, const FormulaRef& f,
                                  ObservationalOptions options = {}) {
  ExactSource src(m);
  return evaluate_observational_detail(m, f, src, options).value;
}

// --- Probability of necessity / sufficiency (closed forms) -----------------

enum class CounterfactualKind { pn, ps, pns };

namespace detail {

struct PnsContext {
  int x, y;
  int v0, v1;                 // value ids of labels "0" and "1"
  std::vector<int> pa;        // parents of y other than x
  std::vector<int> pa_slots;  // position of each parent of y in parent order
  int x_slot = -1;
  // The parent-setting sum reads Y's other parents at their observed values
  // on both sides of the intervention, which is only right when none of
  // them can be moved by X.  Otherwise the numerator falls back to the
  // general per-disjunct expansion (still intervention-free factors).
  bool sum_applicable = true;
};

inline PnsContext pns_context(const Cbn& m, std::string_view cause,
                              std::string_view effect) {
  PnsContext c;
  c.x = m.require_var(cause);
  c.y = m.require_var(effect);
  for (int v : {c.x, c.y}) {
    if (m.var(v).kind != VarKind::endogenous) {
      throw QueryError("variable '" + m.var(v).name +
                       "' must be endogenous for PN/PS/PNS");
    }
    if (m.var(v).domain != std::vector<std::string>{"0", "1"}) {
      throw QueryError("variable '" + m.var(v).name +
                       "' must be binary with domain {0,1} for PN/PS/PNS");
    }
  }
  const auto& parents = m.parents(c.y);
  auto it = std::find(parents.begin(), parents.end(), c.x);
  if (it == parents.end()) {
    throw QueryError(
        "'" + std::string(effect) + "' is not a child of '" +
        std::string(cause) +
        "'; the closed form does not apply; evaluate the defining formula "
        "with `eval` instead");
  }
  c.x_slot = static_cast<int>(it - parents.begin());
  for (std::size_t i = 0; i < parents.size(); ++i) {
    if (static_cast<int>(i) != c.x_slot) {
      c.pa.push_back(parents[i]);
      c.pa_slots.push_back(static_cast<int>(i));
      if (m.is_descendant(parents[i], c.x)) c.sum_applicable = false;
    }
  }
  c.v0 = m.require_value(c.x, "0");
  c.v1 = m.require_value(c.x, "1");
  // Y shares the {0,1} domain check above, so the same ids work for it.
  return c;
}

// The shared parent-setting sum behind PN and PS:
//   sum over settings c of Pa^X(Y) of
//     P(Pa = c, X = x_cond, Y = y_cond) * P(Y = y_target | X = x_tgt, Pa = c)
// i.e. the *numerator* of PN or PS; dividing by P(X = x_cond, Y = y_cond)
// gives the conditional.  A zero-probability weight makes the whole term
// zero without consulting the second factor; a term whose conditioning cell
// is empty in the data is counted in stats.missing_data and excluded from
// the sum (the exact source never has missing cells).
inline Rat pns_numerator(const Cbn& m, const PnsContext& c,
                         const ConditionalSource& src, int x_cond, int y_cond,
                         int x_target, int y_target, TermStats* stats) {
  if (!c.sum_applicable) {
    // Some other parent of Y descends from X; expand the defining
    // numerator P(X=x_cond, Y=y_cond, [X<-x_target](Y=y_target)) in full.
    Disjunct d;
    d.simple = {{{m.var(c.x).name, m.var(c.x).domain[x_cond]}, false},
                {{m.var(c.y).name, m.var(c.y).domain[y_cond]}, false}};
    d.parts = {
        {InterventionSet({{m.var(c.x).name, m.var(c.x).domain[x_target]}}),
         {{{m.var(c.y).name, m.var(c.y).domain[y_target]}, false}}}};
    return disjunct_probability(m, simplify_disjunct(d, m), src, stats);
  }
  Rat sum = 0;
  std::vector<int> setting_vals(m.parents(c.y).size());
  std::vector<int> pa_vals(c.pa.size(), 0);
  auto recurse = [&](auto&& self, std::size_t i) -> void {
    if (i < c.pa.size()) {
      for (int val = 0; val < m.domain_size(c.pa[i]); ++val) {
        pa_vals[i] = val;
        self(self, i + 1);
      }
      return;
    }
    std::vector<std::pair<int, int>> joint_assign;
    for (std::size_t k = 0; k < c.pa.size(); ++k)
      joint_assign.emplace_back(c.pa[k], pa_vals[k]);
    joint_assign.emplace_back(c.x, x_cond);
    joint_assign.emplace_back(c.y, y_cond);
    auto w = src.joint(joint_assign);
    if (!w) {
      if (stats) ++stats->missing_data;
      return;
    }
    if (stats) ++stats->terms;
    if (*w == 0) return;  // unreachable cell contributes zero by convention
    for (std::size_t k = 0; k < c.pa.size(); ++k)
      setting_vals[c.pa_slots[k]] = pa_vals[k];
    setting_vals[c.x_slot] = x_target;
    auto q = src.conditional(c.y, y_target, m.setting_index(c.y, setting_vals));
    if (!q) {
      if (stats) ++stats->missing_data;
      return;
    }
    sum += *w * *q;
  };
  recurse(recurse, 0);
  return sum;
}

}  // namespace detail

// PN = P([X<-0](Y=0) | X=1, Y=1), from intervention-free factors.
inline Rat pn_exact(const Cbn& m, std::string_view cause,
                    std::string_view effect) {
  auto c = detail::pns_context(m, cause, effect);
  ExactSource src(m);
  Rat cell = *src.joint(std::vector<std::pair<int, int>>{{c.x, c.v1},
                                                         {c.y, c.v1}});
  if (cell == 0) {
    throw UndefinedConditional("P(X=1, Y=1) = 0: PN is undefined");
  }
  return detail::pns_numerator(m, c, src, c.v1, c.v1, c.v0, c.v0, nullptr) /
         cell;
}

// PS = P([X<-1](Y=1) | X=0, Y=0), from intervention-free factors.
inline Rat ps_exact(const Cbn& m, std::string_view cause,
                    std::string_view effect) {
  auto c = detail::pns_context(m, cause, effect);
  ExactSource src(m);
  Rat cell = *src.joint(std::vector<std::pair<int, int>>{{c.x, c.v0},
                                                         {c.y, c.v0}});
  if (cell == 0) {
    throw UndefinedConditional("P(X=0, Y=0) = 0: PS is undefined");
  }
  return detail::pns_numerator(m, c, src, c.v0, c.v0, c.v1, c.v1, nullptr) /
         cell;
}

// PNS = PS * P(X=0, Y=0) + PN * P(X=1, Y=1); a cell of probability zero
// contributes zero together with its weight.
inline Rat pns_exact(const Cbn& m, std::string_view cause,
                     std::string_view effect) {
  auto c = detail::pns_context(m, cause, effect);
  ExactSource src(m);
  return detail::pns_numerator(m, c, src, c.v0, c.v0, c.v1, c.v1, nullptr) +
         detail::pns_numerator(m, c, src, c.v1, c.v1, c.v0, c.v0, nullptr);
}

// --- Estimation from observational data -------------------------------------

struct EstimateOptions {
  int replicates = 200;  // bootstrap resamples for the standard error
  std::uint64_t seed = 1;
  CanonicalOptions canonical{};
};

struct EstimateResult {
  Rat value;
  std::optional<double> stderr_;  // absent without bootstrap
  TermStats stats;
  int replicates_used = 0;
};

namespace detail {

inline EstimateResult run_estimator(
    const FreqTable& table, const EstimateOptions& options,
    const std::function<Rat(const FreqTable&, TermStats*)>& fn) {
  EstimateResult out;
  out.value = fn(table, &out.stats);
  if (table.integer_weights() && options.replicates > 1) {
    DetRng rng(options.seed);
    std::vector<double> values;
    values.reserve(options.replicates);
    for (int b = 0; b < options.replicates; ++b) {
      auto replicate = table.resample(rng);
      try {
        values.push_back(to_double(fn(replicate, nullptr)));
      } catch (const Error&) {
        // a replicate can lose a conditioning cell entirely; skip it
      }
    }
    if (values.size() > 1) {
      double mean = 0;
      for (double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      double ss = 0;
      for (double v : values) ss += (v - mean) * (v - mean);
      out.stderr_ = std::sqrt(ss / static_cast<double>(values.size() - 1));
      out.replicates_used = static_cast<int>(values.size());
    }
  }
  return out;
}

}  // namespace detail

// Plug-in estimate of Pr(f) from observational data: the exact pipeline with
// every conditional probability replaced by its empirical frequency.  Terms
// whose conditioning cells are empty are reported in stats.missing_data and
// excluded, never silently zeroed.
inline EstimateResult estimate_observational(const FreqTable& table,
                                             const Cbn& structure,
                                             const FormulaRef& f,
                                             EstimateOptions options = {}) {
  auto dnf = to_canonical_dnf(f, structure, options.canonical);
  std::vector<Disjunct> simplified;
  for (const auto& d : dnf.disjuncts) {
    simplified.push_back(simplify_disjunct(d, structure));
  }
  return detail::run_estimator(
      table, options, [&](const FreqTable& t, TermStats* stats) {
        FrequencySource src(t, structure);
        Rat sum = 0;
        for (const auto& d : simplified) {
          sum += disjunct_probability(structure, d, src, stats);
        }
        return sum;
      });
}

inline EstimateResult estimate_observational(const Dataset& data,
                                             const Cbn& structure,
                                             const FormulaRef& f,
                                             EstimateOptions options = {}) {
  auto table = FreqTable::from_dataset(data, structure);
  return estimate_observational(table, structure, f, options);
}

// Plug-in PN/PS/PNS from data: the same sums with empirical factors.
inline EstimateResult estimate_query(const FreqTable& table,
                                     const Cbn& structure,
                                     CounterfactualKind kind,
                                     std::string_view cause,
                                     std::string_view effect,
                                     EstimateOptions options = {}) {
  auto c = detail::pns_context(structure, cause, effect);
  return detail::run_estimator(
      table, options, [&](const FreqTable& t, TermStats* stats) -> Rat {
        FrequencySource src(t, structure);
        auto cell = [&](int xv, int yv) -> Rat {
          auto w = src.joint(
              std::vector<std::pair<int, int>>{{c.x, xv}, {c.y, yv}});
          if (!w) throw UndefinedConditional("the dataset is empty");
          return *w;
        };
        switch (kind) {
          case CounterfactualKind::pn: {
            Rat den = cell(c.v1, c.v1);
            if (den == 0) {
              throw UndefinedConditional("empirical P(X=1, Y=1) = 0");
            }
            return detail::pns_numerator(structure, c, src, c.v1, c.v1, c.v0,
                                         c.v0, stats) /
                   den;
          }
          case CounterfactualKind::ps: {
            Rat den = cell(c.v0, c.v0);
            if (den == 0) {
              throw UndefinedConditional("empirical P(X=0, Y=0) = 0");
            }
            return detail::pns_numerator(structure, c, src, c.v0, c.v0, c.v1,
                                         c.v1, stats) /
                   den;
          }
          case CounterfactualKind::pns:
            return detail::pns_numerator(structure, c, src, c.v0, c.v0, c.v1,
                                         c.v1, stats) +
                   detail::pns_numerator(structure, c, src, c.v1, c.v1, c.v0,
                                         c.v0, stats);
        }
        return Rat(0);
      });
}

inline EstimateResult estimate_query(const Dataset& data, const Cbn& structure,
                                     CounterfactualKind kind,
                                     std::string_view cause,
                                     std::string_view effect,
                                     EstimateOptions options = {}) {
  auto table = FreqTable::from_dataset(data, structure);
  return estimate_query(table, structure, kind, cause, effect, options);
}

}  // namespace causal
