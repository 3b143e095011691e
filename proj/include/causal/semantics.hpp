#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "causal/canonical.hpp"
#include "causal/formula.hpp"
#include "causal/model.hpp"

namespace causal {

enum class SelectionMode { ccce, fccce };

struct EnumerationOptions {
  std::uint64_t cap = std::uint64_t(1) << 24;
  // Marginalize conditional-event slots of variables that are neither
  // mentioned by the formula nor ancestors of mentioned variables, instead
  // of enumerating them.  The unpruned path is the reference.
  bool prune = false;
  std::optional<SelectionMode> force_mode;
};

// One conditional event "var = value given parents = setting", in id form.
struct ConditionalEvent {
  int var;
  int setting;
  int value;
  friend bool operator==(const ConditionalEvent&,
                         const ConditionalEvent&) = default;
  friend auto operator<=>(const ConditionalEvent&,
                          const ConditionalEvent&) = default;
};

namespace detail {

struct Cell {
  int var;
  int setting;
  std::vector<std::pair<int, Rat>> choices;  // positive-probability values
};

struct ContextBlock {
  std::vector<int> exo_values;  // per space exo position
  Rat p;
  std::vector<Cell> cells;
  std::vector<std::vector<int>> cell_pos;  // var -> setting -> cell index | -1
};

}  // namespace detail

class Selection;

// The enumeration space of complete combinations of conditional events for a
// model: a choice of exogenous context plus one value per (variable, parent
// setting) cell.  In fccce mode, cells whose exogenous parent components
// disagree with the chosen context are left out.
class SelectionSpace {
 public:
  SelectionSpace(const Cbn& m, SelectionMode mode,
                 const std::vector<bool>* relevant = nullptr)
      : model_(&m), mode_(mode) {
    const auto& exo = m.exogenous_vars();
    for (int v : exo) {
      if (!relevant || (*relevant)[v]) exo_positions_.push_back(v);
    }

    // Group model contexts by their projection onto the kept exogenous
    // variables; probabilities of merged contexts add up.
    std::vector<std::pair<std::vector<int>, Rat>> contexts;
    for (const auto& [vals, p] : m.contexts()) {
      std::vector<int> proj;
      for (std::size_t i = 0; i < exo.size(); ++i) {
        if (!relevant || (*relevant)[exo[i]]) proj.push_back(vals[i]);
      }
      auto it = std::find_if(contexts.begin(), contexts.end(),
                             [&](auto& c) { return c.first == proj; });
      if (it == contexts.end()) {
        contexts.emplace_back(std::move(proj), p);
      } else {
        it->second += p;
      }
    }

    for (auto& [vals, p] : contexts) {
      detail::ContextBlock block;
      block.exo_values = vals;
      block.p = p;
      block.cell_pos.resize(m.var_count());
      for (int v = 0; v < m.var_count(); ++v) {
        block.cell_pos[v].assign(m.setting_count(v), -1);
        if (m.var(v).kind == VarKind::exogenous) continue;
        if (relevant && !(*relevant)[v]) continue;
        std::vector<int> parent_vals(m.parents(v).size());
        for (int s = 0; s < m.setting_count(v); ++s) {
          m.setting_values(v, s, parent_vals);
          if (mode_ == SelectionMode::fccce &&
              !context_consistent(m, v, parent_vals, vals)) {
            continue;
          }
          detail::Cell cell{v, s, {}};
          for (int val = 0; val < m.domain_size(v); ++val) {
            const Rat& q = m.cpt(v, s, val);
            if (q != 0) cell.choices.emplace_back(val, q);
          }
          block.cell_pos[v][s] = static_cast<int>(block.cells.size());
          block.cells.push_back(std::move(cell));
        }
      }
      blocks_.push_back(std::move(block));
    }
  }

  const Cbn& model() const { return *model_; }
  SelectionMode mode() const { return mode_; }

  BigInt total_count() const {
    BigInt total = 0;
    for (const auto& block : blocks_) {
      BigInt n = 1;
      for (const auto& cell : block.cells) n *= cell.choices.size();
      total += n;
    }
    return total;
  }

  // Enumerates every selection exactly once, deterministically.  The
  // Selection passed to the callback is only valid during the call.
  // Returning false stops the enumeration.
  void for_each(const std::function<bool(const Selection&)>& fn) const;

 private:
  bool context_consistent(const Cbn& m, int var,
                          std::span<const int> parent_vals,
                          const std::vector<int>& exo_vals) const {
    const auto& parents = m.parents(var);
    for (std::size_t i = 0; i < parents.size(); ++i) {
      for (std::size_t k = 0; k < exo_positions_.size(); ++k) {
        if (parents[i] == exo_positions_[k] &&
            parent_vals[i] != exo_vals[k]) {
          return false;
        }
      }
    }
    return true;
  }

  const Cbn* model_;
  SelectionMode mode_;
  std::vector<int> exo_positions_;
  std::vector<detail::ContextBlock> blocks_;

  friend class Selection;
};

// A single ccce or fccce with its probability.  A view into the enumeration
// state; copy the data out if it must outlive the callback.
class Selection {
 public:
  SelectionMode mode() const { return space_->mode(); }
  const Rat& probability() const { return probability_; }

  // Value of an exogenous variable in this selection's context; -1 if the
  // variable was pruned away.
  int context_value(int exo_var) const {
    for (std::size_t i = 0; i < space_->exo_positions_.size(); ++i) {
      if (space_->exo_positions_[i] == exo_var) {
        return block_->exo_values[i];
      }
    }
    return -1;
  }

  // Chosen value of the conditional event for (var, parent setting); -1 when
  // the cell is not part of this selection (fccce-filtered or pruned).
  int chosen(int var, int setting) const {
    int pos = block_->cell_pos[var][setting];
    return pos < 0 ? -1 : block_->cells[pos].choices[(*choice_)[pos]].first;
  }

  std::vector<ConditionalEvent> events() const {
    std::vector<ConditionalEvent> out;
    for (std::size_t i = 0; i < block_->cells.size(); ++i) {
      const auto& cell = block_->cells[i];
      out.push_back({cell.var, cell.setting,
                     cell.choices[(*choice_)[i]].first});
    }
    return out;
  }

  // Trace rendering, e.g. "U=0 ∧ (X=0 | U=0) ∧ (Y=1 | X=1)".
  std::string str() const {
    const Cbn& m = *space_->model_;
    std::string out;
    for (std::size_t i = 0; i < space_->exo_positions_.size(); ++i) {
      int v = space_->exo_positions_[i];
      if (!out.empty()) out += " ∧ ";
      out += m.var(v).name + "=" + m.var(v).domain[block_->exo_values[i]];
    }
    for (std::size_t i = 0; i < block_->cells.size(); ++i) {
      const auto& cell = block_->cells[i];
      if (!out.empty()) out += " ∧ ";
      int val = cell.choices[(*choice_)[i]].first;
      out += "(" + m.var(cell.var).name + "=" + m.var(cell.var).domain[val];
      if (!m.parents(cell.var).empty()) {
        out += " | ";
        std::vector<int> pv(m.parents(cell.var).size());
        m.setting_values(cell.var, cell.setting, pv);
        for (std::size_t k = 0; k < pv.size(); ++k) {
          if (k) out += ", ";
          int p = m.parents(cell.var)[k];
          out += m.var(p).name + "=" + m.var(p).domain[pv[k]];
        }
      }
      out += ")";
    }
    return out;
  }

 private:
  friend class SelectionSpace;
  const SelectionSpace* space_;
  const detail::ContextBlock* block_;
  const std::vector<int>* choice_;
  Rat probability_;
};

inline void SelectionSpace::for_each(
    const std::function<bool(const Selection&)>& fn) const {
  for (const auto& block : blocks_) {
    if (block.p == 0) continue;
    std::vector<int> choice(block.cells.size(), 0);

    Selection sel;
    sel.space_ = this;
    sel.block_ = &block;
    sel.choice_ = &choice;

    // Depth-first descent over the cells, carrying the running product of
    // the context probability and the chosen cpt entries.
    auto recurse = [&](auto&& self, std::size_t i, const Rat& p) -> bool {
      if (i == block.cells.size()) {
        sel.probability_ = p;
        return fn(sel);
      }
      const auto& choices = block.cells[i].choices;
      for (std::size_t k = 0; k < choices.size(); ++k) {
        choice[i] = static_cast<int>(k);
        if (!self(self, i + 1, p * choices[k].second)) return false;
      }
      return true;
    };
    if (!recurse(recurse, 0, block.p)) return;
  }
}

namespace detail {

// Formula bound to a model: names resolved to ids, intervention sets pooled.
struct BoundNode {
  Formula::Kind kind;
  int var = -1;
  int value = -1;
  int iv = -1;  // index into BoundFormula::ivs for intervention nodes
  std::vector<BoundNode> children;
};

struct BoundIv {
  std::vector<std::pair<int, int>> assigns;  // (var, value), sorted by var
  friend bool operator==(const BoundIv&, const BoundIv&) = default;
};

struct BoundFormula {
  BoundNode root;
  std::vector<BoundIv> ivs;  // ivs[0] is always the empty intervention
  bool uses_exogenous = false;
};

inline BoundNode bind_node(const Formula& f, const Cbn& m, BoundFormula& out) {
  BoundNode node;
  node.kind = f.kind();
  switch (f.kind()) {
    case Formula::Kind::event: {
      node.var = m.require_var(f.event().var);
      node.value = m.require_value(node.var, f.event().value);
      if (m.var(node.var).kind == VarKind::exogenous)
        out.uses_exogenous = true;
      break;
    }
    case Formula::Kind::intervention: {
      BoundIv iv;
      for (const auto& a : f.intervention_set().items()) {
        int var = m.require_var(a.var);
        iv.assigns.emplace_back(var, m.require_value(var, a.value));
        if (m.var(var).kind == VarKind::exogenous) out.uses_exogenous = true;
      }
      std::sort(iv.assigns.begin(), iv.assigns.end());
      auto it = std::find(out.ivs.begin(), out.ivs.end(), iv);
      if (it == out.ivs.end()) {
        out.ivs.push_back(std::move(iv));
        node.iv = static_cast<int>(out.ivs.size()) - 1;
      } else {
        node.iv = static_cast<int>(it - out.ivs.begin());
      }
      node.children.push_back(bind_node(*f.body(), m, out));
      break;
    }
    default:
      for (const auto& c : f.children())
        node.children.push_back(bind_node(*c, m, out));
  }
  return node;
}

inline BoundFormula bind(const Formula& f, const Cbn& m) {
  BoundFormula out;
  out.ivs.push_back(BoundIv{});  // the empty intervention: the actual world
  out.root = bind_node(f, m, out);
  return out;
}

// Classical truth of a bound formula given one solved world per
// intervention set (worlds[0] is the actual world).
inline bool truth_in(const std::vector<std::vector<int>>& worlds,
                     const BoundNode& node, int iv_index = 0) {
  switch (node.kind) {
    case Formula::Kind::event:
      return worlds[iv_index][node.var] == node.value;
    case Formula::Kind::negation:
      return !truth_in(worlds, node.children[0], iv_index);
    case Formula::Kind::conjunction:
      for (const auto& c : node.children)
        if (!truth_in(worlds, c, iv_index)) return false;
      return true;
    case Formula::Kind::disjunction:
      for (const auto& c : node.children)
        if (truth_in(worlds, c, iv_index)) return true;
      return false;
    case Formula::Kind::intervention:
      return truth_in(worlds, node.children[0], node.iv);
  }
  return false;
}

inline void mark_mentioned(const BoundNode& node, std::vector<bool>& mark) {
  if (node.kind == Formula::Kind::event) mark[node.var] = true;
  for (const auto& c : node.children) mark_mentioned(c, mark);
}

// Mentioned variables, intervention targets, and all their ancestors.
inline std::vector<bool> relevant_vars(const BoundFormula& bf, const Cbn& m) {
  std::vector<bool> mark(m.var_count(), false);
  mark_mentioned(bf.root, mark);
  for (const auto& iv : bf.ivs) {
    for (const auto& [var, value] : iv.assigns) mark[var] = true;
  }
  std::vector<bool> out = mark;
  for (int v = 0; v < m.var_count(); ++v) {
    if (!mark[v]) continue;
    for (int a = 0; a < m.var_count(); ++a) {
      if (m.is_descendant(v, a)) out[a] = true;
    }
  }
  return out;
}

// The entailment decision procedure: solve the model once per intervention
// set, reading intervened variables from the set and everything else from
// the selected conditional events, in topological order.
class WorldEvaluator {
 public:
  WorldEvaluator(const Cbn& m, const BoundFormula& bf,
                 const std::vector<bool>* relevant)
      : model_(m), bound_(bf), relevant_(relevant) {
    worlds_.resize(bf.ivs.size());
  }

  bool entails(const Selection& sel) {
    for (std::size_t i = 0; i < bound_.ivs.size(); ++i) {
      solve(sel, static_cast<int>(i));
    }
    return truth_in(worlds_, bound_.root);
  }

 private:
  void solve(const Selection& sel, int iv_index) {
    const Cbn& m = model_;
    auto& world = worlds_[iv_index];
    world.assign(m.var_count(), -1);
    const auto& assigns = bound_.ivs[iv_index].assigns;
    std::vector<int> parent_vals;
    for (int v : m.topological_order()) {
      if (relevant_ && !(*relevant_)[v]) continue;
      auto forced = std::find_if(assigns.begin(), assigns.end(),
                                 [&](auto& a) { return a.first == v; });
      if (forced != assigns.end()) {
        world[v] = forced->second;
        continue;
      }
      if (m.var(v).kind == VarKind::exogenous) {
        world[v] = sel.context_value(v);
        continue;
      }
      const auto& parents = m.parents(v);
      parent_vals.resize(parents.size());
      for (std::size_t k = 0; k < parents.size(); ++k) {
        parent_vals[k] = world[parents[k]];
      }
      int setting = m.setting_index(v, parent_vals);
      int value = sel.chosen(v, setting);
      if (value < 0) {
        throw QueryError(
            "the fccce does not determine '" + m.var(v).name +
            "' under this intervention: the probed parent setting is outside "
            "the fixed context (the formula needs ccce enumeration)");
      }
      world[v] = value;
    }
  }

  const Cbn& model_;
  const BoundFormula& bound_;
  const std::vector<bool>* relevant_;
  std::vector<std::vector<int>> worlds_;
};

}  // namespace detail

// Decides the truth of `f` under a complete selection of conditional events
// (every formula is decided, one way or the other).
inline bool entails(const Cbn& m, const Selection& sel, const Formula& f) {
  auto bound = detail::bind(f, m);
  detail::WorldEvaluator eval(m, bound, nullptr);
  return eval.entails(sel);
}

struct EvalResult {
  Rat probability;
  std::uint64_t entailing = 0;
  std::uint64_t enumerated = 0;
  SelectionMode mode = SelectionMode::fccce;
};

namespace detail {

inline SelectionMode pick_mode(const BoundFormula& bf,
                               const EnumerationOptions& options) {
  if (options.force_mode) return *options.force_mode;
  // Formulas of L are decided by fccces; exogenous symbols need ccces.
  return bf.uses_exogenous ? SelectionMode::ccce : SelectionMode::fccce;
}

inline void check_cap(const SelectionSpace& space,
                      const EnumerationOptions& options) {
  BigInt total = space.total_count();
  if (total > options.cap) {
    throw CapExceeded(
        "enumeration of " + total.str() + " selections exceeds the cap of " +
        std::to_string(options.cap) +
        "; raise the cap, or use the compiled-model oracle or sampling "
        "instead");
  }
}

}  // namespace detail

// Pr_M(f): the sum of the probabilities of the fccces (for L) or ccces (for
// L+) that entail f.  This is the unique probability every i-compatible
// functional model assigns to f.
inline EvalResult evaluate(const Cbn& m, const Formula& f,
                           EnumerationOptions options = {}) {
  auto bound = detail::bind(f, m);
  auto mode = detail::pick_mode(bound, options);
  std::optional<std::vector<bool>> relevant;
  if (options.prune) relevant = detail::relevant_vars(bound, m);
  SelectionSpace space(m, mode, relevant ? &*relevant : nullptr);
  detail::check_cap(space, options);

  EvalResult result;
  result.mode = mode;
  detail::WorldEvaluator eval(m, bound, relevant ? &*relevant : nullptr);
  space.for_each([&](const Selection& sel) {
    ++result.enumerated;
    if (eval.entails(sel)) {
      ++result.entailing;
      result.probability += sel.probability();
    }
    return true;
  });
  return result;
}

inline Rat probability(const Cbn& m, const Formula& f,
                       EnumerationOptions options = {}) {
  return evaluate(m, f, options).probability;
}

// Pr_M(f | given) = Pr_M(f & given) / Pr_M(given), computed over a single
// enumeration pass so both sums see the same selections.
inline Rat conditional_probability(const Cbn& m, const FormulaRef& f,
                                   const FormulaRef& given,
                                   EnumerationOptions options = {}) {
  auto conj = Formula::make_and({f, given});
  auto bound_conj = detail::bind(*conj, m);
  auto bound_given = detail::bind(*given, m);
  auto mode = detail::pick_mode(bound_conj, options);
  std::optional<std::vector<bool>> relevant;
  if (options.prune) relevant = detail::relevant_vars(bound_conj, m);
  SelectionSpace space(m, mode, relevant ? &*relevant : nullptr);
  detail::check_cap(space, options);

  detail::WorldEvaluator eval_conj(m, bound_conj,
                                   relevant ? &*relevant : nullptr);
  detail::WorldEvaluator eval_given(m, bound_given,
                                    relevant ? &*relevant : nullptr);
  Rat num = 0, den = 0;
  space.for_each([&](const Selection& sel) {
    if (eval_given.entails(sel)) {
      den += sel.probability();
      if (eval_conj.entails(sel)) num += sel.probability();
    }
    return true;
  });
  if (den == 0) {
    throw UndefinedConditional("conditioning event '" + to_string(*given) +
                               "' has probability zero");
  }
  return num / den;
}

// Streams over all fccces / ccces with their probabilities.
inline void for_each_fccce(const Cbn& m,
                           const std::function<bool(const Selection&)>& fn,
                           EnumerationOptions options = {}) {
  SelectionSpace space(m, SelectionMode::fccce, nullptr);
  detail::check_cap(space, options);
  space.for_each(fn);
}

inline void for_each_ccce(const Cbn& m,
                          const std::function<bool(const Selection&)>& fn,
                          EnumerationOptions options = {}) {
  SelectionSpace space(m, SelectionMode::ccce, nullptr);
  detail::check_cap(space, options);
  space.for_each(fn);
}

inline BigInt count_fccces(const Cbn& m) {
  return SelectionSpace(m, SelectionMode::fccce).total_count();
}

inline BigInt count_ccces(const Cbn& m) {
  return SelectionSpace(m, SelectionMode::ccce).total_count();
}

}  // namespace causal
