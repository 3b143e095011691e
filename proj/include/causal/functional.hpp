#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "causal/dataset.hpp"
#include "causal/model.hpp"
#include "causal/random.hpp"
#include "causal/semantics.hpp"

namespace causal {

struct CompileOptions {
  // Cap on the number of positive-measure extended contexts (and on any
  // single response-function table).
  std::uint64_t cap = std::uint64_t(1) << 24;
};

// A response function for variable Y maps every parent setting of Y to a
// value of Y.  It is stored as a mixed-radix code: reading the settings in
// order, each digit is the output's index in Y's domain, first setting most
// significant.  Code order is therefore lexicographic in (parent-setting
// order, domain order), matching the enumeration the construction uses.
class ResponseFunction {
 public:
  ResponseFunction(int settings, int radix, std::uint64_t code)
      : settings_(settings), radix_(radix), code_(code) {}

  std::uint64_t code() const { return code_; }

  int output(int setting) const {
    std::uint64_t c = code_;
    for (int s = settings_ - 1; s > setting; --s) c /= radix_;
    return static_cast<int>(c % radix_);
  }

 private:
  int settings_;
  int radix_;
  std::uint64_t code_;
};

// An extended context: values for the original exogenous variables plus one
// response-function code per endogenous variable.
struct ExtendedContext {
  std::vector<int> exo_values;           // aligned with Cbn::exogenous_vars()
  std::vector<std::uint64_t> codes;      // aligned with endogenous position
};

// The i-compatible functional causal model built from a CBN: every
// endogenous Y gains a response-function variable U_Y whose distribution
// reproduces Y's cpt row by row, and the measure over extended contexts is
// the product measure.  Zero-probability response functions are excluded
// from the support.
class FunctionalModel {
 public:
  const Cbn& base() const { return base_; }
  const std::vector<int>& endogenous() const { return endo_; }
  int endo_position(int var) const {
    for (std::size_t i = 0; i < endo_.size(); ++i) {
      if (endo_[i] == var) return static_cast<int>(i);
    }
    return -1;
  }

  // Support of U_Y as (code, probability) pairs, Pr_Y(f) = prod over parent
  // settings of the cpt entry selecting f's output.
  const std::vector<std::pair<std::uint64_t, Rat>>& support(int var) const {
    return support_[endo_position(var)];
  }

  ResponseFunction response(int var, std::uint64_t code) const {
    return ResponseFunction(base_.setting_count(var), base_.domain_size(var),
                            code);
  }

  BigInt positive_context_count() const {
    BigInt n = base_.contexts().size();
    for (const auto& s : support_) n *= s.size();
    return n;
  }

  // Enumerates every positive-measure extended context with its product
  // probability.  Returning false stops early.
  void for_each_context(
      const std::function<bool(const ExtendedContext&, const Rat&)>& fn) const {
    ExtendedContext ctx;
    ctx.codes.resize(endo_.size());
    for (const auto& [exo_vals, p] : base_.contexts()) {
      ctx.exo_values = exo_vals;
      auto recurse = [&](auto&& self, std::size_t i, const Rat& acc) -> bool {
        if (i == endo_.size()) return fn(ctx, acc);
        for (const auto& [code, q] : support_[i]) {
          ctx.codes[i] = code;
          if (!self(self, i + 1, acc * q)) return false;
        }
        return true;
      };
      if (!recurse(recurse, 0, p)) return;
    }
  }

  // Solves the structural equations for one intervention (possibly empty).
  // Exogenous interventions overwrite context components.
  std::vector<int> solve(const ExtendedContext& ctx,
                         std::span<const std::pair<int, int>> forced) const {
    const Cbn& m = base_;
    std::vector<int> world(m.var_count(), -1);
    std::vector<int> parent_vals;
    for (int v : m.topological_order()) {
      auto it = std::find_if(forced.begin(), forced.end(),
                             [&](auto& a) { return a.first == v; });
      if (it != forced.end()) {
        world[v] = it->second;
        continue;
      }
      if (m.var(v).kind == VarKind::exogenous) {
        world[v] = ctx.exo_values[exo_position(v)];
        continue;
      }
      const auto& parents = m.parents(v);
      parent_vals.resize(parents.size());
      for (std::size_t k = 0; k < parents.size(); ++k)
        parent_vals[k] = world[parents[k]];
      int setting = m.setting_index(v, parent_vals);
      world[v] =
          response(v, ctx.codes[endo_position(v)]).output(setting);
    }
    return world;
  }

 private:
  friend FunctionalModel compile(const Cbn&, CompileOptions);

  int exo_position(int var) const {
    const auto& exo = base_.exogenous_vars();
    for (std::size_t i = 0; i < exo.size(); ++i) {
      if (exo[i] == var) return static_cast<int>(i);
    }
    return -1;
  }

  explicit FunctionalModel(Cbn base) : base_(std::move(base)) {}

  Cbn base_;
  std::vector<int> endo_;
  std::vector<std::vector<std::pair<std::uint64_t, Rat>>> support_;
};

inline FunctionalModel compile(const Cbn& m, CompileOptions options = {}) {
  FunctionalModel fm(m);
  for (int v = 0; v < m.var_count(); ++v) {
    if (m.var(v).kind == VarKind::endogenous) fm.endo_.push_back(v);
  }
  fm.support_.resize(fm.endo_.size());

  BigInt total = m.contexts().size();
  for (std::size_t i = 0; i < fm.endo_.size(); ++i) {
    int v = fm.endo_[i];
    int radix = m.domain_size(v);
    int settings = m.setting_count(v);

    // R(Y)^(#settings) must fit a 64-bit code.
    BigInt full = 1;
    for (int s = 0; s < settings; ++s) full *= radix;
    if (full > BigInt(std::uint64_t(1) << 62)) {
      throw CapExceeded("response-function table for '" + m.var(v).name +
                        "' has " + full.str() + " entries");
    }
    // Support size = prod over settings of the number of positive entries.
    BigInt support_size = 1;
    for (int s = 0; s < settings; ++s) {
      int positives = 0;
      for (int val = 0; val < radix; ++val) {
        if (m.cpt(v, s, val) != 0) ++positives;
      }
      support_size *= positives;
    }
    total *= support_size;
    if (total > options.cap) {
      throw CapExceeded("compiled model has more than " +
                        std::to_string(options.cap) +
                        " positive-measure contexts");
    }

    // Enumerate the support directly, setting by setting, skipping zeros.
    auto& support = fm.support_[i];
    auto recurse = [&](auto&& self, int s, std::uint64_t code,
                       const Rat& p) -> void {
      if (s == settings) {
        support.emplace_back(code, p);
        return;
      }
      for (int val = 0; val < radix; ++val) {
        const Rat& q = m.cpt(v, s, val);
        if (q == 0) continue;
        self(self, s + 1, code * radix + val, p * q);
      }
    };
    recurse(recurse, 0, 0, Rat(1));
  }
  return fm;
}

// Truth of an L+ formula over the original signature in one extended
// context: classical evaluation over the per-intervention solutions.
inline bool satisfies(const FunctionalModel& fm, const ExtendedContext& ctx,
                      const Formula& f) {
  auto bound = detail::bind(f, fm.base());
  std::vector<std::vector<int>> worlds;
  worlds.reserve(bound.ivs.size());
  for (const auto& iv : bound.ivs) {
    worlds.push_back(fm.solve(ctx, iv.assigns));
  }
  return detail::truth_in(worlds, bound.root);
}

// Pr'({ctx : ctx satisfies f}): the exhaustive exact oracle.
inline Rat oracle_probability(const FunctionalModel& fm, const Formula& f,
                              std::uint64_t cap = std::uint64_t(1) << 24) {
  if (fm.positive_context_count() > cap) {
    throw CapExceeded("oracle enumeration over " +
                      fm.positive_context_count().str() +
                      " contexts exceeds the cap");
  }
  auto bound = detail::bind(f, fm.base());
  Rat sum = 0;
  std::vector<std::vector<int>> worlds(bound.ivs.size());
  fm.for_each_context([&](const ExtendedContext& ctx, const Rat& p) {
    for (std::size_t i = 0; i < bound.ivs.size(); ++i) {
      worlds[i] = fm.solve(ctx, bound.ivs[i].assigns);
    }
    if (detail::truth_in(worlds, bound.root)) sum += p;
    return true;
  });
  return sum;
}

inline Rat oracle_conditional(const FunctionalModel& fm, const FormulaRef& f,
                              const FormulaRef& given,
                              std::uint64_t cap = std::uint64_t(1) << 24) {
  Rat den = oracle_probability(fm, *given, cap);
  if (den == 0) {
    throw UndefinedConditional("conditioning event '" + to_string(*given) +
                               "' has probability zero");
  }
  Rat num = oracle_probability(fm, *Formula::make_and({f, given}), cap);
  return num / den;
}

// n i.i.d. rows from Pr': draw the exogenous context, then each response
// function independently (setting by setting, per the cpt rows), then solve
// the equations.  Row i uses an rng stream derived from (seed, i), so the
// dataset is reproducible and rows are independent of enumeration order.
inline Dataset sample(const FunctionalModel& fm, std::uint64_t n,
                      std::uint64_t seed) {
  const Cbn& m = fm.base();
  Dataset data;
  for (int v = 0; v < m.var_count(); ++v) {
    data.columns.push_back(m.var(v).name);
  }

  const auto& contexts = m.contexts();
  std::vector<Rat> context_weights;
  for (const auto& [vals, p] : contexts) context_weights.push_back(p);

  ExtendedContext ctx;
  ctx.codes.resize(fm.endogenous().size());
  for (std::uint64_t i = 0; i < n; ++i) {
    DetRng rng(splitmix64(seed) ^ splitmix64(i * 0x9e3779b97f4a7c15ULL + 1));
    ctx.exo_values = contexts[rng.pick(context_weights)].first;
    for (std::size_t k = 0; k < fm.endogenous().size(); ++k) {
      int v = fm.endogenous()[k];
      std::uint64_t code = 0;
      for (int s = 0; s < m.setting_count(v); ++s) {
        std::vector<Rat> row;
        for (int val = 0; val < m.domain_size(v); ++val) {
          row.push_back(m.cpt(v, s, val));
        }
        code = code * m.domain_size(v) + rng.pick(row);
      }
      ctx.codes[k] = code;
    }
    auto world = fm.solve(ctx, {});
    std::vector<std::string> row;
    for (int v = 0; v < m.var_count(); ++v) {
      row.push_back(m.var(v).domain[world[v]]);
    }
    data.rows.push_back(std::move(row));
  }
  return data;
}

}  // namespace causal
