#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "causal/errors.hpp"
#include "causal/rational.hpp"

namespace causal {

enum class VarKind { exogenous, endogenous };

struct Variable {
  std::string name;
  VarKind kind = VarKind::endogenous;
  std::vector<std::string> domain;  // ordered, distinct, non-empty
};

// One (variable <- value) assignment by label.  Used both in intervention
// sets and in cpt row descriptions.
struct Assignment {
  std::string var;
  std::string value;
  friend bool operator==(const Assignment&, const Assignment&) = default;
  friend auto operator<=>(const Assignment&, const Assignment&) = default;
};

// A set of simultaneous interventions.  Stored canonically sorted by
// variable name so syntactic reorderings compare equal; repeated variables
// are rejected.
class InterventionSet {
 public:
  InterventionSet() = default;
  InterventionSet(std::initializer_list<Assignment> items)
      : InterventionSet(std::vector<Assignment>(items)) {}
  explicit InterventionSet(std::vector<Assignment> items) {
    std::sort(items.begin(), items.end(),
              [](const Assignment& a, const Assignment& b) {
                return a.var < b.var || (a.var == b.var && a.value < b.value);
              });
    for (std::size_t i = 1; i < items.size(); ++i) {
      if (items[i].var == items[i - 1].var) {
        throw QueryError("variable '" + items[i].var +
                         "' intervened on twice in one intervention set");
      }
    }
    items_ = std::move(items);
  }

  const std::vector<Assignment>& items() const { return items_; }
  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }

  std::optional<std::string_view> value_of(std::string_view var) const {
    for (const auto& a : items_)
      if (a.var == var) return a.value;
    return std::nullopt;
  }

  InterventionSet without(std::string_view var) const {
    std::vector<Assignment> rest;
    for (const auto& a : items_)
      if (a.var != var) rest.push_back(a);
    return InterventionSet(std::move(rest));
  }

  friend bool operator==(const InterventionSet&,
                         const InterventionSet&) = default;
  friend auto operator<=>(const InterventionSet&,
                          const InterventionSet&) = default;

 private:
  std::vector<Assignment> items_;
};

struct CptRow {
  std::vector<Assignment> given;               // one per parent
  std::vector<std::pair<std::string, Rat>> dist;  // value label -> probability
};

struct CptSpec {
  std::string child;
  std::vector<std::string> parents;
  std::vector<CptRow> rows;
};

// Optional joint table over full exogenous contexts, replacing per-variable
// exogenous cpts ("a single cpt for contexts").
struct ContextRow {
  std::vector<Assignment> context;  // one per exogenous variable
  Rat p;
};

struct CbnSpec {
  std::vector<Variable> variables;
  std::vector<CptSpec> cpts;
  std::optional<std::vector<ContextRow>> context_table;
};

struct Violation {
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string str() const {
    std::string out;
    for (const auto& v : violations) {
      out += "[" + v.code + "] " + v.message + "\n";
    }
    return out;
  }
};

namespace detail {

// Parent-setting indices are mixed-radix numbers over the parent domains,
// first parent most significant (lexicographic order).
inline int setting_count(std::span<const int> radices) {
  int n = 1;
  for (int r : radices) n *= r;
  return n;
}

inline int setting_index(std::span<const int> radices,
                         std::span<const int> values) {
  int idx = 0;
  for (std::size_t i = 0; i < radices.size(); ++i) {
    idx = idx * radices[i] + values[i];
  }
  return idx;
}

inline void setting_values(std::span<const int> radices, int index,
                           std::span<int> out) {
  for (std::size_t i = radices.size(); i-- > 0;) {
    out[i] = index % radices[i];
    index /= radices[i];
  }
}

}  // namespace detail

ValidationReport validate(const CbnSpec& spec);

// Immutable, validated causal Bayesian network.  All label lookups are
// resolved to dense integer ids at construction; evaluation code works on
// ids only.
class Cbn {
 public:
  static Cbn compile(const CbnSpec& spec) {
    auto report = validate(spec);
    if (!report.ok()) {
      throw ModelError("invalid model:\n" + report.str());
    }
    return Cbn(spec);
  }

  const CbnSpec& spec() const { return spec_; }

  int var_count() const { return static_cast<int>(vars_.size()); }
  const Variable& var(int id) const { return vars_[id]; }
  int domain_size(int id) const {
    return static_cast<int>(vars_[id].domain.size());
  }

  int var_id(std::string_view name) const {
    auto it = var_ids_.find(std::string(name));
    return it == var_ids_.end() ? -1 : it->second;
  }
  int require_var(std::string_view name) const {
    int id = var_id(name);
    if (id < 0) throw QueryError("unknown variable '" + std::string(name) + "'");
    return id;
  }
  int value_id(int var, std::string_view label) const {
    const auto& dom = vars_[var].domain;
    for (std::size_t i = 0; i < dom.size(); ++i)
      if (dom[i] == label) return static_cast<int>(i);
    return -1;
  }
  int require_value(int var, std::string_view label) const {
    int v = value_id(var, label);
    if (v < 0) {
      throw QueryError("value '" + std::string(label) +
                       "' not in the domain of variable '" + vars_[var].name +
                       "'");
    }
    return v;
  }

  const std::vector<int>& parents(int var) const { return parents_[var]; }
  const std::vector<int>& children(int var) const { return children_[var]; }
  int setting_count(int var) const { return setting_counts_[var]; }

  int setting_index(int var, std::span<const int> parent_values) const {
    return detail::setting_index(parent_radices_[var], parent_values);
  }
  void setting_values(int var, int setting, std::span<int> out) const {
    detail::setting_values(parent_radices_[var], setting, out);
  }

  const Rat& cpt(int var, int setting, int value) const {
    return cpt_[var][setting * domain_size(var) + value];
  }

  // Every variable appears after all of its parents; ties broken by
  // declaration order.
  const std::vector<int>& topological_order() const { return topo_; }

  // Strict descendance: descendant != ancestor.
  bool is_descendant(int node, int ancestor) const {
    return node != ancestor && reach_[ancestor][node];
  }

  bool has_context_table() const { return spec_.context_table.has_value(); }
  const std::vector<int>& exogenous_vars() const { return exo_vars_; }

  // Positive-probability exogenous contexts, as (values per exogenous_vars()
  // position, probability).
  const std::vector<std::pair<std::vector<int>, Rat>>& contexts() const {
    return contexts_;
  }

  // The do-intervention: intervened variables become parentless with a
  // point-mass cpt; everything else is untouched.  Returns a fresh model.
  Cbn intervene(const InterventionSet& iv) const {
    CbnSpec next = spec_;
    for (const auto& a : iv.items()) {
      int var = require_var(a.var);
      require_value(var, a.value);
      for (auto& cs : next.cpts) {
        if (cs.child != a.var) continue;
        cs.parents.clear();
        cs.rows.clear();
        CptRow row;
        for (const auto& label : vars_[var].domain) {
          row.dist.emplace_back(label, label == a.value ? Rat(1) : Rat(0));
        }
        cs.rows.push_back(std::move(row));
      }
      if (next.context_table && vars_[var].kind == VarKind::exogenous) {
        // Forcing an exogenous variable under a joint context table:
        // marginalize the variable out and concentrate it on the forced
        // value (this is an intervention, not conditioning).
        std::map<std::vector<Assignment>, Rat> merged;
        for (auto& row : *next.context_table) {
          auto original = row.context;
          std::sort(original.begin(), original.end());
          merged[original] += 0;  // keep full coverage
          auto ctx = row.context;
          for (auto& c : ctx)
            if (c.var == a.var) c.value = a.value;
          std::sort(ctx.begin(), ctx.end());
          merged[ctx] += row.p;
        }
        std::vector<ContextRow> rows;
        for (auto& [ctx, p] : merged) rows.push_back({ctx, p});
        next.context_table = std::move(rows);
      }
    }
    return Cbn::compile(next);
  }

  bool same_structure(const Cbn& other) const {
    return vars_.size() == other.vars_.size() && parents_ == other.parents_ &&
           [&] {
             for (std::size_t i = 0; i < vars_.size(); ++i) {
               if (vars_[i].name != other.vars_[i].name ||
                   vars_[i].kind != other.vars_[i].kind ||
                   vars_[i].domain != other.vars_[i].domain)
                 return false;
             }
             return true;
           }();
  }

  bool equals(const Cbn& other) const {
    return same_structure(other) && cpt_ == other.cpt_ &&
           contexts_ == other.contexts_;
  }

 private:
  explicit Cbn(const CbnSpec& spec) : spec_(spec) {
    vars_ = spec.variables;
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      var_ids_[vars_[i].name] = static_cast<int>(i);
    }
    int n = var_count();
    parents_.resize(n);
    children_.resize(n);
    parent_radices_.resize(n);
    setting_counts_.assign(n, 1);
    cpt_.resize(n);

    std::vector<const CptSpec*> by_var(n, nullptr);
    for (const auto& cs : spec.cpts) by_var[var_id(cs.child)] = &cs;

    for (int v = 0; v < n; ++v) {
      if (by_var[v] == nullptr) {
        // Exogenous variable covered by the joint context table.
        cpt_[v].assign(domain_size(v), Rat(0));
        continue;
      }
      const CptSpec& cs = *by_var[v];
      for (const auto& p : cs.parents) {
        int pid = var_id(p);
        parents_[v].push_back(pid);
        parent_radices_[v].push_back(domain_size(pid));
        children_[pid].push_back(v);
      }
      setting_counts_[v] = detail::setting_count(parent_radices_[v]);
      cpt_[v].assign(setting_counts_[v] * domain_size(v), Rat(0));
      for (const auto& row : cs.rows) {
        std::vector<int> vals(parents_[v].size());
        for (std::size_t i = 0; i < parents_[v].size(); ++i) {
          for (const auto& g : row.given) {
            if (var_id(g.var) == parents_[v][i]) {
              vals[i] = value_id(parents_[v][i], g.value);
            }
          }
        }
        int s = detail::setting_index(parent_radices_[v], vals);
        for (const auto& [label, p] : row.dist) {
          cpt_[v][s * domain_size(v) + value_id(v, label)] = p;
        }
      }
    }

    // Kahn's algorithm, picking the smallest declaration index among the
    // ready vertices to make the order deterministic.
    std::vector<int> indeg(n, 0);
    for (int v = 0; v < n; ++v) indeg[v] = static_cast<int>(parents_[v].size());
    std::vector<bool> done(n, false);
    for (int step = 0; step < n; ++step) {
      for (int v = 0; v < n; ++v) {
        if (!done[v] && indeg[v] == 0) {
          topo_.push_back(v);
          done[v] = true;
          for (int c : children_[v]) --indeg[c];
          break;
        }
      }
    }

    reach_.assign(n, std::vector<bool>(n, false));
    for (auto it = topo_.rbegin(); it != topo_.rend(); ++it) {
      int v = *it;
      for (int c : children_[v]) {
        reach_[v][c] = true;
        for (int k = 0; k < n; ++k)
          if (reach_[c][k]) reach_[v][k] = true;
      }
    }

    for (int v = 0; v < n; ++v) {
      if (vars_[v].kind == VarKind::exogenous) exo_vars_.push_back(v);
    }
    build_contexts();
  }

  void build_contexts() {
    if (spec_.context_table) {
      for (const auto& row : *spec_.context_table) {
        if (row.p == 0) continue;
        std::vector<int> vals(exo_vars_.size());
        for (std::size_t i = 0; i < exo_vars_.size(); ++i) {
          for (const auto& a : row.context) {
            if (var_id(a.var) == exo_vars_[i])
              vals[i] = value_id(exo_vars_[i], a.value);
          }
        }
        contexts_.emplace_back(std::move(vals), row.p);
      }
      return;
    }
    // Independent exogenous variables: product of the root cpts,
    // zero-probability contexts skipped.
    std::vector<int> vals(exo_vars_.size(), 0);
    Rat p = 1;
    enumerate_contexts(0, vals, p);
  }

  void enumerate_contexts(std::size_t i, std::vector<int>& vals, const Rat& p) {
    if (i == exo_vars_.size()) {
      contexts_.emplace_back(vals, p);
      return;
    }
    int v = exo_vars_[i];
    for (int val = 0; val < domain_size(v); ++val) {
      const Rat& q = cpt(v, 0, val);
      if (q == 0) continue;
      vals[i] = val;
      enumerate_contexts(i + 1, vals, p * q);
    }
  }

  CbnSpec spec_;
  std::vector<Variable> vars_;
  std::unordered_map<std::string, int> var_ids_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<int>> children_;
  std::vector<std::vector<int>> parent_radices_;
  std::vector<int> setting_counts_;
  std::vector<std::vector<Rat>> cpt_;  // var -> setting*domain + value
  std::vector<int> topo_;
  std::vector<std::vector<bool>> reach_;
  std::vector<int> exo_vars_;
  std::vector<std::pair<std::vector<int>, Rat>> contexts_;
};

inline Cbn intervene(const Cbn& m, const InterventionSet& iv) {
  return m.intervene(iv);
}

inline std::vector<std::string> topological_order(const Cbn& m) {
  std::vector<std::string> names;
  for (int v : m.topological_order()) names.push_back(m.var(v).name);
  return names;
}

inline ValidationReport validate(const CbnSpec& spec) {
  ValidationReport report;
  auto add = [&](std::string code, std::string message) {
    report.violations.push_back({std::move(code), std::move(message)});
  };

  std::map<std::string, const Variable*> vars;
  for (const auto& v : spec.variables) {
    if (vars.count(v.name)) {
      add("duplicate-variable", "variable '" + v.name + "' declared twice");
      continue;
    }
    vars[v.name] = &v;
    if (v.domain.empty()) {
      add("empty-domain", "variable '" + v.name + "' has an empty domain");
    }
    std::map<std::string, int> seen;
    for (const auto& d : v.domain) {
      if (++seen[d] == 2) {
        add("duplicate-value",
            "variable '" + v.name + "' repeats domain value '" + d + "'");
      }
    }
  }

  std::map<std::string, const CptSpec*> cpts;
  for (const auto& c : spec.cpts) {
    if (!vars.count(c.child)) {
      add("unknown-variable", "cpt for undeclared variable '" + c.child + "'");
      continue;
    }
    if (cpts.count(c.child)) {
      add("duplicate-cpt", "variable '" + c.child + "' has two cpts");
      continue;
    }
    cpts[c.child] = &c;
  }
  for (const auto& [name, v] : vars) {
    bool covered = cpts.count(name) ||
                   (spec.context_table && v->kind == VarKind::exogenous);
    if (!covered) add("missing-cpt", "variable '" + name + "' has no cpt");
  }

  for (const auto& [child, c] : cpts) {
    const Variable* cv = vars.at(child);
    bool parents_ok = true;
    std::map<std::string, int> pseen;
    for (const auto& p : c->parents) {
      if (!vars.count(p)) {
        add("unknown-parent",
            "cpt for '" + child + "' references undeclared parent '" + p + "'");
        parents_ok = false;
      } else if (++pseen[p] == 2) {
        add("duplicate-parent",
            "cpt for '" + child + "' repeats parent '" + p + "'");
        parents_ok = false;
      }
    }
    if (cv->kind == VarKind::exogenous && !c->parents.empty()) {
      add("exogenous-parents",
          "exogenous variable '" + child + "' must not have parents");
      parents_ok = false;
    }
    if (!parents_ok) continue;

    int expected_rows = 1;
    for (const auto& p : c->parents)
      expected_rows *= static_cast<int>(vars.at(p)->domain.size());

    std::map<std::vector<Assignment>, int> row_count;
    for (const auto& row : c->rows) {
      auto key = row.given;
      std::sort(key.begin(), key.end());
      bool key_ok = key.size() == c->parents.size();
      for (const auto& g : row.given) {
        bool is_parent = std::find(c->parents.begin(), c->parents.end(),
                                   g.var) != c->parents.end();
        if (!is_parent) {
          add("bad-row", "cpt row for '" + child +
                             "' conditions on non-parent '" + g.var + "'");
          key_ok = false;
        } else {
          const auto& dom = vars.at(g.var)->domain;
          if (std::find(dom.begin(), dom.end(), g.value) == dom.end()) {
            add("bad-row", "cpt row for '" + child + "' sets parent '" +
                               g.var + "' to unknown value '" + g.value + "'");
            key_ok = false;
          }
        }
      }
      if (key_ok && ++row_count[key] == 2) {
        add("duplicate-row", "cpt for '" + child + "' repeats a row");
      }

      Rat sum = 0;
      std::map<std::string, int> vseen;
      for (const auto& [label, p] : row.dist) {
        if (std::find(cv->domain.begin(), cv->domain.end(), label) ==
            cv->domain.end()) {
          add("bad-row", "cpt for '" + child + "' assigns probability to '" +
                             label + "' outside the domain");
          continue;
        }
        if (++vseen[label] == 2)
          add("bad-row", "cpt row for '" + child + "' repeats value '" +
                             label + "'");
        if (p < 0)
          add("negative-probability",
              "cpt for '" + child + "' has a negative entry");
        sum += p;
      }
      if (sum != 1) {
        add("row-sum", "cpt row for '" + child + "' sums to " +
                           to_fraction_string(sum) + ", not 1");
      }
    }
    if (static_cast<int>(row_count.size()) < expected_rows) {
      add("missing-row", "cpt for '" + child + "' covers " +
                             std::to_string(row_count.size()) + " of " +
                             std::to_string(expected_rows) +
                             " parent settings");
    }
  }

  if (spec.context_table) {
    int exo = 0, expected = 1;
    for (const auto& v : spec.variables) {
      if (v.kind == VarKind::exogenous) {
        ++exo;
        expected *= static_cast<int>(v.domain.size());
      }
    }
    Rat total = 0;
    std::map<std::vector<Assignment>, int> seen;
    for (const auto& row : *spec.context_table) {
      if (static_cast<int>(row.context.size()) != exo) {
        add("bad-context", "context row does not cover every exogenous variable");
        continue;
      }
      auto key = row.context;
      std::sort(key.begin(), key.end());
      if (++seen[key] == 2) add("duplicate-context", "context row repeated");
      if (row.p < 0) add("negative-probability", "negative context probability");
      total += row.p;
    }
    if (static_cast<int>(seen.size()) < expected) {
      add("missing-context", "context table covers " +
                                 std::to_string(seen.size()) + " of " +
                                 std::to_string(expected) + " contexts");
    }
    if (total != 1) {
      add("context-sum",
          "context table sums to " + to_fraction_string(total) + ", not 1");
    }
  }

  // Cycle check over declared parent edges (only meaningful once the
  // structural complaints above are absent).
  if (report.ok()) {
    std::map<std::string, std::vector<std::string>> adj;
    std::map<std::string, int> indeg;
    for (const auto& [name, _] : vars) indeg[name] = 0;
    for (const auto& [child, c] : cpts) {
      for (const auto& p : c->parents) {
        adj[p].push_back(child);
        ++indeg[child];
      }
    }
    std::vector<std::string> ready;
    for (const auto& [name, d] : indeg)
      if (d == 0) ready.push_back(name);
    std::size_t visited = 0;
    while (!ready.empty()) {
      auto cur = ready.back();
      ready.pop_back();
      ++visited;
      for (const auto& c : adj[cur])
        if (--indeg[c] == 0) ready.push_back(c);
    }
    if (visited < vars.size()) {
      add("cycle", "parent graph contains a cycle");
    }
  }
  return report;
}

}  // namespace causal
