#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "causal/model.hpp"
#include "causal/random.hpp"

namespace causal {

// Tabular observational samples: a header of variable names and one row per
// observation.  Values are domain labels.
struct Dataset {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

inline void write_csv(const Dataset& data, std::ostream& out) {
  for (std::size_t i = 0; i < data.columns.size(); ++i) {
    if (i) out << ',';
    out << data.columns[i];
  }
  out << '\n';
  for (const auto& row : data.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
}

inline void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_csv(data, out);
}

inline Dataset read_csv(std::istream& in, const std::string& origin = "csv") {
  Dataset data;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        out.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur += c;
      }
    }
    out.push_back(cur);
    return out;
  };
  if (!std::getline(in, line)) {
    throw IoError("empty dataset in " + origin);
  }
  data.columns = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split(line);
    if (row.size() != data.columns.size()) {
      throw IoError("row " + std::to_string(data.rows.size() + 2) + " of " +
                    origin + " has " + std::to_string(row.size()) +
                    " fields, expected " + std::to_string(data.columns.size()));
    }
    data.rows.push_back(std::move(row));
  }
  return data;
}

inline Dataset read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path + "'");
  return read_csv(in, path);
}

// Weighted contingency table over a subset of a model's variables.  Rows of
// a dataset collapse to (value pattern, count); an exact joint distribution
// gives rational weights instead of counts, which makes plug-in estimation
// on a "perfect dataset" reproduce exact values bit for bit.
class FreqTable {
 public:
  // Strict binding: every column must name a model variable and every value
  // must be in that variable's domain.
  static FreqTable from_dataset(const Dataset& data, const Cbn& m) {
    FreqTable t;
    std::vector<int> col_vars;
    for (const auto& c : data.columns) {
      int v = m.var_id(c);
      if (v < 0) {
        throw QueryError("dataset column '" + c +
                         "' does not name a model variable");
      }
      col_vars.push_back(v);
    }
    // table variables sorted by id; remember each column's slot
    t.vars_ = col_vars;
    std::sort(t.vars_.begin(), t.vars_.end());
    t.vars_.erase(std::unique(t.vars_.begin(), t.vars_.end()), t.vars_.end());
    if (t.vars_.size() != col_vars.size()) {
      throw QueryError("dataset repeats a column");
    }
    std::vector<int> slot(col_vars.size());
    for (std::size_t i = 0; i < col_vars.size(); ++i) {
      slot[i] = static_cast<int>(
          std::find(t.vars_.begin(), t.vars_.end(), col_vars[i]) -
          t.vars_.begin());
    }
    std::map<std::vector<int>, std::uint64_t> counts;
    std::vector<int> pattern(t.vars_.size());
    for (std::size_t r = 0; r < data.rows.size(); ++r) {
      for (std::size_t i = 0; i < col_vars.size(); ++i) {
        int val = m.value_id(col_vars[i], data.rows[r][i]);
        if (val < 0) {
          throw QueryError("row " + std::to_string(r + 2) + ": value '" +
                           data.rows[r][i] + "' is not in the domain of '" +
                           m.var(col_vars[i]).name + "'");
        }
        pattern[slot[i]] = val;
      }
      ++counts[pattern];
    }
    for (const auto& [pat, c] : counts) {
      t.patterns_.emplace_back(pat, Rat(c));
      t.total_ += c;
    }
    t.integer_weights_ = true;
    return t;
  }

  // The exact joint over all model variables, as a weighted table.
  static FreqTable from_exact_joint(const Cbn& m) {
    FreqTable t;
    for (int v = 0; v < m.var_count(); ++v) t.vars_.push_back(v);
    const auto& exo = m.exogenous_vars();
    std::vector<int> state(m.var_count(), -1);
    std::vector<int> parent_vals;
    for (const auto& [exo_vals, cp] : m.contexts()) {
      for (std::size_t i = 0; i < exo.size(); ++i) state[exo[i]] = exo_vals[i];
      auto recurse = [&](auto&& self, std::size_t k, const Rat& p) -> void {
        if (k == m.topological_order().size()) {
          t.patterns_.emplace_back(state, p);
          t.total_ += p;
          return;
        }
        int v = m.topological_order()[k];
        if (m.var(v).kind == VarKind::exogenous) {
          self(self, k + 1, p);
          return;
        }
        const auto& parents = m.parents(v);
        parent_vals.resize(parents.size());
        for (std::size_t j = 0; j < parents.size(); ++j)
          parent_vals[j] = state[parents[j]];
        int setting = m.setting_index(v, parent_vals);
        for (int val = 0; val < m.domain_size(v); ++val) {
          const Rat& q = m.cpt(v, setting, val);
          if (q == 0) continue;
          state[v] = val;
          self(self, k + 1, p * q);
        }
        state[v] = -1;
      };
      recurse(recurse, 0, cp);
    }
    t.integer_weights_ = false;
    return t;
  }

  bool has_var(int var) const {
    return std::find(vars_.begin(), vars_.end(), var) != vars_.end();
  }
  const std::vector<int>& vars() const { return vars_; }
  const Rat& total() const { return total_; }
  bool integer_weights() const { return integer_weights_; }
  std::size_t pattern_count() const { return patterns_.size(); }

  // Total weight of patterns matching the (var, value) constraints; every
  // referenced variable must be in the table.
  Rat weight_of(std::span<const std::pair<int, int>> assignment,
                const Cbn& m) const {
    std::vector<std::pair<std::size_t, int>> slots;
    for (const auto& [var, val] : assignment) {
      auto it = std::find(vars_.begin(), vars_.end(), var);
      if (it == vars_.end()) {
        throw QueryError("the dataset has no column for variable '" +
                         m.var(var).name +
                         "', which this estimate conditions on");
      }
      slots.emplace_back(it - vars_.begin(), val);
    }
    Rat sum = 0;
    for (const auto& [pat, w] : patterns_) {
      bool match = true;
      for (const auto& [slot, val] : slots) {
        if (pat[slot] != val) {
          match = false;
          break;
        }
      }
      if (match) sum += w;
    }
    return sum;
  }

  // Nonparametric bootstrap replicate: n draws with replacement, where n is
  // the (integer) total weight.  Deterministic given the rng state.
  FreqTable resample(DetRng& rng) const {
    if (!integer_weights_) {
      throw QueryError("cannot bootstrap a table without integer counts");
    }
    std::vector<std::uint64_t> cumulative;
    std::uint64_t acc = 0;
    for (const auto& [pat, w] : patterns_) {
      acc += w.convert_to<std::uint64_t>();
      cumulative.push_back(acc);
    }
    FreqTable out;
    out.vars_ = vars_;
    out.integer_weights_ = true;
    std::vector<std::uint64_t> counts(patterns_.size(), 0);
    for (std::uint64_t i = 0; i < acc; ++i) {
      std::uint64_t r = rng.below(acc);
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
      ++counts[it - cumulative.begin()];
    }
    for (std::size_t k = 0; k < patterns_.size(); ++k) {
      if (counts[k] == 0) continue;
      out.patterns_.emplace_back(patterns_[k].first, Rat(counts[k]));
      out.total_ += counts[k];
    }
    return out;
  }

 private:
  std::vector<int> vars_;
  std::vector<std::pair<std::vector<int>, Rat>> patterns_;
  Rat total_ = 0;
  bool integer_weights_ = false;
};

}  // namespace causal
