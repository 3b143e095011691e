#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

#include "causal/functional.hpp"
#include "causal/model_io.hpp"

namespace causal {

// fcm/1 export: the source signature, plus one response-function variable
// per endogenous variable with its support distribution.  Each support entry
// lists the function's outputs aligned with the "settings" array, so the
// structural equation Y = U_Y(parents) can be read off directly.
inline nlohmann::json fcm_to_json(const FunctionalModel& fm) {
  const Cbn& m = fm.base();
  nlohmann::json j;
  j["format"] = "fcm/1";
  j["source"] = cbn_spec_to_json(m.spec());
  j["positive_contexts"] = fm.positive_context_count().str();

  j["response_variables"] = nlohmann::json::array();
  for (int v : fm.endogenous()) {
    nlohmann::json rj;
    std::string name = "U_" + m.var(v).name;
    while (m.var_id(name) >= 0) name += "_";
    rj["name"] = name;
    rj["child"] = m.var(v).name;
    nlohmann::json parents = nlohmann::json::array();
    for (int p : m.parents(v)) parents.push_back(m.var(p).name);
    rj["parents"] = parents;

    rj["settings"] = nlohmann::json::array();
    std::vector<int> parent_vals(m.parents(v).size());
    for (int s = 0; s < m.setting_count(v); ++s) {
      m.setting_values(v, s, parent_vals);
      nlohmann::json sj = nlohmann::json::object();
      for (std::size_t i = 0; i < parent_vals.size(); ++i) {
        int p = m.parents(v)[i];
        sj[m.var(p).name] = m.var(p).domain[parent_vals[i]];
      }
      rj["settings"].push_back(std::move(sj));
    }

    rj["distribution"] = nlohmann::json::array();
    for (const auto& [code, p] : fm.support(v)) {
      auto rf = fm.response(v, code);
      nlohmann::json entry;
      entry["outputs"] = nlohmann::json::array();
      for (int s = 0; s < m.setting_count(v); ++s) {
        entry["outputs"].push_back(m.var(v).domain[rf.output(s)]);
      }
      entry["p"] = to_fraction_string(p);
      rj["distribution"].push_back(std::move(entry));
    }
    j["response_variables"].push_back(std::move(rj));
  }
  return j;
}

inline void write_fcm(const FunctionalModel& fm, std::ostream& out) {
  out << fcm_to_json(fm).dump(2) << "\n";
}

}  // namespace causal
