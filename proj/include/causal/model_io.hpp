#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "causal/model.hpp"

namespace causal {

// cbn/1 file format
//
// {
//   "format": "cbn/1",
//   "variables": [{"name": "X", "kind": "endogenous", "domain": ["0","1"]}],
//   "cpts": [{"child": "X", "parents": ["U"],
//             "rows": [{"given": {"U": "0"}, "dist": {"0": "1/2", "1": "1/2"}}]}],
//   "context_table": [{"context": {"U": "0"}, "p": "1"}]   // optional
// }
//
// Probabilities must be strings ("1/2", "0.25") or JSON integers; non-integer
// JSON numbers are rejected because they pass through floating point.

namespace detail {

inline Rat json_probability(const nlohmann::json& j, const std::string& where) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rat(j.get<long long>());
  throw ModelError("probability in " + where +
                   " must be a string like \"1/2\" or \"0.25\" (non-integer "
                   "JSON numbers are not exact)");
}

}  // namespace detail

inline CbnSpec read_cbn_spec(std::istream& in, const std::string& origin = "") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ModelError("cannot parse " + (origin.empty() ? "model" : origin) +
                     ": " + e.what());
  }
  try {
    if (j.value("format", "") != "cbn/1") {
      throw ModelError("expected format \"cbn/1\"");
    }
    CbnSpec spec;
    for (const auto& vj : j.at("variables")) {
      Variable v;
      v.name = vj.at("name").get<std::string>();
      std::string kind = vj.value("kind", "endogenous");
      if (kind == "exogenous") {
        v.kind = VarKind::exogenous;
      } else if (kind == "endogenous") {
        v.kind = VarKind::endogenous;
      } else {
        throw ModelError("variable '" + v.name + "' has unknown kind '" +
                         kind + "'");
      }
      for (const auto& d : vj.at("domain")) {
        v.domain.push_back(d.is_string() ? d.get<std::string>() : d.dump());
      }
      spec.variables.push_back(std::move(v));
    }
    for (const auto& cj : j.value("cpts", nlohmann::json::array())) {
      CptSpec c;
      c.child = cj.at("child").get<std::string>();
      for (const auto& p : cj.value("parents", nlohmann::json::array())) {
        c.parents.push_back(p.get<std::string>());
      }
      for (const auto& rj : cj.at("rows")) {
        CptRow row;
        if (rj.contains("given")) {
          for (const auto& [var, val] : rj.at("given").items()) {
            row.given.push_back(
                {var, val.is_string() ? val.get<std::string>() : val.dump()});
          }
        }
        for (const auto& [label, p] : rj.at("dist").items()) {
          row.dist.emplace_back(
              label, detail::json_probability(p, "cpt for " + c.child));
        }
        c.rows.push_back(std::move(row));
      }
      spec.cpts.push_back(std::move(c));
    }
    if (j.contains("context_table")) {
      std::vector<ContextRow> rows;
      for (const auto& rj : j.at("context_table")) {
        ContextRow row;
        for (const auto& [var, val] : rj.at("context").items()) {
          row.context.push_back(
              {var, val.is_string() ? val.get<std::string>() : val.dump()});
        }
        row.p = detail::json_probability(rj.at("p"), "context table");
        rows.push_back(std::move(row));
      }
      spec.context_table = std::move(rows);
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError("malformed cbn/1 document: " + std::string(e.what()));
  }
}

inline Cbn load_cbn(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  return Cbn::compile(read_cbn_spec(in, path));
}

inline nlohmann::json cbn_spec_to_json(const CbnSpec& spec) {
  nlohmann::json j;
  j["format"] = "cbn/1";
  for (const auto& v : spec.variables) {
    j["variables"].push_back(
        {{"name", v.name},
         {"kind", v.kind == VarKind::exogenous ? "exogenous" : "endogenous"},
         {"domain", v.domain}});
  }
  j["cpts"] = nlohmann::json::array();
  for (const auto& c : spec.cpts) {
    nlohmann::json cj;
    cj["child"] = c.child;
    cj["parents"] = c.parents;
    cj["rows"] = nlohmann::json::array();
    for (const auto& row : c.rows) {
      nlohmann::json rj;
      rj["given"] = nlohmann::json::object();
      for (const auto& g : row.given) rj["given"][g.var] = g.value;
      for (const auto& [label, p] : row.dist) {
        rj["dist"][label] = to_fraction_string(p);
      }
      cj["rows"].push_back(std::move(rj));
    }
    j["cpts"].push_back(std::move(cj));
  }
  if (spec.context_table) {
    j["context_table"] = nlohmann::json::array();
    for (const auto& row : *spec.context_table) {
      nlohmann::json rj;
      rj["context"] = nlohmann::json::object();
      for (const auto& a : row.context) rj["context"][a.var] = a.value;
      rj["p"] = to_fraction_string(row.p);
      j["context_table"].push_back(std::move(rj));
    }
  }
  return j;
}

inline void write_cbn(const Cbn& m, std::ostream& out) {
  out << cbn_spec_to_json(m.spec()).dump(2) << "\n";
}

}  // namespace causal
