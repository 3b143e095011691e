#pragma once

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

#include "causal/errors.hpp"
#include "causal/model.hpp"

namespace causal {

struct Event {
  std::string var;
  std::string value;
  friend bool operator==(const Event&, const Event&) = default;
  friend auto operator<=>(const Event&, const Event&) = default;
};

class Formula;
using FormulaRef = std::shared_ptr<const Formula>;

// AST for the causal languages: primitive events, Boolean connectives, and
// the intervention modality [X1<-x1,...](body).  Modalities never nest:
// bodies are Boolean combinations of primitive events only, and the
// constructor enforces that.
class Formula {
 public:
  enum class Kind { event, negation, conjunction, disjunction, intervention };

  static FormulaRef make_event(std::string var, std::string value) {
    auto f = std::make_shared<Formula>(Private{});
    f->kind_ = Kind::event;
    f->event_ = {std::move(var), std::move(value)};
    return f;
  }

  static FormulaRef make_not(FormulaRef child) {
    auto f = std::make_shared<Formula>(Private{});
    f->kind_ = Kind::negation;
    f->has_do_ = child->has_do_;
    f->children_.push_back(std::move(child));
    return f;
  }

  static FormulaRef make_and(std::vector<FormulaRef> children) {
    return make_nary(Kind::conjunction, std::move(children));
  }

  static FormulaRef make_or(std::vector<FormulaRef> children) {
    return make_nary(Kind::disjunction, std::move(children));
  }

  static FormulaRef make_do(InterventionSet iv, FormulaRef body) {
    if (body->has_do_) {
      throw QueryError("nested intervention: the body of [ ... ] must be a "
                       "Boolean combination of primitive events");
    }
    auto f = std::make_shared<Formula>(Private{});
    f->kind_ = Kind::intervention;
    f->iv_ = std::move(iv);
    f->children_.push_back(std::move(body));
    f->has_do_ = true;
    return f;
  }

  Kind kind() const { return kind_; }
  const Event& event() const { return event_; }
  const FormulaRef& child() const { return children_.front(); }
  const std::vector<FormulaRef>& children() const { return children_; }
  const InterventionSet& intervention_set() const { return iv_; }
  const FormulaRef& body() const { return children_.front(); }
  bool contains_do() const { return has_do_; }

  struct Private {};
  explicit Formula(Private) {}

 private:
  // Nested conjunctions (disjunctions) flatten into their parent, so the
  // parenthesization of an associative chain never affects AST identity.
  static FormulaRef make_nary(Kind kind, std::vector<FormulaRef> children) {
    std::vector<FormulaRef> flat;
    for (auto& c : children) {
      if (c->kind() == kind) {
        flat.insert(flat.end(), c->children().begin(), c->children().end());
      } else {
        flat.push_back(std::move(c));
      }
    }
    if (flat.size() == 1) return flat.front();
    if (flat.empty()) {
      throw QueryError("empty connective");
    }
    auto f = std::make_shared<Formula>(Private{});
    f->kind_ = kind;
    for (const auto& c : flat) f->has_do_ = f->has_do_ || c->contains_do();
    f->children_ = std::move(flat);
    return f;
  }

  Kind kind_ = Kind::event;
  Event event_;
  std::vector<FormulaRef> children_;
  InterventionSet iv_;
  bool has_do_ = false;
};

inline bool equal(const Formula& a, const Formula& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Formula::Kind::event:
      return a.event() == b.event();
    case Formula::Kind::intervention:
      if (!(a.intervention_set() == b.intervention_set())) return false;
      [[fallthrough]];
    case Formula::Kind::negation:
    case Formula::Kind::conjunction:
    case Formula::Kind::disjunction: {
      if (a.children().size() != b.children().size()) return false;
      for (std::size_t i = 0; i < a.children().size(); ++i) {
        if (!equal(*a.children()[i], *b.children()[i])) return false;
      }
      return true;
    }
  }
  return false;
}

namespace detail {

inline void print_formula(const Formula& f, std::string& out, int parent_prec);

inline void print_iv(const InterventionSet& iv, std::string& out) {
  out += '[';
  bool first = true;
  for (const auto& a : iv.items()) {
    if (!first) out += ", ";
    first = false;
    out += a.var;
    out += "<-";
    out += a.value;
  }
  out += ']';
}

// precedence: | = 1, & = 2, ! = 3, atoms = 4
inline int precedence(Formula::Kind k) {
  switch (k) {
    case Formula::Kind::disjunction: return 1;
    case Formula::Kind::conjunction: return 2;
    case Formula::Kind::negation: return 3;
    default: return 4;
  }
}

inline void print_formula(const Formula& f, std::string& out,
                          int parent_prec) {
  int prec = precedence(f.kind());
  bool parens = prec < parent_prec;
  if (parens) out += '(';
  switch (f.kind()) {
    case Formula::Kind::event:
      out += f.event().var;
      out += '=';
      out += f.event().value;
      break;
    case Formula::Kind::negation:
      out += '!';
      print_formula(*f.child(), out, 4);
      break;
    case Formula::Kind::conjunction: {
      bool first = true;
      for (const auto& c : f.children()) {
        if (!first) out += " & ";
        first = false;
        print_formula(*c, out, 2);
      }
      break;
    }
    case Formula::Kind::disjunction: {
      bool first = true;
      for (const auto& c : f.children()) {
        if (!first) out += " | ";
        first = false;
        print_formula(*c, out, 1);
      }
      break;
    }
    case Formula::Kind::intervention:
      print_iv(f.intervention_set(), out);
      out += '(';
      print_formula(*f.body(), out, 0);
      out += ')';
      break;
  }
  if (parens) out += ')';
}

}  // namespace detail

inline std::string to_string(const Formula& f) {
  std::string out;
  detail::print_formula(f, out, 0);
  return out;
}
inline std::string to_string(const FormulaRef& f) { return to_string(*f); }

enum class Language { l, l_plus };

// Checks every name against the model and, under L, rejects exogenous
// symbols in events and interventions.
inline void bind_check(const Formula& f, const Cbn& m, Language lang) {
  auto check_var = [&](const std::string& name, const std::string& value,
                       const char* role) {
    int var = m.require_var(name);
    m.require_value(var, value);
    if (lang == Language::l && m.var(var).kind == VarKind::exogenous) {
      throw QueryError("exogenous variable '" + name + "' used as " + role +
                       " is not allowed in language L (pass language L+ to "
                       "allow it)");
    }
  };
  switch (f.kind()) {
    case Formula::Kind::event:
      check_var(f.event().var, f.event().value, "a primitive event");
      break;
    case Formula::Kind::intervention:
      for (const auto& a : f.intervention_set().items()) {
        check_var(a.var, a.value, "an intervention target");
      }
      bind_check(*f.body(), m, lang);
      break;
    default:
      for (const auto& c : f.children()) bind_check(*c, m, lang);
  }
}

inline bool in_language_l(const Formula& f, const Cbn& m) {
  try {
    bind_check(f, m, Language::l);
    return true;
  } catch (const QueryError&) {
    return false;
  }
}

inline void collect_intervention_sets(const Formula& f,
                                      std::vector<InterventionSet>& out) {
  if (f.kind() == Formula::Kind::intervention) {
    if (std::find(out.begin(), out.end(), f.intervention_set()) == out.end()) {
      out.push_back(f.intervention_set());
    }
    return;
  }
  for (const auto& c : f.children()) collect_intervention_sets(*c, out);
}

}  // namespace causal
