#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "causal/formula.hpp"

namespace causal {

// Recursive-descent parser for the concrete syntax
//
//   formula := or ;  or := and ('|' and)* ;  and := unary ('&' unary)* ;
//   unary   := '!' unary | atom ;
//   atom    := event | do | '(' formula ')' ;
//   do      := '[' assign (',' assign)* ']' '(' formula ')' ;
//   assign  := IDENT '<-' VALUE ;  event := IDENT '=' VALUE.
//
// '!' binds tightest, then '&', then '|'.
class FormulaParser {
 public:
  explicit FormulaParser(std::string_view text) : text_(text) {}

  FormulaRef parse() {
    auto f = parse_or();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return f;
  }

 private:
  FormulaRef parse_or() {
    std::vector<FormulaRef> parts{parse_and()};
    while (eat('|')) parts.push_back(parse_and());
    return Formula::make_or(std::move(parts));
  }

  FormulaRef parse_and() {
    std::vector<FormulaRef> parts{parse_unary()};
    while (eat('&')) parts.push_back(parse_unary());
    return Formula::make_and(std::move(parts));
  }

  FormulaRef parse_unary() {
    if (eat('!')) return Formula::make_not(parse_unary());
    return parse_atom();
  }

  FormulaRef parse_atom() {
    skip_ws();
    if (eat('(')) {
      auto f = parse_or();
      expect(')');
      return f;
    }
    if (peek() == '[') return parse_do();
    return parse_event();
  }

  FormulaRef parse_do() {
    std::size_t open = pos_;
    expect('[');
    std::vector<Assignment> assigns;
    do {
      std::string var = parse_ident("intervention variable");
      expect_seq("<-");
      assigns.push_back({std::move(var), parse_value()});
    } while (eat(','));
    expect(']');
    expect('(');
    in_do_depth_++;
    auto body = parse_or();
    in_do_depth_--;
    expect(')');
    if (in_do_depth_ > 0) {
      throw ParseError("nested intervention: [ ... ] cannot appear inside "
                       "the body of another intervention",
                       open);
    }
    InterventionSet iv;
    try {
      iv = InterventionSet(std::move(assigns));
    } catch (const QueryError& e) {
      throw ParseError(e.what(), open);
    }
    return Formula::make_do(std::move(iv), std::move(body));
  }

  FormulaRef parse_event() {
    std::string var = parse_ident("variable");
    expect('=');
    return Formula::make_event(std::move(var), parse_value());
  }

  std::string parse_ident(const char* what) {
    skip_ws();
    std::size_t start = pos_;
    if (pos_ < text_.size() &&
        (std::isalpha(static_cast<unsigned char>(text_[pos_])) ||
         text_[pos_] == '_')) {
      ++pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_')) {
        ++pos_;
      }
      return std::string(text_.substr(start, pos_ - start));
    }
    fail(std::string("expected ") + what);
    return {};
  }

  // Value labels may be identifiers or bare numbers ("1", "42").
  std::string parse_value() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_')) {
      ++pos_;
    }
    if (pos_ == start) fail("expected a value label");
    return std::string(text_.substr(start, pos_ - start));
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }

  void expect_seq(std::string_view s) {
    skip_ws();
    if (text_.substr(pos_, s.size()) != s) {
      fail("expected '" + std::string(s) + "'");
    }
    pos_ += s.size();
  }

  [[noreturn]] void fail(const std::string& message) {
    throw ParseError(message, pos_);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int in_do_depth_ = 0;
};

inline FormulaRef parse_formula(std::string_view text) {
  return FormulaParser(text).parse();
}

inline FormulaRef parse_formula(std::string_view text, const Cbn& m,
                                Language lang) {
  auto f = parse_formula(text);
  bind_check(*f, m, lang);
  return f;
}

// Renders "   ^" caret lines for parse diagnostics.
inline std::string caret_message(std::string_view text, const ParseError& e) {
  std::string out(text);
  out += "\n";
  out += std::string(std::min(e.position(), text.size()), ' ');
  out += "^ ";
  out += e.what();
  return out;
}

}  // namespace causal
