#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace kirby {

// Framing expression AST: integer constants, framing(x), lk(x,y),
// +, -, *, and integer powers.  Component names are rule-local and get
// resolved through the callbacks in ExprEnv at evaluation time.
struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum Kind { Const, Framing, Lk, Neg, Add, Sub, Mul, Pow } kind;
    long long value = 0; // Const value, or Pow exponent
    std::string a, b;    // component names for Framing / Lk
    ExprPtr x, y;
};

struct ExprEnv {
    std::function<long long(const std::string&)> framing_of;
    std::function<long long(const std::string&, const std::string&)> lk_of;
};

ExprPtr make_const(long long v);

long long eval(const ExprPtr& e, const ExprEnv& env);
std::string to_string(const ExprPtr& e);
// names referenced by the expression (for before/after resolution)
std::vector<std::string> referenced_names(const ExprPtr& e);

// Lexer shared with the action parser: identifiers, integers, and the
// symbols ( ) + - * ^ : , = and == as separate tokens.
std::vector<std::string> lex_expr(const std::string& text, int lineno);

// Parses tokens[pos...] as an expression, advancing pos.
ExprPtr parse_expr(const std::vector<std::string>& tokens, size_t& pos, int lineno);

} // namespace kirby
