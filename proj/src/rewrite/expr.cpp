#include "rewrite/expr.hpp"

#include <cctype>

#include "core/error.hpp"
#include "core/text.hpp"

namespace kirby {

ExprPtr make_const(long long v) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Const;
    e->value = v;
    return e;
}

long long eval(const ExprPtr& e, const ExprEnv& env) {
    switch (e->kind) {
    case Expr::Const: return e->value;
    case Expr::Framing: return env.framing_of(e->a);
    case Expr::Lk: return env.lk_of(e->a, e->b);
    case Expr::Neg: return -eval(e->x, env);
    case Expr::Add: return eval(e->x, env) + eval(e->y, env);
    case Expr::Sub: return eval(e->x, env) - eval(e->y, env);
    case Expr::Mul: return eval(e->x, env) * eval(e->y, env);
    case Expr::Pow: {
        long long base = eval(e->x, env), r = 1;
        for (long long i = 0; i < e->value; ++i) r *= base;
        return r;
    }
    }
    fail(ErrorKind::Validation, "corrupt expression");
}

std::string to_string(const ExprPtr& e) {
    switch (e->kind) {
    case Expr::Const:
        return e->value < 0 ? "(" + std::to_string(e->value) + ")" : std::to_string(e->value);
    case Expr::Framing: return "framing(" + e->a + ")";
    case Expr::Lk: return "lk(" + e->a + "," + e->b + ")";
    case Expr::Neg: return "(-" + to_string(e->x) + ")";
    case Expr::Add: return "(" + to_string(e->x) + " + " + to_string(e->y) + ")";
    case Expr::Sub: return "(" + to_string(e->x) + " - " + to_string(e->y) + ")";
    case Expr::Mul: return to_string(e->x) + " * " + to_string(e->y);
    case Expr::Pow: return to_string(e->x) + "^" + std::to_string(e->value);
    }
    return "?";
}

static void collect_names(const ExprPtr& e, std::vector<std::string>& out) {
    if (!e) return;
    if (e->kind == Expr::Framing) out.push_back(e->a);
    if (e->kind == Expr::Lk) {
        out.push_back(e->a);
        out.push_back(e->b);
    }
    collect_names(e->x, out);
    collect_names(e->y, out);
}

std::vector<std::string> referenced_names(const ExprPtr& e) {
    std::vector<std::string> out;
    collect_names(e, out);
    return out;
}

std::vector<std::string> lex_expr(const std::string& text, int lineno) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace((unsigned char)c)) {
            ++i;
        } else if (std::isalnum((unsigned char)c) || c == '_') {
            size_t j = i;
            while (j < text.size() &&
                   (std::isalnum((unsigned char)text[j]) || text[j] == '_'))
                ++j;
            out.push_back(text.substr(i, j - i));
            i = j;
        } else if (c == '=' && i + 1 < text.size() && text[i + 1] == '=') {
            out.push_back("==");
            i += 2;
        } else if (std::string("()+-*^:,=").find(c) != std::string::npos) {
            out.push_back(std::string(1, c));
            ++i;
        } else if (c == '+' || c == '-') {
            ++i; // unreachable, kept for clarity
        } else {
            fail(ErrorKind::Syntax, std::string("unexpected character '") + c + "' in expression",
                 lineno);
        }
    }
    return out;
}

namespace {

struct Parser {
    const std::vector<std::string>& toks;
    size_t& pos;
    int lineno;

    bool at(const std::string& s) const { return pos < toks.size() && toks[pos] == s; }
    std::string next() {
        if (pos >= toks.size()) fail(ErrorKind::Syntax, "unexpected end of expression", lineno);
        return toks[pos++];
    }
    void expect(const std::string& s) {
        if (next() != s) fail(ErrorKind::Syntax, "expected '" + s + "' in expression", lineno);
    }

    ExprPtr atom() {
        std::string tok = next();
        auto e = std::make_shared<Expr>();
        if (tok == "(") {
            ExprPtr inner = sum();
            expect(")");
            return inner;
        }
        if (tok == "-") {
            e->kind = Expr::Neg;
            e->x = atom();
            return e;
        }
        if (tok == "framing" || tok == "lk") {
            e->kind = tok == "lk" ? Expr::Lk : Expr::Framing;
            expect("(");
            e->a = next();
            if (e->kind == Expr::Lk) {
                expect(",");
                e->b = next();
            }
            expect(")");
            return e;
        }
        if (!tok.empty() && (std::isdigit((unsigned char)tok[0]))) {
            e->kind = Expr::Const;
            e->value = parse_int(tok, lineno);
            return e;
        }
        fail(ErrorKind::Syntax, "unexpected token '" + tok + "' in expression", lineno);
    }

    ExprPtr power() {
        ExprPtr base = atom();
        if (at("^")) {
            ++pos;
            auto e = std::make_shared<Expr>();
            e->kind = Expr::Pow;
            e->x = base;
            e->value = parse_int(next(), lineno);
            if (e->value < 0) fail(ErrorKind::Syntax, "negative exponent", lineno);
            return e;
        }
        return base;
    }

    ExprPtr product() {
        ExprPtr lhs = power();
        while (at("*")) {
            ++pos;
            auto e = std::make_shared<Expr>();
            e->kind = Expr::Mul;
            e->x = lhs;
            e->y = power();
            lhs = e;
        }
        return lhs;
    }

    ExprPtr sum() {
        ExprPtr lhs = product();
        while (at("+") || at("-")) {
            auto e = std::make_shared<Expr>();
            e->kind = toks[pos] == "+" ? Expr::Add : Expr::Sub;
            ++pos;
            e->x = lhs;
            e->y = product();
            lhs = e;
        }
        return lhs;
    }
};

} // namespace

ExprPtr parse_expr(const std::vector<std::string>& tokens, size_t& pos, int lineno) {
    Parser p{tokens, pos, lineno};
    return p.sum();
}

} // namespace kirby
