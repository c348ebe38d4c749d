#pragma once

#include <string>
#include <vector>

#include "invariants/invariants.hpp"
#include "rewrite/expr.hpp"
#include "rewrite/tangle.hpp"

namespace kirby {

// A framing action attached to a rule.  Delete checks the required framing
// of a closed component it removes; Create sets the framing of a component
// the rule introduces; AddFraming shifts a named component's framing;
// ForEach shifts every surviving component, binding `comp` as the loop
// variable inside the expression.
struct Action {
    enum Kind { Delete, Create, AddFraming, ForEach } kind;
    std::string comp;
    int sign = 1; // +1 for +=, -1 for -=
    ExprPtr expr;
};

struct RewriteRule {
    std::string name;
    MoveKind kind;
    bool oriented = false; // matched only with the written orientations
    Tangle lhs, rhs;
    std::vector<Action> actions;

    int strand_count() const { return (int)lhs.boundary.size() / 2; }
};

// Throws Error unless the rule is well-formed: both tangles analyze, the
// boundaries correspond position by position (size, entry/exit role, strand
// name), and every created/deleted closed component has its framing action.
void validate_rule(const RewriteRule& r);

std::vector<RewriteRule> parse_rules(const std::string& text);
std::string serialize_rule(const RewriteRule& r);
std::string serialize_rules(const std::vector<RewriteRule>& rules);

RewriteRule inverse(const RewriteRule& r);

} // namespace kirby
