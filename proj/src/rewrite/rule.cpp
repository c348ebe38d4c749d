#include "rewrite/rule.hpp"

#include <map>
#include <set>
#include <sstream>

#include "core/error.hpp"
#include "core/text.hpp"

namespace kirby {

void validate_rule(const RewriteRule& r) {
    TangleInfo li = analyze_tangle(r.lhs);
    TangleInfo ri = analyze_tangle(r.rhs);
    if (r.lhs.boundary.size() != r.rhs.boundary.size())
        fail(ErrorKind::Validation, "rule '" + r.name + "': boundary mismatch");
    auto owner_name = [](const Tangle& t, const TangleInfo& info, EdgeId e) {
        return t.comps.at(info.owner.at(e)).name;
    };
    for (size_t i = 0; i < r.lhs.boundary.size(); ++i) {
        if (li.stub_is_entry[i] != ri.stub_is_entry[i])
            fail(ErrorKind::Validation,
                 "rule '" + r.name + "': endpoint " + std::to_string(i) +
                     " changes strand direction across the boundary");
        if (owner_name(r.lhs, li, r.lhs.boundary[i]) != owner_name(r.rhs, ri, r.rhs.boundary[i]))
            fail(ErrorKind::Validation,
                 "rule '" + r.name + "': endpoint " + std::to_string(i) +
                     " connects differently named strands");
    }
    // closed components created or deleted need explicit framing actions
    std::set<std::string> lhs_closed, rhs_closed, all_names;
    for (size_t ci = 0; ci < r.lhs.comps.size(); ++ci) {
        all_names.insert(r.lhs.comps[ci].name);
        if (!li.comp_open.empty() && !r.lhs.comps[ci].is_loop && li.comp_open[ci]) continue;
        lhs_closed.insert(r.lhs.comps[ci].name);
    }
    for (size_t ci = 0; ci < r.rhs.comps.size(); ++ci) {
        all_names.insert(r.rhs.comps[ci].name);
        if (!ri.comp_open.empty() && !r.rhs.comps[ci].is_loop && ri.comp_open[ci]) continue;
        rhs_closed.insert(r.rhs.comps[ci].name);
    }
    std::set<std::string> deleted, created;
    for (auto& a : r.actions) {
        if (a.kind == Action::Delete) deleted.insert(a.comp);
        if (a.kind == Action::Create) created.insert(a.comp);
    }
    for (auto& n : lhs_closed)
        if (!rhs_closed.count(n) && !deleted.count(n))
            fail(ErrorKind::Validation,
                 "rule '" + r.name + "': missing framing action for deleted component '" + n + "'");
    for (auto& n : rhs_closed)
        if (!lhs_closed.count(n) && !created.count(n))
            fail(ErrorKind::Validation,
                 "rule '" + r.name + "': missing framing action for created component '" + n + "'");
    for (auto& a : r.actions) {
        if (a.kind == Action::Delete && !lhs_closed.count(a.comp))
            fail(ErrorKind::Validation, "rule '" + r.name + "': delete of unknown component");
        if (a.kind == Action::Create && !rhs_closed.count(a.comp))
            fail(ErrorKind::Validation, "rule '" + r.name + "': create of unknown component");
        if (a.kind == Action::AddFraming && !all_names.count(a.comp))
            fail(ErrorKind::Validation,
                 "rule '" + r.name + "': framing update of unknown component '" + a.comp + "'");
    }
}

// -- parsing -----------------------------------------------------------------

namespace {

struct RuleParser {
    std::istringstream in;
    int lineno = 0;
    std::string raw;

    explicit RuleParser(const std::string& text) : in(text) {}

    bool next_line(std::vector<std::string>& toks) {
        std::string line;
        while (std::getline(in, line)) {
            ++lineno;
            raw = strip_comment(line);
            toks = tokenize(raw);
            if (!toks.empty()) return true;
        }
        return false;
    }

    Tangle parse_tangle_block(std::map<std::string, EdgeId>& names) {
        Tangle t;
        auto edge_id = [&](const std::string& n) {
            auto [it, fresh] = names.emplace(n, (EdgeId)names.size());
            return it->second;
        };
        CrossId next_cross = 0;
        std::vector<std::string> toks;
        bool saw_boundary = false;
        while (next_line(toks)) {
            if (toks[0] == "}") {
                if (!saw_boundary)
                    fail(ErrorKind::Syntax, "tangle block missing boundary line", lineno);
                return t;
            }
            if (toks[0] == "x") {
                if (toks.size() != 5) fail(ErrorKind::Syntax, "crossing wants 4 edges", lineno);
                Crossing x;
                for (int s = 0; s < 4; ++s) x.slot[s] = edge_id(toks[1 + s]);
                t.crossings[next_cross++] = x;
            } else if (toks[0] == "comp") {
                if (toks.size() < 5 || toks[3] != ":")
                    fail(ErrorKind::Syntax, "component line: comp <name> <framing|*> : <edges>",
                         lineno);
                TangleComp c;
                c.name = toks[1];
                if (toks[2] == "*")
                    c.framing_any = true;
                else
                    c.framing = parse_int(toks[2], lineno);
                for (size_t i = 4; i < toks.size(); ++i) c.path.push_back(edge_id(toks[i]));
                t.comps.push_back(std::move(c));
            } else if (toks[0] == "loop") {
                if (toks.size() != 5 || toks[3] != "in")
                    fail(ErrorKind::Syntax, "loop line: loop <name> <framing|*> in <region>",
                         lineno);
                TangleComp c;
                c.name = toks[1];
                c.is_loop = true;
                if (toks[2] == "*")
                    c.framing_any = true;
                else
                    c.framing = parse_int(toks[2], lineno);
                c.region = (int)parse_int(toks[4], lineno);
                t.comps.push_back(std::move(c));
            } else if (toks[0] == "boundary") {
                if (toks.size() < 2 || toks[1] != ":")
                    fail(ErrorKind::Syntax, "boundary line: boundary : <edges>", lineno);
                saw_boundary = true;
                for (size_t i = 2; i < toks.size(); ++i) {
                    std::string tok = toks[i];
                    int hint = -1;
                    if (tok.size() > 2 && tok.substr(tok.size() - 2) == ".t") {
                        hint = 0;
                        tok = tok.substr(0, tok.size() - 2);
                    } else if (tok.size() > 2 && tok.substr(tok.size() - 2) == ".h") {
                        hint = 1;
                        tok = tok.substr(0, tok.size() - 2);
                    }
                    t.boundary.push_back(edge_id(tok));
                    t.boundary_end_hint.push_back(hint);
                }
            } else {
                fail(ErrorKind::Syntax, "unexpected '" + toks[0] + "' in tangle block", lineno);
            }
        }
        fail(ErrorKind::Syntax, "unterminated tangle block", lineno);
    }

    Action parse_action(const std::string& text) {
        auto toks = lex_expr(text, lineno);
        size_t pos = 0;
        auto want = [&](const std::string& s) {
            if (pos >= toks.size() || toks[pos] != s)
                fail(ErrorKind::Syntax, "malformed action (expected '" + s + "')", lineno);
            ++pos;
        };
        auto ident = [&]() {
            if (pos >= toks.size()) fail(ErrorKind::Syntax, "malformed action", lineno);
            return toks[pos++];
        };
        Action a;
        std::string head = ident();
        if (head == "delete") {
            a.kind = Action::Delete;
            a.comp = ident();
            want("require");
            want("framing");
            want("==");
            a.expr = parse_expr(toks, pos, lineno);
        } else if (head == "create") {
            a.kind = Action::Create;
            a.comp = ident();
            want("framing");
            want("=");
            a.expr = parse_expr(toks, pos, lineno);
        } else if (head == "framing") {
            a.kind = Action::AddFraming;
            want("(");
            a.comp = ident();
            want(")");
            std::string op = ident();
            a.sign = op == "+" ? 1 : (op == "-" ? -1 : 0);
            if (a.sign == 0) fail(ErrorKind::Syntax, "expected += or -= in action", lineno);
            want("=");
            a.expr = parse_expr(toks, pos, lineno);
        } else if (head == "foreach") {
            a.kind = Action::ForEach;
            want("comp");
            a.comp = ident();
            want(":");
            want("framing");
            want("(");
            if (ident() != a.comp)
                fail(ErrorKind::Syntax, "foreach must update its loop variable", lineno);
            want(")");
            std::string op = ident();
            a.sign = op == "+" ? 1 : (op == "-" ? -1 : 0);
            if (a.sign == 0) fail(ErrorKind::Syntax, "expected += or -= in action", lineno);
            want("=");
            a.expr = parse_expr(toks, pos, lineno);
        } else {
            fail(ErrorKind::Syntax, "unknown action '" + head + "'", lineno);
        }
        if (pos != toks.size()) fail(ErrorKind::Syntax, "trailing tokens in action", lineno);
        return a;
    }

    std::vector<RewriteRule> run() {
        std::vector<RewriteRule> rules;
        std::vector<std::string> toks;
        while (next_line(toks)) {
            if (toks.size() != 3 || toks[0] != "rule" || toks[2] != "{")
                fail(ErrorKind::Syntax, "expected 'rule <name> {'", lineno);
            RewriteRule r;
            r.name = toks[1];
            bool saw_lhs = false, saw_rhs = false, saw_kind = false, closed = false;
            std::map<std::string, EdgeId> lhs_names, rhs_names;
            while (next_line(toks)) {
                if (toks[0] == "}") {
                    closed = true;
                    break;
                }
                if (toks[0] == "kind" && toks.size() >= 3 && toks[1] == ":") {
                    r.kind = MoveKind::parse({toks.begin() + 2, toks.end()}, lineno);
                    saw_kind = true;
                } else if (toks[0] == "oriented") {
                    r.oriented = true;
                } else if (toks[0] == "lhs" && toks.size() == 2 && toks[1] == "{") {
                    r.lhs = parse_tangle_block(lhs_names);
                    saw_lhs = true;
                } else if (toks[0] == "rhs" && toks.size() == 2 && toks[1] == "{") {
                    r.rhs = parse_tangle_block(rhs_names);
                    saw_rhs = true;
                } else if (toks[0] == "action" && toks.size() >= 2 && toks[1] == ":") {
                    auto colon = raw.find(':');
                    r.actions.push_back(parse_action(raw.substr(colon + 1)));
                } else {
                    fail(ErrorKind::Syntax, "unexpected '" + toks[0] + "' in rule block", lineno);
                }
            }
            if (!closed) fail(ErrorKind::Syntax, "unterminated rule block", lineno);
            if (!saw_kind || !saw_lhs || !saw_rhs)
                fail(ErrorKind::Syntax, "rule '" + r.name + "' needs kind, lhs and rhs", lineno);
            validate_rule(r);
            rules.push_back(std::move(r));
        }
        return rules;
    }
};

std::string action_text(const Action& a) {
    switch (a.kind) {
    case Action::Delete: return "delete " + a.comp + " require framing == " + to_string(a.expr);
    case Action::Create: return "create " + a.comp + " framing = " + to_string(a.expr);
    case Action::AddFraming:
        return "framing(" + a.comp + ") " + (a.sign > 0 ? "+= " : "-= ") + to_string(a.expr);
    case Action::ForEach:
        return "foreach comp " + a.comp + " : framing(" + a.comp + ") " +
               (a.sign > 0 ? "+= " : "-= ") + to_string(a.expr);
    }
    return "?";
}

} // namespace

std::vector<RewriteRule> parse_rules(const std::string& text) { return RuleParser(text).run(); }

std::string serialize_rule(const RewriteRule& r) {
    std::ostringstream os;
    os << "rule " << r.name << " {\n";
    os << "  kind: " << r.kind.to_string() << "\n";
    if (r.oriented) os << "  oriented\n";
    std::istringstream lhs(serialize_tangle(r.lhs, "lhs")), rhs(serialize_tangle(r.rhs, "rhs"));
    std::string line;
    while (std::getline(lhs, line)) os << "  " << line << "\n";
    while (std::getline(rhs, line)) os << "  " << line << "\n";
    for (auto& a : r.actions) os << "  action: " << action_text(a) << "\n";
    os << "}\n";
    return os.str();
}

std::string serialize_rules(const std::vector<RewriteRule>& rules) {
    std::string out;
    for (auto& r : rules) {
        if (!out.empty()) out += "\n";
        out += serialize_rule(r);
    }
    return out;
}

RewriteRule inverse(const RewriteRule& r) {
    RewriteRule inv;
    if (r.name.size() > 3 && r.name.substr(r.name.size() - 3) == "^-1")
        inv.name = r.name.substr(0, r.name.size() - 3);
    else
        inv.name = r.name + "^-1";
    inv.oriented = r.oriented;
    inv.lhs = r.rhs;
    inv.rhs = r.lhs;
    inv.kind = r.kind;
    switch (r.kind.tag) {
    case MoveKind::Reidemeister1P: inv.kind.tag = MoveKind::Reidemeister1M; break;
    case MoveKind::Reidemeister1M: inv.kind.tag = MoveKind::Reidemeister1P; break;
    case MoveKind::BlowUp: inv.kind.tag = MoveKind::BlowDown; break;
    case MoveKind::BlowDown: inv.kind.tag = MoveKind::BlowUp; break;
    case MoveKind::HandleSlide: inv.kind.sign = -r.kind.sign; break;
    case MoveKind::Catalog: inv.kind.name = inv.name; break;
    default: break;
    }
    for (auto& a : r.actions) {
        Action b = a;
        if (a.kind == Action::Delete)
            b.kind = Action::Create;
        else if (a.kind == Action::Create)
            b.kind = Action::Delete;
        else
            b.sign = -a.sign;
        inv.actions.push_back(std::move(b));
    }
    return inv;
}

} // namespace kirby
