#include "expand/expand.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "catalog/catalog.hpp"
#include "core/text.hpp"
#include "rewrite/sites.hpp"

namespace kirby {

namespace {

bool is_rule_op(const std::string& op) { return op != "slide" && op != "blowdown"; }

} // namespace

// Script text ---------------------------------------------------------------

std::string serialize_script(const MoveScript& s) {
    std::ostringstream os;
    os << "alphabet:";
    for (const auto& k : s.alphabet) os << " " << k;
    os << "\n";
    for (size_t i = 0; i < s.steps.size(); ++i) {
        const MoveStep& st = s.steps[i];
        os << "step " << (i + 1) << ": " << st.op;
        if (st.op == "slide") {
            os << " site " << st.comp_i << " over " << st.comp_j << " sign "
               << (st.sign > 0 ? "+1" : "-1");
            if (!st.band.empty()) {
                os << " band";
                for (EdgeId e : st.band) os << " " << e;
            }
        } else if (st.op == "blowdown") {
            os << " site " << st.comp_i;
        } else {
            os << " site " << st.site;
        }
        os << "\n";
    }
    return os.str();
}

MoveScript parse_script(const std::string& text) {
    MoveScript s;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    bool saw_alphabet = false;
    size_t next_step = 1;
    while (std::getline(is, line)) {
        ++lineno;
        auto toks = tokenize(strip_comment(line));
        if (toks.empty()) continue;
        if (toks[0] == "alphabet") {
            if (saw_alphabet || toks.size() < 2 || toks[1] != ":")
                fail(ErrorKind::Syntax, "malformed alphabet header", lineno);
            saw_alphabet = true;
            for (size_t i = 2; i < toks.size(); ++i) s.alphabet.push_back(toks[i]);
            continue;
        }
        if (toks[0] != "step")
            fail(ErrorKind::Syntax, "expected 'step', got '" + toks[0] + "'", lineno);
        if (!saw_alphabet) fail(ErrorKind::Syntax, "step before alphabet header", lineno);
        if (toks.size() < 5 || toks[2] != ":")
            fail(ErrorKind::Syntax, "malformed step line", lineno);
        if (parse_int(toks[1], lineno) != (long long)next_step)
            fail(ErrorKind::Syntax, "steps must be numbered consecutively from 1", lineno);
        ++next_step;
        MoveStep st;
        st.op = toks[3];
        size_t i = 4;
        if (i >= toks.size() || toks[i] != "site")
            fail(ErrorKind::Syntax, "step needs a site locator", lineno);
        ++i;
        if (st.op == "slide") {
            if (i + 4 >= toks.size() || toks[i + 1] != "over" || toks[i + 3] != "sign")
                fail(ErrorKind::Syntax, "slide wants: site <i> over <j> sign <s>", lineno);
            st.comp_i = toks[i];
            st.comp_j = toks[i + 2];
            st.sign = (int)parse_int(toks[i + 4], lineno);
            i += 5;
            if (i < toks.size()) {
                if (toks[i] != "band") fail(ErrorKind::Syntax, "unexpected slide argument", lineno);
                for (++i; i < toks.size(); ++i)
                    st.band.push_back((EdgeId)parse_int(toks[i], lineno));
            }
        } else if (st.op == "blowdown") {
            if (i >= toks.size()) fail(ErrorKind::Syntax, "blowdown wants a component", lineno);
            st.comp_i = toks[i++];
        } else {
            if (i >= toks.size()) fail(ErrorKind::Syntax, "rule step wants a match index", lineno);
            st.site = (int)parse_int(toks[i++], lineno);
        }
        if (i != toks.size()) fail(ErrorKind::Syntax, "trailing tokens on step line", lineno);
        s.steps.push_back(st);
    }
    if (!saw_alphabet) fail(ErrorKind::Syntax, "script lacks an alphabet header");
    return s;
}

// Replay ---------------------------------------------------------------------

std::string StepLog::to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : steps) {
        nlohmann::json e;
        e["op"] = r.op;
        e["names"] = r.lk.names;
        nlohmann::json rows = nlohmann::json::array();
        for (size_t i = 0; i < r.lk.A.rows; ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (size_t k = 0; k < r.lk.A.cols; ++k) row.push_back(r.lk.A.at(i, k).str());
            rows.push_back(row);
        }
        e["linking_matrix"] = rows;
        nlohmann::json tor = nlohmann::json::array();
        for (const auto& t : r.h1.torsion) tor.push_back(t.str());
        e["h1"] = {{"rank", r.h1.rank}, {"torsion", tor}};
        e["det"] = r.det.str();
        e["signature"] = r.sig;
        j.push_back(e);
    }
    return j.dump(2);
}

Diagram replay(const Diagram& d, const MoveScript& s, StepLog& log) {
    std::set<std::string> allowed(s.alphabet.begin(), s.alphabet.end());
    Diagram cur = d;
    for (size_t i = 0; i < s.steps.size(); ++i) {
        const MoveStep& st = s.steps[i];
        std::string where = "step " + std::to_string(i + 1) + " (" + st.op + "): ";
        if (!allowed.count(st.op))
            fail(ErrorKind::Validation, where + "op not in the script alphabet");
        try {
            if (st.op == "slide") {
                cur = handle_slide(cur, st.comp_i, st.comp_j, st.sign, st.band);
            } else if (st.op == "blowdown") {
                cur = blow_down(cur, st.comp_i);
            } else {
                RewriteRule r = catalog_rule(st.op);
                auto sites = find_sites(cur, r);
                if (st.site < 0 || st.site >= (int)sites.size())
                    fail(ErrorKind::Site, "site index " + std::to_string(st.site) +
                                              " out of range (found " +
                                              std::to_string(sites.size()) + ")");
                cur = apply_rule(cur, r, sites[st.site]);
            }
            ValidationReport rep = validate(cur);
            if (!rep.ok()) fail(ErrorKind::Validation, rep.to_string());
        } catch (const Error& e) {
            throw Error(e.kind, where + e.what(), e.line, e.col);
        }
        StepRecord rec;
        rec.op = st.op;
        rec.lk = linking_matrix(cur);
        rec.h1 = first_homology(rec.lk.A);
        rec.det = determinant(rec.lk.A);
        rec.sig = signature(rec.lk.A);
        log.steps.push_back(std::move(rec));
    }
    return cur;
}

std::pair<Diagram, StepLog> replay(const Diagram& d, const MoveScript& s) {
    StepLog log;
    Diagram out = replay(d, s, log);
    return {std::move(out), std::move(log)};
}

// Hosts ----------------------------------------------------------------------

// Closes every open strand of a rule lhs into a circle around the outside
// of the disc; single-edge strands become crossingless loops.
static Diagram close_tangle(const Tangle& t) {
    Diagram d;
    d.crossings = t.crossings;
    std::map<EdgeId, EdgeId> merged;
    for (const auto& c : t.comps) {
        if (c.is_loop) {
            d.loops.push_back({c.name, c.framing, 0});
            continue;
        }
        bool open = c.open ||
                    (!c.path.empty() && t.boundary.end() != std::find(t.boundary.begin(),
                                                                      t.boundary.end(),
                                                                      c.path.front()));
        if (!open) {
            d.components.push_back({c.name, c.framing, c.path});
            continue;
        }
        if (c.path.size() == 1) {
            d.loops.push_back({c.name, c.framing, 0});
            continue;
        }
        std::vector<EdgeId> cyc(c.path.begin(), c.path.end() - 1);
        merged[c.path.back()] = c.path.front();
        d.components.push_back({c.name, c.framing, cyc});
    }
    EdgeId maxe = 0;
    CrossId maxc = 0;
    for (auto& [cid, cr] : d.crossings) {
        maxc = std::max(maxc, cid);
        for (auto& e : cr.slot) {
            if (auto it = merged.find(e); it != merged.end()) e = it->second;
            maxe = std::max(maxe, e);
        }
    }
    d.next_edge = maxe + 1;
    d.next_cross = maxc + 1;
    return d;
}

Diagram standard_host(int n, int eps) {
    if (n < 0) fail(ErrorKind::Unsupported, "standard_host wants n >= 0");
    RewriteRule r = fenn_rourke_rule(n, eps);
    Tangle lhs = r.lhs;
    for (auto& c : lhs.comps) {
        if (c.framing_any) {
            c.framing_any = false;
            c.framing = 0;
        }
    }
    Diagram d = close_tangle(lhs);
    d.name = "standard_host_" + std::to_string(n) + (eps > 0 ? "_pos" : "_neg");
    analyze(d); // sanity: throws on a defective construction
    return d;
}

// Builder --------------------------------------------------------------------

void ScriptBuilder::emit(const std::string& op, int site) {
    RewriteRule r = catalog_rule(op);
    auto sites = find_sites(d, r);
    d = apply_rule(d, r, sites.at(site));
    MoveStep st;
    st.op = op;
    st.site = site;
    s.steps.push_back(st);
}

int ScriptBuilder::emit_where(const std::string& op,
                              const std::function<bool(const Site&, const Diagram&)>& pick) {
    RewriteRule r = catalog_rule(op);
    auto sites = find_sites(d, r);
    for (size_t i = 0; i < sites.size(); ++i) {
        Diagram nd;
        try {
            nd = apply_rule(d, r, sites[i]);
        } catch (const Error&) {
            continue;
        }
        if (!pick(sites[i], nd)) continue;
        d = std::move(nd);
        MoveStep st;
        st.op = op;
        st.site = (int)i;
        s.steps.push_back(st);
        return (int)i;
    }
    fail(ErrorKind::Site, "no admissible site for '" + op + "' during script generation");
}

void ScriptBuilder::finish_alphabet() {
    std::set<std::string> seen;
    for (const auto& st : s.steps)
        if (seen.insert(st.op).second) s.alphabet.push_back(st.op);
}

namespace {

std::set<std::string> comp_names(const Diagram& d) {
    std::set<std::string> out;
    for (const auto& c : d.components) out.insert(c.name);
    for (const auto& l : d.loops) out.insert(l.name);
    return out;
}

long long lk_of(const Diagram& d, const std::string& a, const std::string& b) {
    return linking_number(d, a, b);
}

// Linking matrix as a name-keyed map (framings on the diagonal), so
// predicates can compare across component insertions and deletions.
std::map<std::pair<std::string, std::string>, Int> lk_map(const Diagram& d) {
    LinkingData l = linking_matrix(d);
    std::map<std::pair<std::string, std::string>, Int> m;
    for (size_t i = 0; i < l.A.rows; ++i)
        for (size_t j = i; j < l.A.cols; ++j)
            m[{std::min(l.names[i], l.names[j]), std::max(l.names[i], l.names[j])}] =
                l.A.at(i, j);
    return m;
}

// True iff `after` differs from `before` exactly by the given entry deltas
// (name pairs; use equal names for framings) and the removal of `gone`.
bool matrix_delta_is(const std::map<std::pair<std::string, std::string>, Int>& before,
                     const Diagram& after,
                     const std::map<std::pair<std::string, std::string>, long long>& deltas,
                     const std::set<std::string>& gone = {}) {
    auto want = before;
    for (auto& [k, v] : deltas) {
        auto key = std::make_pair(std::min(k.first, k.second), std::max(k.first, k.second));
        want[key] += v;
    }
    for (auto it = want.begin(); it != want.end();) {
        if (gone.count(it->first.first) || gone.count(it->first.second))
            it = want.erase(it);
        else
            ++it;
    }
    return lk_map(after) == want;
}

// True iff some dart on face `f` of `d` belongs to an edge of component
// `name`.
bool face_touches_comp(const Diagram& d, const DiagramInfo& info, int f, const std::string& name) {
    if (f < 0 || f >= (int)info.faces.size()) return false;
    int want = d.component_index(name);
    for (const Dart& dt : info.faces[f]) {
        EdgeId e = d.crossings.at(dt.cross).slot[dt.slot];
        if (info.edge_comp.at(e) == want) return true;
    }
    return false;
}

} // namespace

std::array<std::string, 2> emit_hopf_pair(ScriptBuilder& b, const std::string& near) {
    std::set<std::string> before = comp_names(b.d);

    // Blow up a +1 loop and kink it so it has edges.
    if (near.empty()) {
        b.emit("bd0_pos^-1", 0);
    } else {
        DiagramInfo info = analyze(b.d);
        b.emit_where("bd0_pos^-1", [&](const Site& s, const Diagram&) {
            return face_touches_comp(b.d, info, s.host_face, near);
        });
    }
    std::string w;
    for (const auto& l : b.d.loops)
        if (!before.count(l.name)) w = l.name;
    b.emit_where("r1_plus_loop", [&](const Site&, const Diagram& nd) {
        for (const auto& c : nd.components)
            if (c.name == w) return true;
        return false;
    });

    // Two -1 meridians around w; the second must sit on w's segment between
    // the first ring's crossings so the pair is nested in blow-down
    // position around w.
    RewriteRule bu1 = catalog_rule("bd1_neg^-1");
    EdgeId arc_edge = bu1.lhs.comps.at(0).path.at(0);
    std::vector<std::string> merids;
    for (int round = 0; round < 2; ++round) {
        DiagramInfo info = analyze(b.d);
        b.emit_where("bd1_neg^-1", [&](const Site& s, const Diagram&) {
            EdgeId he = s.edge_map.at(arc_edge);
            int hc = info.edge_comp.at(he);
            if (hc >= (int)b.d.components.size() || b.d.components[hc].name != w) return false;
            if (round == 1) {
                for (auto& end : info.edge_ends.at(he)) {
                    bool touches = false;
                    for (int sl = 0; sl < 4; ++sl) {
                        int oc = info.edge_comp.at(b.d.crossings.at(end.cross).slot[sl]);
                        touches |= b.d.components[oc].name != w;
                    }
                    if (!touches) return false;
                }
            }
            return true;
        });
        for (const auto& c : b.d.components)
            if (!before.count(c.name) && c.name != w) {
                bool known = false;
                for (auto& m : merids) known |= m == c.name;
                if (!known) merids.push_back(c.name);
            }
    }

    // Undo the kink, then blow w down: the meridians become the Hopf pair.
    size_t want = b.d.crossings.size() - 1;
    b.emit_where("r1_plus^-1",
                 [&](const Site&, const Diagram& nd) { return nd.crossings.size() == want; });
    b.emit_where("bd2_neg", [&](const Site&, const Diagram& nd) {
        return !comp_names(nd).count(w) && lk_of(nd, merids[0], merids[1]) == 1;
    });
    return {merids[0], merids[1]};
}

// Emits one tail segment: a fresh Hopf pair plus the slide hooking the
// chain end `end` onto it.  Returns the new chain end.
std::string emit_tail_segment(ScriptBuilder& b, const std::string& end) {
    auto pair = emit_hopf_pair(b);
    const std::string &p = pair[0], &q = pair[1];
    // Slide the chain end over one pair circle: the end hooks the other.
    for (const char* op : {"hs1_pos", "hs1_neg", "hs1_pos^-1", "hs1_neg^-1"}) {
        RewriteRule r = catalog_rule(op);
        auto sites = find_sites(b.d, r);
        for (size_t i = 0; i < sites.size(); ++i) {
            Diagram nd;
            try {
                nd = apply_rule(b.d, r, sites[i]);
            } catch (const Error&) {
                continue;
            }
            if (!validate(nd).ok()) continue;
            // accept: end hooks q via p, nothing else moves
            if (lk_of(nd, end, q) != 1) continue;
            if (lk_of(nd, end, p) != 0) continue;
            if (lk_of(nd, p, q) != 1) continue;
            b.d = std::move(nd);
            MoveStep st;
            st.op = op;
            st.site = (int)i;
            b.s.steps.push_back(st);
            return p; // chain runs end - q - p, so p is the new free end
        }
    }
    fail(ErrorKind::Site, "no admissible chain-extension slide during script generation");
}

void emit_clasp(ScriptBuilder& b, const std::string& A, const std::string& B, int tau, int hit) {
    if ((tau != 1 && tau != -1) || (hit != 1 && hit != -1))
        fail(ErrorKind::Unsupported, "emit_clasp wants tau, hit in {+1,-1}");
    const std::string hsfx = hit > 0 ? "_pos" : "_neg";

    // Auxiliary Hopf pair in reach of A.
    auto pair = emit_hopf_pair(b, A);
    const std::string &p = pair[0], &q = pair[1];

    // Hook A onto q by sliding it over p (linking matrix gains one A-q unit).
    auto m0 = lk_map(b.d);
    long long sigma = 0;
    bool hooked = false;
    for (const char* op : {"hs1_pos", "hs1_neg", "hs1_pos^-1", "hs1_neg^-1"}) {
        try {
            b.emit_where(op, [&](const Site&, const Diagram& nd) {
                for (long long s : {+1, -1})
                    if (matrix_delta_is(m0, nd, {{{A, q}, s}})) {
                        sigma = s;
                        return true;
                    }
                return false;
            });
            hooked = true;
            break;
        } catch (const Error&) {
        }
    }
    if (!hooked) fail(ErrorKind::Site, "emit_clasp: no hooking slide for '" + A + "'");

    // Charge q's framing to `hit`'s opposite with a throwaway blow-up circle:
    // born split, kinked, slid over p so it claps q, unkinked, blown down.
    std::set<std::string> known = comp_names(b.d);
    {
        DiagramInfo info = analyze(b.d);
        b.emit_where("bd0" + hsfx + "^-1", [&](const Site& s, const Diagram&) {
            return face_touches_comp(b.d, info, s.host_face, q);
        });
    }
    std::string L;
    for (const auto& l : b.d.loops)
        if (!known.count(l.name)) L = l.name;
    b.emit_where("r1_plus_loop", [&](const Site&, const Diagram& nd) {
        for (const auto& c : nd.components)
            if (c.name == L) return true;
        return false;
    });
    m0 = lk_map(b.d);
    bool charged = false;
    for (const char* op : {"hs1_pos", "hs1_neg", "hs1_pos^-1", "hs1_neg^-1"}) {
        try {
            b.emit_where(op, [&](const Site&, const Diagram& nd) {
                return matrix_delta_is(m0, nd, {{{L, q}, +1}}) ||
                       matrix_delta_is(m0, nd, {{{L, q}, -1}});
            });
            charged = true;
            break;
        } catch (const Error&) {
        }
    }
    if (!charged) fail(ErrorKind::Site, "emit_clasp: no charging slide for '" + L + "'");
    size_t want_cross = b.d.crossings.size() - 1;
    m0 = lk_map(b.d);
    b.emit_where("r1_plus^-1", [&](const Site&, const Diagram& nd) {
        return nd.crossings.size() == want_cross && matrix_delta_is(m0, nd, {});
    });
    b.emit_where("bd1" + hsfx, [&](const Site&, const Diagram& nd) {
        return !comp_names(nd).count(L) && matrix_delta_is(m0, nd, {{{q, q}, -hit}}, {L});
    });

    // Blow q down through p and A: p inherits the clasp as a hit-framed
    // circle around A.
    const std::string osfx = hit > 0 ? "_neg" : "_pos"; // q's framing is -hit
    m0 = lk_map(b.d);
    b.emit_where("bd2" + osfx, [&](const Site&, const Diagram& nd) {
        return !comp_names(nd).count(q) &&
               matrix_delta_is(m0, nd,
                               {{{p, p}, hit}, {{A, A}, hit}, {{p, A}, hit * sigma}}, {q});
    });

    // Slide B over the circle p: B wraps A, picking up the clasp and the
    // framing charge.
    m0 = lk_map(b.d);
    bool clasped = false;
    for (const char* op : {"hs1_pos", "hs1_neg", "hs1_pos^-1", "hs1_neg^-1"}) {
        try {
            b.emit_where(op, [&](const Site&, const Diagram& nd) {
                return matrix_delta_is(m0, nd, {{{A, B}, tau}, {{B, B}, hit}});
            });
            clasped = true;
            break;
        } catch (const Error&) {
        }
    }
    if (!clasped) fail(ErrorKind::Site, "emit_clasp: no clasping slide for '" + B + "'");

    // Blow p down off A; the framing charges cancel.
    m0 = lk_map(b.d);
    b.emit_where("bd1" + hsfx, [&](const Site&, const Diagram& nd) {
        return !comp_names(nd).count(p) && matrix_delta_is(m0, nd, {{{A, A}, -hit}}, {p});
    });
}

// Generators -----------------------------------------------------------------

MoveScript expand_hopf_creation() {
    ScriptBuilder b;
    emit_hopf_pair(b);
    b.finish_alphabet();
    return b.s;
}

MoveScript expand_tail(int m) {
    if (m < 0) fail(ErrorKind::Unsupported, "expand_tail wants m >= 0");
    ScriptBuilder b;
    auto pair = emit_hopf_pair(b);
    // The host is the chain itself; the hopf prefix above only rebuilds it
    // so the generated steps see the right site indices.
    size_t prefix = b.s.steps.size();
    std::string end = pair[1];
    for (int k = 0; k < m; ++k) end = emit_tail_segment(b, end);
    MoveScript out;
    out.steps.assign(b.s.steps.begin() + prefix, b.s.steps.end());
    std::set<std::string> seen;
    for (const auto& st : out.steps)
        if (seen.insert(st.op).second) out.alphabet.push_back(st.op);
    return out;
}

MoveScript expand_blowdown(int n, int eps, int bound) {
    if (eps != 1 && eps != -1) fail(ErrorKind::Unsupported, "expand_blowdown wants eps = +-1");
    if (n < 0 || n > bound)
        fail(ErrorKind::Unsupported, "expand_blowdown: n outside configured bound");
    std::string sfx = eps > 0 ? "_pos" : "_neg";
    if (n <= 2) {
        MoveScript s;
        s.alphabet = {"bd" + std::to_string(n) + sfx};
        MoveStep st;
        st.op = s.alphabet[0];
        st.site = 0;
        s.steps.push_back(st);
        return s;
    }
    fail(ErrorKind::Unsupported, "expand_blowdown: n > 2 not yet wired");
}

Diagram slide_host(const std::string& rule) {
    (void)rule;
    fail(ErrorKind::Unsupported, "slide_host not yet wired");
}

MoveScript expand_handle_slide(const std::string& rule) {
    (void)rule;
    fail(ErrorKind::Unsupported, "expand_handle_slide not yet wired");
}

} // namespace kirby
