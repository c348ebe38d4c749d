#include "catalog/catalog.hpp"

#include <sstream>

#include "core/error.hpp"
#include "rewrite/sites.hpp"

namespace kirby {

namespace {

std::string strand_name(int i) {
    if (i >= 26) fail(ErrorKind::Unsupported, "strand count beyond naming range");
    return std::string(1, char('a' + i));
}

} // namespace

Tangle twist_box(int n, int eps) {
    if (n < 0) fail(ErrorKind::Validation, "twist_box wants n >= 0");
    if (eps != 1 && eps != -1) fail(ErrorKind::Validation, "twist_box wants eps = +-1");
    Tangle t;
    EdgeId next = 0;
    CrossId next_cross = 0;
    std::vector<EdgeId> west(n), cur(n);
    std::vector<int> strand_at(n);
    std::vector<std::vector<EdgeId>> path(n);
    for (int i = 0; i < n; ++i) {
        west[i] = cur[i] = next++;
        strand_at[i] = i;
        path[i] = {west[i]};
    }
    // (s1 s2 ... s(n-1))^n, strands west to east, position 0 on top.  A
    // generator crosses positions i and i+1; the top strand passes under when
    // eps = +1 and over when eps = -1, and moves to position i+1 either way.
    for (int round = 0; round < n; ++round) {
        for (int i = 0; i + 1 < n; ++i) {
            EdgeId t_in = cur[i], b_in = cur[i + 1];
            EdgeId t_out = next++, b_out = next++;
            Crossing x;
            if (eps > 0)
                x.slot = {t_in, b_in, t_out, b_out};
            else
                x.slot = {b_in, t_out, b_out, t_in};
            t.crossings[next_cross++] = x;
            path[strand_at[i]].push_back(t_out);
            path[strand_at[i + 1]].push_back(b_out);
            std::swap(strand_at[i], strand_at[i + 1]);
            cur[i] = b_out;
            cur[i + 1] = t_out;
        }
    }
    for (int s = 0; s < n; ++s) {
        TangleComp c;
        c.name = strand_name(s);
        c.framing_any = true;
        c.path = path[s];
        t.comps.push_back(c);
    }
    for (int i = 0; i < n; ++i) t.boundary.push_back(west[i]);
    for (int i = n - 1; i >= 0; --i) t.boundary.push_back(cur[i]);
    return t;
}

RewriteRule fenn_rourke_rule(int n, int eps) {
    if (n < 0) fail(ErrorKind::Validation, "fenn_rourke_rule wants n >= 0");
    if (eps != 1 && eps != -1) fail(ErrorKind::Validation, "fenn_rourke_rule wants eps = +-1");
    std::ostringstream os;
    std::string se = eps > 0 ? "1" : "-1";
    os << "rule bd" << n << (eps > 0 ? "_pos" : "_neg") << " {\n";
    os << "  kind: blow_down " << (eps > 0 ? "+1" : "-1") << "\n";
    os << "  lhs {\n";
    if (n == 0) {
        os << "    loop K " << se << " in 0\n";
        os << "    boundary :\n";
    } else {
        // K is a circle crossed by strand i at a west station W_i (strand
        // under) and an east station E_i (strand over); stations in cyclic
        // order around K are W_1 .. W_n, E_n .. E_1, with K edge k<j> running
        // from station j to station j+1.
        for (int i = 1; i <= n; ++i) {
            std::string L = strand_name(i - 1);
            int w = i - 1, e = 2 * n - i;
            os << "    x " << L << "1 k" << w << " " << L << "2 k" << (w + 2 * n - 1) % (2 * n)
               << "\n";
            os << "    x k" << e - 1 << " " << L << "3 k" << e << " " << L << "2\n";
        }
        for (int i = 0; i < n; ++i) {
            std::string L = strand_name(i);
            os << "    comp " << L << " * : " << L << "1 " << L << "2 " << L << "3\n";
        }
        os << "    comp K " << se << " :";
        for (int j = 0; j < 2 * n; ++j) os << " k" << j;
        os << "\n    boundary :";
        for (int i = 0; i < n; ++i) os << " " << strand_name(i) << "1";
        for (int i = n - 1; i >= 0; --i) os << " " << strand_name(i) << "3";
        os << "\n";
    }
    os << "  }\n";
    std::istringstream rhs(serialize_tangle(twist_box(n, -eps), "rhs"));
    std::string line;
    while (std::getline(rhs, line)) os << "  " << line << "\n";
    os << "  action: delete K require framing == " << se << "\n";
    os << "  action: foreach comp each : framing(each) -= " << se << " * lk(each,K)^2\n";
    os << "}\n";
    auto rules = parse_rules(os.str());
    return rules.at(0);
}

const std::vector<RewriteRule>& fig3_rules() {
    static const std::vector<RewriteRule> rules = parse_rules(fig3_text());
    return rules;
}

const std::vector<RewriteRule>& reidemeister_rules() {
    static const std::vector<RewriteRule> rules = parse_rules(reidemeister_text());
    return rules;
}

std::vector<RewriteRule> full_catalog() {
    std::vector<RewriteRule> all = fig3_rules();
    for (const auto& r : reidemeister_rules()) all.push_back(r);
    return all;
}

RewriteRule catalog_rule(const std::string& name) {
    std::string base = name;
    bool inv = false;
    if (base.size() > 3 && base.substr(base.size() - 3) == "^-1") {
        base = base.substr(0, base.size() - 3);
        inv = true;
    }
    for (const auto& r : full_catalog())
        if (r.name == base) return inv ? inverse(r) : r;
    fail(ErrorKind::Validation, "no catalog rule named '" + base + "'");
}

Diagram blow_down(const Diagram& d, const std::string& k, int max_n) {
    int ki = -1;
    bool is_loop = false;
    for (size_t i = 0; i < d.components.size(); ++i)
        if (d.components[i].name == k) ki = (int)i;
    for (size_t i = 0; i < d.loops.size(); ++i)
        if (d.loops[i].name == k) ki = (int)i, is_loop = true;
    if (ki < 0) fail(ErrorKind::Validation, "no component named '" + k + "'");
    long long fr = is_loop ? d.loops[ki].framing : d.components[ki].framing;
    if (fr != 1 && fr != -1)
        fail(ErrorKind::Validation, "blow-down wants framing +-1, '" + k + "' has " +
                                        std::to_string(fr));
    int eps = (int)fr;
    // In blow-down position k crosses each of its n strands twice, running
    // under exactly once per strand; each crossing has one under-in slot.
    int n = 0;
    DiagramInfo info = analyze(d);
    if (!is_loop)
        for (auto& [c, x] : d.crossings)
            if (info.edge_comp.at(x.slot[0]) == ki) ++n;
    if (n > max_n)
        fail(ErrorKind::Unsupported,
             "blow-down pattern search capped at n=" + std::to_string(max_n));
    RewriteRule r = fenn_rourke_rule(n, eps);
    TangleInfo li = analyze_tangle(r.lhs);
    int lhs_k = -1;
    for (size_t i = 0; i < r.lhs.comps.size(); ++i)
        if (r.lhs.comps[i].name == "K") lhs_k = (int)i;
    for (const Site& s : find_sites(d, r)) {
        bool hits = false;
        if (n == 0) {
            auto it = s.loop_map.find("K");
            hits = it != s.loop_map.end() && is_loop && d.loops[it->second].name == k;
        } else {
            for (auto& [le, he] : s.edge_map)
                if (li.comp_of_edge(le) == lhs_k && !is_loop && info.edge_comp.at(he) == ki)
                    hits = true;
        }
        if (hits) return apply_rule(d, r, s);
    }
    fail(ErrorKind::Validation, "'" + k + "' is not in blow-down position");
}

} // namespace kirby
