#include <iostream>
#include "catalog/catalog.hpp"
#include "core/diagram.hpp"
#include "expand/expand.hpp"
#include "invariants/invariants.hpp"
#include "rewrite/sites.hpp"
using namespace kirby;

static void show(const Diagram& d, const char* tag) {
    std::cout << "== " << tag << " ==\n" << serialize(d);
    try {
        LinkingData lk = linking_matrix(d);
        for (size_t i = 0; i < lk.A.rows; ++i) {
            std::cout << lk.names[i] << ":";
            for (size_t j = 0; j < lk.A.cols; ++j) std::cout << " " << lk.A.at(i, j);
            std::cout << "\n";
        }
    } catch (const Error& e) { std::cout << "analyze fail: " << e.what() << "\n"; }
}

int main(int argc, char** argv) {
    std::cout.setf(std::ios::unitbuf);
    std::string mode = argc > 1 ? argv[1] : "";
    if (mode == "host") {
        int n = std::stoi(argv[2]); int eps = std::stoi(argv[3]);
        RewriteRule r = fenn_rourke_rule(n, eps);
        std::cout << "lhs comps:\n";
        for (auto& c : r.lhs.comps) {
            std::cout << c.name << (c.is_loop ? " loop" : "") << (c.open ? " open" : "") << " path:";
            for (auto e : c.path) std::cout << " " << e;
            std::cout << "\n";
        }
        std::cout << "boundary:";
        for (auto e : r.lhs.boundary) std::cout << " " << e;
        std::cout << "\ncrossings:\n";
        for (auto& [cid, cr] : r.lhs.crossings) {
            std::cout << cid << ":";
            for (auto e : cr.slot) std::cout << " " << e;
            std::cout << "\n";
        }
        Diagram d = standard_host(n, eps);
        show(d, "host");
    } else if (mode == "hs2oracle") {
        int phi = std::stoi(argv[2]); int sgn = std::stoi(argv[3]);
        Diagram d = standard_host(1, phi);
        show(d, "before");
        // free 0-framed loop to slide over K
        ScriptBuilder b; b.d = d;
        b.emit("bd0_pos^-1", 0);
        std::string L;
        for (auto& l : b.d.loops) if (l.name != "K") L = l.name;
        b.d.set_component_framing(b.d.component_index(L), 0); // neutral slid strand
        Diagram out = handle_slide(b.d, L, "K", sgn);
        show(out, "after");
        DiagramInfo oi = analyze(out);
        for (size_t f = 0; f < oi.faces.size(); ++f) {
            std::cout << "face " << f << ":";
            for (auto& dt : oi.faces[f])
                std::cout << " c" << dt.cross << ".e"
                          << out.crossings[dt.cross].slot[dt.slot];
            std::cout << "\n";
        }
    } else if (mode == "hs2test") {
        int phi = std::stoi(argv[2]);
        ScriptBuilder b;
        b.d = standard_host(1, phi);
        b.emit("bd0_pos^-1", 0);
        std::string L;
        for (auto& l : b.d.loops) if (l.name != "K") L = l.name;
        // give the loop an edge so it can serve as the slid strand
        {
            RewriteRule r = catalog_rule("r1_plus_loop");
            auto ss = find_sites(b.d, r);
            for (auto& s : ss) {
                if (s.loop_map.count("a") && b.d.loops[s.loop_map.at("a")].name == L) {
                    b.d = apply_rule(b.d, r, s);
                    break;
                }
            }
        }
        show(b.d, "host");
        for (std::string rn : {"hs2p_pos", "hs2p_neg", "hs2m_pos", "hs2m_neg"}) {
            RewriteRule r = catalog_rule(rn);
            auto ss = find_sites(b.d, r);
            std::cout << rn << ": " << ss.size() << " sites\n";
            int ok = 0, rej = 0;
            for (auto& s : ss) {
                try {
                    Diagram out = apply_rule(b.d, r, s);
                    if (ok++ == 0) show(out, (rn + " first success").c_str());
                } catch (const Error& e) { ++rej; }
            }
            std::cout << rn << ": applied " << ok << ", rejected " << rej << "\n";
        }
    } else if (mode == "tail") {
        Diagram d = replay(Diagram{}, expand_hopf_creation()).first;
        Diagram dd = replay(d, expand_hopf_creation()).first; // second pair alongside
        show(dd, "chain2+pair");
        for (const char* op : {"hs1_pos", "hs1_neg"}) {
            RewriteRule r = catalog_rule(op);
            auto sites = find_sites(dd, r);
            std::cout << op << ": " << sites.size() << " sites\n";
            for (size_t i = 0; i < sites.size(); ++i) {
                try {
                    Diagram nd = apply_rule(dd, r, sites[i]);
                    LinkingData lk = linking_matrix(nd);
                    std::cout << "  site " << i << " ok:";
                    for (size_t a = 0; a < lk.A.rows; ++a)
                        for (size_t b = a + 1; b < lk.A.cols; ++b)
                            if (lk.A.at(a, b) != 0)
                                std::cout << " " << lk.names[a] << "-" << lk.names[b] << "=" << lk.A.at(a, b);
                    std::cout << "\n";
                } catch (const Error& e) {
                    std::cout << "  site " << i << " FAIL: " << e.what() << "\n";
                }
            }
        }
    }
    return 0;
}
