#include "catalog/catalog.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <vector>

#include "invariants/invariants.hpp"

namespace kirby {

namespace {

struct Ends {
    Dart tail, head;
};

// Mutable surgery state.  Edges are primary: every edge records the two
// darts it occupies, and crossing slot arrays are derived at assembly time.
struct Surgery {
    std::map<EdgeId, Ends> inc;
    std::set<CrossId> crossings;
    CrossId next_cross = 0;
    EdgeId next_edge = 0;

    CrossId new_cross() {
        CrossId c = next_cross++;
        crossings.insert(c);
        return c;
    }
    EdgeId new_edge() { return next_edge++; }
};

Surgery from_diagram(const Diagram& d, const DiagramInfo& info) {
    Surgery s;
    s.next_cross = d.next_cross;
    s.next_edge = d.next_edge;
    for (auto& [c, cr] : d.crossings) {
        (void)cr;
        s.crossings.insert(c);
    }
    for (auto& [e, h] : info.head) s.inc[e] = Ends{info.tail.at(e), h};
    return s;
}

// The strand entering a crossing at `slot` leaves at the returned slot.
int exit_slot(int s) { return s == 0 ? 2 : (s == 1 ? 3 : 1); }

std::vector<EdgeId> trace_cycle(const Surgery& s, EdgeId seed) {
    std::map<Dart, EdgeId> tail_at;
    for (auto& [e, en] : s.inc) tail_at[en.tail] = e;
    std::vector<EdgeId> cycle;
    EdgeId e = seed;
    do {
        cycle.push_back(e);
        Dart h = s.inc.at(e).head;
        auto it = tail_at.find(Dart{h.cross, exit_slot(h.slot)});
        if (it == tail_at.end()) fail(ErrorKind::Validation, "slide produced a broken strand");
        e = it->second;
    } while (e != seed && cycle.size() <= s.inc.size());
    if (e != seed) fail(ErrorKind::Validation, "slide produced a non-closing strand");
    return cycle;
}

struct DoubleResult {
    std::map<EdgeId, EdgeId> par; // edge of j -> parallel copy (on its left)
    std::map<Dart, Dart> dmap;    // dart of a replaced crossing -> new dart
};

// Replaces every crossing met by component jj with a grid of parallel
// crossings so that each edge e of jj gains a copy par[e] running parallel
// on its left.  The copy inherits every over/under relation blackboard
// style; a self-crossing of jj becomes a 2x2 grid.  All other edges keep
// their ids (their endpoints may move onto grid crossings).
DoubleResult double_strand(Surgery& s, const Diagram& d, const DiagramInfo& info, int jj) {
    DoubleResult r;
    for (EdgeId e : d.components[jj].cycle) r.par[e] = s.new_edge();
    for (auto& [c, cr] : d.crossings) {
        EdgeId ev_in = cr.slot[0], ev_out = cr.slot[2];
        int si = (info.head.at(cr.slot[1]) == Dart{c, 1}) ? 1 : 3;
        int so = si == 1 ? 3 : 1;
        EdgeId eh_in = cr.slot[si], eh_out = cr.slot[so];
        bool vj = info.edge_comp.at(ev_in) == jj;
        bool hj = info.edge_comp.at(eh_in) == jj;
        if (!vj && !hj) continue;
        int v = vj ? 2 : 1, h = hj ? 2 : 1;
        s.crossings.erase(c);
        // Local frame: the under strand runs south to north, columns are
        // indexed west to east and rows south to north.  Slot rays are then
        // 0=S, 1=E, 2=N, 3=W at every grid crossing.
        std::vector<std::vector<CrossId>> g(v, std::vector<CrossId>(h));
        for (int x = 0; x < v; ++x)
            for (int y = 0; y < h; ++y) g[x][y] = s.new_cross();
        auto mem = [&](EdgeId e, bool two) {
            return two ? std::vector<EdgeId>{r.par.at(e), e} : std::vector<EdgeId>{e};
        };
        // Under bundle travels north; its left is west, so the copy is
        // column 0 and the original column v-1.
        {
            auto ms = mem(ev_in, vj);
            for (int k = 0; k < (int)ms.size(); ++k) s.inc[ms[k]].head = Dart{g[k][0], 0};
            r.dmap[Dart{c, 0}] = Dart{g[v - 1][0], 0};
        }
        {
            auto ms = mem(ev_out, vj);
            for (int k = 0; k < (int)ms.size(); ++k) s.inc[ms[k]].tail = Dart{g[k][h - 1], 2};
            r.dmap[Dart{c, 2}] = Dart{g[v - 1][h - 1], 2};
        }
        // Over bundle: entering at slot 1 it travels westward (left is
        // south, copy in row 0); entering at slot 3 it travels eastward
        // (left is north, copy in row h-1).
        auto row = [&](int k) { return si == 1 ? k : h - 1 - k; };
        {
            auto ms = mem(eh_in, hj);
            for (int k = 0; k < (int)ms.size(); ++k)
                s.inc[ms[k]].head =
                    si == 1 ? Dart{g[v - 1][row(k)], 1} : Dart{g[0][row(k)], 3};
            int k0 = (int)(hj ? 1 : 0);
            r.dmap[Dart{c, si}] = si == 1 ? Dart{g[v - 1][row(k0)], 1} : Dart{g[0][row(k0)], 3};
        }
        {
            auto ms = mem(eh_out, hj);
            for (int k = 0; k < (int)ms.size(); ++k)
                s.inc[ms[k]].tail =
                    si == 1 ? Dart{g[0][row(k)], 3} : Dart{g[v - 1][row(k)], 1};
            int k0 = (int)(hj ? 1 : 0);
            r.dmap[Dart{c, so}] = si == 1 ? Dart{g[0][row(k0)], 3} : Dart{g[v - 1][row(k0)], 1};
        }
        // Internal grid segments.
        for (int x = 0; x < v; ++x)
            for (int y = 0; y + 1 < h; ++y) {
                EdgeId m = s.new_edge();
                s.inc[m] = Ends{Dart{g[x][y], 2}, Dart{g[x][y + 1], 0}};
            }
        for (int y = 0; y < h; ++y)
            for (int x = 0; x + 1 < v; ++x) {
                EdgeId m = s.new_edge();
                s.inc[m] = si == 1 ? Ends{Dart{g[x + 1][y], 3}, Dart{g[x][y], 1}}
                                   : Ends{Dart{g[x][y], 1}, Dart{g[x + 1][y], 3}};
            }
    }
    return r;
}

// Inserts one full twist (two crossings of the given sign) on the coherent
// parallel pair, p running on the left of e.  The twist is spliced in at
// the head ends; returns the continuing pieces.
std::pair<EdgeId, EdgeId> insert_full_twist(Surgery& s, EdgeId p, EdgeId e, int sig) {
    CrossId c1 = s.new_cross(), c2 = s.new_cross();
    EdgeId pm = s.new_edge(), em = s.new_edge();
    EdgeId p2 = s.new_edge(), e2 = s.new_edge();
    Dart hp = s.inc.at(p).head, he = s.inc.at(e).head;
    if (sig > 0) {
        s.inc.at(p).head = Dart{c1, 0};
        s.inc.at(e).head = Dart{c1, 1};
        s.inc[pm] = Ends{Dart{c1, 2}, Dart{c2, 1}};
        s.inc[em] = Ends{Dart{c1, 3}, Dart{c2, 0}};
        s.inc[e2] = Ends{Dart{c2, 2}, he};
        s.inc[p2] = Ends{Dart{c2, 3}, hp};
    } else {
        // same picture with the other strand on top: both crossings -1
        s.inc.at(e).head = Dart{c1, 0};
        s.inc.at(p).head = Dart{c1, 3};
        s.inc[pm] = Ends{Dart{c1, 1}, Dart{c2, 0}};
        s.inc[em] = Ends{Dart{c1, 2}, Dart{c2, 3}};
        s.inc[e2] = Ends{Dart{c2, 1}, he};
        s.inc[p2] = Ends{Dart{c2, 2}, hp};
    }
    return {p2, e2};
}

// Reverses the orientation of one strand: crossings where it runs under
// rotate by two slots, then every edge of the strand swaps tail and head.
void reverse_strand(Surgery& s, const std::vector<EdgeId>& cycle) {
    std::set<EdgeId> es(cycle.begin(), cycle.end());
    std::set<CrossId> rot;
    for (EdgeId e : es) {
        Dart h = s.inc.at(e).head;
        if (h.slot == 0) rot.insert(h.cross);
    }
    for (auto& [e, en] : s.inc) {
        (void)e;
        if (rot.count(en.tail.cross)) en.tail.slot = (en.tail.slot + 2) % 4;
        if (rot.count(en.head.cross)) en.head.slot = (en.head.slot + 2) % 4;
    }
    for (EdgeId e : es) std::swap(s.inc.at(e).tail, s.inc.at(e).head);
}

// Joins the cycle through edge a to the cycle through edge b with a band:
// a now runs to b's old head and b to a's old head, and each strand of the
// band crosses over every listed edge (the return strand in reverse order).
// `side` mirrors which way the band approaches the crossed edges; `order`
// picks on which side of the outgoing strand's crossing the return strand
// meets each crossed edge.
void splice_band(Surgery& s, EdgeId a, EdgeId b, const std::vector<EdgeId>& over_edges,
                 int side, int order) {
    Dart ha = s.inc.at(a).head, hb = s.inc.at(b).head;
    s.inc.at(a).head = hb;
    s.inc.at(b).head = ha;
    std::map<EdgeId, EdgeId> head_piece; // crossed edge -> piece past band strand 1
    auto ride_over = [&](EdgeId band, const std::vector<EdgeId>& hits, int in_slot,
                         bool record) {
        int out_slot = in_slot == 1 ? 3 : 1;
        EdgeId cur = band;
        for (EdgeId x : hits) {
            CrossId c = s.new_cross();
            EdgeId x2 = s.new_edge(), b2 = s.new_edge();
            Dart hx = s.inc.at(x).head, hband = s.inc.at(cur).head;
            s.inc.at(x).head = Dart{c, 0};
            s.inc[x2] = Ends{Dart{c, 2}, hx};
            s.inc.at(cur).head = Dart{c, in_slot};
            s.inc[b2] = Ends{Dart{c, out_slot}, hband};
            if (record) head_piece[x] = x2;
            cur = b2;
        }
    };
    int in1 = side ? 1 : 3;
    ride_over(a, over_edges, in1, true);
    std::vector<EdgeId> rev;
    for (auto it = over_edges.rbegin(); it != over_edges.rend(); ++it)
        rev.push_back(order && head_piece.count(*it) ? head_piece.at(*it) : *it);
    ride_over(b, rev, in1 == 1 ? 3 : 1, false);
}

struct CompMeta {
    std::string name;
    long long framing;
    EdgeId seed;
};

Diagram assemble(const Surgery& s, const Diagram& d, const DiagramInfo& info,
                 const std::vector<CompMeta>& comps, const std::vector<FreeLoop>& loops,
                 const std::map<Dart, Dart>& dmap) {
    Diagram out;
    out.name = d.name;
    out.next_cross = s.next_cross;
    out.next_edge = s.next_edge;
    for (CrossId c : s.crossings) out.crossings[c] = Crossing{};
    for (auto& [e, en] : s.inc) {
        out.crossings.at(en.tail.cross).slot[en.tail.slot] = e;
        out.crossings.at(en.head.cross).slot[en.head.slot] = e;
    }
    for (auto& m : comps) out.components.push_back({m.name, m.framing, trace_cycle(s, m.seed)});
    DiagramInfo ni = analyze(out);
    auto empty_face = [&]() {
        for (size_t f = 0; f < ni.faces.size(); ++f)
            if (ni.faces[f].empty()) return (int)f;
        return 0;
    };
    for (auto& lp : loops) {
        int nf = -1;
        if (lp.face >= 0 && lp.face < (int)info.faces.size() && !info.faces[lp.face].empty()) {
            Dart od = info.faces[lp.face].front();
            auto it = dmap.find(od);
            Dart nd = it == dmap.end() ? od : it->second;
            nf = ni.face_of(nd);
        }
        if (nf < 0) nf = empty_face();
        out.loops.push_back({lp.name, lp.framing, nf});
    }
    return out;
}

} // namespace

Diagram handle_slide(const Diagram& d, const std::string& iname, const std::string& jname,
                     int sign, const std::vector<EdgeId>& band) {
    if (sign != 1 && sign != -1)
        fail(ErrorKind::Unsupported, "handle_slide: sign must be +1 or -1");
    if (iname == jname)
        fail(ErrorKind::Unsupported, "handle_slide: cannot slide a component over itself");
    int ii = d.component_index(iname), jj = d.component_index(jname);
    if (ii < 0) fail(ErrorKind::Lookup, "handle_slide: unknown component " + iname);
    if (jj < 0) fail(ErrorKind::Lookup, "handle_slide: unknown component " + jname);
    DiagramInfo info = analyze(d);
    LinkingData before = linking_matrix(d);
    bool iloop = (size_t)ii >= d.components.size();
    bool jloop = (size_t)jj >= d.components.size();
    long long fj = d.component_framing(jj);
    long long fi2 =
        d.component_framing(ii) + fj + 2LL * sign * linking_number(d, info, ii, jj);
    MoveBinding mv{MoveKind{MoveKind::HandleSlide, sign, ""}, iname, jname, ""};

    auto accept = [&](const Diagram& out) -> bool {
        if (!validate(out).ok()) return false;
        return !check_expected_delta(mv, before, linking_matrix(out)).has_value();
    };

    // A 0-framed crossing-free circle has a crossing-free framed pushoff;
    // its band sum changes nothing but the framing of the slid component.
    if (jloop && fj == 0) {
        Diagram out = d;
        out.set_component_framing((size_t)ii, fi2);
        if (!accept(out))
            fail(ErrorKind::Delta, "handle_slide: trivial pushoff violated its delta");
        return out;
    }

    Surgery base = from_diagram(d, info);
    std::map<Dart, Dart> dmap;
    std::vector<EdgeId> jprime;
    std::vector<CompMeta> comps;
    for (size_t k = 0; k < d.components.size(); ++k)
        comps.push_back({d.components[k].name,
                         (int)k == ii ? fi2 : d.components[k].framing,
                         d.components[k].cycle.front()});
    std::vector<FreeLoop> loops;
    for (size_t k = 0; k < d.loops.size(); ++k) {
        int u = (int)(d.components.size() + k);
        if (u == ii || (u == jj && fj != 0)) continue;
        loops.push_back(d.loops[k]);
    }

    if (!jloop) {
        DoubleResult dr = double_strand(base, d, info, jj);
        dmap = dr.dmap;
        // The blackboard parallel links j with writhe(j); correction twists
        // bring that up to the framing before any orientation choice.
        long long delta = fj - writhe(d, info, jj);
        EdgeId e0 = d.components[jj].cycle.front();
        EdgeId p = dr.par.at(e0), e = e0;
        for (long long t = 0; t < std::llabs(delta); ++t)
            std::tie(p, e) = insert_full_twist(base, p, e, delta > 0 ? 1 : -1);
        jprime = trace_cycle(base, dr.par.at(e0));
        if (sign < 0) {
            reverse_strand(base, jprime);
            jprime = trace_cycle(base, jprime.front());
        }
    } else {
        // Free loop with nonzero framing: the loop together with its
        // pushoff forms a closed 2-strand twist region, the (2, 2*fj)
        // torus-link diagram, oriented so the pair links sign * fj.
        int n2 = 2 * (int)std::llabs(fj);
        int sig = (fj > 0 ? 1 : -1) * sign;
        std::vector<EdgeId> as(n2), bs(n2);
        std::vector<CrossId> cs(n2);
        for (int k = 0; k < n2; ++k) {
            as[k] = base.new_edge();
            bs[k] = base.new_edge();
            cs[k] = base.new_cross();
        }
        for (int k = 0; k < n2; ++k) {
            int k1 = (k + 1) % n2;
            // the strand in the left braid position runs under and the two
            // strands swap positions at every crossing
            auto& un = (k % 2 == 0) ? as : bs;
            auto& ov = (k % 2 == 0) ? bs : as;
            base.inc[un[k]].head = Dart{cs[k], 0};
            base.inc[un[k1]].tail = Dart{cs[k], 2};
            if (sig > 0) {
                base.inc[ov[k]].head = Dart{cs[k], 1};
                base.inc[ov[k1]].tail = Dart{cs[k], 3};
            } else {
                base.inc[ov[k]].head = Dart{cs[k], 3};
                base.inc[ov[k1]].tail = Dart{cs[k], 1};
            }
        }
        comps.push_back({jname, fj, as[0]});
        jprime = bs;
    }

    if (iloop) {
        if (!band.empty())
            fail(ErrorKind::Site, "handle_slide: a crossing-free circle admits only the trivial band");
        comps.push_back({iname, fi2, jprime.front()});
        Diagram out = assemble(base, d, info, comps, loops, dmap);
        if (!validate(out).ok())
            fail(ErrorKind::Validation, "handle_slide: result failed validation");
        if (auto err = check_expected_delta(mv, before, linking_matrix(out)))
            fail(ErrorKind::Delta, "handle_slide: " + *err);
        return out;
    }

    for (EdgeId x : band)
        if (!base.inc.count(x))
            fail(ErrorKind::Lookup,
                 "handle_slide: band edge " + std::to_string(x) + " does not exist");
    std::set<EdgeId> banned(band.begin(), band.end());

    // Attach the band: cut one edge of i and one edge of the pushoff and
    // rejoin them coherently.  The attachment points are not part of the
    // move's data, so search concrete realizations and keep the first planar
    // result with the exact expected linking delta.
    auto try_attach = [&](EdgeId a, EdgeId b,
                          const std::vector<EdgeId>& hits) -> std::optional<Diagram> {
        for (int side = 0; side < 2; ++side) {
            for (int order = 0; order < (hits.empty() ? 1 : 2); ++order) {
                Surgery t = base;
                splice_band(t, a, b, hits, side, order);
                try {
                    Diagram out = assemble(t, d, info, comps, loops, dmap);
                    if (accept(out)) return out;
                } catch (const Error&) {
                    // non-planar or otherwise broken attachment: keep looking
                }
            }
            if (hits.empty()) break; // without crossings the mirrors coincide
        }
        return std::nullopt;
    };

    if (!band.empty()) {
        for (EdgeId a : d.components[ii].cycle) {
            if (banned.count(a)) continue;
            for (EdgeId b : jprime) {
                if (banned.count(b)) continue;
                if (auto out = try_attach(a, b, band)) return *out;
            }
        }
        fail(ErrorKind::Site, "handle_slide: the given band admits no planar attachment");
    }

    // No band given: search the face-adjacency graph of the pre-band state
    // for the shortest sequence of edges the band must cross over to reach
    // the pushoff from each attachment pair.
    std::vector<CompMeta> tcomps = comps;
    std::string tmp = jname + "'";
    while (d.component_index(tmp) >= 0) tmp += "'";
    tcomps.push_back({tmp, 0, jprime.front()});
    Diagram td = assemble(base, d, info, tcomps, {}, dmap);
    DiagramInfo ti = analyze(td);
    std::map<EdgeId, std::set<int>> efaces; // edge -> the two faces it borders
    for (size_t f = 0; f < ti.faces.size(); ++f)
        for (auto& dt : ti.faces[f])
            efaces[td.crossings.at(dt.cross).slot[dt.slot]].insert((int)f);
    struct Cand {
        EdgeId a, b;
        std::vector<EdgeId> hits;
    };
    std::vector<Cand> cands;
    for (EdgeId a : d.components[ii].cycle) {
        for (EdgeId b : jprime) {
            // The band may need to approach either side of either edge, so
            // find a shortest path per (side of a, side of b) combination.
            bool found = false;
            for (int fa : efaces[a]) {
                for (int fb : efaces[b]) {
                    std::map<int, std::pair<int, EdgeId>> parent; // face -> (prev, edge)
                    std::vector<int> queue{fa};
                    parent[fa] = {-1, -1};
                    int goal = fa == fb ? fa : -1;
                    for (size_t qi = 0; qi < queue.size() && goal < 0; ++qi) {
                        int f = queue[qi];
                        for (auto& [e, fs] : efaces) {
                            if (e == a || e == b || !fs.count(f)) continue;
                            for (int g : fs) {
                                if (parent.count(g)) continue;
                                parent[g] = {f, e};
                                queue.push_back(g);
                                if (g == fb) goal = g;
                            }
                        }
                    }
                    if (goal < 0) continue;
                    found = true;
                    Cand c{a, b, {}};
                    for (int f = goal; parent.at(f).first >= 0; f = parent.at(f).first)
                        c.hits.push_back(parent.at(f).second);
                    std::reverse(c.hits.begin(), c.hits.end());
                    bool dup = false;
                    for (auto& o : cands)
                        dup = dup || (o.a == a && o.b == b && o.hits == c.hits);
                    if (!dup) cands.push_back(std::move(c));
                }
            }
            if (!found) {
                // Different connected parts never share a face, but split
                // parts place freely, so a trivial band always reaches.
                int pa = ti.part.at(ti.head.at(a).cross);
                int pb = ti.part.at(ti.head.at(b).cross);
                if (pa != pb) cands.push_back({a, b, {}});
            }
        }
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Cand& x, const Cand& y) { return x.hits.size() < y.hits.size(); });
    for (auto& c : cands)
        if (auto out = try_attach(c.a, c.b, c.hits)) return *out;
    fail(ErrorKind::Site, "handle_slide: no planar band attachment found");
}

} // namespace kirby
