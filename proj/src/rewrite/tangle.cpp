#include "rewrite/tangle.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "core/error.hpp"

namespace kirby {

int TangleInfo::comp_of_edge(EdgeId e) const {
    auto it = owner.find(e);
    if (it == owner.end()) fail(ErrorKind::Lookup, "edge not in any tangle component");
    return it->second;
}

namespace {

struct Analyzer {
    const Tangle& t;
    TangleInfo info;
    std::map<EdgeId, std::vector<TEnd>> cross_ends;
    std::map<EdgeId, int> free_count;      // 2 - #crossing ends
    std::map<EdgeId, std::vector<int>> stub_pos; // boundary positions per edge

    explicit Analyzer(const Tangle& tt) : t(tt) {}

    void collect_ends() {
        for (auto& [c, x] : t.crossings)
            for (int s = 0; s < 4; ++s) {
                if (x.slot[s] < 0) fail(ErrorKind::Validation, "crossing with empty slot");
                cross_ends[x.slot[s]].push_back(TEnd{c, s, -1});
            }
        for (auto& [e, v] : cross_ends)
            if (v.size() > 2)
                fail(ErrorKind::Validation, "edge e" + std::to_string(e) + " has more than two ends");
        if (t.boundary.size() % 2 != 0)
            fail(ErrorKind::Validation, "tangle boundary has odd length");
        if (!t.boundary_end_hint.empty() && t.boundary_end_hint.size() != t.boundary.size())
            fail(ErrorKind::Validation, "boundary hint length mismatch");
        info.n = (int)t.boundary.size() / 2;
        for (int i = 0; i < (int)t.boundary.size(); ++i)
            stub_pos[t.boundary[i]].push_back(i);
        // every edge mentioned anywhere gets exactly two ends
        std::set<EdgeId> edges;
        for (auto& [e, v] : cross_ends) edges.insert(e);
        for (auto& [e, v] : stub_pos) edges.insert(e);
        for (EdgeId e : edges) {
            size_t nc = cross_ends.count(e) ? cross_ends[e].size() : 0;
            size_t ns = stub_pos.count(e) ? stub_pos[e].size() : 0;
            if (nc + ns != 2)
                fail(ErrorKind::Validation,
                     "edge e" + std::to_string(e) + " has " + std::to_string(nc + ns) + " ends");
            free_count[e] = (int)ns;
        }
        info.stub_is_entry.assign(t.boundary.size(), false);
        info.stub_end.assign(t.boundary.size(), TEnd{});
    }

    // role of a stub position when the edge has both ends on the rim:
    // 0 = tail, 1 = head
    int double_stub_role(EdgeId e, int pos) const {
        if (!t.boundary_end_hint.empty() && t.boundary_end_hint[pos] >= 0)
            return t.boundary_end_hint[pos];
        auto& ps = stub_pos.at(e);
        return pos == ps[0] ? 0 : 1;
    }

    TEnd stub_end_of(EdgeId e, int role) const {
        // role 0 = tail, 1 = head; only meaningful interplay for double stubs
        auto& ps = stub_pos.at(e);
        if (ps.size() == 1) return TEnd{-1, -1, ps[0]};
        int first_role = 0;
        if (!t.boundary_end_hint.empty() && t.boundary_end_hint[ps[0]] >= 0)
            first_role = t.boundary_end_hint[ps[0]];
        return TEnd{-1, -1, role == first_role ? ps[0] : ps[1]};
    }

    // conventions: an end at slot 0 must be a head (incoming under strand),
    // an end at slot 2 must be a tail (outgoing under strand)
    static bool end_role_ok(const TEnd& end, bool is_head) {
        if (end.is_stub()) return true;
        if (end.slot == 0) return is_head;
        if (end.slot == 2) return !is_head;
        return true;
    }

    // ends of e other than `from`
    std::vector<TEnd> other_ends(EdgeId e, const TEnd& from) const {
        std::vector<TEnd> out;
        if (auto it = cross_ends.find(e); it != cross_ends.end())
            for (auto& end : it->second)
                if (!(end == from)) out.push_back(end);
        if (auto it = stub_pos.find(e); it != stub_pos.end())
            for (int p : it->second)
                if (!(TEnd{-1, -1, p} == from)) out.push_back(TEnd{-1, -1, p});
        return out;
    }

    // Try to orient a path starting with the given tail of path[0]; on
    // success fills head/tail for all its edges.  Closed paths must return
    // to the start through opposite slots.
    bool try_orient(const std::vector<EdgeId>& path, bool closed, const TEnd& start,
                    std::map<EdgeId, TEnd>& heads, std::map<EdgeId, TEnd>& tails) const {
        TEnd tail = start;
        for (size_t j = 0; j < path.size(); ++j) {
            EdgeId e = path[j];
            if (!end_role_ok(tail, false)) return false;
            tails[e] = tail;
            bool last = (j + 1 == path.size());
            EdgeId succ = last ? path[0] : path[j + 1];
            TEnd head{};
            bool found = false;
            for (auto& cand : other_ends(e, tail)) {
                bool ok;
                if (cand.is_stub())
                    ok = last && !closed;
                else {
                    int s2 = (cand.slot + 2) % 4;
                    ok = (!last || closed) && t.crossings.at(cand.cross).slot[s2] == succ;
                    if (ok && last && closed) {
                        TEnd wrap{cand.cross, s2, -1};
                        ok = wrap == start;
                    }
                }
                if (ok && end_role_ok(cand, true)) {
                    if (found) return false; // ambiguous
                    head = cand;
                    found = true;
                }
            }
            if (!found) return false;
            heads[e] = head;
            if (!last) tail = head.is_stub() ? TEnd{} : TEnd{head.cross, (head.slot + 2) % 4, -1};
        }
        return true;
    }

    void orient_comps() {
        info.comp_open.assign(t.comps.size(), false);
        for (size_t ci = 0; ci < t.comps.size(); ++ci) {
            auto& comp = t.comps[ci];
            if (comp.is_loop) {
                if (!comp.path.empty())
                    fail(ErrorKind::Validation, "loop '" + comp.name + "' must have no edges");
                continue;
            }
            if (comp.path.empty())
                fail(ErrorKind::Validation, "component '" + comp.name + "' has no edges");
            for (EdgeId e : comp.path) {
                if (!free_count.count(e))
                    fail(ErrorKind::Validation,
                         "component '" + comp.name + "' uses unknown edge e" + std::to_string(e));
                if (info.owner.count(e))
                    fail(ErrorKind::Validation, "edge e" + std::to_string(e) + " used twice");
                info.owner[e] = (int)ci;
            }
            bool open = false;
            for (EdgeId e : comp.path)
                if (free_count[e] > 0) open = true;
            info.comp_open[ci] = open;
            std::map<EdgeId, TEnd> heads, tails;
            bool ok = false;
            if (open) {
                if (free_count[comp.path.front()] == 0)
                    fail(ErrorKind::Validation,
                         "open strand '" + comp.name + "' must start at the boundary");
                TEnd start = stub_end_of(comp.path.front(), 0);
                ok = try_orient(comp.path, false, start, heads, tails);
            } else {
                for (auto& start : other_ends(comp.path.front(), TEnd{-2, -2, -2})) {
                    heads.clear();
                    tails.clear();
                    if (try_orient(comp.path, true, start, heads, tails)) {
                        ok = true;
                        break;
                    }
                }
            }
            if (!ok)
                fail(ErrorKind::Validation,
                     "cannot orient component '" + comp.name + "' consistently");
            for (auto& [e, h] : heads) info.head[e] = h;
            for (auto& [e, tl] : tails) info.tail[e] = tl;
        }
        // every crossing edge must belong to a component
        for (auto& [e, v] : cross_ends)
            if (!info.owner.count(e))
                fail(ErrorKind::Validation, "edge e" + std::to_string(e) + " not in any component");
        // stub bookkeeping
        for (auto& [e, ps] : stub_pos) {
            for (int p : ps) {
                TEnd end{-1, -1, p};
                if (info.tail.count(e) && info.tail[e] == end) {
                    info.stub_is_entry[p] = true;
                    info.stub_end[p] = end;
                } else if (info.head.count(e) && info.head[e] == end) {
                    info.stub_is_entry[p] = false;
                    info.stub_end[p] = end;
                } else {
                    fail(ErrorKind::Validation,
                         "boundary edge e" + std::to_string(e) + " has no free end here");
                }
            }
        }
    }

    void compute_signs() {
        for (auto& [c, x] : t.crossings) {
            auto is_head_at = [&](int s) {
                EdgeId e = x.slot[s];
                TEnd end{c, s, -1};
                return info.head.count(e) && info.head.at(e) == end;
            };
            if (!is_head_at(0))
                fail(ErrorKind::Validation, "crossing " + std::to_string(c) +
                                                ": slot 0 is not the incoming under-strand");
            if (is_head_at(2))
                fail(ErrorKind::Validation, "crossing " + std::to_string(c) +
                                                ": slot 2 is not the outgoing under-strand");
            bool h1 = is_head_at(1), h3 = is_head_at(3);
            if (h1 == h3)
                fail(ErrorKind::Validation, "crossing " + std::to_string(c) +
                                                ": over-strand does not pass through");
            info.sign[c] = h1 ? 1 : -1;
        }
    }

    int dart_of_end(const TEnd& end) const {
        if (end.is_stub()) return info.stub_dart[end.stub];
        return info.cross_dart.at({end.cross, end.slot});
    }

    void build_closure() {
        auto& m = info.cmap;
        for (auto& [c, x] : t.crossings) {
            int v = m.add_vertex();
            for (int s = 0; s < 4; ++s) {
                int d = m.add_dart(v);
                info.cross_dart[{c, s}] = d;
                info.label.push_back({TangleInfo::DartLabel::Cross, c, s, -1, x.slot[s]});
            }
        }
        int n2 = (int)t.boundary.size();
        info.stub_dart.assign(n2, -1);
        info.rim_next_dart.assign(n2, -1);
        info.rim_prev_dart.assign(n2, -1);
        for (int i = 0; i < n2; ++i) {
            int v = m.add_vertex();
            // ccw order at a rim vertex: rim-to-next, strand (inward), rim-to-prev
            info.rim_next_dart[i] = m.add_dart(v);
            info.label.push_back({TangleInfo::DartLabel::RimNext, -1, -1, i, -1});
            info.stub_dart[i] = m.add_dart(v);
            info.label.push_back({TangleInfo::DartLabel::Stub, -1, -1, i, t.boundary[i]});
            info.rim_prev_dart[i] = m.add_dart(v);
            info.label.push_back({TangleInfo::DartLabel::RimPrev, -1, -1, i, -1});
        }
        for (int i = 0; i < n2; ++i)
            m.pair(info.rim_next_dart[i], info.rim_prev_dart[(i + 1) % n2]);
        for (auto& [e, h] : info.head) m.pair(dart_of_end(info.tail.at(e)), dart_of_end(h));
        if (!m.alpha.empty() && !m.spherical())
            fail(ErrorKind::Validation, "tangle closure is not planar");
        info.faces = m.faces();
        info.face_of_dart.assign(m.alpha.size(), -1);
        for (int f = 0; f < (int)info.faces.size(); ++f)
            for (int d : info.faces[f]) info.face_of_dart[d] = f;
        if (info.n > 0) {
            info.outer_face = info.face_of_dart[info.rim_next_dart[0]];
            auto& outer = info.faces[info.outer_face];
            bool pure = outer.size() == (size_t)n2;
            for (int d : outer)
                if (info.label[d].kind != TangleInfo::DartLabel::RimNext) pure = false;
            if (!pure)
                fail(ErrorKind::Validation,
                     "boundary cyclic order is inconsistent with a disc embedding");
            // no floating crossing parts: all vertices reachable from rim
            std::vector<int> stack{m.dart_vertex[info.rim_next_dart[0]]};
            std::set<int> seen(stack.begin(), stack.end());
            while (!stack.empty()) {
                int v = stack.back();
                stack.pop_back();
                for (int d : m.vertex_darts[v]) {
                    int w = m.dart_vertex[m.alpha[d]];
                    if (seen.insert(w).second) stack.push_back(w);
                }
            }
            if (seen.size() != m.vertex_darts.size())
                fail(ErrorKind::Validation, "tangle has a floating closed part");
        }
        info.face_region.assign(info.faces.size(), -1);
        for (int f = 0; f < (int)info.faces.size(); ++f) {
            if (f == info.outer_face) continue;
            info.face_region[f] = info.num_regions;
            info.region_face.push_back(f);
            ++info.num_regions;
        }
        if (info.num_regions == 0) info.num_regions = 1; // bare disc
        for (auto& comp : t.comps)
            if (comp.is_loop && (comp.region < 0 || comp.region >= info.num_regions))
                fail(ErrorKind::Validation,
                     "loop '" + comp.name + "' placed in nonexistent region");
    }

    TangleInfo run() {
        collect_ends();
        orient_comps();
        compute_signs();
        build_closure();
        return std::move(info);
    }
};

} // namespace

TangleInfo analyze_tangle(const Tangle& t) { return Analyzer(t).run(); }

std::string serialize_tangle(const Tangle& t, const std::string& block_name) {
    std::ostringstream os;
    os << block_name << " {\n";
    for (auto& [c, x] : t.crossings) {
        os << "  x";
        for (int s = 0; s < 4; ++s) os << " e" << x.slot[s];
        os << "\n";
    }
    for (auto& comp : t.comps) {
        std::string fr = comp.framing_any ? "*" : std::to_string(comp.framing);
        if (comp.is_loop) {
            os << "  loop " << comp.name << " " << fr << " in " << comp.region << "\n";
        } else {
            os << "  comp " << comp.name << " " << fr << " :";
            for (EdgeId e : comp.path) os << " e" << e;
            os << "\n";
        }
    }
    os << "  boundary :";
    for (size_t i = 0; i < t.boundary.size(); ++i) {
        os << " e" << t.boundary[i];
        if (!t.boundary_end_hint.empty() && t.boundary_end_hint[i] >= 0)
            os << (t.boundary_end_hint[i] == 0 ? ".t" : ".h");
    }
    os << "\n}\n";
    return os.str();
}

Tangle reverse_comps(const Tangle& t, const std::vector<int>& comps) {
    TangleInfo info = analyze_tangle(t);
    std::set<int> flip(comps.begin(), comps.end());
    Tangle r = t;
    for (int ci : flip) {
        auto& comp = r.comps.at(ci);
        if (comp.is_loop) continue;
        std::reverse(comp.path.begin(), comp.path.end());
    }
    // rotate crossings whose under-strand flips
    for (auto& [c, x] : r.crossings) {
        int under = info.comp_of_edge(t.crossings.at(c).slot[0]);
        if (flip.count(under)) {
            auto old = x.slot;
            for (int s = 0; s < 4; ++s) x.slot[s] = old[(s + 2) % 4];
        }
    }
    // pin stub roles explicitly (a flipped strand's tail end becomes a head end)
    r.boundary_end_hint.assign(t.boundary.size(), -1);
    for (int i = 0; i < (int)t.boundary.size(); ++i) {
        EdgeId e = t.boundary[i];
        bool was_tail = info.stub_is_entry[i];
        bool flipped = flip.count(info.comp_of_edge(e)) > 0;
        r.boundary_end_hint[i] = (was_tail != flipped) ? 0 : 1;
    }
    return r;
}

} // namespace kirby
