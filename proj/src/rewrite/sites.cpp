#include "rewrite/sites.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "core/error.hpp"
#include "core/rotmap.hpp"

namespace kirby {

// Orientation-flip data is deliberately excluded: two matches that place the
// same lhs elements on the same host elements differ only by reversing some
// strands, which the unoriented-match semantics treats as one site.
std::string Site::key() const {
    std::ostringstream os;
    os << "X:";
    for (auto& [c, hc] : cross_map) os << " " << c << ">" << hc;
    os << " E:";
    for (auto& [e, he] : edge_map) os << " " << e << ">" << he;
    os << " L:";
    for (auto& [n, i] : loop_map) os << " " << n << ">" << i;
    os << " F:" << host_face;
    return os.str();
}

namespace {

// Host diagram viewed as a rotation map: vertex per crossing, dart ids
// 4*index+slot, faces aligned with DiagramInfo's face numbering.
struct HostModel {
    const Diagram& d;
    DiagramInfo info;
    std::vector<CrossId> xs;
    std::map<CrossId, int> xidx;
    std::vector<EdgeId> edges; // sorted
    RotMap H;
    std::vector<int> face_of;
    int nfaces = 1;

    explicit HostModel(const Diagram& dd) : d(dd), info(analyze(dd)) {
        for (auto& [c, x] : d.crossings) xs.push_back(c);
        for (int i = 0; i < (int)xs.size(); ++i) xidx[xs[i]] = i;
        for (auto& [e, ends] : info.edge_ends) edges.push_back(e);
        for (auto c : xs) {
            int v = H.add_vertex();
            for (int s = 0; s < 4; ++s) H.add_dart(v);
        }
        for (auto& [e, ends] : info.edge_ends) H.pair(dart_of(ends[0]), dart_of(ends[1]));
        auto hf = H.faces();
        if (hf.size() != info.faces.size() && !info.faces.empty())
            fail(ErrorKind::Validation, "face model mismatch");
        face_of.assign(H.alpha.size(), -1);
        for (int f = 0; f < (int)hf.size(); ++f)
            for (int dt : hf[f]) face_of[dt] = f;
        nfaces = hf.empty() ? 1 : (int)hf.size();
    }
    int dart_of(const Dart& dt) const { return 4 * xidx.at(dt.cross) + dt.slot; }
    int dart_of(CrossId c, int s) const { return 4 * xidx.at(c) + s; }
};

struct Variant {
    std::vector<int> flipped;
    Tangle lhs;
    TangleInfo li;
};

std::vector<Variant> make_variants(const RewriteRule& r) {
    std::vector<Variant> out;
    std::vector<int> flippable;
    for (size_t i = 0; i < r.lhs.comps.size(); ++i)
        if (!r.lhs.comps[i].is_loop) flippable.push_back((int)i);
    size_t count = r.oriented ? 1 : (size_t)1 << flippable.size();
    for (size_t mask = 0; mask < count; ++mask) {
        std::vector<int> flips;
        for (size_t j = 0; j < flippable.size(); ++j)
            if (mask & ((size_t)1 << j)) flips.push_back(flippable[j]);
        try {
            Variant v;
            v.flipped = flips;
            v.lhs = flips.empty() ? r.lhs : reverse_comps(r.lhs, flips);
            v.li = analyze_tangle(v.lhs);
            out.push_back(std::move(v));
        } catch (const Error&) {
            // this reversal conflicts with the crossing conventions
        }
    }
    return out;
}

enum class LKind { Interior, Attach, Arc };

struct Matcher {
    const HostModel& host;
    const Variant& var;
    std::vector<Site>& out;
    std::set<std::string>& seen;

    std::vector<CrossId> lxs;
    std::map<EdgeId, LKind> ekind;
    std::vector<EdgeId> arcs;

    std::map<CrossId, CrossId> cmap;
    std::set<CrossId> used;
    std::map<EdgeId, EdgeId> emap;

    Matcher(const HostModel& h, const Variant& v, std::vector<Site>& o,
            std::set<std::string>& s)
        : host(h), var(v), out(o), seen(s) {}

    TEnd other_lhs_end(EdgeId e, const TEnd& from) const {
        const TEnd& h = var.li.head.at(e);
        return h == from ? var.li.tail.at(e) : h;
    }

    void emit(Site&& s) {
        if (seen.insert(s.key()).second) out.push_back(std::move(s));
    }

    void run() {
        for (auto& [c, x] : var.lhs.crossings) lxs.push_back(c);
        for (auto& [e, h] : var.li.head) {
            int stubs = (h.is_stub() ? 1 : 0) + (var.li.tail.at(e).is_stub() ? 1 : 0);
            ekind[e] = stubs == 0 ? LKind::Interior : (stubs == 1 ? LKind::Attach : LKind::Arc);
            if (ekind[e] == LKind::Arc) arcs.push_back(e);
        }
        std::sort(arcs.begin(), arcs.end());
        if (lxs.empty() && arcs.empty()) {
            bare_disc();
            return;
        }
        search_cross();
    }

    // Disc with loops only (or empty): one candidate site per host face.
    void bare_disc() {
        for (int hf = 0; hf < host.nfaces; ++hf) {
            Site s;
            s.flipped = var.flipped;
            s.host_face = hf;
            if (assign_loops_on_face(hf, s.loop_map, /*exact=*/false)) emit(std::move(s));
        }
    }

    bool loop_ok(const TangleComp& lc, const FreeLoop& hl) const {
        return lc.framing_any || lc.framing == hl.framing;
    }

    // Greedy assignment of every lhs loop onto host loops of face hf.
    bool assign_loops_on_face(int hf, std::map<std::string, size_t>& lm, bool exact) const {
        std::set<size_t> taken;
        for (auto& [n, i] : lm) taken.insert(i);
        for (auto& comp : var.lhs.comps) {
            if (!comp.is_loop || lm.count(comp.name)) continue;
            // bare-disc rules keep all loops in region 0; region filtering
            // happens in finish() for tangles with structure
            bool ok = false;
            for (size_t j = 0; j < host.d.loops.size(); ++j) {
                if (taken.count(j) || host.d.loops[j].face != hf) continue;
                if (!loop_ok(comp, host.d.loops[j])) continue;
                lm[comp.name] = j;
                taken.insert(j);
                ok = true;
                break;
            }
            if (!ok) return false;
        }
        if (exact)
            for (size_t j = 0; j < host.d.loops.size(); ++j)
                if (host.d.loops[j].face == hf && !taken.count(j)) return false;
        return true;
    }

    bool propagate(CrossId lc0, CrossId hc0) {
        std::vector<std::pair<CrossId, CrossId>> queue{{lc0, hc0}};
        while (!queue.empty()) {
            auto [c, h] = queue.back();
            queue.pop_back();
            if (auto it = cmap.find(c); it != cmap.end()) {
                if (it->second != h) return false;
                continue;
            }
            if (used.count(h)) return false;
            if (var.li.sign.at(c) != host.info.sign.at(h)) return false;
            cmap[c] = h;
            used.insert(h);
            for (int s = 0; s < 4; ++s) {
                EdgeId le = var.lhs.crossings.at(c).slot[s];
                EdgeId he = host.d.crossings.at(h).slot[s];
                if (auto it = emap.find(le); it != emap.end()) {
                    if (it->second != he) return false;
                } else {
                    emap[le] = he;
                }
                TEnd o = other_lhs_end(le, TEnd{c, s, -1});
                if (!o.is_stub()) {
                    auto& ends = host.info.edge_ends.at(he);
                    Dart here{h, s};
                    Dart hother = ends[0] == here ? ends[1] : ends[0];
                    if (hother.slot != o.slot) return false;
                    queue.push_back({o.cross, hother.cross});
                }
            }
        }
        return true;
    }

    void search_cross() {
        CrossId next = -1;
        for (CrossId c : lxs)
            if (!cmap.count(c)) {
                next = c;
                break;
            }
        if (next < 0) {
            search_arc(0);
            return;
        }
        for (CrossId hc : host.xs) {
            if (used.count(hc)) continue;
            auto sc = cmap;
            auto su = used;
            auto se = emap;
            if (propagate(next, hc)) search_cross();
            cmap = std::move(sc);
            used = std::move(su);
            emap = std::move(se);
        }
    }

    void search_arc(size_t k) {
        if (k == arcs.size()) {
            finish();
            return;
        }
        for (EdgeId he : host.edges) {
            bool clash = false;
            for (auto& [le, h2] : emap)
                if (h2 == he) clash = true;
            if (clash) continue;
            emap[arcs[k]] = he;
            search_arc(k + 1);
            emap.erase(arcs[k]);
        }
    }

    struct CutRec {
        int pos;      // boundary position
        int kind;     // 0 attach, 1 arc tail cut, 2 arc head cut
        Dart img_end; // attach: host end on the image side
    };

    void finish() {
        // pinned framings of matched closed components must agree
        for (size_t ci = 0; ci < var.lhs.comps.size(); ++ci) {
            auto& comp = var.lhs.comps[ci];
            if (comp.is_loop || comp.framing_any || var.li.comp_open[ci]) continue;
            int hc = host.info.edge_comp.at(emap.at(comp.path.front()));
            if (host.d.components[hc].framing != comp.framing) return;
        }
        size_t n2 = var.lhs.boundary.size();
        // cut records grouped per host edge
        std::map<EdgeId, std::vector<CutRec>> cuts;
        std::set<EdgeId> interior_img;
        for (auto& [le, k] : ekind)
            if (k == LKind::Interior) {
                if (!interior_img.insert(emap.at(le)).second) return; // shared interior
            }
        for (size_t i = 0; i < n2; ++i) {
            EdgeId le = var.lhs.boundary[i];
            EdgeId he = emap.at(le);
            if (interior_img.count(he)) return;
            CutRec rec;
            rec.pos = (int)i;
            if (ekind.at(le) == LKind::Attach) {
                TEnd ce = var.li.head.at(le).is_stub() ? var.li.tail.at(le) : var.li.head.at(le);
                rec.kind = 0;
                rec.img_end = Dart{cmap.at(ce.cross), ce.slot};
            } else {
                rec.kind = var.li.stub_is_entry[i] ? 1 : 2;
            }
            cuts[he].push_back(rec);
        }
        // capacity rules per host edge
        for (auto& [he, recs] : cuts) {
            bool has_arc = false, has_attach = false;
            for (auto& r : recs) has_arc |= r.kind != 0, has_attach |= r.kind == 0;
            if (has_arc && has_attach) return;
            if (has_arc && recs.size() != 2) return;
            if (has_attach) {
                if (recs.size() > 2) return;
                if (recs.size() == 2 && recs[0].img_end == recs[1].img_end) return;
            }
        }
        // cut host model: host plus a degree-2 vertex per cut
        RotMap M;
        for (size_t v = 0; v < host.H.vertex_darts.size(); ++v) {
            int nv = M.add_vertex();
            for (int s = 0; s < 4; ++s) M.add_dart(nv);
        }
        std::vector<int> inward(n2, -1);
        for (EdgeId he : host.edges) {
            int tail_d = host.dart_of(host.info.tail.at(he));
            int head_d = host.dart_of(host.info.head.at(he));
            auto it = cuts.find(he);
            if (it == cuts.end()) {
                M.pair(tail_d, head_d);
                continue;
            }
            auto recs = it->second;
            auto order_key = [&](const CutRec& r) {
                if (r.kind == 1) return 1;
                if (r.kind == 2) return 2;
                return host.dart_of(r.img_end) == tail_d ? 0 : 3;
            };
            std::sort(recs.begin(), recs.end(),
                      [&](const CutRec& a, const CutRec& b) { return order_key(a) < order_key(b); });
            int current = tail_d;
            for (auto& r : recs) {
                int v = M.add_vertex();
                int dl = M.add_dart(v);
                int dh = M.add_dart(v);
                M.pair(current, dl);
                if (r.kind == 0)
                    inward[r.pos] = (host.dart_of(r.img_end) == tail_d) ? dl : dh;
                else
                    inward[r.pos] = (r.kind == 1) ? dh : dl;
                current = dh;
            }
            M.pair(current, head_d);
        }
        auto mfaces = M.faces();
        std::vector<int> mface_of(M.alpha.size(), -1);
        for (int f = 0; f < (int)mfaces.size(); ++f)
            for (int dt : mfaces[f]) mface_of[dt] = f;
        int ncross_darts = 4 * (int)host.xs.size();

        // host part containing an M face (via any crossing dart on it)
        auto part_of_mface = [&](int F) {
            for (int dt : mfaces[F])
                if (dt < ncross_darts) return host.info.part.at(host.xs[dt / 4]);
            return -1;
        };
        // the M-face cycle restricted to the word's darts, rotated to start
        // at `first`; empty when `first` is not on face F
        auto face_word = [&](int F, const std::set<int>& sw, int first) {
            std::vector<int> R;
            for (int dt : mfaces[F])
                if (sw.count(dt)) R.push_back(dt);
            auto start = std::find(R.begin(), R.end(), first);
            if (start == R.end()) return std::vector<int>{};
            std::rotate(R.begin(), start, R.end());
            return R;
        };

        // Walk every lhs face and demand its image word sits on one host
        // face in matching cyclic order.  A face touching the rim may span
        // several host faces when those lie in distinct connected parts of
        // the host: a split diagram fixes no relative placement of its
        // parts, so each extra part's contribution can be spliced into the
        // region at one point.  Such contributions must form contiguous
        // cyclic blocks, peeled off innermost first.
        std::map<int, std::vector<int>> region_host_faces;
        std::set<int> interior_regions;
        for (int f = 0; f < (int)var.li.faces.size(); ++f) {
            if (f == var.li.outer_face) continue;
            std::vector<int> W;
            bool has_stub = false;
            for (int dt : var.li.faces[f]) {
                auto& lb = var.li.label[dt];
                if (lb.kind == TangleInfo::DartLabel::Cross)
                    W.push_back(host.dart_of(cmap.at(lb.cross), lb.slot));
                else if (lb.kind == TangleInfo::DartLabel::Stub) {
                    W.push_back(inward[lb.stub]);
                    has_stub = true;
                }
            }
            if (W.empty()) continue;
            std::set<int> sw(W.begin(), W.end());
            if (sw.size() != W.size()) return;

            std::vector<int> word_faces, distinct;
            for (int dt : W) {
                word_faces.push_back(mface_of[dt]);
                if (std::find(distinct.begin(), distinct.end(), mface_of[dt]) == distinct.end())
                    distinct.push_back(mface_of[dt]);
            }
            if (distinct.size() > 1) {
                if (!has_stub) return; // interior faces are single-face exact
                std::set<int> parts;
                for (int F : distinct) {
                    int p = part_of_mface(F);
                    if (p < 0 || !parts.insert(p).second) return;
                }
            }
            // peel contiguous single-face blocks until one face remains
            std::vector<int> word = W, wf = word_faces;
            while (true) {
                std::vector<int> faces_left;
                for (int F : wf)
                    if (std::find(faces_left.begin(), faces_left.end(), F) == faces_left.end())
                        faces_left.push_back(F);
                if (faces_left.size() == 1) {
                    std::set<int> s2(word.begin(), word.end());
                    if (face_word(faces_left[0], s2, word[0]) != word) return;
                    if (!has_stub && mfaces[faces_left[0]].size() != word.size()) return;
                    break;
                }
                size_t n = word.size();
                bool peeled = false;
                for (int F : faces_left) {
                    // positions of F, cyclic-contiguity via run count
                    int runs = 0;
                    for (size_t i = 0; i < n; ++i)
                        if (wf[i] == F && wf[(i + n - 1) % n] != F) ++runs;
                    if (runs != 1) continue;
                    std::vector<int> block;
                    size_t start = 0;
                    while (!(wf[start] == F && wf[(start + n - 1) % n] != F)) ++start;
                    for (size_t i = start; wf[i % n] == F && block.size() < n; ++i)
                        block.push_back(word[i % n]);
                    std::set<int> sb(block.begin(), block.end());
                    if (face_word(F, sb, block[0]) != block) return;
                    std::vector<int> nw, nwf;
                    for (size_t i = 0; i < n; ++i)
                        if (wf[i] != F) nw.push_back(word[i]), nwf.push_back(wf[i]);
                    word = nw;
                    wf = nwf;
                    peeled = true;
                    break;
                }
                if (!peeled) return; // interleaved parts: not realizable
            }
            // translate to host faces for free-loop accounting
            std::vector<int> hfs;
            for (int F : distinct)
                for (int dt : mfaces[F])
                    if (dt < ncross_darts) {
                        hfs.push_back(host.face_of[dt]);
                        break;
                    }
            if (hfs.empty()) return;
            int rgn = var.li.face_region[f];
            region_host_faces[rgn] = hfs;
            if (!has_stub) interior_regions.insert(rgn);
        }
        // free loops: exact on fully interior regions, greedy elsewhere
        std::map<std::string, size_t> lm;
        std::set<size_t> taken;
        for (auto& comp : var.lhs.comps) {
            if (!comp.is_loop) continue;
            auto it = region_host_faces.find(comp.region);
            if (it == region_host_faces.end()) return;
            bool ok = false;
            for (size_t j = 0; j < host.d.loops.size() && !ok; ++j) {
                if (taken.count(j)) continue;
                if (std::find(it->second.begin(), it->second.end(), (int)host.d.loops[j].face) ==
                    it->second.end())
                    continue;
                if (!loop_ok(comp, host.d.loops[j])) continue;
                lm[comp.name] = j;
                taken.insert(j);
                ok = true;
            }
            if (!ok) return;
        }
        for (int rgn : interior_regions)
            for (size_t j = 0; j < host.d.loops.size(); ++j)
                if (host.d.loops[j].face == region_host_faces[rgn].front() && !taken.count(j))
                    return;

        Site s;
        s.flipped = var.flipped;
        s.cross_map = cmap;
        s.edge_map = emap;
        s.loop_map = std::move(lm);
        s.host_face = -1;
        emit(std::move(s));
    }
};

} // namespace

std::vector<Site> find_sites(const Diagram& d, const RewriteRule& r) {
    HostModel host(d);
    std::vector<Site> out;
    std::set<std::string> seen;
    for (auto& v : make_variants(r)) {
        Matcher m(host, v, out, seen);
        m.run();
    }
    std::sort(out.begin(), out.end(),
              [](const Site& a, const Site& b) { return a.key() < b.key(); });
    return out;
}

// -- apply -------------------------------------------------------------------

namespace {

struct UnionFind {
    std::map<EdgeId, EdgeId> parent;
    EdgeId find(EdgeId x) {
        auto it = parent.find(x);
        if (it == parent.end() || it->second == x) {
            parent.emplace(x, x);
            return x;
        }
        return parent[x] = find(it->second);
    }
    void unite(EdgeId a, EdgeId b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b);
        parent[b] = a; // smaller id (host edges first) wins
    }
};

} // namespace

Diagram apply_rule(const Diagram& d, const RewriteRule& r, const Site& given) {
    // revalidate against the current diagram; stale sites are an error
    auto sites = find_sites(d, r);
    const Site* sp = nullptr;
    std::string want = given.key();
    for (auto& s : sites)
        if (s.key() == want) sp = &s;
    if (!sp) fail(ErrorKind::Site, "site is not valid for this diagram");
    const Site& site = *sp;

    HostModel host(d);
    Variant var;
    var.flipped = site.flipped;
    var.lhs = site.flipped.empty() ? r.lhs : reverse_comps(r.lhs, site.flipped);
    var.li = analyze_tangle(var.lhs);
    // flip the same-named rhs components
    std::vector<int> rflips;
    for (int ci : site.flipped)
        for (size_t j = 0; j < r.rhs.comps.size(); ++j)
            if (r.rhs.comps[j].name == r.lhs.comps[ci].name) rflips.push_back((int)j);
    Tangle vrhs = rflips.empty() ? r.rhs : reverse_comps(r.rhs, rflips);
    TangleInfo ri = analyze_tangle(vrhs);

    // token space: host edges keep ids; rhs edges and the extra piece of
    // each arc-cut host edge get fresh ids
    EdgeId base_rhs = d.next_edge;
    EdgeId max_rhs = 0;
    for (auto& [e, h] : ri.head) max_rhs = std::max(max_rhs, e + 1);
    for (auto& [c, x] : vrhs.crossings)
        for (int s = 0; s < 4; ++s) max_rhs = std::max(max_rhs, x.slot[s] + 1);
    EdgeId base_extra = base_rhs + max_rhs;
    std::map<EdgeId, EdgeId> arc_extra; // host edge -> token of its head piece
    UnionFind uf;

    std::set<CrossId> img_cross;
    for (auto& [c, hc] : site.cross_map) img_cross.insert(hc);
    std::set<EdgeId> interior_img;
    for (auto& [le, he] : site.edge_map) {
        bool stub_head = var.li.head.at(le).is_stub();
        bool stub_tail = var.li.tail.at(le).is_stub();
        if (!stub_head && !stub_tail) interior_img.insert(he);
        if (stub_head && stub_tail && !arc_extra.count(he))
            arc_extra[he] = base_extra + (EdgeId)arc_extra.size();
    }
    // glue rhs boundary edges to the surviving host pieces
    for (size_t i = 0; i < var.lhs.boundary.size(); ++i) {
        EdgeId le = var.lhs.boundary[i];
        EdgeId he = site.edge_map.at(le);
        EdgeId re = vrhs.boundary[i];
        EdgeId host_piece;
        if (arc_extra.count(he))
            host_piece = var.li.stub_is_entry[i] ? he : arc_extra[he];
        else
            host_piece = he;
        uf.unite(host_piece, base_rhs + re);
    }

    // assemble the new crossing set
    Diagram nd;
    nd.name = d.name;
    for (auto& [c, x] : d.crossings) {
        if (img_cross.count(c)) continue;
        Crossing nx;
        for (int s = 0; s < 4; ++s) {
            EdgeId he = x.slot[s];
            EdgeId tok = he;
            if (auto it = arc_extra.find(he); it != arc_extra.end())
                if (host.info.head.at(he) == Dart{c, s}) tok = it->second;
            nx.slot[s] = uf.find(tok);
        }
        nd.crossings[c] = nx;
    }
    for (auto& [rc, x] : vrhs.crossings) {
        Crossing nx;
        for (int s = 0; s < 4; ++s) nx.slot[s] = uf.find(base_rhs + x.slot[s]);
        nd.crossings[d.next_cross + rc] = nx;
    }

    // token classes: which host edges / rhs components they contain
    std::map<EdgeId, std::set<int>> class_host_comp;  // root -> host comp idx
    std::map<EdgeId, std::set<std::string>> class_rhs; // root -> rhs comp names
    for (EdgeId he : host.edges) {
        if (interior_img.count(he)) continue;
        class_host_comp[uf.find(he)].insert(host.info.edge_comp.at(he));
        if (arc_extra.count(he))
            class_host_comp[uf.find(arc_extra[he])].insert(host.info.edge_comp.at(he));
    }
    for (auto& [e, h] : ri.head)
        class_rhs[uf.find(base_rhs + e)].insert(vrhs.comps.at(ri.owner.at(e)).name);

    // rule-local lhs name -> host unified component index
    std::map<std::string, int> before_idx;
    for (size_t ci = 0; ci < var.lhs.comps.size(); ++ci) {
        auto& comp = var.lhs.comps[ci];
        if (comp.is_loop) {
            auto it = site.loop_map.find(comp.name);
            if (it != site.loop_map.end())
                before_idx[comp.name] = (int)(d.components.size() + it->second);
        } else {
            EdgeId he = site.edge_map.at(comp.path.front());
            before_idx[comp.name] = host.info.edge_comp.at(he);
        }
    }

    // trace the strand cycles of the new crossing structure
    std::map<EdgeId, std::vector<Dart>> ends;
    for (auto& [c, x] : nd.crossings)
        for (int s = 0; s < 4; ++s) ends[x.slot[s]].push_back(Dart{c, s});
    for (auto& [e, v] : ends)
        if (v.size() != 2)
            fail(ErrorKind::Validation, "rewrite produced a malformed edge");
    std::set<EdgeId> visited;
    std::vector<std::vector<EdgeId>> cycles;
    for (auto& [e0, v0] : ends) {
        if (visited.count(e0)) continue;
        std::vector<EdgeId> cyc;
        EdgeId e = e0;
        Dart exit = v0[0];
        bool under_fwd = false, under_rev = false;
        do {
            cyc.push_back(e);
            visited.insert(e);
            under_fwd |= exit.slot == 0;
            under_rev |= exit.slot == 2;
            EdgeId nxt = nd.crossings.at(exit.cross).slot[(exit.slot + 2) % 4];
            Dart entry{exit.cross, (exit.slot + 2) % 4};
            auto& ne = ends.at(nxt);
            exit = (ne[0] == entry) ? ne[1] : ne[0];
            e = nxt;
        } while (e != e0);
        // pin the orientation from the under-passages: the strand must
        // arrive at slot 0, so an arrival at slot 2 means we traced backwards
        if (under_rev && !under_fwd) std::reverse(cyc.begin(), cyc.end());
        cycles.push_back(std::move(cyc));
    }
    // free circles: classes carrying strands but never reaching a crossing
    std::vector<EdgeId> circles;
    {
        std::set<EdgeId> roots;
        for (auto& [root, hcs] : class_host_comp) roots.insert(root);
        for (auto& [root, ns] : class_rhs) roots.insert(root);
        for (EdgeId root : roots)
            if (!ends.count(root)) circles.push_back(root);
    }

    // identify each cycle with a host component or a created one
    struct NewComp {
        std::string name;
        long long framing = 0;
        std::vector<EdgeId> cycle;
        bool is_circle = false;
        int host_comp = -1;       // -1 for created
        std::string rule_name;    // rhs component name when created
    };
    std::vector<NewComp> comps;
    std::set<int> host_claimed;
    std::set<std::string> names_in_use;
    for (auto& c : d.components) names_in_use.insert(c.name);
    for (auto& l : d.loops) names_in_use.insert(l.name);
    auto fresh_name = [&](std::string base) {
        std::string n = base;
        while (names_in_use.count(n)) n += "'";
        names_in_use.insert(n);
        return n;
    };
    auto identify = [&](const std::vector<EdgeId>& cyc, bool circle) {
        std::set<int> hostc;
        std::set<std::string> rhsn;
        for (EdgeId e : cyc) {
            if (auto it = class_host_comp.find(e); it != class_host_comp.end())
                hostc.insert(it->second.begin(), it->second.end());
            if (auto it = class_rhs.find(e); it != class_rhs.end())
                rhsn.insert(it->second.begin(), it->second.end());
        }
        NewComp nc;
        nc.cycle = cyc;
        nc.is_circle = circle;
        if (hostc.size() > 1)
            fail(ErrorKind::Unsupported, "rewrite would merge components");
        if (hostc.size() == 1) {
            int hidx = *hostc.begin();
            if (!host_claimed.insert(hidx).second)
                fail(ErrorKind::Unsupported, "rewrite would split a component");
            nc.host_comp = hidx;
            nc.name = d.component_name(hidx);
            nc.framing = d.component_framing(hidx);
        } else {
            // no surviving host piece: exactly one closed rhs component
            std::string created;
            for (auto& n : rhsn) {
                size_t idx = 0;
                for (; idx < vrhs.comps.size(); ++idx)
                    if (vrhs.comps[idx].name == n) break;
                if (!ri.comp_open[idx]) {
                    if (!created.empty() && created != n)
                        fail(ErrorKind::Validation, "ambiguous created component");
                    created = n;
                }
            }
            if (created.empty())
                fail(ErrorKind::Validation, "cycle without a component identity");
            if (auto bi = before_idx.find(created); bi != before_idx.end()) {
                // the same rule-local name appears in the lhs: this is a
                // surviving component rebuilt entirely inside the disc
                int hidx = bi->second;
                if (!host_claimed.insert(hidx).second)
                    fail(ErrorKind::Unsupported, "rewrite would split a component");
                nc.host_comp = hidx;
                nc.name = d.component_name(hidx);
                nc.framing = d.component_framing(hidx);
            } else {
                nc.rule_name = created;
                nc.name = fresh_name(created);
                size_t idx = 0;
                for (; idx < vrhs.comps.size(); ++idx)
                    if (vrhs.comps[idx].name == created) break;
                if (!vrhs.comps[idx].framing_any) nc.framing = vrhs.comps[idx].framing;
            }
        }
        comps.push_back(std::move(nc));
    };
    for (auto& cyc : cycles) identify(cyc, false);
    for (EdgeId root : circles) identify({root}, true);

    // deterministic order: surviving host components first, then created
    std::stable_sort(comps.begin(), comps.end(), [](const NewComp& a, const NewComp& b) {
        if ((a.host_comp < 0) != (b.host_comp < 0)) return b.host_comp < 0;
        return a.host_comp < b.host_comp;
    });

    // deleted host components must carry a delete action
    std::set<std::string> deleted_rule_names, created_rule_names;
    for (auto& a : r.actions) {
        if (a.kind == Action::Delete) deleted_rule_names.insert(a.comp);
        if (a.kind == Action::Create) created_rule_names.insert(a.comp);
    }
    for (size_t hi = 0; hi < d.components.size(); ++hi) {
        if (host_claimed.count((int)hi)) continue;
        bool deleted = false;
        for (auto& n : deleted_rule_names)
            if (before_idx.count(n) && before_idx[n] == (int)hi) deleted = true;
        if (!deleted)
            fail(ErrorKind::Site, "component '" + d.components[hi].name +
                                      "' vanished without a delete action");
    }

    // rule-local name -> created component final name
    std::map<std::string, std::string> created_name;
    for (auto& nc : comps)
        if (nc.host_comp < 0 && !nc.is_circle) created_name[nc.rule_name] = nc.name;
    for (auto& nc : comps)
        if (nc.host_comp < 0 && nc.is_circle && !created_name.count(nc.rule_name))
            created_name[nc.rule_name] = nc.name;

    // assemble components and loops
    for (auto& nc : comps) {
        if (nc.is_circle) continue;
        Component c;
        c.name = nc.name;
        c.framing = nc.framing;
        c.cycle = nc.cycle;
        nd.components.push_back(std::move(c));
    }
    // loops: surviving host loops, circles, created rhs loops (faces fixed below)
    struct PendingLoop {
        FreeLoop loop;
        int old_face = -1;     // host face to remap, or -1
        int rhs_region = -1;   // rhs region to resolve, or -1
        std::string rule_name; // for created loops
    };
    std::vector<PendingLoop> pending;
    std::set<size_t> consumed_loops;
    for (auto& [n, j] : site.loop_map) consumed_loops.insert(j);
    for (size_t j = 0; j < d.loops.size(); ++j) {
        if (consumed_loops.count(j)) continue;
        pending.push_back({d.loops[j], d.loops[j].face, -1, ""});
    }
    for (auto& nc : comps)
        if (nc.is_circle) {
            FreeLoop fl;
            fl.name = nc.name;
            fl.framing = nc.framing;
            int of = -1;
            if (nc.host_comp >= 0 && nc.host_comp < (int)d.components.size()) {
                // the circle sits where its old strand ran
                EdgeId e = d.components[nc.host_comp].cycle.front();
                of = host.info.face_of(host.info.head.at(e));
            } else if (nc.host_comp >= 0) {
                of = d.loops[nc.host_comp - d.components.size()].face;
            }
            pending.push_back({fl, of, -1, nc.rule_name});
        }
    for (size_t cj = 0; cj < vrhs.comps.size(); ++cj) {
        auto& rc = vrhs.comps[cj];
        if (!rc.is_loop) continue;
        FreeLoop fl;
        if (auto it = site.loop_map.find(rc.name); it != site.loop_map.end()) {
            // same-named lhs loop: the host loop survives, only its face moves
            fl = d.loops[it->second];
        } else {
            fl.name = fresh_name(rc.name);
            if (!rc.framing_any) fl.framing = rc.framing;
            created_name[rc.name] = fl.name;
        }
        pending.push_back({fl, -1, rc.region, rc.name});
    }

    nd.next_cross = 0;
    for (auto& [c, x] : nd.crossings) nd.next_cross = std::max(nd.next_cross, c + 1);
    nd.next_edge = base_extra + (EdgeId)arc_extra.size();

    // resolve loop faces against the rewritten diagram
    DiagramInfo ninfo = analyze(nd);
    auto old_face_to_new = [&](int of) {
        if (of >= 0 && of < (int)host.info.faces.size())
            for (auto& dt : host.info.faces[of])
                if (!img_cross.count(dt.cross)) return ninfo.face_of(dt);
        return 0;
    };
    for (auto& p : pending) {
        if (p.rhs_region >= 0) {
            int nf = 0;
            if (!vrhs.crossings.empty()) {
                int rf = ri.region_face.at(p.rhs_region);
                for (int dt : ri.faces[rf]) {
                    auto& lb = ri.label[dt];
                    if (lb.kind == TangleInfo::DartLabel::Cross) {
                        nf = ninfo.face_of(Dart{d.next_cross + lb.cross, lb.slot});
                        break;
                    }
                }
            } else if (site.host_face >= 0) {
                nf = old_face_to_new(site.host_face);
            }
            p.loop.face = std::max(nf, 0);
        } else {
            p.loop.face = std::max(old_face_to_new(p.old_face), 0);
        }
        nd.loops.push_back(p.loop);
    }

    // framing actions --------------------------------------------------------
    DiagramInfo after_info = analyze(nd);
    auto resolve_after = [&](const std::string& n) {
        std::string nn = created_name.count(n) ? created_name[n]
                       : before_idx.count(n)   ? d.component_name(before_idx[n])
                                               : n;
        int idx = nd.component_index(nn);
        if (idx < 0) fail(ErrorKind::Lookup, "framing action references missing component");
        return idx;
    };
    auto eval_action = [&](const ExprPtr& ex, const std::map<std::string, int>& extra_before,
                           const std::map<std::string, std::string>& extra_after) {
        bool before_ok = true;
        for (auto& n : referenced_names(ex))
            if (!before_idx.count(n) && !extra_before.count(n)) before_ok = false;
        ExprEnv env;
        if (before_ok) {
            env.framing_of = [&](const std::string& n) {
                auto it = extra_before.find(n);
                int i = it != extra_before.end() ? it->second : before_idx.at(n);
                return d.component_framing(i);
            };
            env.lk_of = [&](const std::string& a, const std::string& b) {
                auto ia = extra_before.count(a) ? extra_before.at(a) : before_idx.at(a);
                auto ib = extra_before.count(b) ? extra_before.at(b) : before_idx.at(b);
                return linking_number(d, host.info, ia, ib);
            };
        } else {
            env.framing_of = [&](const std::string& n) {
                auto it = extra_after.find(n);
                int i = it != extra_after.end() ? nd.component_index(it->second)
                                                : resolve_after(n);
                return nd.component_framing(i);
            };
            env.lk_of = [&](const std::string& a, const std::string& b) {
                auto ra = extra_after.count(a) ? nd.component_index(extra_after.at(a))
                                               : resolve_after(a);
                auto rb = extra_after.count(b) ? nd.component_index(extra_after.at(b))
                                               : resolve_after(b);
                return linking_number(nd, after_info, ra, rb);
            };
        }
        return eval(ex, env);
    };

    // creations first, then all deltas evaluated against fixed snapshots
    for (auto& a : r.actions) {
        if (a.kind != Action::Create) continue;
        long long v = eval_action(a.expr, {}, {});
        int idx = resolve_after(a.comp);
        nd.set_component_framing(idx, v);
    }
    std::vector<std::pair<int, long long>> deltas;
    for (auto& a : r.actions) {
        switch (a.kind) {
        case Action::Create: break;
        case Action::Delete: {
            auto it = before_idx.find(a.comp);
            if (it == before_idx.end())
                fail(ErrorKind::Lookup, "delete action references missing component");
            long long need = eval_action(a.expr, {}, {});
            if (d.component_framing(it->second) != need)
                fail(ErrorKind::Site, "deleted component '" + a.comp +
                                          "' does not have the required framing");
            break;
        }
        case Action::AddFraming: {
            long long v = eval_action(a.expr, {}, {});
            deltas.push_back({resolve_after(a.comp), a.sign * v});
            break;
        }
        case Action::ForEach: {
            // surviving pre-existing components, in host order
            for (size_t hi = 0; hi < d.num_components(); ++hi) {
                std::string hname = d.component_name(hi);
                int nidx = nd.component_index(hname);
                if (nidx < 0) continue; // consumed by the move
                std::map<std::string, int> eb{{a.comp, (int)hi}};
                std::map<std::string, std::string> ea{{a.comp, hname}};
                long long v = eval_action(a.expr, eb, ea);
                deltas.push_back({nidx, a.sign * v});
            }
            break;
        }
        }
    }
    for (auto& [idx, dv] : deltas)
        nd.set_component_framing(idx, nd.component_framing(idx) + dv);

    // final validation and the move's expected linking-matrix delta
    auto report = validate(nd);
    if (!report.ok())
        fail(ErrorKind::Validation, "rewrite produced an invalid diagram: " + report.to_string());
    MoveBinding binding;
    binding.kind = r.kind;
    if (r.kind.tag == MoveKind::BlowDown && !deleted_rule_names.empty())
        binding.loop_comp = d.component_name(before_idx.at(*deleted_rule_names.begin()));
    if (r.kind.tag == MoveKind::BlowUp && !created_rule_names.empty())
        binding.loop_comp = created_name.count(*created_rule_names.begin())
                                ? created_name[*created_rule_names.begin()]
                                : *created_rule_names.begin();
    if (r.kind.tag == MoveKind::HandleSlide) {
        for (auto& a : r.actions)
            if (a.kind == Action::AddFraming) {
                binding.slid = d.component_name(before_idx.at(a.comp));
                for (auto& n : referenced_names(a.expr))
                    if (n != a.comp) {
                        binding.over = d.component_name(before_idx.at(n));
                        break;
                    }
                break;
            }
    }
    auto violation = check_expected_delta(binding, linking_matrix(d), linking_matrix(nd));
    if (violation)
        fail(ErrorKind::Delta, "move '" + r.name + "': " + *violation);
    return nd;
}

} // namespace kirby
