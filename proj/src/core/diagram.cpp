#include "core/diagram.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace kirby {

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    for (auto& i : issues) os << i.what << "\n";
    return os.str();
}

namespace {

// Collects issues; `strict` escalates structural defects to exceptions so
// that analyze() never returns garbage derived data.
struct Analyzer {
    const Diagram& d;
    bool strict;
    DiagramInfo info;
    std::vector<ValidationIssue> issues;
    bool structure_ok = true;

    explicit Analyzer(const Diagram& d, bool strict) : d(d), strict(strict) {}

    void problem(const std::string& what, bool structural = false) {
        if (structural) structure_ok = false;
        if (strict) fail(ErrorKind::Validation, what);
        issues.push_back({what});
    }

    EdgeId at(CrossId c, int s) const { return d.crossings.at(c).slot[(s % 4 + 4) % 4]; }

    void collect_edge_ends() {
        for (auto& [cid, cr] : d.crossings)
            for (int s = 0; s < 4; ++s)
                info.edge_ends[cr.slot[s]].push_back(Dart{cid, s});
        std::set<EdgeId> cycle_edges;
        for (auto& comp : d.components)
            for (EdgeId e : comp.cycle) {
                if (!cycle_edges.insert(e).second)
                    problem("edge multiplicity: edge " + std::to_string(e) +
                                " used more than once in component cycles",
                            true);
            }
        for (auto& [e, ends] : info.edge_ends) {
            if (ends.size() != 2)
                problem("edge multiplicity: edge " + std::to_string(e) + " has " +
                            std::to_string(ends.size()) + " crossing slots (want 2)",
                        true);
            if (!cycle_edges.count(e))
                problem("dangling edge: edge " + std::to_string(e) +
                            " appears at a crossing but in no component cycle",
                        true);
        }
        for (EdgeId e : cycle_edges)
            if (!info.edge_ends.count(e))
                problem("unknown edge: edge " + std::to_string(e) +
                            " in a component cycle but at no crossing",
                        true);
    }

    // Try to orient one component cycle given a choice of head for its first
    // edge.  An orientation is admissible when the cycle closes up through
    // the crossings and never enters a crossing at slot 2 (slot 0 is the
    // incoming under-strand by convention).
    std::optional<std::map<EdgeId, Dart>> try_orient(const Component& comp, const Dart& head0) {
        std::map<EdgeId, Dart> h;
        Dart head = head0;
        size_t k = comp.cycle.size();
        for (size_t i = 0; i < k; ++i) {
            EdgeId e = comp.cycle[i];
            EdgeId enext = comp.cycle[(i + 1) % k];
            if (head.slot == 2) return std::nullopt;
            Dart exit{head.cross, (head.slot + 2) % 4};
            if (at(exit.cross, exit.slot) != enext) return std::nullopt;
            h[e] = head;
            auto& ends = info.edge_ends.at(enext);
            Dart other = ends[0] == exit ? ends[1] : ends[0];
            if (other == exit) return std::nullopt; // degenerate kink
            head = other;
        }
        // the propagated head of cycle[0] must close onto the chosen start
        if (!(head == head0)) return std::nullopt;
        return h;
    }

    void orient_components() {
        info.comp_ambiguous.assign(d.components.size(), false);
        for (size_t ci = 0; ci < d.components.size(); ++ci) {
            auto& comp = d.components[ci];
            if (comp.cycle.empty()) {
                problem("component " + comp.name + " has an empty cycle (use a loop line)", true);
                continue;
            }
            for (EdgeId e : comp.cycle) info.edge_comp[e] = (int)ci;
            auto it = info.edge_ends.find(comp.cycle[0]);
            if (it == info.edge_ends.end() || it->second.size() != 2) continue; // reported already
            if (!structure_ok) continue;
            auto fwd = try_orient(comp, it->second[0]);
            auto rev = try_orient(comp, it->second[1]);
            if (!fwd && !rev) {
                problem("component " + comp.name +
                            " cycle is not a strand of the crossing structure",
                        true);
                continue;
            }
            auto& chosen = fwd ? *fwd : *rev;
            if (fwd && rev && !(*fwd == *rev)) info.comp_ambiguous[ci] = true;
            for (auto& [e, dd] : chosen) {
                info.head[e] = dd;
                auto& ends = info.edge_ends.at(e);
                info.tail[e] = ends[0] == dd ? ends[1] : ends[0];
            }
        }
        // every crossing slot must be covered by some component edge
        for (auto& [cid, cr] : d.crossings)
            for (int s = 0; s < 4; ++s)
                if (!info.edge_comp.count(cr.slot[s])) {
                    problem("dangling slot: crossing " + std::to_string(cid) + " slot " +
                                std::to_string(s) + " edge belongs to no component",
                            true);
                    return;
                }
    }

    void check_under_convention() {
        for (auto& [cid, cr] : d.crossings) {
            EdgeId e0 = cr.slot[0];
            auto h = info.head.find(e0);
            if (h == info.head.end()) continue;
            if (!(h->second == Dart{cid, 0}))
                problem("under-strand orientation: crossing " + std::to_string(cid) +
                        " slot 0 is not the incoming under-strand");
            EdgeId e1 = cr.slot[1], e3 = cr.slot[3];
            bool in1 = info.head.count(e1) && info.head.at(e1) == Dart{cid, 1};
            bool in3 = info.head.count(e3) && info.head.at(e3) == Dart{cid, 3};
            if (in1 == in3)
                problem("over-strand orientation: crossing " + std::to_string(cid) +
                        " slots 1/3 are not a directed over-strand");
            else
                info.sign[cid] = in1 ? +1 : -1;
        }
    }

    void trace_faces() {
        std::vector<Dart> all;
        for (auto& [cid, cr] : d.crossings)
            for (int s = 0; s < 4; ++s) all.push_back(Dart{cid, s});
        std::sort(all.begin(), all.end());
        std::set<Dart> seen;
        for (auto& start : all) {
            if (seen.count(start)) continue;
            std::vector<Dart> face;
            Dart cur = start;
            do {
                face.push_back(cur);
                seen.insert(cur);
                EdgeId e = at(cur.cross, cur.slot);
                auto other = info.other_end(e, cur);
                if (!other) return; // structural defect reported elsewhere
                cur = Dart{other->cross, (other->slot + 1) % 4};
            } while (!(cur == start));
            info.faces.push_back(std::move(face));
        }
    }

    void split_parts() {
        std::map<CrossId, CrossId> parent;
        for (auto& [cid, cr] : d.crossings) parent[cid] = cid;
        auto find = [&](CrossId x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (auto& [e, ends] : info.edge_ends)
            if (ends.size() == 2) parent[find(ends[0].cross)] = find(ends[1].cross);
        std::map<CrossId, int> index;
        for (auto& [cid, cr] : d.crossings) {
            CrossId r = find(cid);
            if (!index.count(r)) index[r] = info.num_parts++;
            info.part[cid] = index[r];
        }
        for (auto& f : info.faces)
            info.face_part.push_back(f.empty() ? -1 : info.part.at(f[0].cross));
    }

    void check_euler() {
        std::vector<long long> v(info.num_parts, 0), e(info.num_parts, 0), f(info.num_parts, 0);
        for (auto& [cid, p] : info.part) v[p]++;
        for (auto& [eid, ends] : info.edge_ends)
            if (ends.size() == 2) e[info.part.at(ends[0].cross)]++;
        for (size_t i = 0; i < info.faces.size(); ++i) f[info.face_part[i]]++;
        for (int p = 0; p < info.num_parts; ++p)
            if (v[p] - e[p] + f[p] != 2)
                problem("genus > 0: connected part " + std::to_string(p) + " has V-E+F = " +
                        std::to_string(v[p] - e[p] + f[p]));
    }

    void check_loops() {
        size_t nfaces = info.faces.empty() ? 1 : info.faces.size();
        for (auto& l : d.loops)
            if (l.face < 0 || (size_t)l.face >= nfaces)
                problem("free loop " + l.name + " references missing face " +
                        std::to_string(l.face));
        std::set<std::string> names;
        for (auto& c : d.components)
            if (!names.insert(c.name).second)
                problem("duplicate component name " + c.name, true);
        for (auto& l : d.loops)
            if (!names.insert(l.name).second)
                problem("duplicate component name " + l.name, true);
    }

    void run() {
        collect_edge_ends();
        check_loops();
        if (structure_ok) orient_components();
        if (structure_ok) {
            check_under_convention();
            trace_faces();
            split_parts();
            check_euler();
        }
    }
};

} // namespace

DiagramInfo analyze(const Diagram& d) {
    Analyzer a(d, /*strict=*/true);
    a.run();
    return std::move(a.info);
}

ValidationReport validate(const Diagram& d) {
    Analyzer a(d, /*strict=*/false);
    a.run();
    return ValidationReport{std::move(a.issues)};
}

long long linking_number(const Diagram& d, const DiagramInfo& info, int a, int b) {
    if (a == b || a < 0 || b < 0 || (size_t)a >= d.num_components() ||
        (size_t)b >= d.num_components())
        fail(ErrorKind::Lookup, "linking_number: bad component pair");
    long long twice = 0;
    for (auto& [cid, cr] : d.crossings) {
        int under = info.edge_comp.at(cr.slot[0]);
        int over = info.edge_comp.at(cr.slot[1]);
        if ((under == a && over == b) || (under == b && over == a))
            twice += info.sign.at(cid);
    }
    return twice / 2;
}

long long linking_number(const Diagram& d, const std::string& a, const std::string& b) {
    int ia = d.component_index(a), ib = d.component_index(b);
    if (ia < 0) fail(ErrorKind::Lookup, "unknown component " + a);
    if (ib < 0) fail(ErrorKind::Lookup, "unknown component " + b);
    return linking_number(d, analyze(d), ia, ib);
}

long long writhe(const Diagram& d, const DiagramInfo& info, int comp) {
    long long w = 0;
    for (auto& [cid, cr] : d.crossings) {
        int under = info.edge_comp.at(cr.slot[0]);
        int over = info.edge_comp.at(cr.slot[1]);
        if (under == comp && over == comp) w += info.sign.at(cid);
    }
    return w;
}

} // namespace kirby
