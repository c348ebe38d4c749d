#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "core/diagram.hpp"

namespace kirby {

namespace {

// Canonical traversal code of one connected part, starting from a given
// crossing.  The code lists, for every crossing in BFS discovery order, the
// relabeled other-end dart of each of its four slots plus the crossing sign;
// framings and hosted free-loop data are appended in label-independent order.
std::vector<long long> part_code(const Diagram& d, const DiagramInfo& info,
                                 const std::map<CrossId, int>& signs, CrossId start,
                                 const std::vector<std::pair<int, long long>>& hosted_loops) {
    std::map<CrossId, int> idx;
    std::vector<CrossId> seq;
    idx[start] = 0;
    seq.push_back(start);
    for (size_t qi = 0; qi < seq.size(); ++qi) {
        CrossId c = seq[qi];
        for (int s = 0; s < 4; ++s) {
            EdgeId e = d.crossings.at(c).slot[s];
            Dart other = *info.other_end(e, Dart{c, s});
            if (!idx.count(other.cross)) {
                idx[other.cross] = (int)seq.size();
                seq.push_back(other.cross);
            }
        }
    }

    std::vector<long long> code;
    for (CrossId c : seq) {
        for (int s = 0; s < 4; ++s) {
            EdgeId e = d.crossings.at(c).slot[s];
            Dart other = *info.other_end(e, Dart{c, s});
            code.push_back(idx.at(other.cross));
            code.push_back(other.slot);
        }
        code.push_back(signs.at(c));
    }

    // framings of the strand components of this part, ordered by the least
    // relabeled dart of each strand
    std::map<int, std::pair<int, int>> comp_key; // comp index -> min (idx, slot)
    for (auto& [e, ends] : info.edge_ends) {
        int comp = info.edge_comp.at(e);
        for (auto& dd : ends) {
            if (!idx.count(dd.cross)) goto next_edge; // other part
            std::pair<int, int> key{idx.at(dd.cross), dd.slot};
            auto it = comp_key.find(comp);
            if (it == comp_key.end() || key < it->second) comp_key[comp] = key;
        }
    next_edge:;
    }
    {
        std::vector<std::pair<std::pair<int, int>, int>> by_key;
        for (auto& [comp, key] : comp_key) by_key.push_back({key, comp});
        std::sort(by_key.begin(), by_key.end());
        code.push_back(-1);
        for (auto& [key, comp] : by_key) code.push_back(d.components[comp].framing);
    }

    // hosted free loops, grouped per face in canonical face order
    {
        // face id -> min relabeled dart, for faces of this part
        std::vector<std::pair<std::pair<int, int>, int>> face_order;
        for (size_t f = 0; f < info.faces.size(); ++f) {
            if (info.faces[f].empty() || !idx.count(info.faces[f][0].cross)) continue;
            std::pair<int, int> best{1 << 30, 0};
            for (auto& dd : info.faces[f])
                best = std::min(best, {idx.at(dd.cross), dd.slot});
            face_order.push_back({best, (int)f});
        }
        std::sort(face_order.begin(), face_order.end());
        code.push_back(-2);
        for (auto& [key, f] : face_order) {
            std::vector<long long> framings;
            for (auto& [lf, fr] : hosted_loops)
                if (lf == f) framings.push_back(fr);
            std::sort(framings.begin(), framings.end());
            code.push_back((long long)framings.size());
            for (auto v : framings) code.push_back(v);
        }
    }
    return code;
}

std::string join(const std::vector<long long>& v) {
    std::ostringstream os;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) os << ",";
        os << v[i];
    }
    return os.str();
}

} // namespace

std::string canonical_form(const Diagram& d) {
    DiagramInfo info = analyze(d);

    std::vector<std::pair<int, long long>> hosted; // (face, framing)
    for (auto& l : d.loops) hosted.push_back({l.face, l.framing});

    std::vector<std::vector<CrossId>> parts(info.num_parts);
    for (auto& [cid, p] : info.part) parts[p].push_back(cid);

    std::vector<std::string> codes;
    for (auto& pc : parts) {
        // orientation of never-under components is a free normalization;
        // minimize the code over flipping each of them
        std::vector<int> free_comps;
        {
            std::set<int> seen;
            for (CrossId c : pc)
                for (int s = 0; s < 4; ++s) {
                    int comp = info.edge_comp.at(d.crossings.at(c).slot[s]);
                    if (info.comp_ambiguous[comp] && seen.insert(comp).second)
                        free_comps.push_back(comp);
                }
        }
        if (free_comps.size() > 12)
            fail(ErrorKind::Unsupported, "too many orientation-free components in one part");

        std::vector<long long> best;
        for (size_t mask = 0; mask < (size_t{1} << free_comps.size()); ++mask) {
            std::map<CrossId, int> signs;
            for (CrossId c : pc) {
                int s = info.sign.at(c);
                int over = info.edge_comp.at(d.crossings.at(c).slot[1]);
                for (size_t b = 0; b < free_comps.size(); ++b)
                    if ((mask >> b & 1) && free_comps[b] == over) s = -s;
                signs[c] = s;
            }
            for (CrossId start : pc) {
                auto code = part_code(d, info, signs, start, hosted);
                if (best.empty() || code < best) best = std::move(code);
            }
        }
        codes.push_back(join(best));
    }
    std::sort(codes.begin(), codes.end());

    std::ostringstream os;
    os << "kcf1";
    for (auto& c : codes) os << "|" << c;
    if (info.faces.empty()) {
        // crossing-free diagram: all loops live in the single sphere face
        std::vector<long long> framings;
        for (auto& l : d.loops) framings.push_back(l.framing);
        std::sort(framings.begin(), framings.end());
        os << "|S" << join(framings);
    }
    return os.str();
}

bool is_equivalent(const Diagram& a, const Diagram& b) {
    return canonical_form(a) == canonical_form(b);
}

} // namespace kirby
