#pragma once

#include <map>
#include <vector>

#include "core/error.hpp"

namespace kirby {

// Generic rotation-system map: vertices carry a counterclockwise cyclic
// order of darts, alpha pairs the two darts of each edge.  Faces are orbits
// of sigma(alpha(d)) where sigma steps to the next dart ccw at a vertex.
struct RotMap {
    std::vector<std::vector<int>> vertex_darts; // per vertex, dart ids ccw
    std::vector<int> alpha;                     // dart -> opposite dart
    std::vector<int> dart_vertex;               // dart -> vertex
    std::vector<int> dart_pos;                  // dart -> index in vertex order

    int add_vertex() {
        vertex_darts.emplace_back();
        return (int)vertex_darts.size() - 1;
    }
    int add_dart(int vertex) {
        int d = (int)alpha.size();
        alpha.push_back(-1);
        dart_vertex.push_back(vertex);
        dart_pos.push_back((int)vertex_darts[vertex].size());
        vertex_darts[vertex].push_back(d);
        return d;
    }
    void pair(int d1, int d2) {
        alpha[d1] = d2;
        alpha[d2] = d1;
    }
    int sigma(int d) const {
        auto& v = vertex_darts[dart_vertex[d]];
        return v[(dart_pos[d] + 1) % v.size()];
    }
    int face_next(int d) const {
        int a = alpha[d];
        if (a < 0) fail(ErrorKind::Validation, "unpaired dart in rotation map");
        return sigma(a);
    }

    // Orbits of face_next, in deterministic order of least dart id.
    std::vector<std::vector<int>> faces() const {
        std::vector<std::vector<int>> out;
        std::vector<bool> seen(alpha.size(), false);
        for (int d0 = 0; d0 < (int)alpha.size(); ++d0) {
            if (seen[d0]) continue;
            std::vector<int> face;
            int d = d0;
            do {
                face.push_back(d);
                seen[d] = true;
                d = face_next(d);
            } while (d != d0);
            out.push_back(std::move(face));
        }
        return out;
    }

    // Euler characteristic per connected part must be 2 on a sphere.
    bool spherical() const {
        // connected parts via union-find over vertices
        std::vector<int> parent(vertex_darts.size());
        for (size_t i = 0; i < parent.size(); ++i) parent[i] = (int)i;
        auto find = [&](int x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (size_t d = 0; d < alpha.size(); ++d)
            parent[find(dart_vertex[d])] = find(dart_vertex[alpha[d]]);
        std::map<int, long long> v, e, f;
        for (size_t i = 0; i < vertex_darts.size(); ++i)
            if (!vertex_darts[i].empty()) v[find((int)i)]++;
        for (size_t d = 0; d < alpha.size(); ++d) e[find(dart_vertex[d])]++;
        for (auto& face : faces())
            if (!face.empty()) f[find(dart_vertex[face[0]])]++;
        for (auto& [root, vc] : v)
            if (vc - e[root] / 2 + f[root] != 2) return false;
        return true;
    }
};

} // namespace kirby
