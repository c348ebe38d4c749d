#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace kirby {

// A framed link diagram as a combinatorial map on S^2.
//
// Crossings are 4-valent vertices with a fixed counterclockwise slot order:
// slot 0 is the incoming under-strand, slot 2 the outgoing under-strand,
// slots 1/3 carry the over-strand.  Edges are arcs between crossing slots;
// every edge id occurs in exactly two slots.  Components are oriented edge
// cycles carrying an integer framing.  Crossing-free circle components are
// stored separately as free loops hosted in a face of the 4-valent graph.

using CrossId = int;
using EdgeId = int;

struct Crossing {
    std::array<EdgeId, 4> slot{};
};

struct Component {
    std::string name;
    long long framing = 0;
    std::vector<EdgeId> cycle; // oriented, each edge once
};

struct FreeLoop {
    std::string name;
    long long framing = 0;
    int face = 0; // index into the derived face table
};

struct Diagram {
    std::string name = "unnamed";
    std::map<CrossId, Crossing> crossings;
    std::vector<Component> components;
    std::vector<FreeLoop> loops;
    CrossId next_cross = 0;
    EdgeId next_edge = 0;

    CrossId add_crossing(EdgeId e0, EdgeId e1, EdgeId e2, EdgeId e3) {
        CrossId id = next_cross++;
        crossings[id] = Crossing{{e0, e1, e2, e3}};
        return id;
    }
    EdgeId fresh_edge() { return next_edge++; }

    const Component* find_component(const std::string& n) const {
        for (auto& c : components)
            if (c.name == n) return &c;
        return nullptr;
    }
    int component_index(const std::string& n) const {
        for (size_t i = 0; i < components.size(); ++i)
            if (components[i].name == n) return (int)i;
        for (size_t i = 0; i < loops.size(); ++i)
            if (loops[i].name == n) return (int)(components.size() + i);
        return -1;
    }
    // Unified component view: cycle components first, then free loops.
    size_t num_components() const { return components.size() + loops.size(); }
    const std::string& component_name(size_t i) const {
        return i < components.size() ? components[i].name : loops[i - components.size()].name;
    }
    long long component_framing(size_t i) const {
        return i < components.size() ? components[i].framing : loops[i - components.size()].framing;
    }
    void set_component_framing(size_t i, long long f) {
        if (i < components.size())
            components[i].framing = f;
        else
            loops[i - components.size()].framing = f;
    }
};

// A dart is one end of an edge sitting in a crossing slot.
struct Dart {
    CrossId cross = -1;
    int slot = -1;
    bool operator==(const Dart&) const = default;
    auto operator<=>(const Dart&) const = default;
};

// Derived, label-independent structure of a diagram.  Computed once per
// value; diagrams are immutable after construction so this never goes stale.
struct DiagramInfo {
    // edge id -> the one or two darts where it sits (size 2 for all edges
    // of a well-formed closed diagram)
    std::map<EdgeId, std::vector<Dart>> edge_ends;
    // edge id -> dart at its head (direction from component traversal)
    std::map<EdgeId, Dart> head;
    std::map<EdgeId, Dart> tail;
    std::map<EdgeId, int> edge_comp; // edge -> component index
    std::map<CrossId, int> sign;     // crossing sign, +1 / -1
    // components that never run under a crossing and whose cycle traces in
    // both directions; their orientation is a free normalization choice
    std::vector<bool> comp_ambiguous;
    // faces: orbits of dart -> rotate(other_end(dart)); deterministic order
    std::vector<std::vector<Dart>> faces;
    std::map<CrossId, int> part; // connected part index of the 4-valent graph
    int num_parts = 0;
    std::vector<int> face_part; // part index per face (-1 for the sphere face)

    std::optional<Dart> other_end(EdgeId e, const Dart& d) const {
        auto it = edge_ends.find(e);
        if (it == edge_ends.end()) return std::nullopt;
        for (auto& x : it->second)
            if (!(x == d)) return x;
        // kink on the same crossing pair appears twice with distinct slots;
        // identical darts mean a degenerate edge
        return std::nullopt;
    }
    int face_of(const Dart& d) const {
        for (size_t i = 0; i < faces.size(); ++i)
            for (auto& x : faces[i])
                if (x == d) return (int)i;
        return -1;
    }
};

struct ValidationIssue {
    std::string what;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
    std::string to_string() const;
};

// Analysis entry points --------------------------------------------------

// Structural analysis; throws Error(Validation) on defects that make the
// derived data meaningless (bad edge multiplicity, inconsistent cycles).
DiagramInfo analyze(const Diagram& d);

// Non-throwing full validation; collects every violated invariant.
ValidationReport validate(const Diagram& d);

// Linking number between two distinct components (by unified index).
long long linking_number(const Diagram& d, const DiagramInfo& info, int a, int b);
long long linking_number(const Diagram& d, const std::string& a, const std::string& b);

// Writhe of one component (sum of self-crossing signs).
long long writhe(const Diagram& d, const DiagramInfo& info, int comp);

// Serialization (.fld format) -------------------------------------------
std::string serialize(const Diagram& d);
Diagram parse_diagram(const std::string& text);

// Canonical form ----------------------------------------------------------
// Equal byte strings iff the diagrams are isomorphic as framing-labeled
// oriented combinatorial maps on S^2.
std::string canonical_form(const Diagram& d);
bool is_equivalent(const Diagram& a, const Diagram& b);

} // namespace kirby
