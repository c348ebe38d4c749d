#pragma once

#include <map>
#include <string>
#include <vector>

#include "core/diagram.hpp"
#include "core/rotmap.hpp"

namespace kirby {

// One end of an edge inside a tangle: either a crossing slot or a boundary
// stub (degree-1 endpoint on the disc rim).
struct TEnd {
    CrossId cross = -1;
    int slot = -1;
    int stub = -1; // boundary position, -1 when at a crossing
    bool is_stub() const { return stub >= 0; }
    bool operator==(const TEnd&) const = default;
};

// A component of a tangle: an open strand (path, entry to exit), a closed
// component through crossings (cyclic path), or a crossingless loop placed
// in a region of the disc.  Open strands and wildcard components use
// framing_any.
struct TangleComp {
    std::string name;
    bool framing_any = false;
    long long framing = 0;
    std::vector<EdgeId> path;
    bool is_loop = false; // crossingless circle; path empty, region used
    int region = 0;
    bool open = false; // derived: has boundary endpoints
};

struct Tangle {
    std::map<CrossId, Crossing> crossings;
    std::vector<TangleComp> comps;
    // Edge names in cyclic rim order, length 2n.  An edge with both ends on
    // the rim appears twice; its first written occurrence is its tail end.
    std::vector<EdgeId> boundary;
    // Optional per-position override of the tail-first convention:
    // -1 auto, 0 this position is the edge's tail end, 1 its head end.
    std::vector<int> boundary_end_hint;
};

// Everything derived from a tangle: orientations, crossing signs, the disc
// closure (tangle plus rim circle as a rotation map) and its face regions.
struct TangleInfo {
    int n = 0; // strand count, boundary.size()/2
    std::map<EdgeId, TEnd> head, tail;
    std::map<CrossId, int> sign;
    std::map<EdgeId, int> owner; // edge -> comp index
    std::vector<bool> stub_is_entry; // per boundary position
    std::vector<TEnd> stub_end;      // per boundary position
    std::vector<bool> comp_open;     // per component

    RotMap cmap; // tangle closed up with rim edges
    struct DartLabel {
        enum Kind { Cross, Stub, RimNext, RimPrev } kind;
        CrossId cross = -1;
        int slot = -1;
        int stub = -1; // boundary position for Stub/RimNext/RimPrev
        EdgeId edge = -1;
    };
    std::vector<DartLabel> label;                // per dart
    std::map<std::pair<CrossId, int>, int> cross_dart;
    std::vector<int> stub_dart, rim_next_dart, rim_prev_dart;

    std::vector<std::vector<int>> faces; // cmap faces
    std::vector<int> face_of_dart;
    int outer_face = -1;             // pure-rim face; -1 when n == 0
    std::vector<int> region_face;    // region index -> face index
    std::vector<int> face_region;    // face index -> region, -1 for outer
    int num_regions = 0;

    int comp_of_edge(EdgeId e) const;
};

// Validates the tangle and computes TangleInfo; throws Error on any
// structural defect (bad valences, orientation conventions, non-planar
// closure, rim order inconsistent with a disc embedding).
TangleInfo analyze_tangle(const Tangle& t);

std::string serialize_tangle(const Tangle& t, const std::string& block_name);

// Orientation-reversal variant: flips the listed components (by index).
// Boundary positions are preserved; entry/exit endpoints swap roles.
Tangle reverse_comps(const Tangle& t, const std::vector<int>& comps);

} // namespace kirby
