#pragma once

#include <map>
#include <string>
#include <vector>

#include "rewrite/rule.hpp"

namespace kirby {

// A match of a rule's lhs into a host diagram.  `flipped` names the lhs
// components that matched with reversed orientation (unoriented rules);
// the maps are keyed to that variant.  Sites compare equal by image, which
// quotients out automorphisms of the lhs.
struct Site {
    std::vector<int> flipped;
    std::map<CrossId, CrossId> cross_map; // lhs crossing -> host crossing
    std::map<EdgeId, EdgeId> edge_map;    // lhs edge -> host edge
    std::map<std::string, size_t> loop_map; // lhs loop name -> host loop index
    int host_face = -1; // disc face, for lhs without crossings or arcs

    std::string key() const;
};

// All monomorphisms of r.lhs into d satisfying the disc condition, sorted
// deterministically and deduplicated by image.
std::vector<Site> find_sites(const Diagram& d, const RewriteRule& r);

// Excises the image, glues in the rhs along the boundary correspondence,
// runs the framing actions, revalidates, and checks the move kind's
// expected linking-matrix delta.  Throws Error(Site) for stale sites and
// Error(Delta) when the delta check fails.
Diagram apply_rule(const Diagram& d, const RewriteRule& r, const Site& s);

} // namespace kirby
