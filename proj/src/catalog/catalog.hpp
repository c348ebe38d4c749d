#pragma once

#include <string>
#include <vector>

#include "core/diagram.hpp"
#include "rewrite/rule.hpp"

namespace kirby {

// Full twist on n parallel strands as an explicit tangle: the braid
// (s1 s2 ... s(n-1))^n with all n(n-1) crossings of sign eps.  Strands are
// named a, b, c, ... top to bottom and run west to east; the boundary lists
// the west stubs top-down and then the east stubs bottom-up.
Tangle twist_box(int n, int eps);

// The n-strand blow-down rule: lhs is an eps-framed unknot K encircled by n
// strands (2n crossings), rhs the same strands with one full -eps twist.
// Actions: delete K (require framing eps) and the quadratic framing update.
RewriteRule fenn_rourke_rule(int n, int eps);

// Shipped rule files (embedded copies of data/*.krl).
const std::string& fig3_text();
const std::string& reidemeister_text();
const std::vector<RewriteRule>& fig3_rules();
const std::vector<RewriteRule>& reidemeister_rules();

// fig3 + reidemeister in shipped order.
std::vector<RewriteRule> full_catalog();

// Lookup by name; "name^-1" resolves to the inverse of "name".
RewriteRule catalog_rule(const std::string& name);

// Semantic (non-local) operations ------------------------------------------

// Slide component i over component j: i is replaced by its band sum with a
// framed pushoff of j (blackboard parallel plus correction kinks).  The band
// starts at face `face` adjacent to an edge of i and crosses the host edges
// listed in `band` (in order) to reach j, passing over them.  Framing of i
// becomes f_i + f_j + 2*sign*lk(i,j); the linking matrix relates by E^T A E.
Diagram handle_slide(const Diagram& d, const std::string& i, const std::string& j,
                     int sign, const std::vector<EdgeId>& band = {});

// Blow down component k: requires k to sit in a fenn_rourke_rule(n, eps) lhs
// configuration for some n (found via find_sites); applies that rule.
Diagram blow_down(const Diagram& d, const std::string& k, int max_n = 8);

} // namespace kirby
