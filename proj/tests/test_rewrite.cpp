#include <doctest.h>

#include <set>

#include "core/diagram.hpp"
#include "invariants/invariants.hpp"
#include "rewrite/rule.hpp"
#include "rewrite/sites.hpp"

using namespace kirby;

namespace {

// Introduce two crossings: strand a pushed over strand b.
const char* kR2 = R"(rule r2_intro {
  kind: reidemeister2
  lhs {
    comp a * : u
    comp b * : v
    boundary : u u v v
  }
  rhs {
    x g2 f2 g3 f1
    x g1 f2 g2 f3
    comp a * : f1 f2 f3
    comp b * : g1 g2 g3
    boundary : f1 f3 g1 g3
  }
}
)";

// Add a positive kink on a strand.
const char* kR1Plus = R"(rule r1_plus {
  kind: reidemeister1+
  lhs {
    comp a * : e
    boundary : e e
  }
  rhs {
    x f m m g
    comp a * : f m g
    boundary : f g
  }
}
)";

// Remove an isolated -1-framed free loop.
const char* kBd0Neg = R"(rule bd0_neg {
  kind: blow_down -1
  lhs {
    loop K -1 in 0
    boundary :
  }
  rhs {
    boundary :
  }
  action: delete K require framing == -1
  action: foreach comp i : framing(i) -= -1 * lk(i,K)^2
}
)";

// Blow down a -1-framed loop with one strand through it; the strand picks up
// a positive kink.
const char* kBd1Neg = R"(rule bd1_neg {
  kind: blow_down -1
  lhs {
    x a1 k2 a2 k1
    x k2 a3 k1 a2
    comp a * : a1 a2 a3
    comp K -1 : k1 k2
    boundary : a1 a3
  }
  rhs {
    x f m m g
    comp a * : f m g
    boundary : f g
  }
  action: delete K require framing == -1
  action: foreach comp i : framing(i) -= -1 * lk(i,K)^2
}
)";

const char* kHopf = R"(link hopf
comp A 0 : a1 a2
comp B 0 : b1 b2
x a1 b1 a2 b2
x b2 a2 b1 a1
)";

// One 0-framed unknot passing once through a -1-framed circle K.
const char* kFr1Host = R"(link fr1host
comp S 0 : sm sc
comp K -1 : k1 k2
x sc k2 sm k1
x k2 sc k1 sm
)";

RewriteRule parse_one(const char* text) {
    auto rules = parse_rules(text);
    REQUIRE(rules.size() == 1);
    return rules[0];
}

} // namespace

TEST_CASE("krl parse and serialize round-trip") {
    for (const char* src : {kR2, kR1Plus, kBd0Neg, kBd1Neg}) {
        auto rules = parse_rules(src);
        REQUIRE(rules.size() == 1);
        std::string once = serialize_rules(rules);
        auto again = parse_rules(once);
        CHECK(serialize_rules(again) == once);
    }
}

TEST_CASE("krl boundary mismatch is rejected") {
    const char* bad = R"(rule bad {
  kind: reidemeister2
  lhs {
    comp a * : u
    comp b * : v
    boundary : u u v v
  }
  rhs {
    comp a * : u
    boundary : u u
  }
}
)";
    CHECK_THROWS_WITH_AS(parse_rules(bad), doctest::Contains("boundary mismatch"), Error);
}

TEST_CASE("krl missing framing action is rejected") {
    const char* bad = R"(rule bad {
  kind: blow_down -1
  lhs {
    loop K -1 in 0
    boundary :
  }
  rhs {
    boundary :
  }
}
)";
    CHECK_THROWS_WITH_AS(parse_rules(bad), doctest::Contains("missing framing action"), Error);
}

TEST_CASE("rule inversion is an involution") {
    for (const char* src : {kR2, kR1Plus, kBd0Neg, kBd1Neg}) {
        auto r = parse_one(src);
        auto inv = inverse(r);
        validate_rule(inv);
        CHECK(serialize_rule(inverse(inv)) == serialize_rule(r));
        CHECK(inv.name == r.name + "^-1");
    }
    auto bd = parse_one(kBd0Neg);
    CHECK(inverse(bd).kind.tag == MoveKind::BlowUp);
    CHECK(inverse(bd).kind.sign == -1);
}

TEST_CASE("reidemeister-2 sites on the Hopf link match brute force") {
    Diagram hopf = parse_diagram(kHopf);
    auto r2 = parse_one(kR2);
    auto sites = find_sites(hopf, r2);

    // independent oracle: ordered pairs of distinct edges bordering a common
    // face (the only requirement for pushing one strand over the other)
    DiagramInfo info = analyze(hopf);
    int expected = 0;
    for (auto& [e1, x1] : info.edge_ends)
        for (auto& [e2, x2] : info.edge_ends) {
            if (e1 == e2) continue;
            bool common = false;
            for (auto& f : info.faces) {
                bool h1 = false, h2 = false;
                for (auto& dt : f) {
                    EdgeId e = hopf.crossings.at(dt.cross).slot[dt.slot];
                    h1 |= e == e1;
                    h2 |= e == e2;
                }
                common |= h1 && h2;
            }
            if (common) ++expected;
        }
    CHECK(expected > 0);
    CHECK((int)sites.size() == expected);

    // determinism: same input bytes, same site list
    auto again = find_sites(hopf, r2);
    REQUIRE(again.size() == sites.size());
    for (size_t i = 0; i < sites.size(); ++i) CHECK(again[i].key() == sites[i].key());
}

TEST_CASE("blow-down site enumeration on loops") {
    auto bd0 = parse_one(kBd0Neg);

    Diagram empty;
    CHECK(find_sites(empty, bd0).empty());

    Diagram d;
    d.loops.push_back({"K", -1, 0});
    auto sites = find_sites(d, bd0);
    REQUIRE(sites.size() == 1);

    // wrong framing: no site
    Diagram d2;
    d2.loops.push_back({"K", 1, 0});
    CHECK(find_sites(d2, bd0).empty());
}

TEST_CASE("blow-up on the empty diagram creates a -1 loop") {
    auto bu0 = inverse(parse_one(kBd0Neg));
    Diagram empty;
    auto sites = find_sites(empty, bu0);
    REQUIRE(sites.size() == 1);
    Diagram out = apply_rule(empty, bu0, sites[0]);
    REQUIRE(out.loops.size() == 1);
    CHECK(out.components.empty());
    CHECK(out.loops[0].framing == -1);
    auto lk = linking_matrix(out);
    REQUIRE(lk.A.rows == 1);
    CHECK(lk.A.at(0, 0) == -1);

    // blowing the loop back down returns the empty diagram
    auto bd0 = parse_one(kBd0Neg);
    auto back = find_sites(out, bd0);
    REQUIRE(back.size() == 1);
    Diagram again = apply_rule(out, bd0, back[0]);
    CHECK(canonical_form(again) == canonical_form(empty));
}

TEST_CASE("one-strand blow-down produces the twist and framing update") {
    Diagram host = parse_diagram(kFr1Host);
    auto bd1 = parse_one(kBd1Neg);
    auto sites = find_sites(host, bd1);
    // two sites: on the sphere both complementary regions of the circle K
    // are discs, so the configuration matches from either side
    REQUIRE(sites.size() == 2);
    std::set<std::string> outcomes;
    for (auto& s : sites) {
        Diagram out = apply_rule(host, bd1, s);
        REQUIRE(out.components.size() == 1);
        CHECK(out.components[0].name == "S");
        CHECK(out.components[0].framing == 1);
        REQUIRE(out.crossings.size() == 1);
        DiagramInfo info = analyze(out);
        CHECK(info.sign.begin()->second == 1); // positive kink
        outcomes.insert(canonical_form(out));
    }
    CHECK(outcomes.size() == 1);
}

TEST_CASE("reidemeister-1 pair cancels to the original diagram") {
    Diagram hopf = parse_diagram(kHopf);
    auto r1 = parse_one(kR1Plus);
    auto sites = find_sites(hopf, r1);
    REQUIRE(!sites.empty());
    Diagram kinked = apply_rule(hopf, r1, sites[0]);
    CHECK(kinked.crossings.size() == hopf.crossings.size() + 1);
    CHECK(check_expected_delta(MoveBinding{r1.kind}, linking_matrix(hopf),
                               linking_matrix(kinked)) == std::nullopt);

    auto r1inv = inverse(r1);
    auto back = find_sites(kinked, r1inv);
    REQUIRE(!back.empty());
    bool restored = false;
    for (auto& s : back) {
        Diagram undone = apply_rule(kinked, r1inv, s);
        if (canonical_form(undone) == canonical_form(hopf)) restored = true;
    }
    CHECK(restored);
}

TEST_CASE("reidemeister-2 apply and undo round-trips") {
    Diagram hopf = parse_diagram(kHopf);
    auto r2 = parse_one(kR2);
    auto sites = find_sites(hopf, r2);
    REQUIRE(!sites.empty());
    Diagram pushed = apply_rule(hopf, r2, sites[0]);
    CHECK(pushed.crossings.size() == 4);
    CHECK(check_expected_delta(MoveBinding{r2.kind}, linking_matrix(hopf),
                               linking_matrix(pushed)) == std::nullopt);

    auto r2inv = inverse(r2);
    auto back = find_sites(pushed, r2inv);
    REQUIRE(!back.empty());
    bool restored = false;
    for (auto& s : back) {
        Diagram undone = apply_rule(pushed, r2inv, s);
        if (canonical_form(undone) == canonical_form(hopf)) restored = true;
    }
    CHECK(restored);
}

TEST_CASE("stale sites are rejected") {
    Diagram d;
    d.loops.push_back({"K", -1, 0});
    auto bd0 = parse_one(kBd0Neg);
    auto sites = find_sites(d, bd0);
    REQUIRE(sites.size() == 1);
    Diagram gone = apply_rule(d, bd0, sites[0]);
    CHECK_THROWS_AS(apply_rule(gone, bd0, sites[0]), Error);
}
