#include <doctest.h>

#include <algorithm>
#include <set>

#include "catalog/catalog.hpp"
#include "core/diagram.hpp"
#include "expand/expand.hpp"
#include "invariants/invariants.hpp"
#include "rewrite/sites.hpp"

using namespace kirby;

namespace {

Diagram empty_diagram() {
    Diagram d;
    d.name = "empty";
    return d;
}

// Off-diagonal adjacency of the linking matrix, as a degree sequence check
// for an unframed path graph (chain) on all components.
bool is_chain_matrix(const IntMat& A) {
    size_t n = A.rows;
    if (n == 0) return false;
    size_t deg1 = 0;
    for (size_t i = 0; i < n; ++i) {
        if (A.at(i, i) != 0) return false;
        size_t deg = 0;
        for (size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            if (A.at(i, j) != 0 && A.at(i, j) != 1) return false;
            if (A.at(i, j) == 1) ++deg;
        }
        if (deg > 2 || deg == 0) return false;
        if (deg == 1) ++deg1;
    }
    if (n == 1) return false;
    if (deg1 != 2) return false;
    // connectivity of the adjacency graph
    std::vector<bool> seen(n, false);
    std::vector<size_t> stack{0};
    seen[0] = true;
    size_t cnt = 1;
    while (!stack.empty()) {
        size_t i = stack.back();
        stack.pop_back();
        for (size_t j = 0; j < n; ++j)
            if (!seen[j] && A.at(i, j) == 1) {
                seen[j] = true;
                stack.push_back(j);
                ++cnt;
            }
    }
    return cnt == n;
}

} // namespace

TEST_CASE("script round-trips through text byte-identically") {
    MoveScript s;
    s.alphabet = {"bd0_neg^-1", "hs1_pos", "slide", "blowdown"};
    s.steps.push_back({"bd0_neg^-1", 3, "", "", 0, {}});
    s.steps.push_back({"slide", 0, "a", "b", -1, {4, 7}});
    s.steps.push_back({"blowdown", 0, "K", "", 0, {}});
    std::string text = serialize_script(s);
    MoveScript t = parse_script(text);
    CHECK(serialize_script(t) == text);
    CHECK(t.alphabet == s.alphabet);
    REQUIRE(t.steps.size() == 3);
    CHECK(t.steps[0].site == 3);
    CHECK(t.steps[1].comp_i == "a");
    CHECK(t.steps[1].comp_j == "b");
    CHECK(t.steps[1].sign == -1);
    CHECK(t.steps[1].band == std::vector<EdgeId>{4, 7});
    CHECK(t.steps[2].comp_i == "K");
}

TEST_CASE("script parser rejects malformed input") {
    CHECK_THROWS_AS(parse_script("step 1: r2 site 0\n"), Error);       // no alphabet
    CHECK_THROWS_AS(parse_script("alphabet: r2\nstep 2: r2 site 0\n"), Error); // bad numbering
    CHECK_THROWS_AS(parse_script("alphabet: r2\nstep 1: r2\n"), Error);        // no locator
    CHECK_THROWS_AS(parse_script("alphabet: r2\nstep 1: r2 site x\n"), Error); // bad index
}

TEST_CASE("replay rejects ops outside the declared alphabet") {
    MoveScript s;
    s.alphabet = {"r2"};
    s.steps.push_back({"bd0_neg^-1", 0, "", "", 0, {}});
    StepLog log;
    CHECK_THROWS_WITH_AS(replay(empty_diagram(), s, log),
                         doctest::Contains("alphabet"), Error);
    CHECK(log.steps.empty());
}

TEST_CASE("corrupted script fails at its step and keeps the prior log") {
    MoveScript s = expand_hopf_creation();
    REQUIRE(s.steps.size() >= 2);
    s.steps[2].site = 999; // stale locator
    StepLog log;
    bool threw = false;
    try {
        replay(empty_diagram(), s, log);
    } catch (const Error& e) {
        threw = true;
        CHECK(e.kind == ErrorKind::Site);
        CHECK(std::string(e.what()).find("step 3") != std::string::npos);
    }
    CHECK(threw);
    CHECK(log.steps.size() == 2);
}

TEST_CASE("hopf creation script: endpoint and census") {
    MoveScript s = expand_hopf_creation();

    // census: exactly three blow-ups and one blow-down, rest Reidemeister
    int ups = 0, downs = 0;
    for (const auto& st : s.steps) {
        bool inv = st.op.size() > 3 && st.op.substr(st.op.size() - 3) == "^-1";
        if (st.op.rfind("bd", 0) == 0)
            (inv ? ups : downs)++;
        else
            CHECK(st.op.rfind("r", 0) == 0);
    }
    CHECK(ups == 3);
    CHECK(downs == 1);

    auto [out, log] = replay(empty_diagram(), s);
    LinkingData lk = linking_matrix(out);
    REQUIRE(lk.A.rows == 2);
    CHECK(lk.A.at(0, 0) == 0);
    CHECK(lk.A.at(1, 1) == 0);
    CHECK(lk.A.at(0, 1) == 1);
    CHECK(lk.A.at(1, 0) == 1);
    HomologyReport h = first_homology(lk.A);
    CHECK(h.rank == 0);
    CHECK(h.torsion.empty());
    CHECK(signature(lk.A) == 0);
    CHECK(log.steps.size() == s.steps.size());
    CHECK(log.steps.back().det == Int(-1));
}

TEST_CASE("script generation is deterministic") {
    CHECK(serialize_script(expand_hopf_creation()) == serialize_script(expand_hopf_creation()));
    CHECK(serialize_script(expand_tail(2)) == serialize_script(expand_tail(2)));
}

TEST_CASE("tail scripts grow unknotted chains") {
    MoveScript hopf = expand_hopf_creation();
    Diagram chain2 = replay(empty_diagram(), hopf).first;

    CHECK(expand_tail(0).steps.empty());

    for (int m : {1, 2, 3}) {
        CAPTURE(m);
        MoveScript s = expand_tail(m);
        auto [out, log] = replay(chain2, s);
        LinkingData lk = linking_matrix(out);
        REQUIRE((int)lk.A.rows == 2 + 2 * m);
        CHECK(is_chain_matrix(lk.A));
        for (size_t i = 0; i < out.num_components(); ++i)
            CHECK(out.component_framing(i) == 0);
        HomologyReport h = first_homology(lk.A);
        CHECK(h.rank == 0);
        CHECK(h.torsion.empty());
    }
}

TEST_CASE("standard hosts close up the blow-down pattern") {
    for (int n : {0, 1, 2, 3, 4}) {
        for (int eps : {-1, 1}) {
            CAPTURE(n);
            CAPTURE(eps);
            Diagram d = standard_host(n, eps);
            CHECK(validate(d).ok());
            CHECK((int)d.num_components() == n + 1);
            RewriteRule r = fenn_rourke_rule(n, eps);
            auto sites = find_sites(d, r);
            CHECK(!sites.empty());
        }
    }
}

TEST_CASE("small blow-down expansions replay to the rule result") {
    for (int n : {0, 1, 2}) {
        for (int eps : {-1, 1}) {
            CAPTURE(n);
            CAPTURE(eps);
            Diagram host = standard_host(n, eps);
            RewriteRule r = fenn_rourke_rule(n, eps);
            Diagram want = apply_rule(host, r, find_sites(host, r).at(0));
            auto [got, log] = replay(host, expand_blowdown(n, eps));
            CHECK(canonical_form(got) == canonical_form(want));
        }
    }
}
