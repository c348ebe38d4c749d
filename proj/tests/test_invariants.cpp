#include <doctest.h>

#include <random>

#include "invariants/invariants.hpp"

using namespace kirby;

namespace {

IntMat from(std::initializer_list<std::initializer_list<long long>> rows) {
    IntMat m(rows.size(), rows.size() ? rows.begin()->size() : 0);
    size_t i = 0;
    for (auto& r : rows) {
        size_t j = 0;
        for (auto v : r) m.at(i, j++) = v;
        ++i;
    }
    return m;
}

IntMat random_symmetric(std::mt19937& rng, int n, int bound) {
    std::uniform_int_distribution<int> dist(-bound, bound);
    IntMat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) m.at(i, j) = m.at(j, i) = dist(rng);
    return m;
}

IntMat random_matrix(std::mt19937& rng, int n, int bound) {
    std::uniform_int_distribution<int> dist(-bound, bound);
    IntMat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.at(i, j) = dist(rng);
    return m;
}

bool unimodular(const IntMat& m) {
    Int d = determinant(m);
    return d == 1 || d == -1;
}

} // namespace

TEST_CASE("linking matrix of hopf and unknot") {
    Diagram h = parse_diagram(
        "link hopf\ncomp A 0 : a1 a2\ncomp B 0 : b1 b2\nx a1 b1 a2 b2\nx b2 a2 b1 a1\n");
    auto lk = linking_matrix(h);
    CHECK(lk.A == from({{0, 1}, {1, 0}}));

    Diagram e = parse_diagram("link empty\n");
    CHECK(linking_matrix(e).A.rows == 0);

    Diagram u = parse_diagram("link u\nloop U 5 in 0\n");
    CHECK(linking_matrix(u).A == from({{5}}));
}

TEST_CASE("smith normal form basics") {
    auto snf = smith_normal_form(from({{0, 1}, {1, 0}}));
    CHECK(snf.D == from({{1, 0}, {0, 1}}));

    auto p = smith_normal_form(from({{7}}));
    CHECK(p.D == from({{7}}));

    auto z = smith_normal_form(from({{0, 0}, {0, 0}}));
    CHECK(z.D == from({{0, 0}, {0, 0}}));
}

TEST_CASE("smith normal form properties on random matrices") {
    std::mt19937 rng(20240817);
    for (int trial = 0; trial < 500; ++trial) {
        int n = 1 + (int)(rng() % 6);
        IntMat A = random_matrix(rng, n, 5);
        auto snf = smith_normal_form(A);
        CHECK(snf.U * A * snf.V == snf.D);
        CHECK(unimodular(snf.U));
        CHECK(unimodular(snf.V));
        bool zero_seen = false;
        for (int i = 0; i + 1 < n; ++i) {
            Int a = snf.D.at(i, i), b = snf.D.at(i + 1, i + 1);
            if (a == 0) zero_seen = true;
            if (b != 0) CHECK(!zero_seen);
            if (a != 0) CHECK(b % a == 0);
        }
        Int prod = 1;
        bool nonzero = true;
        for (int i = 0; i < n; ++i) {
            prod *= snf.D.at(i, i);
            nonzero = nonzero && snf.D.at(i, i) != 0;
        }
        if (nonzero) CHECK(abs(determinant(A)) == abs(prod));
    }
}

TEST_CASE("first homology") {
    CHECK(first_homology(from({{0, 1}, {1, 0}})) == HomologyReport{{}, 0}); // S^3
    CHECK(first_homology(from({{5}})) == HomologyReport{{5}, 0});          // lens space
    CHECK(first_homology(from({{0}})) == HomologyReport{{}, 1});           // S^2 x S^1
}

TEST_CASE("homology is invariant under unimodular congruence") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 500; ++trial) {
        int n = 1 + (int)(rng() % 5);
        IntMat A = random_symmetric(rng, n, 5);
        IntMat E = IntMat::identity(n);
        // random product of elementary transvections
        for (int k = 0; k < 4; ++k) {
            int i = (int)(rng() % n), j = (int)(rng() % n);
            if (i == j) continue;
            IntMat T = IntMat::identity(n);
            T.at(i, j) = (int)(rng() % 3) - 1;
            E = E * T;
        }
        CHECK(first_homology(A) == first_homology(E.transposed() * A * E));
    }
}

TEST_CASE("signature") {
    CHECK(signature(from({{1}})) == 1);
    CHECK(signature(from({{-1}})) == -1);
    CHECK(signature(from({{0, 1}, {1, 0}})) == 0);
    CHECK(signature(from({{1, 0, 0}, {0, 1, 0}, {0, 0, -1}})) == 1);
    CHECK(signature(IntMat(0, 0)) == 0);
}

TEST_CASE("signature is additive on direct sums with [eps]") {
    std::mt19937 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 1 + (int)(rng() % 5);
        IntMat A = random_symmetric(rng, n, 4);
        for (int eps : {+1, -1}) {
            IntMat B(n + 1, n + 1);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) B.at(i, j) = A.at(i, j);
            B.at(n, n) = eps;
            CHECK(signature(B) == signature(A) + eps);
        }
    }
}

TEST_CASE("determinant of empty matrix is one") {
    CHECK(determinant(IntMat(0, 0)) == 1);
}

TEST_CASE("expected delta: handle slide") {
    LinkingData before{{"a", "b"}, from({{1, 0}, {0, 1}})};
    LinkingData after{{"a", "b"}, from({{2, 1}, {1, 1}})};
    MoveBinding mv;
    mv.kind = MoveKind{MoveKind::HandleSlide, +1, ""};
    mv.slid = "a";
    mv.over = "b";
    CHECK(!check_expected_delta(mv, before, after));
    // wrong sign fails
    mv.kind.sign = -1;
    CHECK(check_expected_delta(mv, before, after).has_value());
}

TEST_CASE("expected delta: blow down of a split loop") {
    LinkingData before{{"a", "K"}, from({{3, 0}, {0, -1}})};
    LinkingData after{{"a"}, from({{3}})};
    MoveBinding mv;
    mv.kind = MoveKind{MoveKind::BlowDown, -1, ""};
    mv.loop_comp = "K";
    CHECK(!check_expected_delta(mv, before, after));
}

TEST_CASE("expected delta: blow down with one strand updates framing") {
    // eps=-1 loop K, strand a with lk(a,K)=1 and framing 0 -> framing 1
    LinkingData before{{"a", "K"}, from({{0, 1}, {1, -1}})};
    LinkingData after{{"a"}, from({{1}})};
    MoveBinding mv;
    mv.kind = MoveKind{MoveKind::BlowDown, -1, ""};
    mv.loop_comp = "K";
    CHECK(!check_expected_delta(mv, before, after));
    // and the corresponding blow-up direction
    MoveBinding up;
    up.kind = MoveKind{MoveKind::BlowUp, -1, ""};
    up.loop_comp = "K";
    CHECK(!check_expected_delta(up, after, before));
}

TEST_CASE("expected delta: reidemeister fixes the matrix") {
    LinkingData before{{"a", "b"}, from({{0, 2}, {2, 5}})};
    MoveBinding mv;
    mv.kind = MoveKind{MoveKind::Reidemeister2, 0, ""};
    CHECK(!check_expected_delta(mv, before, before));
    LinkingData after{{"a", "b"}, from({{0, 1}, {1, 5}})};
    CHECK(check_expected_delta(mv, before, after).has_value());
}
