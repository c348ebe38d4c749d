#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <optional>
#include <string>
#include <vector>

#include "core/diagram.hpp"

namespace kirby {

using Int = boost::multiprecision::cpp_int;

// Small dense integer matrix, exact arithmetic throughout.
struct IntMat {
    size_t rows = 0, cols = 0;
    std::vector<Int> a;

    IntMat() = default;
    IntMat(size_t r, size_t c) : rows(r), cols(c), a(r * c) {}
    static IntMat identity(size_t n) {
        IntMat m(n, n);
        for (size_t i = 0; i < n; ++i) m.at(i, i) = 1;
        return m;
    }
    Int& at(size_t i, size_t j) { return a[i * cols + j]; }
    const Int& at(size_t i, size_t j) const { return a[i * cols + j]; }
    bool operator==(const IntMat&) const = default;
    IntMat transposed() const;
    IntMat operator*(const IntMat& o) const;
    std::string to_string() const;
};

// Symmetric linking matrix with the diagram's component order.
struct LinkingData {
    std::vector<std::string> names;
    IntMat A;
};

struct HomologyReport {
    std::vector<Int> torsion; // divisibility chain, each > 1
    long long rank = 0;
    bool operator==(const HomologyReport&) const = default;
};

struct SnfResult {
    IntMat D, U, V; // U*A*V = D, U and V unimodular
};

LinkingData linking_matrix(const Diagram& d);

SnfResult smith_normal_form(const IntMat& A);

HomologyReport first_homology(const IntMat& A);

// Number of positive minus negative eigenvalues, by exact rational
// congruence diagonalization (symmetric input required).
long long signature(const IntMat& A);

// Determinant by fraction-free elimination; det of the 0x0 matrix is 1.
Int determinant(const IntMat& A);

// JSON invariants report: matrix, det, h1, signature, b2.
std::string invariants_json(const Diagram& d);

// Per-move expected-delta predicates ---------------------------------------

struct MoveKind {
    enum Tag {
        Reidemeister1P,
        Reidemeister1M,
        Reidemeister2,
        Reidemeister3,
        HandleSlide, // sign
        BlowUp,      // eps
        BlowDown,    // eps
        Catalog,     // named rule carrying one of the kinds above
    } tag = Reidemeister2;
    int sign = 0;     // for HandleSlide / BlowUp / BlowDown
    std::string name; // for Catalog

    bool is_reidemeister() const {
        return tag == Reidemeister1P || tag == Reidemeister1M || tag == Reidemeister2 ||
               tag == Reidemeister3;
    }
    std::string to_string() const;
    static MoveKind parse(const std::vector<std::string>& tokens, int lineno);
};

// Concrete bindings of a performed move, used to instantiate the predicate.
struct MoveBinding {
    MoveKind kind;
    std::string slid;      // handle-slide: component slid (i)
    std::string over;      // handle-slide: component slid over (j)
    std::string loop_comp; // blow-up/down: the +-1 framed loop K
};

// Returns std::nullopt when the linking data of before/after relate exactly
// as the move kind demands; otherwise a human-readable violation.
std::optional<std::string> check_expected_delta(const MoveBinding& move,
                                                const LinkingData& before,
                                                const LinkingData& after);

} // namespace kirby
