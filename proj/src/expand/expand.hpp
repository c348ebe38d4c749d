#pragma once

#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "core/diagram.hpp"
#include "invariants/invariants.hpp"
#include "rewrite/sites.hpp"

namespace kirby {

// One step of a move script.  `op` is either a catalog rule name (possibly
// with a "^-1" suffix), the semantic op "slide", or the semantic op
// "blowdown".  Rule steps locate their site by deterministic match index
// into find_sites(); semantic steps locate components by name (anchors:
// names of components present in the host or created by earlier steps).
struct MoveStep {
    std::string op;
    int site = 0;                    // match index for rule ops
    std::string comp_i, comp_j;      // slide: i over j; blowdown: comp_i
    int sign = 0;                    // slide sign
    std::vector<EdgeId> band;        // slide: host edges the band crosses
};

struct MoveScript {
    std::vector<std::string> alphabet; // allowed ops, as written in steps
    std::vector<MoveStep> steps;
};

std::string serialize_script(const MoveScript& s);
MoveScript parse_script(const std::string& text);

// Per-step invariant record; `op` repeats the step op for readability.
struct StepRecord {
    std::string op;
    LinkingData lk;
    HomologyReport h1;
    Int det;
    long long sig = 0;
};

struct StepLog {
    std::vector<StepRecord> steps;
    std::string to_json() const;
};

// Applies the script to d step by step.  After every step the diagram is
// revalidated and the move's expected linking-matrix delta is checked (by
// apply_rule / the semantic ops).  The log is appended one record per
// completed step, so on error the caller's log holds every step before the
// faulty one.  Throws Error with the failing step index in the message.
Diagram replay(const Diagram& d, const MoveScript& s, StepLog& log);
std::pair<Diagram, StepLog> replay(const Diagram& d, const MoveScript& s);

// The standard host family: n parallel strands, each closed into a
// 0-framed unknot named s1..sn, threaded through an eps-framed unknot K.
// For n = 0 the host is the lone split loop K.
Diagram standard_host(int n, int eps);

// The closure of a handle-slide rule's lhs: J clasping the closed circle
// b, with the slid circle a alongside; host for expand_handle_slide.
Diagram slide_host(const std::string& rule);

// Script construction toolkit ------------------------------------------------

// Generates a script by simulating it: each emitted step is applied to the
// working diagram, and rule sites are chosen by predicate but recorded by
// deterministic index.
struct ScriptBuilder {
    Diagram d;
    MoveScript s;

    void emit(const std::string& op, int site);

    // Applies `op` at the first site satisfying `pick` (which may inspect
    // the candidate result).  Returns the chosen index.
    int emit_where(const std::string& op,
                   const std::function<bool(const Site&, const Diagram&)>& pick);

    void finish_alphabet();
};

// Emits the 0-framed Hopf pair creation (3 blow-ups, 1 blow-down, R-moves)
// and returns the two new component names; linking number comes out +1.
// When `near` names a host component, the pair is built inside a face
// incident to one of its edges, so later slides can reach it.
std::array<std::string, 2> emit_hopf_pair(ScriptBuilder& b, const std::string& near = "");

// Emits one tail segment (fresh Hopf pair plus the hooking slide) onto the
// chain end `end`; returns the new chain end.
std::string emit_tail_segment(ScriptBuilder& b, const std::string& end);

// Emits the clasp gadget between strand components A and B: an auxiliary
// Hopf pair plus one blow-up circle, all consumed by blow-downs, leaving
// lk(A,B) += tau and framing(B) += hit (tau, hit in {+1,-1}); framing(A)
// and every other matrix entry are unchanged.
void emit_clasp(ScriptBuilder& b, const std::string& A, const std::string& B, int tau, int hit);

// Script generators ---------------------------------------------------------

// Creates a 0-framed Hopf link (components named by the replay) from the
// empty diagram: exactly 3 blow-ups and 1 blow-down plus R-moves.
MoveScript expand_hopf_creation();

// Appends m tail segments (two 0-framed unknots each) to the 2k-chain
// produced by expand_hopf_creation + earlier tails; generated against that
// host family.  m = 0 yields the empty script.
MoveScript expand_tail(int m);

// Script over catalog rules, their inverses and R-moves replaying, on
// standard_host(n, eps), to the same diagram as fenn_rourke_rule(n, eps).
MoveScript expand_blowdown(int n, int eps, int bound = 6);

// Script over blow rules with at most 5 strands plus R-moves replaying, on
// slide_host(rule), to the same diagram as the handle-slide rule itself.
MoveScript expand_handle_slide(const std::string& rule);

} // namespace kirby
