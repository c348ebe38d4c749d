#include "invariants/invariants.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

namespace kirby {

using Rat = boost::multiprecision::cpp_rational;

IntMat IntMat::transposed() const {
    IntMat t(cols, rows);
    for (size_t i = 0; i < rows; ++i)
        for (size_t j = 0; j < cols; ++j) t.at(j, i) = at(i, j);
    return t;
}

IntMat IntMat::operator*(const IntMat& o) const {
    IntMat r(rows, o.cols);
    for (size_t i = 0; i < rows; ++i)
        for (size_t k = 0; k < cols; ++k) {
            if (at(i, k) == 0) continue;
            for (size_t j = 0; j < o.cols; ++j) r.at(i, j) += at(i, k) * o.at(k, j);
        }
    return r;
}

std::string IntMat::to_string() const {
    std::ostringstream os;
    for (size_t i = 0; i < rows; ++i) {
        os << (i ? "; " : "[");
        for (size_t j = 0; j < cols; ++j) os << (j ? "," : "") << at(i, j);
    }
    os << "]";
    return os.str();
}

LinkingData linking_matrix(const Diagram& d) {
    auto info = analyze(d);
    size_t n = d.num_components();
    LinkingData out;
    out.A = IntMat(n, n);
    for (size_t i = 0; i < n; ++i) {
        out.names.push_back(d.component_name(i));
        out.A.at(i, i) = d.component_framing(i);
        for (size_t j = i + 1; j < n; ++j) {
            Int lk = linking_number(d, info, (int)i, (int)j);
            out.A.at(i, j) = lk;
            out.A.at(j, i) = lk;
        }
    }
    return out;
}

SnfResult smith_normal_form(const IntMat& A) {
    SnfResult r{A, IntMat::identity(A.rows), IntMat::identity(A.cols)};
    IntMat& D = r.D;
    auto row_add = [&](size_t dst, size_t src, const Int& f) {
        for (size_t j = 0; j < D.cols; ++j) D.at(dst, j) += f * D.at(src, j);
        for (size_t j = 0; j < r.U.cols; ++j) r.U.at(dst, j) += f * r.U.at(src, j);
    };
    auto col_add = [&](size_t dst, size_t src, const Int& f) {
        for (size_t i = 0; i < D.rows; ++i) D.at(i, dst) += f * D.at(i, src);
        for (size_t i = 0; i < r.V.rows; ++i) r.V.at(i, dst) += f * r.V.at(i, src);
    };
    auto row_swap = [&](size_t x, size_t y) {
        if (x == y) return;
        for (size_t j = 0; j < D.cols; ++j) std::swap(D.at(x, j), D.at(y, j));
        for (size_t j = 0; j < r.U.cols; ++j) std::swap(r.U.at(x, j), r.U.at(y, j));
    };
    auto col_swap = [&](size_t x, size_t y) {
        if (x == y) return;
        for (size_t i = 0; i < D.rows; ++i) std::swap(D.at(i, x), D.at(i, y));
        for (size_t i = 0; i < r.V.rows; ++i) std::swap(r.V.at(i, x), r.V.at(i, y));
    };
    auto row_negate = [&](size_t x) {
        for (size_t j = 0; j < D.cols; ++j) D.at(x, j) = -D.at(x, j);
        for (size_t j = 0; j < r.U.cols; ++j) r.U.at(x, j) = -r.U.at(x, j);
    };

    size_t n = std::min(D.rows, D.cols);
    for (size_t t = 0; t < n; ++t) {
        // find a nonzero pivot of least magnitude
        for (;;) {
            size_t pi = t, pj = t;
            Int best = 0;
            for (size_t i = t; i < D.rows; ++i)
                for (size_t j = t; j < D.cols; ++j)
                    if (D.at(i, j) != 0 && (best == 0 || abs(D.at(i, j)) < abs(best))) {
                        best = D.at(i, j);
                        pi = i;
                        pj = j;
                    }
            if (best == 0) goto done; // rest is zero
            row_swap(t, pi);
            col_swap(t, pj);
            bool clean = true;
            for (size_t i = t + 1; i < D.rows; ++i)
                if (D.at(i, t) != 0) {
                    row_add(i, t, -(D.at(i, t) / D.at(t, t)));
                    clean = clean && D.at(i, t) == 0;
                }
            for (size_t j = t + 1; j < D.cols; ++j)
                if (D.at(t, j) != 0) {
                    col_add(j, t, -(D.at(t, j) / D.at(t, t)));
                    clean = clean && D.at(t, j) == 0;
                }
            if (!clean) continue;
            // divisibility: fold any non-multiple into the pivot's row
            bool divides = true;
            for (size_t i = t + 1; i < D.rows && divides; ++i)
                for (size_t j = t + 1; j < D.cols && divides; ++j)
                    if (D.at(i, j) % D.at(t, t) != 0) {
                        row_add(t, i, 1);
                        divides = false;
                    }
            if (divides) break;
        }
        if (D.at(t, t) < 0) row_negate(t);
    }
done:
    return r;
}

HomologyReport first_homology(const IntMat& A) {
    auto snf = smith_normal_form(A);
    HomologyReport h;
    size_t n = std::min(A.rows, A.cols);
    for (size_t i = 0; i < n; ++i) {
        Int d = abs(snf.D.at(i, i));
        if (d == 0)
            h.rank++;
        else if (d > 1)
            h.torsion.push_back(d);
    }
    // cokernel lives in Z^rows; rows beyond the diagonal are free
    if (A.rows > A.cols) h.rank += (long long)(A.rows - A.cols);
    return h;
}

long long signature(const IntMat& A) {
    if (A.rows != A.cols) fail(ErrorKind::Validation, "signature of non-square matrix");
    size_t n = A.rows;
    std::vector<Rat> m(n * n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            if (A.at(i, j) != A.at(j, i))
                fail(ErrorKind::Validation, "signature of non-symmetric matrix");
            m[i * n + j] = Rat(A.at(i, j));
        }
    auto at = [&](size_t i, size_t j) -> Rat& { return m[i * n + j]; };
    long long sig = 0;
    std::vector<bool> used(n, false);
    for (size_t step = 0; step < n; ++step) {
        // prefer a nonzero diagonal pivot
        size_t p = n;
        for (size_t i = 0; i < n; ++i)
            if (!used[i] && at(i, i) != 0) {
                p = i;
                break;
            }
        if (p == n) {
            // all remaining diagonal entries vanish; find an off-diagonal
            // pair and symmetrize it into a diagonal entry
            size_t bi = n, bj = n;
            for (size_t i = 0; i < n && bi == n; ++i)
                if (!used[i])
                    for (size_t j = i + 1; j < n; ++j)
                        if (!used[j] && at(i, j) != 0) {
                            bi = i;
                            bj = j;
                            break;
                        }
            if (bi == n) break; // zero block, contributes nothing
            // row/col i += row/col j creates 2*a_ij on the diagonal
            for (size_t k = 0; k < n; ++k) at(bi, k) += at(bj, k);
            for (size_t k = 0; k < n; ++k) at(k, bi) += at(k, bj);
            p = bi;
        }
        Rat piv = at(p, p);
        sig += piv > 0 ? 1 : -1;
        used[p] = true;
        for (size_t i = 0; i < n; ++i) {
            if (used[i] || at(i, p) == 0) continue;
            Rat f = at(i, p) / piv;
            for (size_t k = 0; k < n; ++k) at(i, k) -= f * at(p, k);
            for (size_t k = 0; k < n; ++k) at(k, i) -= f * at(k, p);
        }
    }
    return sig;
}

Int determinant(const IntMat& A) {
    if (A.rows != A.cols) fail(ErrorKind::Validation, "determinant of non-square matrix");
    size_t n = A.rows;
    if (n == 0) return 1; // empty surgery presents S^3
    // Bareiss fraction-free elimination
    std::vector<Int> m(A.a);
    auto at = [&](size_t i, size_t j) -> Int& { return m[i * n + j]; };
    Int prev = 1;
    int sign = 1;
    for (size_t k = 0; k + 1 < n; ++k) {
        if (at(k, k) == 0) {
            size_t p = k + 1;
            while (p < n && at(p, k) == 0) ++p;
            if (p == n) return 0;
            for (size_t j = 0; j < n; ++j) std::swap(at(k, j), at(p, j));
            sign = -sign;
        }
        for (size_t i = k + 1; i < n; ++i)
            for (size_t j = k + 1; j < n; ++j)
                at(i, j) = (at(i, j) * at(k, k) - at(i, k) * at(k, j)) / prev;
        prev = at(k, k);
    }
    return sign * at(n - 1, n - 1);
}

std::string invariants_json(const Diagram& d) {
    auto lk = linking_matrix(d);
    nlohmann::json j;
    j["matrix"] = nlohmann::json::array();
    for (size_t i = 0; i < lk.A.rows; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (size_t c = 0; c < lk.A.cols; ++c) row.push_back((long long)lk.A.at(i, c));
        j["matrix"].push_back(row);
    }
    j["components"] = lk.names;
    j["det"] = determinant(lk.A).str();
    auto h = first_homology(lk.A);
    j["h1"]["rank"] = h.rank;
    j["h1"]["torsion"] = nlohmann::json::array();
    for (auto& t : h.torsion) j["h1"]["torsion"].push_back((long long)t);
    j["signature"] = signature(lk.A);
    j["b2"] = lk.A.rows;
    return j.dump(2);
}

// -- move kinds -------------------------------------------------------------

std::string MoveKind::to_string() const {
    switch (tag) {
        case Reidemeister1P: return "reidemeister1+";
        case Reidemeister1M: return "reidemeister1-";
        case Reidemeister2: return "reidemeister2";
        case Reidemeister3: return "reidemeister3";
        case HandleSlide: return std::string("handle_slide ") + (sign > 0 ? "+1" : "-1");
        case BlowUp: return std::string("blow_up ") + (sign > 0 ? "+1" : "-1");
        case BlowDown: return std::string("blow_down ") + (sign > 0 ? "+1" : "-1");
        case Catalog: return "catalog " + name;
    }
    return "?";
}

MoveKind MoveKind::parse(const std::vector<std::string>& tok, int lineno) {
    if (tok.empty()) fail(ErrorKind::Syntax, "missing move kind", lineno);
    MoveKind k;
    auto sign_of = [&](const std::string& s) {
        if (s == "+1" || s == "+") return +1;
        if (s == "-1" || s == "-") return -1;
        fail(ErrorKind::Syntax, "move kind wants sign +1 or -1, got '" + s + "'", lineno);
    };
    const std::string& t = tok[0];
    if (t == "reidemeister1+")
        k.tag = Reidemeister1P;
    else if (t == "reidemeister1-")
        k.tag = Reidemeister1M;
    else if (t == "reidemeister2")
        k.tag = Reidemeister2;
    else if (t == "reidemeister3")
        k.tag = Reidemeister3;
    else if (t == "handle_slide" || t == "blow_up" || t == "blow_down") {
        if (tok.size() < 2) fail(ErrorKind::Syntax, "kind '" + t + "' wants a sign", lineno);
        k.tag = t == "handle_slide" ? HandleSlide : (t == "blow_up" ? BlowUp : BlowDown);
        k.sign = sign_of(tok[1]);
    } else if (t == "catalog") {
        if (tok.size() < 2) fail(ErrorKind::Syntax, "kind 'catalog' wants a name", lineno);
        k.tag = Catalog;
        k.name = tok[1];
    } else {
        fail(ErrorKind::Syntax, "unknown move kind '" + t + "'", lineno);
    }
    return k;
}

// -- expected deltas --------------------------------------------------------

namespace {

int index_of(const LinkingData& lk, const std::string& name) {
    for (size_t i = 0; i < lk.names.size(); ++i)
        if (lk.names[i] == name) return (int)i;
    return -1;
}

std::optional<std::string> check_same_matrix(const LinkingData& b, const LinkingData& a) {
    if (b.names.size() != a.names.size()) return "component count changed";
    for (size_t i = 0; i < b.names.size(); ++i) {
        int j = index_of(a, b.names[i]);
        if (j < 0) return "component " + b.names[i] + " disappeared";
        for (size_t k = 0; k < b.names.size(); ++k) {
            int l = index_of(a, b.names[k]);
            if (l < 0) return "component " + b.names[k] + " disappeared";
            if (b.A.at(i, k) != a.A.at(j, l))
                return "linking entry (" + b.names[i] + "," + b.names[k] + ") changed";
        }
    }
    return std::nullopt;
}

std::optional<std::string> check_slide(const LinkingData& b, const LinkingData& a,
                                       const std::string& ci, const std::string& cj, int sign) {
    int i = index_of(b, ci), j = index_of(b, cj);
    if (i < 0 || j < 0) return "slide components not found in before-matrix";
    size_t n = b.names.size();
    IntMat E = IntMat::identity(n);
    E.at(j, i) = sign;
    IntMat want = E.transposed() * b.A * E;
    LinkingData w{b.names, want};
    return check_same_matrix(w, a);
}

std::optional<std::string> check_blow_down(const LinkingData& b, const LinkingData& a,
                                           const std::string& loop, int eps) {
    int k = index_of(b, loop);
    if (k < 0) return "blown-down component " + loop + " not in before-matrix";
    if (index_of(a, loop) >= 0) return "blown-down component " + loop + " still present";
    if (a.names.size() + 1 != b.names.size()) return "component count did not drop by one";
    if (b.A.at(k, k) != eps) return "loop framing is not " + std::to_string(eps);
    for (size_t i = 0; i < b.names.size(); ++i) {
        if ((int)i == k) continue;
        int ai = index_of(a, b.names[i]);
        if (ai < 0) return "component " + b.names[i] + " disappeared";
        for (size_t j = 0; j < b.names.size(); ++j) {
            if ((int)j == k) continue;
            int aj = index_of(a, b.names[j]);
            if (aj < 0) return "component " + b.names[j] + " disappeared";
            Int want = b.A.at(i, j) - Int(eps) * b.A.at(i, k) * b.A.at(j, k);
            if (a.A.at(ai, aj) != want)
                return "rank-one update violated at (" + b.names[i] + "," + b.names[j] + ")";
        }
    }
    if (determinant(b.A) != Int(eps) * determinant(a.A)) return "determinant scaling violated";
    if (signature(b.A) - eps != signature(a.A)) return "signature shift violated";
    return std::nullopt;
}

} // namespace

std::optional<std::string> check_expected_delta(const MoveBinding& mv, const LinkingData& before,
                                                const LinkingData& after) {
    std::optional<std::string> err;
    const MoveKind& k = mv.kind;
    if (k.is_reidemeister())
        err = check_same_matrix(before, after);
    else if (k.tag == MoveKind::HandleSlide)
        err = check_slide(before, after, mv.slid, mv.over, k.sign);
    else if (k.tag == MoveKind::BlowDown)
        err = check_blow_down(before, after, mv.loop_comp, k.sign);
    else if (k.tag == MoveKind::BlowUp)
        err = check_blow_down(after, before, mv.loop_comp, k.sign); // inverse move
    else if (k.tag == MoveKind::Catalog)
        err = std::nullopt; // composite move: only the homology check below
    else
        return "unknown move kind";
    if (err) return err;
    if (!(first_homology(before.A) == first_homology(after.A)))
        return "first homology changed";
    return std::nullopt;
}

} // namespace kirby
