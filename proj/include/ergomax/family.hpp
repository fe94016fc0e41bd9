#pragma once

/**
 * @file family.hpp
 * @brief Indexing data of polynomial families and tuples: dependence classes,
 * types and their order, controllability, ergodicity obligations and PET
 * candidate vectors.
 *
 * Indices are 0-based throughout the library; reports convert to 1-based.
 */

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include "errors.hpp"
#include "polyalg.hpp"

namespace ergomax {

using Index = std::size_t;
using IntVec = std::vector<Int>;

/** The base polynomials p_1..p_l and their leading coefficients a_j. */
class BaseFamily {
public:
    BaseFamily() = default;
    explicit BaseFamily(std::vector<IntPoly> polys) : polys_(std::move(polys))
    {
        if (polys_.empty()) throw InvalidFamily("empty family");
        for (std::size_t j = 0; j < polys_.size(); ++j)
            if (polys_[j].is_zero())
                throw InvalidFamily("polynomial " + std::to_string(j + 1) + " is zero");
    }

    std::size_t size() const { return polys_.size(); }
    const IntPoly& poly(Index j) const { return polys_.at(j); }
    const std::vector<IntPoly>& polys() const { return polys_; }
    Int lead(Index j) const { return polys_.at(j).leading(); }
    int degree() const
    {
        int d = 0;
        for (const auto& p : polys_) d = std::max(d, p.degree());
        return d;
    }

    friend bool operator==(const BaseFamily& a, const BaseFamily& b) { return a.polys_ == b.polys_; }

private:
    std::vector<IntPoly> polys_;
};

struct IndexingData {
    int degree = 0;
    std::vector<std::vector<Index>> classes;  // ordered partition of [l]
    std::vector<std::size_t> class_of;        // position -> class number
    std::vector<Index> maxdeg;                // the set L, sorted
    std::vector<bool> in_maxdeg;
    std::size_t K1 = 0, K2 = 0, K3 = 0;
};

namespace detail {

inline std::vector<std::vector<Index>> dependence_classes(const BaseFamily& base)
{
    const std::size_t l = base.size();
    std::vector<std::vector<Index>> out;
    std::vector<bool> seen(l, false);
    for (Index i = 0; i < l; ++i) {
        if (seen[i]) continue;
        std::vector<Index> cls{i};
        seen[i] = true;
        for (Index j = i + 1; j < l; ++j)
            if (!seen[j] && linear_dependence(base.poly(i), base.poly(j))) {
                cls.push_back(j);
                seen[j] = true;
            }
        out.push_back(std::move(cls));
    }
    return out;
}

} // namespace detail

/**
 * Dependence-class partition. Default order: classes meeting L first, then the
 * rest, each group by smallest member. An explicit order must be the same
 * partition with the L-classes first.
 */
inline IndexingData indexing_data(const BaseFamily& base,
                                  const std::optional<std::vector<std::vector<Index>>>& order = std::nullopt)
{
    IndexingData idx;
    const std::size_t l = base.size();
    idx.degree = base.degree();
    idx.in_maxdeg.assign(l, false);
    for (Index j = 0; j < l; ++j)
        if (base.poly(j).degree() == idx.degree) {
            idx.in_maxdeg[j] = true;
            idx.maxdeg.push_back(j);
        }

    auto natural = detail::dependence_classes(base);
    auto meets = [&](const std::vector<Index>& c) { return idx.in_maxdeg[c.front()]; };

    if (order) {
        auto canon = [](std::vector<std::vector<Index>> p) {
            for (auto& c : p) std::sort(c.begin(), c.end());
            std::sort(p.begin(), p.end());
            return p;
        };
        if (canon(*order) != canon(natural))
            throw InvalidFamily("explicit class order is not the dependence partition");
        idx.classes = *order;
        for (auto& c : idx.classes) std::sort(c.begin(), c.end());
        bool seen_rest = false;
        for (const auto& c : idx.classes) {
            if (!meets(c)) seen_rest = true;
            else if (seen_rest) throw InvalidFamily("classes meeting L must come first");
        }
    } else {
        std::stable_partition(natural.begin(), natural.end(), meets);
        idx.classes = std::move(natural);
    }

    idx.class_of.assign(l, 0);
    for (std::size_t t = 0; t < idx.classes.size(); ++t)
        for (Index j : idx.classes[t]) idx.class_of[j] = t;
    idx.K1 = idx.classes.size();
    idx.K2 = static_cast<std::size_t>(std::count_if(idx.classes.begin(), idx.classes.end(), meets));
    idx.K3 = idx.maxdeg.size();
    return idx;
}

/** A dual sequence attached to an average: T_transform^(q(n) + shift). */
struct DualTerm {
    Index transform = 0;
    IntPoly q;
    Int shift = 0;
    friend bool operator==(const DualTerm&, const DualTerm&) = default;
};

/** The tuple (T_{eta_j}^{rho_j(n)})_j tied to a base family. */
struct TupleState {
    BaseFamily base;
    std::vector<Index> eta;
    std::vector<IntPoly> rhos;
    std::vector<DualTerm> duals;

    static TupleState identity(const BaseFamily& base)
    {
        TupleState t;
        t.base = base;
        t.rhos = base.polys();
        t.eta.resize(base.size());
        for (Index j = 0; j < base.size(); ++j) t.eta[j] = j;
        return t;
    }

    std::size_t size() const { return rhos.size(); }
    Int b(Index j) const { return rhos.at(j).leading(); }

    friend bool operator==(const TupleState&, const TupleState&) = default;
};

struct TypeVec {
    std::vector<long> w;
    long K3 = 0;

    bool basic() const
    {
        for (std::size_t t = 1; t < w.size(); ++t)
            if (w[t] != 0) return false;
        return true;
    }

    /** Last nonzero index t_w (0-based). */
    std::size_t last_nonzero() const
    {
        for (std::size_t t = w.size(); t-- > 0;)
            if (w[t] != 0) return t;
        return 0;
    }

    friend bool operator==(const TypeVec&, const TypeVec&) = default;
};

inline TypeVec tuple_type(const TupleState& t, const IndexingData& idx)
{
    TypeVec w;
    w.w.assign(idx.K2, 0);
    w.K3 = static_cast<long>(idx.K3);
    for (Index j : idx.maxdeg) {
        std::size_t c = idx.class_of.at(t.eta.at(j));
        if (c < idx.K2) ++w.w[c];
    }
    return w;
}

/** The strict partial order on types (kappa = 0 admitted). */
inline bool type_less(const TypeVec& a, const TypeVec& b)
{
    if (a.w.size() != b.w.size() || a.K3 != b.K3) throw ShapeMismatch("types of different shape");
    for (std::size_t k = 0; k < a.w.size(); ++k) {
        if (a.w[k] == b.w[k]) continue;
        return (a.w[k] == 0 && b.w[k] > 0) || (a.w[k] > b.w[k] && b.w[k] > 0);
    }
    return false;
}

/** Positions m in L satisfying the controllability condition. */
inline std::vector<Index> controllable_indices(const TupleState& t, const IndexingData& idx)
{
    TypeVec w = tuple_type(t, idx);
    if (w.basic()) throw BasicType("controllability is defined for non-basic types");
    const std::size_t tw = w.last_nonzero();
    std::vector<Index> out;
    for (Index m : idx.maxdeg) {
        if (idx.class_of[t.eta[m]] != tw) continue;
        bool ok = true;
        for (Index i = 0; i < t.size() && ok; ++i)
            if (i != m && t.eta[i] == t.eta[m] && t.rhos[i] == t.rhos[m]) ok = false;
        if (ok) out.push_back(m);
    }
    return out;
}

struct ErgodicityObligation {
    Index j1 = 0, j2 = 0;      // positions that generated it
    Index eta1 = 0, eta2 = 0;  // transformation indices, eta1 < eta2
    Int beta1, beta2;
    IntVec vector;             // beta1 e_eta1 - beta2 e_eta2
};

/** Sign/gcd normal form of an integer vector. */
inline IntVec normalize_vector(IntVec v)
{
    Int g = 0;
    for (const auto& x : v) g = gcd_int(g, x);
    if (g == 0) return v;
    Int sign = 1;
    for (const auto& x : v)
        if (x != 0) {
            sign = x < 0 ? -1 : 1;
            break;
        }
    for (auto& x : v) x = x / g * sign;
    return v;
}

inline std::vector<ErgodicityObligation> goodness_obligations(const TupleState& t, const IndexingData& idx)
{
    std::vector<ErgodicityObligation> out;
    std::set<IntVec> seen;
    const std::size_t l = t.size();
    for (Index j1 = 0; j1 < l; ++j1)
        for (Index j2 = j1 + 1; j2 < l; ++j2) {
            Index e1 = t.eta[j1], e2 = t.eta[j2];
            if (e1 == e2 || idx.class_of[e1] != idx.class_of[e2]) continue;
            Index p1 = j1, p2 = j2;
            if (e1 > e2) {
                std::swap(e1, e2);
                std::swap(p1, p2);
            }
            Int g = gcd_int(t.b(p1), t.b(p2));
            ErgodicityObligation ob;
            ob.j1 = p1;
            ob.j2 = p2;
            ob.eta1 = e1;
            ob.eta2 = e2;
            ob.beta1 = t.b(p1) / g;
            ob.beta2 = t.b(p2) / g;
            ob.vector.assign(l, 0);
            ob.vector[e1] = ob.beta1;
            ob.vector[e2] = -ob.beta2;
            if (seen.insert(normalize_vector(ob.vector)).second) out.push_back(std::move(ob));
        }
    return out;
}

/** Generic candidate set c_m e_{eta_m} - c_j e_{eta_j}, j = 0 meaning the zero term. */
inline std::vector<IntVec> pet_candidate_vectors(const TupleState& t, Index m)
{
    const std::size_t l = t.size();
    if (m >= l) throw InvalidFamily("position out of range");
    std::vector<IntVec> out;
    std::set<IntVec> seen;
    auto push = [&](IntVec v) {
        bool zero = std::all_of(v.begin(), v.end(), [](const Int& x) { return x == 0; });
        if (!zero && seen.insert(v).second) out.push_back(std::move(v));
    };
    const IntPoly& rm = t.rhos[m];
    {
        IntVec v(l, 0);
        v[t.eta[m]] = rm.leading();
        push(std::move(v));
    }
    for (Index j = 0; j < l; ++j) {
        if (j == m) continue;
        const IntPoly& rj = t.rhos[j];
        IntVec v(l, 0);
        if (t.eta[j] == t.eta[m]) {
            IntPoly diff = rm - rj;
            if (diff.is_zero()) {
                std::ostringstream os;
                os << "positions " << m + 1 << " and " << j + 1 << " carry identical terms";
                throw DegeneratePair(os.str());
            }
            v[t.eta[m]] = diff.leading();
        } else {
            int d = std::max(rm.degree(), rj.degree());
            v[t.eta[m]] = rm.coeff(d);
            v[t.eta[j]] = -rj.coeff(d);
        }
        push(std::move(v));
    }
    return out;
}

} // namespace ergomax
