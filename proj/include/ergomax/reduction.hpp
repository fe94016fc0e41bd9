#pragma once

/**
 * @file reduction.hpp
 * @brief The maneuver engine: tau/sigma, type reduction, flipping, invariance
 * ledger, descendant verification and the induction driver.
 */

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "family.hpp"
#include "polyalg.hpp"

namespace ergomax {

/**
 * Per-position invariance records. A vector v at position j means the
 * function at j is invariant under T^v.
 */
struct InvarianceLedger {
    std::vector<std::vector<IntVec>> entries;

    static InvarianceLedger trivial(std::size_t l)
    {
        InvarianceLedger L;
        L.entries.assign(l, std::vector<IntVec>{IntVec(l, 0)});
        return L;
    }

    friend bool operator==(const InvarianceLedger&, const InvarianceLedger&) = default;
};

enum class StepKind { TypeReduce, Flip };

struct ReductionStep {
    StepKind kind = StepKind::TypeReduce;
    // TypeReduce
    Index m = 0, i = 0;
    std::size_t t_from = 0, t_to = 0;
    Int lambda = 1;
    Int gamma2 = 1;
    IntVec delta;  // gamma2 (a_{eta_i} e_{eta_i} - a_{eta_m} e_{eta_m})
    // Flip
    std::vector<Index> A;
    Int gamma = 1;
    // both
    Int r = 0;
    TupleState before, after;
    TypeVec type_before, type_after;
};

inline std::vector<Index> tau(std::vector<Index> eta, Index m, Index i)
{
    if (m == i) throw SameIndex("tau needs distinct indices");
    if (m >= eta.size() || i >= eta.size()) throw SameIndex("index out of range");
    eta[m] = eta[i];
    return eta;
}

inline TypeVec sigma(TypeVec w, std::size_t t1, std::size_t t2)
{
    if (t1 >= w.w.size() || t2 >= w.w.size() || w.w[t1] == 0 || w.w[t2] == 0)
        throw OutOfSupport("sigma indices must lie in the support of w");
    if (t1 == t2) throw OutOfSupport("sigma needs distinct indices");
    --w.w[t1];
    ++w.w[t2];
    return w;
}

namespace detail {

inline IntVec unit_combo(std::size_t l, Index p, const Int& cp, Index q, const Int& cq)
{
    IntVec v(l, 0);
    v[p] += cp;
    v[q] -= cq;
    return v;
}

inline bool is_zero(const IntVec& v)
{
    for (const auto& x : v)
        if (x != 0) return false;
    return true;
}

/** k with v = k u, if any (u nonzero). */
inline std::optional<Int> multiple_of(const IntVec& v, const IntVec& u)
{
    std::optional<Int> k;
    for (std::size_t t = 0; t < u.size(); ++t) {
        if (u[t] == 0) {
            if (v[t] != 0) return std::nullopt;
            continue;
        }
        if (v[t] % u[t] != 0) return std::nullopt;
        Int q = v[t] / u[t];
        if (k && *k != q) return std::nullopt;
        k = q;
    }
    return k;
}

inline std::optional<Int> int_root(const Int& x, int d)
{
    if (x < 0 || d < 1) return std::nullopt;
    if (d == 1 || x < 2) return x;
    Int lo = 1, hi = 1;
    auto pw = [d](const Int& b) {
        Int p = 1;
        for (int k = 0; k < d; ++k) p *= b;
        return p;
    };
    while (pw(hi) < x) hi *= 2;
    while (lo < hi) {
        Int mid = (lo + hi) / 2;
        if (pw(mid) < x) lo = mid + 1;
        else hi = mid;
    }
    if (pw(lo) == x) return lo;
    return std::nullopt;
}

inline Int ipow(const Int& b, int e)
{
    Int p = 1;
    for (int k = 0; k < e; ++k) p *= b;
    return p;
}

inline std::vector<DualTerm> compose_duals(const std::vector<DualTerm>& duals, const Int& lam, const Int& r)
{
    std::vector<DualTerm> out;
    for (const auto& d : duals) out.push_back({d.transform, compose_affine(d.q, lam, r), d.shift + d.q(r)});
    return out;
}

} // namespace detail

/** The vector a_{eta_j} e_{eta_j} - a_j e_j that flipping position j requires. */
inline IntVec flip_vector(const TupleState& t, Index j)
{
    return detail::unit_combo(t.size(), t.eta[j], t.base.lead(t.eta[j]), j, t.base.lead(j));
}

/** gamma_j: gcd of the multiples k with k (a_{eta_j} e_{eta_j} - a_j e_j) recorded at j. */
inline std::optional<Int> ledger_gamma(const TupleState& t, const InvarianceLedger& L, Index j)
{
    IntVec u = flip_vector(t, j);
    if (detail::is_zero(u)) return Int(1);
    Int g = 0;
    for (const auto& v : L.entries.at(j)) {
        auto k = detail::multiple_of(v, u);
        if (k && *k != 0) g = gcd_int(g, *k);
    }
    if (g == 0) return std::nullopt;
    return g;
}

/** Every position either has eta_j = j with trivial entries, or a recoverable gamma_j. */
inline bool ledger_sound(const TupleState& t, const InvarianceLedger& L)
{
    if (L.entries.size() != t.size()) return false;
    for (Index j = 0; j < t.size(); ++j) {
        if (t.eta[j] == j) {
            for (const auto& v : L.entries[j])
                if (!detail::is_zero(v)) return false;
        } else if (!ledger_gamma(t, L, j)) {
            return false;
        }
    }
    return true;
}

inline std::pair<TupleState, ReductionStep> type_reduce(const TupleState& t, const IndexingData& idx, Index m,
                                                        Index i, const Int& r)
{
    const std::size_t l = t.size();
    if (m >= l || i >= l) throw BadTarget("position out of range");
    TypeVec w = tuple_type(t, idx);
    if (w.basic()) throw NotControllable("tuple has basic type");
    auto ctrl = controllable_indices(t, idx);
    if (std::find(ctrl.begin(), ctrl.end(), m) == ctrl.end())
        throw NotControllable("position " + std::to_string(m + 1) + " fails the controllability condition");
    const std::size_t tw = w.last_nonzero();
    const std::size_t ti = idx.class_of[t.eta[i]];
    if (!idx.in_maxdeg[i] || ti >= idx.K2 || w.w[ti] == 0 || ti == tw)
        throw BadTarget("position " + std::to_string(i + 1) + " is not a valid target");
    const Int lam = lambda_divisor(t.rhos[m]);
    if (r < 0 || r >= lam) {
        std::ostringstream os;
        os << "r = " << r << " outside [0, " << lam << ")";
        throw RangeR(os.str());
    }

    ReductionStep st;
    st.kind = StepKind::TypeReduce;
    st.m = m;
    st.i = i;
    st.t_from = tw;
    st.t_to = ti;
    st.lambda = lam;
    st.r = r;
    st.before = t;
    st.type_before = w;

    TupleState u = t;
    u.eta = tau(t.eta, m, i);
    for (Index j = 0; j < l; ++j) {
        IntPoly c = compose_affine(t.rhos[j], lam, r);
        u.rhos[j] = j == m ? scale_exact(c, t.b(i), t.b(m)) : std::move(c);
    }
    u.duals = detail::compose_duals(t.duals, lam, r);

    st.type_after = sigma(w, tw, ti);
    if (tuple_type(u, idx) != st.type_after) throw IllFormedStep("type after reduction is not sigma(w)");

    const Int am = t.base.lead(t.eta[m]);
    const Int ai = t.base.lead(t.eta[i]);
    if (t.b(m) % am != 0 || t.b(i) % ai != 0 || t.b(m) / am != t.b(i) / ai)
        throw IllFormedStep("leading coefficients are not of descendant form");
    st.gamma2 = t.b(m) / am;
    st.delta = detail::unit_combo(l, t.eta[i], ai * st.gamma2, t.eta[m], am * st.gamma2);
    st.after = u;
    return {std::move(u), std::move(st)};
}

inline InvarianceLedger propagate_ledger(const InvarianceLedger& L, const ReductionStep& st)
{
    InvarianceLedger out = L;
    const TupleState& t = st.before;
    const std::size_t l = t.size();
    if (L.entries.size() != l) throw IllFormedStep("ledger length mismatch");
    if (st.kind == StepKind::Flip) {
        for (Index j : st.A) out.entries[j] = {IntVec(l, 0)};
        return out;
    }
    const Index m = st.m;
    Int g1 = 1;
    IntVec old(l, 0);
    if (t.eta[m] != m) {
        auto g = ledger_gamma(t, L, m);
        if (!g) throw IllFormedStep("no invariance recorded at position " + std::to_string(m + 1));
        g1 = *g;
        old = flip_vector(t, m);
        for (auto& x : old) x *= g1;
    }
    IntVec v(l, 0);
    for (std::size_t k = 0; k < l; ++k) v[k] = st.gamma2 * old[k] + g1 * st.delta[k];
    IntVec expect = flip_vector(st.after, m);
    auto k = detail::multiple_of(v, expect);
    if (!k || *k != g1 * st.gamma2) throw IllFormedStep("combined invariance has unexpected form");
    out.entries[m] = {v};
    return out;
}

inline std::tuple<TupleState, InvarianceLedger, ReductionStep> flip(const TupleState& t, const InvarianceLedger& L,
                                                                    std::vector<Index> A,
                                                                    std::optional<Int> r_choice = std::nullopt)
{
    const std::size_t l = t.size();
    std::sort(A.begin(), A.end());
    A.erase(std::unique(A.begin(), A.end()), A.end());
    Int gamma = 1;
    for (Index j : A) {
        if (j >= l) throw MissingInvariance("position out of range");
        auto gj = ledger_gamma(t, L, j);
        if (!gj) throw MissingInvariance("position " + std::to_string(j + 1) + " lacks the invariance needed to flip");
        const Int den = abs_int(t.base.lead(t.eta[j]) * *gj);
        for (const Int& c : t.rhos[j].coeffs()) gamma = lcm_int(gamma, den / gcd_int(den, c));
    }
    const Int r = r_choice.value_or(0);
    if (r < 0 || r >= gamma) {
        std::ostringstream os;
        os << "r = " << r << " outside [0, " << gamma << ")";
        throw RangeR(os.str());
    }

    ReductionStep st;
    st.kind = StepKind::Flip;
    st.A = A;
    st.gamma = gamma;
    st.r = r;
    st.before = t;

    TupleState u = t;
    for (Index j : A) u.eta[j] = j;
    for (Index j = 0; j < l; ++j)
        u.rhos[j] = scale_exact(compose_affine(t.rhos[j], gamma, r), t.base.lead(u.eta[j]), t.base.lead(t.eta[j]));
    u.duals = detail::compose_duals(t.duals, gamma, r);
    st.after = u;
    InvarianceLedger nl = propagate_ledger(L, st);
    return {std::move(u), std::move(nl), std::move(st)};
}

inline std::tuple<TupleState, InvarianceLedger, ReductionStep>
flip_uncontrollable(const TupleState& t, const IndexingData& idx, const InvarianceLedger& L,
                    std::optional<Int> r_choice = std::nullopt)
{
    if (!controllable_indices(t, idx).empty()) throw Controllable("tuple is controllable");
    TypeVec w = tuple_type(t, idx);
    const std::size_t tw = w.last_nonzero();
    std::vector<Index> A;
    for (Index j = 0; j < t.size(); ++j)
        if (idx.class_of[t.eta[j]] == tw) A.push_back(j);
    auto res = flip(t, L, A, r_choice);
    std::get<2>(res).type_before = w;
    std::get<2>(res).type_after = tuple_type(std::get<0>(res), idx);
    return res;
}

struct DescendantCheck {
    bool ok = false;
    Int lambda = 0, r = 0;
    std::string reason;
};

/** Decide whether t is a descendant of its base, returning the (lambda, r) witness. */
inline DescendantCheck verify_descendant(const TupleState& t)
{
    DescendantCheck res;
    const BaseFamily& base = t.base;
    const std::size_t l = base.size();
    auto fail = [&](std::string why) {
        res.ok = false;
        res.reason = std::move(why);
        return res;
    };
    if (t.eta.size() != l || t.rhos.size() != l) return fail("length mismatch");
    std::optional<Int> lam;
    for (Index j = 0; j < l; ++j) {
        if (t.eta[j] >= l) return fail("eta out of range");
        if (t.rhos[j].degree() != base.poly(j).degree())
            return fail("degree changed at position " + std::to_string(j + 1));
        const Int a = base.lead(t.eta[j]);
        if (t.b(j) % a != 0) return fail("leading coefficient not a multiple at " + std::to_string(j + 1));
        auto root = detail::int_root(t.b(j) / a, base.poly(j).degree());
        if (!root || *root < 1) return fail("leading coefficient not a power at " + std::to_string(j + 1));
        if (lam && *lam != *root) return fail("inconsistent lambda at " + std::to_string(j + 1));
        lam = *root;
    }
    Int r = 0;
    for (Index j = 0; j < l; ++j) {
        const int d = base.poly(j).degree();
        if (d < 2) continue;
        const Int aj = base.lead(j), ae = base.lead(t.eta[j]);
        Int u = t.rhos[j].coeff(d - 1) * aj;
        if (u % ae != 0) return fail("non-integral unscaled coefficient");
        u /= ae;
        const Int lp = detail::ipow(*lam, d - 1);
        if (u % lp != 0) return fail("no integral shift");
        Int num = u / lp - base.poly(j).coeff(d - 1);
        Int den = base.poly(j).coeff(d) * d;
        if (num % den != 0) return fail("no integral shift");
        r = num / den;
        break;
    }
    if (r < 0 || r >= *lam) return fail("shift outside [0, lambda)");
    for (Index j = 0; j < l; ++j) {
        IntPoly lhs = t.rhos[j] * base.lead(j);
        IntPoly rhs = compose_affine(base.poly(j), *lam, r) * base.lead(t.eta[j]);
        if (lhs != rhs) return fail("position " + std::to_string(j + 1) + " does not match");
    }
    res.ok = true;
    res.lambda = *lam;
    res.r = r;
    return res;
}

/** (lambda, r) then (lambda2, r2) composes to (lambda lambda2, lambda r2 + r). */
inline std::pair<Int, Int> compose_witness(const std::pair<Int, Int>& first, const std::pair<Int, Int>& second)
{
    return {first.first * second.first, first.first * second.second + first.second};
}

struct Choice {
    Index m = 0, i = 0;
    Int r = 0;
};

struct FlipChoice {
    Int r = 0;
};

using ScriptStep = std::variant<Choice, FlipChoice>;

/** Supplies choices to run_induction. */
struct Policy {
    std::string name = "default";
    std::optional<std::vector<std::vector<Index>>> class_order;
    std::function<std::optional<Choice>(const TupleState&, const IndexingData&, std::size_t)> reduce;
    std::function<std::optional<Int>(const TupleState&, std::size_t)> flip_r;
};

/** Valid targets i for a non-basic tuple: i in L with eta_i in a support class other than t_w. */
inline std::vector<Index> valid_targets(const TupleState& t, const IndexingData& idx)
{
    TypeVec w = tuple_type(t, idx);
    const std::size_t tw = w.last_nonzero();
    std::vector<Index> out;
    for (Index i : idx.maxdeg) {
        std::size_t c = idx.class_of[t.eta[i]];
        if (c < idx.K2 && c != tw && w.w[c] > 0) out.push_back(i);
    }
    return out;
}

inline Policy default_policy()
{
    Policy p;
    p.reduce = [](const TupleState& t, const IndexingData& idx, std::size_t) -> std::optional<Choice> {
        auto ms = controllable_indices(t, idx);
        auto is = valid_targets(t, idx);
        if (ms.empty() || is.empty()) return std::nullopt;
        return Choice{ms.front(), is.front(), 0};
    };
    p.flip_r = [](const TupleState&, std::size_t) -> std::optional<Int> { return Int(0); };
    return p;
}

/** Uniform random valid choices (r at flips stays 0); deterministic per seed. */
inline Policy random_policy(std::uint64_t seed)
{
    Policy p;
    p.name = "random";
    auto rng = std::make_shared<std::mt19937_64>(seed);
    p.reduce = [rng](const TupleState& t, const IndexingData& idx, std::size_t) -> std::optional<Choice> {
        auto ms = controllable_indices(t, idx);
        auto is = valid_targets(t, idx);
        if (ms.empty() || is.empty()) return std::nullopt;
        auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(*rng); };
        Index m = ms[pick(ms.size())];
        Index i = is[pick(is.size())];
        Int lam = lambda_divisor(t.rhos[m]);
        Int r = lam <= 1 ? Int(0) : Int(pick(static_cast<std::size_t>(std::min<Int>(lam, 1000000))));
        return Choice{m, i, r};
    };
    p.flip_r = [](const TupleState&, std::size_t) -> std::optional<Int> { return Int(0); };
    return p;
}

/** Replays a fixed list of choices; steps are 1-based in the script. */
inline Policy scripted_policy(std::string name, std::vector<ScriptStep> script,
                              std::optional<std::vector<std::vector<Index>>> order = std::nullopt)
{
    Policy p;
    p.name = std::move(name);
    p.class_order = std::move(order);
    auto shared = std::make_shared<std::vector<ScriptStep>>(std::move(script));
    p.reduce = [shared](const TupleState&, const IndexingData&, std::size_t k) -> std::optional<Choice> {
        if (k >= shared->size() || !std::holds_alternative<Choice>((*shared)[k])) return std::nullopt;
        Choice c = std::get<Choice>((*shared)[k]);
        return Choice{c.m - 1, c.i - 1, c.r};
    };
    p.flip_r = [shared](const TupleState&, std::size_t k) -> std::optional<Int> {
        if (k >= shared->size() || !std::holds_alternative<FlipChoice>((*shared)[k])) return std::nullopt;
        return std::get<FlipChoice>((*shared)[k]).r;
    };
    return p;
}

inline Policy named_policy(const std::string& name)
{
    if (name == "default") return default_policy();
    if (name == "paper-ex62")
        return scripted_policy(name, {Choice{4, 1, 1}, Choice{5, 3, 0}, Choice{6, 1, 3}},
                               std::vector<std::vector<Index>>{{0, 1, 2}, {4, 5}, {3}, {6}});
    if (name == "paper-ex78")
        return scripted_policy(name, {Choice{8, 5, 0}, Choice{7, 5, 0}, Choice{5, 1, 0}, Choice{6, 1, 0},
                                      FlipChoice{0}, Choice{8, 2, 0}, Choice{7, 2, 0}});
    throw PolicyExhausted("unknown policy '" + name + "'");
}

struct TraceEntry {
    ReductionStep step;
    InvarianceLedger ledger;  // after the step
    DescendantCheck descendant;
};

struct ReductionTrace {
    BaseFamily base;
    IndexingData idx;
    TupleState initial;
    TypeVec initial_type;
    std::vector<TraceEntry> steps;
    TupleState final_state;
    InvarianceLedger final_ledger;
};

/** eta_j = j, or eta_j sits in an earlier class than j. */
inline bool earlier_class_property(const TupleState& t, const IndexingData& idx)
{
    for (Index j = 0; j < t.size(); ++j)
        if (t.eta[j] != j && idx.class_of[t.eta[j]] >= idx.class_of[j]) return false;
    return true;
}

/** Smallest-type-first reduction down to a basic type, asserting the framework invariants at each step. */
inline ReductionTrace run_induction(const BaseFamily& base, const Policy& policy = default_policy())
{
    ReductionTrace tr;
    tr.base = base;
    tr.idx = indexing_data(base, policy.class_order);
    tr.initial = TupleState::identity(base);
    tr.initial_type = tuple_type(tr.initial, tr.idx);
    if (base.degree() < 1) throw InvalidFamily("degree must be at least 1");

    const std::size_t l = base.size();
    Int bound = detail::ipow(Int(l + 1), static_cast<int>(l));
    TupleState cur = tr.initial;
    InvarianceLedger ledger = InvarianceLedger::trivial(l);
    TypeVec w = tr.initial_type;

    for (std::size_t k = 0; !w.basic(); ++k) {
        if (Int(k + 1) >= bound) throw IllFormedStep("step bound (l+1)^l exceeded");
        TraceEntry e;
        auto ctrl = controllable_indices(cur, tr.idx);
        if (!ctrl.empty()) {
            auto c = policy.reduce(cur, tr.idx, k);
            if (!c) throw PolicyExhausted("no reduction choice at step " + std::to_string(k + 1));
            try {
                auto [next, st] = type_reduce(cur, tr.idx, c->m, c->i, c->r);
                ledger = propagate_ledger(ledger, st);
                cur = std::move(next);
                e.step = std::move(st);
            } catch (const PolicyExhausted&) {
                throw;
            } catch (const Error& err) {
                throw PolicyExhausted("invalid choice at step " + std::to_string(k + 1) + ": " + err.what());
            }
        } else {
            auto r = policy.flip_r(cur, k);
            if (!r) throw PolicyExhausted("no flip choice at step " + std::to_string(k + 1));
            auto [next, nl, st] = flip_uncontrollable(cur, tr.idx, ledger, *r);
            cur = std::move(next);
            ledger = std::move(nl);
            e.step = std::move(st);
        }
        if (!type_less(e.step.type_after, w)) throw IllFormedStep("type did not decrease");
        if (!earlier_class_property(cur, tr.idx)) throw IllFormedStep("earlier-class property violated");
        e.descendant = verify_descendant(cur);
        if (!e.descendant.ok) throw IllFormedStep("not a descendant: " + e.descendant.reason);
        if (!ledger_sound(cur, ledger)) throw IllFormedStep("ledger gamma extraction failed");
        e.ledger = ledger;
        w = e.step.type_after;
        tr.steps.push_back(std::move(e));
    }
    for (Index j : tr.idx.classes.front())
        if (cur.eta[j] != j) throw IllFormedStep("final eta is not the identity on the first class");
    tr.final_state = std::move(cur);
    tr.final_ledger = std::move(ledger);
    return tr;
}

} // namespace ergomax
