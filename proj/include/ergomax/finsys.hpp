#pragma once

/**
 * @file finsys.hpp
 * @brief Finite measure-preserving systems: commuting permutations of a
 * weighted finite set, orbit partitions, conditional expectations and
 * eigendata.
 *
 * Points are 0..|X|-1. Translation systems on Z_{q_1} x ... x Z_{q_k} number
 * points in row-major order (last coordinate fastest).
 */

#include <boost/rational.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "family.hpp"
#include "polyalg.hpp"

namespace ergomax {

using Complex = std::complex<double>;
using Perm = std::vector<std::size_t>;
using Rational = boost::rational<std::int64_t>;
using Coords = std::vector<std::int64_t>;

/** e(t) = exp(2 pi i t) for rational t, reduced mod 1 first. */
inline Complex e_rational(Rational t)
{
    std::int64_t num = t.numerator() % t.denominator();
    if (num < 0) num += t.denominator();
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(num) / static_cast<double>(t.denominator());
    return {std::cos(theta), std::sin(theta)};
}

/** Fractional part in [0, 1). */
inline Rational frac(Rational t)
{
    std::int64_t num = t.numerator() % t.denominator();
    if (num < 0) num += t.denominator();
    return Rational(num, t.denominator());
}

inline std::int64_t lcm64(std::int64_t a, std::int64_t b)
{
    if (a == 0 || b == 0) return 0;
    const std::int64_t g = std::gcd(a, b);
    const std::int64_t q = a / g;
    if (q > INT64_MAX / b) throw InvalidSystem("period overflows 64 bits");
    return q * b;
}

/** Complex values on the points of a system, with an optional sup bound. */
struct Observable {
    std::vector<Complex> values;
    std::optional<double> bound;

    Observable() = default;
    explicit Observable(std::vector<Complex> v, std::optional<double> b = std::nullopt)
        : values(std::move(v)), bound(b)
    {
        for (std::size_t x = 0; x < values.size(); ++x)
            if (!std::isfinite(values[x].real()) || !std::isfinite(values[x].imag()))
                throw InvalidObservable("non-finite value at point " + std::to_string(x));
        if (bound && sup_norm() > *bound + 1e-12) throw InvalidObservable("sup-norm exceeds certified bound");
    }

    static Observable constant(std::size_t n, Complex c) { return Observable(std::vector<Complex>(n, c), std::abs(c)); }

    std::size_t size() const { return values.size(); }
    const Complex& operator[](std::size_t x) const { return values[x]; }
    Complex& operator[](std::size_t x) { return values[x]; }

    double sup_norm() const
    {
        double m = 0;
        for (const auto& v : values) m = std::max(m, std::abs(v));
        return m;
    }

    Observable conj() const
    {
        Observable r = *this;
        for (auto& v : r.values) v = std::conj(v);
        return r;
    }

    friend Observable operator*(const Observable& a, const Observable& b)
    {
        if (a.size() != b.size()) throw ShapeMismatch("observable sizes differ");
        Observable r;
        r.values.resize(a.size());
        for (std::size_t x = 0; x < a.size(); ++x) r.values[x] = a[x] * b[x];
        return r;
    }
};

/** Cycle decomposition of a permutation. */
struct CycleData {
    std::vector<std::vector<std::size_t>> cycles;
    std::vector<std::size_t> cycle_of;
    std::vector<std::size_t> pos;
    std::int64_t order = 1;

    explicit CycleData(const Perm& p = {})
    {
        const std::size_t n = p.size();
        cycle_of.assign(n, SIZE_MAX);
        pos.assign(n, 0);
        for (std::size_t x = 0; x < n; ++x) {
            if (cycle_of[x] != SIZE_MAX) continue;
            std::vector<std::size_t> c;
            std::size_t y = x;
            do {
                cycle_of[y] = cycles.size();
                pos[y] = c.size();
                c.push_back(y);
                y = p[y];
            } while (y != x);
            order = lcm64(order, static_cast<std::int64_t>(c.size()));
            cycles.push_back(std::move(c));
        }
    }

    /** Image of x under the e-th power, for e already reduced to any integer. */
    std::size_t apply(std::size_t x, std::int64_t e) const
    {
        const auto& c = cycles[cycle_of[x]];
        const std::int64_t len = static_cast<std::int64_t>(c.size());
        std::int64_t k = (static_cast<std::int64_t>(pos[x]) + e % len) % len;
        if (k < 0) k += len;
        return c[static_cast<std::size_t>(k)];
    }

    Perm power(std::int64_t e) const
    {
        Perm r(cycle_of.size());
        for (std::size_t x = 0; x < r.size(); ++x) r[x] = apply(x, e);
        return r;
    }

    Perm power(const Int& e) const { return power(mod_int(e, order)); }
};

inline Perm identity_perm(std::size_t n)
{
    Perm p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    return p;
}

/** (a o b)(x) = a(b(x)). */
inline Perm compose(const Perm& a, const Perm& b)
{
    Perm r(b.size());
    for (std::size_t x = 0; x < b.size(); ++x) r[x] = a[b[x]];
    return r;
}

/** Moduli and shift vectors of a translation system. */
struct TranslationData {
    std::vector<std::int64_t> moduli;
    std::vector<Coords> shifts;
};

/** (X, mu, T_1..T_l) with X finite, immutable after construction. */
class FiniteSystem {
public:
    FiniteSystem(std::vector<double> weights, std::vector<Perm> transforms,
                 std::optional<TranslationData> translation = std::nullopt)
        : weights_(std::move(weights)), transforms_(std::move(transforms)), translation_(std::move(translation))
    {
        const std::size_t n = weights_.size();
        if (n == 0) throw InvalidSystem("empty point set");
        double total = 0;
        for (double w : weights_) {
            if (!(w >= 0) || !std::isfinite(w)) throw InvalidSystem("weights must be finite and nonnegative");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-9) throw InvalidSystem("weights sum to " + std::to_string(total));
        for (std::size_t j = 0; j < transforms_.size(); ++j) {
            const Perm& p = transforms_[j];
            if (p.size() != n) throw InvalidSystem("transform " + std::to_string(j + 1) + " has wrong size");
            std::vector<char> hit(n, 0);
            for (std::size_t y : p) {
                if (y >= n || hit[y]) throw InvalidSystem("transform " + std::to_string(j + 1) + " is not a permutation");
                hit[y] = 1;
            }
            for (std::size_t x = 0; x < n; ++x)
                if (std::abs(weights_[x] - weights_[p[x]]) > 1e-12)
                    throw InvalidSystem("transform " + std::to_string(j + 1) + " does not preserve the measure");
        }
        for (std::size_t i = 0; i < transforms_.size(); ++i)
            for (std::size_t j = i + 1; j < transforms_.size(); ++j)
                for (std::size_t x = 0; x < n; ++x)
                    if (transforms_[i][transforms_[j][x]] != transforms_[j][transforms_[i][x]])
                        throw InvalidSystem("transforms " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                                            " do not commute");
        for (const auto& p : transforms_) cycles_.emplace_back(p);
    }

    static FiniteSystem uniform(std::size_t n, std::vector<Perm> transforms)
    {
        return FiniteSystem(std::vector<double>(n, n ? 1.0 / static_cast<double>(n) : 0.0), std::move(transforms));
    }

    std::size_t size() const { return weights_.size(); }
    std::size_t ell() const { return transforms_.size(); }
    double weight(std::size_t x) const { return weights_[x]; }
    const std::vector<double>& weights() const { return weights_; }
    const Perm& transform(Index j) const { return transforms_.at(j); }
    const CycleData& cycles(Index j) const { return cycles_.at(j); }
    std::int64_t order(Index j) const { return cycles_.at(j).order; }

    bool is_translation() const { return translation_.has_value(); }
    const TranslationData& translation() const
    {
        if (!translation_) throw NotTranslation("system is not a translation system");
        return *translation_;
    }

    Coords coords(std::size_t x) const
    {
        const auto& q = translation().moduli;
        Coords c(q.size());
        for (std::size_t i = q.size(); i-- > 0;) {
            c[i] = static_cast<std::int64_t>(x % static_cast<std::size_t>(q[i]));
            x /= static_cast<std::size_t>(q[i]);
        }
        return c;
    }

    std::size_t point(const Coords& c) const
    {
        const auto& q = translation().moduli;
        if (c.size() != q.size()) throw ShapeMismatch("coordinate vector has wrong length");
        std::size_t x = 0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            std::int64_t r = c[i] % q[i];
            if (r < 0) r += q[i];
            x = x * static_cast<std::size_t>(q[i]) + static_cast<std::size_t>(r);
        }
        return x;
    }

private:
    std::vector<double> weights_;
    std::vector<Perm> transforms_;
    std::vector<CycleData> cycles_;
    std::optional<TranslationData> translation_;
};

/** Z_{q_1} x ... x Z_{q_k} with uniform weights and T_j = translation by shifts[j]. */
inline FiniteSystem build_translation_system(const std::vector<std::int64_t>& moduli, const std::vector<Coords>& shifts)
{
    if (moduli.empty()) throw EmptyModulus("no moduli given");
    std::size_t n = 1;
    for (auto q : moduli) {
        if (q <= 0) throw EmptyModulus("modulus " + std::to_string(q) + " is not positive");
        if (n > (std::size_t{1} << 40) / static_cast<std::size_t>(q)) throw InvalidSystem("system too large");
        n *= static_cast<std::size_t>(q);
    }
    for (std::size_t j = 0; j < shifts.size(); ++j)
        if (shifts[j].size() != moduli.size())
            throw ShapeMismatch("shift " + std::to_string(j + 1) + " has " + std::to_string(shifts[j].size()) +
                                " entries, expected " + std::to_string(moduli.size()));

    std::vector<Perm> perms;
    Coords c(moduli.size());
    for (const auto& a : shifts) {
        Perm p(n);
        for (std::size_t x = 0; x < n; ++x) {
            std::size_t r = x;
            for (std::size_t i = moduli.size(); i-- > 0;) {
                c[i] = static_cast<std::int64_t>(r % static_cast<std::size_t>(moduli[i]));
                r /= static_cast<std::size_t>(moduli[i]);
            }
            std::size_t y = 0;
            for (std::size_t i = 0; i < moduli.size(); ++i) {
                std::int64_t v = (c[i] + a[i] % moduli[i] + moduli[i]) % moduli[i];
                y = y * static_cast<std::size_t>(moduli[i]) + static_cast<std::size_t>(v);
            }
            p[x] = y;
        }
        perms.push_back(std::move(p));
    }
    return FiniteSystem(std::vector<double>(n, 1.0 / static_cast<double>(n)), std::move(perms),
                        TranslationData{moduli, shifts});
}

inline IntVec unit_vector(std::size_t ell, Index j)
{
    IntVec v(ell, 0);
    v.at(j) = 1;
    return v;
}

/** T^b = T_1^{b_1} ... T_l^{b_l}. */
inline Perm power_compose(const FiniteSystem& sys, const IntVec& b)
{
    if (b.size() != sys.ell()) throw ShapeMismatch("exponent vector has wrong length");
    Perm r = identity_perm(sys.size());
    for (Index j = 0; j < b.size(); ++j) {
        if (b[j] == 0) continue;
        const auto& cd = sys.cycles(j);
        const std::int64_t e = mod_int(b[j], cd.order);
        for (auto& y : r) y = cd.apply(y, e);
    }
    return r;
}

/** Orbit partition in canonical form: blocks sorted by least element. */
struct OrbitPartition {
    std::vector<std::vector<std::size_t>> blocks;
    std::vector<std::size_t> block_of;

    std::size_t count() const { return blocks.size(); }
    friend bool operator==(const OrbitPartition& a, const OrbitPartition& b) { return a.blocks == b.blocks; }
};

inline OrbitPartition orbits_of(std::size_t n, const std::vector<Perm>& gens)
{
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& g : gens)
        for (std::size_t x = 0; x < n; ++x) {
            std::size_t a = find(x), b = find(g[x]);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    OrbitPartition P;
    P.block_of.assign(n, SIZE_MAX);
    std::vector<std::size_t> id_of_root(n, SIZE_MAX);
    for (std::size_t x = 0; x < n; ++x) {
        std::size_t r = find(x);
        if (id_of_root[r] == SIZE_MAX) {
            id_of_root[r] = P.blocks.size();
            P.blocks.emplace_back();
        }
        P.block_of[x] = id_of_root[r];
        P.blocks[id_of_root[r]].push_back(x);
    }
    return P;
}

/** Orbits of the group generated by T^b, b in generators. */
inline OrbitPartition invariant_partition(const FiniteSystem& sys, const std::vector<IntVec>& generators)
{
    std::vector<Perm> gens;
    for (const auto& b : generators) gens.push_back(power_compose(sys, b));
    return orbits_of(sys.size(), gens);
}

inline OrbitPartition single_block(std::size_t n) { return orbits_of(n, {Perm(n, 0)}); }
inline OrbitPartition singletons(std::size_t n) { return orbits_of(n, {}); }

/** True when every block of fine lies inside a block of coarse. */
inline bool refines(const OrbitPartition& fine, const OrbitPartition& coarse)
{
    for (const auto& B : fine.blocks)
        for (std::size_t x : B)
            if (coarse.block_of[x] != coarse.block_of[B.front()]) return false;
    return true;
}

/** I(T^b) contained in I(T^c), decided on orbit partitions. */
inline bool invariant_algebra_contained(const FiniteSystem& sys, const IntVec& b, const IntVec& c)
{
    return refines(invariant_partition(sys, {c}), invariant_partition(sys, {b}));
}

inline Complex integral(const FiniteSystem& sys, const Observable& f)
{
    if (f.size() != sys.size()) throw ShapeMismatch("observable size differs from system size");
    Complex s = 0;
    for (std::size_t x = 0; x < f.size(); ++x) s += sys.weight(x) * f[x];
    return s;
}

/** <f, g> = int f conj(g) dmu. */
inline Complex inner(const FiniteSystem& sys, const Observable& f, const Observable& g)
{
    if (f.size() != sys.size() || g.size() != sys.size()) throw ShapeMismatch("observable size differs from system size");
    Complex s = 0;
    for (std::size_t x = 0; x < f.size(); ++x) s += sys.weight(x) * f[x] * std::conj(g[x]);
    return s;
}

inline double l2_norm(const FiniteSystem& sys, const Observable& f) { return std::sqrt(std::max(0.0, inner(sys, f, f).real())); }

inline double l2_distance(const FiniteSystem& sys, const Observable& f, const Observable& g)
{
    if (f.size() != sys.size() || g.size() != sys.size()) throw ShapeMismatch("observable size differs from system size");
    double s = 0;
    for (std::size_t x = 0; x < f.size(); ++x) s += sys.weight(x) * std::norm(f[x] - g[x]);
    return std::sqrt(s);
}

/** f o T^e for the j-th transform. */
inline Observable shift(const FiniteSystem& sys, const Observable& f, Index j, std::int64_t e)
{
    const auto& cd = sys.cycles(j);
    Observable r;
    r.values.resize(f.size());
    for (std::size_t x = 0; x < f.size(); ++x) r.values[x] = f[cd.apply(x, e)];
    return r;
}

inline Observable apply_perm(const Observable& f, const Perm& p)
{
    Observable r;
    r.values.resize(f.size());
    for (std::size_t x = 0; x < f.size(); ++x) r.values[x] = f[p[x]];
    return r;
}

/** E(f | P): block averages; zero-measure blocks get 0. */
inline Observable cond_expectation(const FiniteSystem& sys, const Observable& f, const OrbitPartition& part)
{
    if (f.size() != sys.size() || part.block_of.size() != sys.size())
        throw ShapeMismatch("observable or partition size differs from system size");
    std::vector<Complex> val(part.count(), 0);
    for (std::size_t b = 0; b < part.count(); ++b) {
        double w = 0;
        Complex s = 0;
        for (std::size_t x : part.blocks[b]) {
            w += sys.weight(x);
            s += sys.weight(x) * f[x];
        }
        val[b] = w > 0 ? s / w : Complex(0);
    }
    Observable r;
    r.values.resize(f.size());
    for (std::size_t x = 0; x < f.size(); ++x) r.values[x] = val[part.block_of[x]];
    return r;
}

inline bool is_block_constant(const Observable& f, const OrbitPartition& part, double tol = 1e-12)
{
    for (const auto& B : part.blocks)
        for (std::size_t x : B)
            if (std::abs(f[x] - f[B.front()]) > tol) return false;
    return true;
}

/** Result of testing one ergodicity obligation on a system. */
struct ObligationCheck {
    bool good = false;
    bool very_good = false;
    std::size_t left_blocks = 0;
    std::size_t right_blocks = 0;
};

/**
 * Good: orbits of T^v coincide with orbits of <T_eta1, T_eta2>.
 * Very good: additionally T^v is ergodic (one orbit).
 */
inline ObligationCheck evaluate_obligation(const FiniteSystem& sys, const ErgodicityObligation& ob)
{
    if (ob.vector.size() != sys.ell()) throw ShapeMismatch("obligation vector length differs from number of transforms");
    OrbitPartition left = invariant_partition(sys, {ob.vector});
    OrbitPartition right = invariant_partition(sys, {unit_vector(sys.ell(), ob.eta1), unit_vector(sys.ell(), ob.eta2)});
    ObligationCheck c;
    c.left_blocks = left.count();
    c.right_blocks = right.count();
    c.good = left == right;
    c.very_good = c.good && left.count() == 1;
    return c;
}

inline bool check_obligation(const FiniteSystem& sys, const ErgodicityObligation& ob, bool very_good = false)
{
    auto c = evaluate_obligation(sys, ob);
    return very_good ? c.very_good : c.good;
}

inline bool is_ergodic(const FiniteSystem& sys, Index j) { return sys.cycles(j).cycles.size() == 1; }

/** chi_xi(x) = e(sum_i xi_i x_i / q_i) on a translation system. */
inline Observable character(const FiniteSystem& sys, const Coords& xi)
{
    const auto& q = sys.translation().moduli;
    if (xi.size() != q.size()) throw ShapeMismatch("character index has wrong length");
    std::int64_t Q = 1;
    for (auto m : q) Q = lcm64(Q, m);
    Observable f;
    f.values.resize(sys.size());
    for (std::size_t x = 0; x < sys.size(); ++x) {
        Coords c = sys.coords(x);
        std::int64_t num = 0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            std::int64_t xr = ((xi[i] % q[i]) + q[i]) % q[i];
            num = (num + static_cast<std::int64_t>((static_cast<__int128>(xr) * c[i] % q[i]) * (Q / q[i]) % Q)) % Q;
        }
        f.values[x] = e_rational(Rational(num, Q));
    }
    f.bound = 1.0;
    return f;
}

/** Eigenvalue of chi_xi under translation by a: sum_i xi_i a_i / q_i mod 1. */
inline Rational character_frequency(const TranslationData& td, const Coords& xi, Index j)
{
    Rational s(0);
    for (std::size_t i = 0; i < td.moduli.size(); ++i) {
        const std::int64_t q = td.moduli[i];
        s += Rational(((xi[i] % q) * (td.shifts.at(j)[i] % q)) % q, q);
    }
    return frac(s);
}

/** All character indices of the group, in point order. */
inline std::vector<Coords> all_characters(const FiniteSystem& sys)
{
    std::vector<Coords> out;
    out.reserve(sys.size());
    for (std::size_t x = 0; x < sys.size(); ++x) out.push_back(sys.coords(x));
    return out;
}

struct SpectralPoint {
    Rational alpha;
    std::vector<Coords> witnesses;  // character indices xi with T chi_xi = e(alpha) chi_xi
};

/** Spec(T_j) for a translation system with character witnesses, sorted by alpha. */
inline std::vector<SpectralPoint> spectrum_cyclic(const FiniteSystem& sys, Index j)
{
    const auto& td = sys.translation();
    if (j >= sys.ell()) throw ShapeMismatch("transform index out of range");
    std::map<Rational, std::vector<Coords>> m;
    for (const auto& xi : all_characters(sys)) m[character_frequency(td, xi, j)].push_back(xi);
    std::vector<SpectralPoint> out;
    for (auto& [a, w] : m) out.push_back({a, std::move(w)});
    return out;
}

/** Per-cycle eigenfunction: e(k p / L) at position p of the cycle, 0 elsewhere. */
struct CycleEigen {
    Rational alpha;
    std::size_t cycle = 0;
    std::int64_t k = 0;
};

inline std::vector<CycleEigen> cycle_spectrum(const FiniteSystem& sys, Index j)
{
    const auto& cd = sys.cycles(j);
    std::vector<CycleEigen> out;
    for (std::size_t c = 0; c < cd.cycles.size(); ++c) {
        const auto L = static_cast<std::int64_t>(cd.cycles[c].size());
        for (std::int64_t k = 0; k < L; ++k) out.push_back({Rational(k, L), c, k});
    }
    return out;
}

inline Observable cycle_eigenfunction(const FiniteSystem& sys, Index j, const CycleEigen& ev)
{
    const auto& cyc = sys.cycles(j).cycles.at(ev.cycle);
    const auto L = static_cast<std::int64_t>(cyc.size());
    Observable f = Observable::constant(sys.size(), 0);
    for (std::size_t p = 0; p < cyc.size(); ++p)
        f.values[cyc[p]] = e_rational(Rational(ev.k * static_cast<std::int64_t>(p) % L, L));
    f.bound = 1.0;
    return f;
}

/** Distinct eigenvalues of T_j (translation characters or per-cycle characters). */
inline std::vector<Rational> spectrum_values(const FiniteSystem& sys, Index j)
{
    std::vector<Rational> out;
    if (sys.is_translation()) {
        for (const auto& sp : spectrum_cyclic(sys, j)) out.push_back(sp.alpha);
    } else {
        for (const auto& ev : cycle_spectrum(sys, j)) out.push_back(ev.alpha);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
    }
    return out;
}

} // namespace ergomax
