#pragma once

/**
 * @file averages.hpp
 * @brief Multiple ergodic averages, box and Host-Kra seminorms, dual
 * functions, Weyl means and the joint-ergodicity verifiers on finite systems.
 *
 * Every sequence n -> T^{p(n)} on a finite system is periodic, so limits are
 * computed exactly as means over one period. Truncated averages carry an
 * exactness flag that is set only when the range is a multiple of the period.
 */

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "family.hpp"
#include "finsys.hpp"
#include "parallel.hpp"
#include "polyalg.hpp"

namespace ergomax {

struct Tolerances {
    double exact = 1e-9;
    double inequality = 1e-6;
};

/** Differencing directions b_1..b_s. */
struct SeminormSpec {
    std::vector<IntVec> vectors;
    bool allow_zero = false;

    static SeminormSpec repeat(const IntVec& a, int s)
    {
        SeminormSpec sp;
        sp.vectors.assign(static_cast<std::size_t>(std::max(s, 0)), a);
        return sp;
    }

    std::size_t s() const { return vectors.size(); }

    void validate(std::size_t ell) const
    {
        if (vectors.empty()) throw InvalidSpec("seminorm spec needs at least one vector");
        for (std::size_t k = 0; k < vectors.size(); ++k) {
            if (vectors[k].size() != ell)
                throw ShapeMismatch("spec vector " + std::to_string(k + 1) + " has wrong length");
            if (!allow_zero && std::all_of(vectors[k].begin(), vectors[k].end(), [](const Int& x) { return x == 0; }))
                throw InvalidSpec("spec vector " + std::to_string(k + 1) + " is zero");
        }
    }
};

struct SeminormResult {
    double value = 0;      // the seminorm
    double power = 0;      // the averaged 2^s-th power after clamping
    double imag = 0;       // imaginary residue of the average
    bool exact = false;
    std::int64_t period = 1;
};

namespace detail {

/** Coefficient residues of an integer polynomial for fast evaluation mod m. */
struct ModPoly {
    std::vector<std::int64_t> c;  // c[k] multiplies n^{k+1}
    std::int64_t m = 1;

    ModPoly() = default;
    ModPoly(const IntPoly& p, std::int64_t mod) : m(mod)
    {
        for (int k = 1; k <= p.degree(); ++k) c.push_back(mod_int(p.coeff(k), m));
    }

    std::int64_t operator()(std::int64_t n) const
    {
        if (m == 1) return 0;
        using i128 = __int128;
        std::int64_t x = ((n % m) + m) % m;
        i128 acc = 0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = (acc * x + *it) % m;
        return static_cast<std::int64_t>(acc * x % m);
    }
};

inline std::int64_t perm_order(const Perm& p) { return CycleData(p).order; }

inline void check_obs(const FiniteSystem& sys, const Observable& f)
{
    if (f.size() != sys.size()) throw ShapeMismatch("observable size differs from system size");
}

/**
 * Mean over h in [H_1] x ... x [H_s] of int Delta_{S; h} f dmu, with
 * g_k = g_{k-1} * conj(g_{k-1} o S_k^{h_k}).
 */
inline Complex box_average(const FiniteSystem& sys, const Observable& f, const std::vector<CycleData>& S,
                           const std::vector<std::int64_t>& H)
{
    const std::size_t s = S.size(), n = sys.size();
    auto body = [&](std::size_t b, std::size_t e) {
        std::vector<std::vector<Complex>> g(s + 1, std::vector<Complex>(n));
        g[0] = f.values;
        Complex acc = 0;
        std::function<void(std::size_t)> rec = [&](std::size_t k) {
            if (k == s) {
                Complex t = 0;
                for (std::size_t x = 0; x < n; ++x) t += sys.weight(x) * g[s][x];
                acc += t;
                return;
            }
            for (std::int64_t h = 1; h <= H[k]; ++h) {
                Perm p = S[k].power(h);
                for (std::size_t x = 0; x < n; ++x) g[k + 1][x] = g[k][x] * std::conj(g[k][p[x]]);
                rec(k + 1);
            }
        };
        for (std::size_t h1 = b; h1 < e; ++h1) {
            Perm p = S[0].power(static_cast<std::int64_t>(h1) + 1);
            for (std::size_t x = 0; x < n; ++x) g[1][x] = g[0][x] * std::conj(g[0][p[x]]);
            rec(1);
        }
        return acc;
    };
    Complex total = chunked_reduce<Complex>(static_cast<std::size_t>(H[0]), 1, Complex(0), body,
                                            [](Complex& a, const Complex& b) { a += b; });
    double count = 1;
    for (auto h : H) count *= static_cast<double>(h);
    return total / count;
}

inline SeminormResult finish_power(Complex avg, std::size_t s, double tol)
{
    SeminormResult r;
    r.imag = avg.imag();
    double p = avg.real();
    if (!(p >= -tol)) throw NegativeBeyondTolerance("averaged power " + std::to_string(p) + " is below -tolerance");
    r.power = std::max(p, 0.0);
    r.value = std::pow(r.power, 1.0 / std::ldexp(1.0, static_cast<int>(s)));
    return r;
}

} // namespace detail

/**
 * Box seminorm with a separate range per direction; H[k] = 0 means one full
 * period of T^{b_k} (exact at that level).
 */
inline SeminormResult box_seminorm_levels(const FiniteSystem& sys, const Observable& f, const SeminormSpec& spec,
                                          std::vector<std::int64_t> H, double tol = 1e-9)
{
    detail::check_obs(sys, f);
    spec.validate(sys.ell());
    if (H.size() != spec.s()) throw ShapeMismatch("one range per spec vector required");
    std::vector<CycleData> S;
    std::int64_t period = 1;
    bool exact = true;
    for (std::size_t k = 0; k < spec.s(); ++k) {
        S.emplace_back(power_compose(sys, spec.vectors[k]));
        const std::int64_t ord = S.back().order;
        period = lcm64(period, ord);
        if (H[k] < 0) throw InvalidSpec("negative range");
        if (H[k] == 0) H[k] = ord;
        if (H[k] % ord != 0) exact = false;
    }
    auto r = detail::finish_power(detail::box_average(sys, f, S, H), spec.s(), tol);
    r.exact = exact;
    r.period = period;
    return r;
}

/** Simultaneous average over h in [H]^s. */
inline SeminormResult box_seminorm_report(const FiniteSystem& sys, const Observable& f, const SeminormSpec& spec,
                                          std::int64_t H, double tol = 1e-9)
{
    if (H < 1) throw InvalidSpec("H must be positive");
    return box_seminorm_levels(sys, f, spec, std::vector<std::int64_t>(spec.s(), H), tol);
}

inline double box_seminorm(const FiniteSystem& sys, const Observable& f, const SeminormSpec& spec, std::int64_t H,
                           double tol = 1e-9)
{
    return box_seminorm_report(sys, f, spec, H, tol).value;
}

/** Iterated truncation: outermost direction at H, inner directions exact. */
inline SeminormResult box_seminorm_iterated(const FiniteSystem& sys, const Observable& f, const SeminormSpec& spec,
                                            std::int64_t H, double tol = 1e-9)
{
    if (H < 1) throw InvalidSpec("H must be positive");
    std::vector<std::int64_t> levels(spec.s(), 0);
    if (!levels.empty()) levels.back() = H;
    return box_seminorm_levels(sys, f, spec, levels, tol);
}

/** |||f|||_{s,T_j}; s = 0 gives |int f|. */
inline SeminormResult ghk_seminorm_report(const FiniteSystem& sys, const Observable& f, Index j, int s, std::int64_t H,
                                          double tol = 1e-9)
{
    if (s < 0) throw InvalidSpec("s must be nonnegative");
    if (j >= sys.ell()) throw ShapeMismatch("transform index out of range");
    if (s == 0) {
        SeminormResult r;
        r.value = r.power = std::abs(integral(sys, f));
        r.exact = true;
        return r;
    }
    return box_seminorm_report(sys, f, SeminormSpec::repeat(unit_vector(sys.ell(), j), s), H, tol);
}

inline double ghk_seminorm(const FiniteSystem& sys, const Observable& f, Index j, int s, std::int64_t H,
                           double tol = 1e-9)
{
    return ghk_seminorm_report(sys, f, j, s, H, tol).value;
}

/** Delta_{b_1..b_k; h} f = prod over eps of C^{|eps|} T^{sum b_i eps_i h_i} f. */
inline Observable box_derivative(const FiniteSystem& sys, const Observable& f, const std::vector<IntVec>& vectors,
                                 const std::vector<std::int64_t>& h)
{
    detail::check_obs(sys, f);
    if (h.size() != vectors.size()) throw ShapeMismatch("one h per vector required");
    Observable g = f;
    for (std::size_t k = 0; k < vectors.size(); ++k) {
        IntVec v = vectors[k];
        for (auto& c : v) c *= h[k];
        g = g * apply_perm(g, power_compose(sys, v)).conj();
    }
    return g;
}

/**
 * Inductive evaluation: mean over h in [H]^{s-s'} of
 * |||Delta_{b_{s'+1}..b_s; h} f|||_{b_1..b_{s'}}^{2^{s'}}, inner at the same H.
 * Returns the 2^s-th power.
 */
inline double seminorm_inductive_power(const FiniteSystem& sys, const Observable& f, const SeminormSpec& spec,
                                       std::size_t s_prime, std::int64_t H, double tol = 1e-9)
{
    spec.validate(sys.ell());
    if (s_prime > spec.s()) throw InvalidSpec("s' exceeds s");
    std::vector<IntVec> inner(spec.vectors.begin(), spec.vectors.begin() + static_cast<std::ptrdiff_t>(s_prime));
    std::vector<IntVec> outer(spec.vectors.begin() + static_cast<std::ptrdiff_t>(s_prime), spec.vectors.end());
    SeminormSpec ispec{inner, spec.allow_zero};
    const std::size_t m = outer.size();
    std::vector<std::int64_t> h(m, 1);
    Complex acc = 0;
    std::size_t count = 0;
    while (true) {
        Observable d = box_derivative(sys, f, outer, h);
        if (s_prime == 0) acc += integral(sys, d);
        else acc += box_seminorm_report(sys, d, ispec, H, tol).power;
        ++count;
        std::size_t k = 0;
        while (k < m && h[k] == H) h[k++] = 1;
        if (k == m) break;
        ++h[k];
    }
    return detail::finish_power(acc / static_cast<double>(count), spec.s(), tol).power;
}

/**
 * E_{h in [H]^s} int prod_eps C^{|eps|} T^{sum b_i eps_i h_i} f_eps dmu, with
 * f_eps indexed by the bitmask of eps (bit k for direction k).
 */
inline Complex box_cube_average(const FiniteSystem& sys, const std::vector<Observable>& fe, const SeminormSpec& spec,
                                std::int64_t H)
{
    spec.validate(sys.ell());
    const std::size_t s = spec.s(), n = sys.size(), V = std::size_t{1} << s;
    if (fe.size() != V) throw ShapeMismatch("need 2^s functions");
    for (const auto& f : fe) detail::check_obs(sys, f);
    std::vector<CycleData> S;
    for (const auto& b : spec.vectors) S.emplace_back(power_compose(sys, b));
    std::size_t total = 1;
    for (std::size_t k = 0; k < s; ++k) total *= static_cast<std::size_t>(H);
    auto body = [&](std::size_t b, std::size_t e) {
        Complex acc = 0;
        std::vector<std::int64_t> h(s);
        std::vector<Perm> pw(s);
        for (std::size_t idx = b; idx < e; ++idx) {
            std::size_t r = idx;
            for (std::size_t k = 0; k < s; ++k) {
                h[k] = static_cast<std::int64_t>(r % static_cast<std::size_t>(H)) + 1;
                r /= static_cast<std::size_t>(H);
                pw[k] = S[k].power(h[k]);
            }
            for (std::size_t x = 0; x < n; ++x) {
                Complex prod = 1;
                for (std::size_t eps = 0; eps < V; ++eps) {
                    std::size_t y = x;
                    for (std::size_t k = 0; k < s; ++k)
                        if (eps >> k & 1) y = pw[k][y];
                    Complex v = fe[eps][y];
                    prod *= (std::popcount(eps) % 2) ? std::conj(v) : v;
                }
                acc += sys.weight(x) * prod;
            }
        }
        return acc;
    };
    Complex sum = chunked_reduce<Complex>(total, 64, Complex(0), body, [](Complex& a, const Complex& b) { a += b; });
    return sum / static_cast<double>(total);
}

/**
 * Independent recursion for |||f|||_{s,T_j}: one full period per level, base
 * case ||E(f | I(T_j))||_2^2.
 */
inline double gowers_oracle(const FiniteSystem& sys, const Observable& f, Index j, int s, double tol = 1e-9)
{
    if (s < 1) throw InvalidSpec("gowers_oracle needs s >= 1");
    detail::check_obs(sys, f);
    const OrbitPartition inv = invariant_partition(sys, {unit_vector(sys.ell(), j)});
    const std::int64_t P = sys.order(j);
    std::function<double(const Observable&, int)> power = [&](const Observable& g, int k) -> double {
        if (k == 1) {
            double v = l2_norm(sys, cond_expectation(sys, g, inv));
            return v * v;
        }
        double acc = 0;
        for (std::int64_t h = 0; h < P; ++h) acc += power(g * shift(sys, g, j, h).conj(), k - 1);
        return acc / static_cast<double>(P);
    };
    double p = power(f, s);
    if (!(p >= -tol)) throw NegativeBeyondTolerance("oracle power below -tolerance");
    return std::pow(std::max(p, 0.0), 1.0 / std::ldexp(1.0, s));
}

/** D_{s,T_j}(f): mean over m in [M]^s of the product over nonzero eps; M = 0 means one period. */
inline Observable dual_function(const FiniteSystem& sys, const Observable& f, Index j, int s, std::int64_t M = 0)
{
    if (s < 1) throw InvalidSpec("dual function needs s >= 1");
    detail::check_obs(sys, f);
    const auto& cd = sys.cycles(j);
    if (M == 0) M = cd.order;
    if (M < 1) throw InvalidSpec("M must be positive");
    const std::size_t n = sys.size(), V = std::size_t{1} << s;
    std::size_t total = 1;
    for (int k = 0; k < s; ++k) total *= static_cast<std::size_t>(M);
    using Acc = std::vector<Complex>;
    auto body = [&](std::size_t b, std::size_t e) {
        Acc acc(n, 0);
        for (std::size_t idx = b; idx < e; ++idx) {
            std::vector<std::int64_t> m(static_cast<std::size_t>(s));
            std::size_t r = idx;
            for (auto& mk : m) {
                mk = static_cast<std::int64_t>(r % static_cast<std::size_t>(M)) + 1;
                r /= static_cast<std::size_t>(M);
            }
            for (std::size_t x = 0; x < n; ++x) {
                Complex prod = 1;
                for (std::size_t eps = 1; eps < V; ++eps) {
                    std::int64_t shift_by = 0;
                    for (int k = 0; k < s; ++k)
                        if (eps >> k & 1) shift_by += m[static_cast<std::size_t>(k)];
                    Complex v = f[cd.apply(x, shift_by)];
                    prod *= (std::popcount(eps) % 2) ? std::conj(v) : v;
                }
                acc[x] += prod;
            }
        }
        return acc;
    };
    Acc sum = chunked_reduce<Acc>(total, 64, Acc(n, 0), body, [](Acc& a, const Acc& b) {
        for (std::size_t x = 0; x < a.size(); ++x) a[x] += b[x];
    });
    Observable out;
    out.values.resize(n);
    for (std::size_t x = 0; x < n; ++x) out.values[x] = sum[x] / static_cast<double>(total);
    return out;
}

/** The sequence n -> T_transform^{q(n) + shift} D_{s,T_transform}(generator). */
struct DualSeq {
    Index transform = 0;
    int s = 1;
    Observable generator;
    IntPoly q;
    Int shift = 0;
};

namespace detail {

struct Factor {
    const Observable* f;
    const CycleData* cd;
    ModPoly p;
    std::int64_t offset;
};

/** Serial kernel: sum over n in [first, last) of prod_k f_k(T_k^{p_k(n)+offset_k} x). */
inline void accumulate_average(const FiniteSystem& sys, const std::vector<Factor>& fac, std::int64_t first,
                               std::int64_t last, std::vector<Complex>& acc)
{
    const std::size_t n = sys.size();
    std::vector<std::int64_t> e(fac.size());
    for (std::int64_t t = first; t < last; ++t) {
        for (std::size_t k = 0; k < fac.size(); ++k) e[k] = (fac[k].p(t) + fac[k].offset) % fac[k].cd->order;
        for (std::size_t x = 0; x < n; ++x) {
            Complex prod = 1;
            for (std::size_t k = 0; k < fac.size(); ++k) prod *= (*fac[k].f)[fac[k].cd->apply(x, e[k])];
            acc[x] += prod;
        }
    }
}

struct PreparedAverage {
    std::vector<Factor> factors;
    std::vector<Observable> dual_values;
    std::int64_t period = 1;
};

inline PreparedAverage prepare_average(const FiniteSystem& sys, const TupleState& t, const std::vector<Observable>& fns,
                                       const std::vector<DualSeq>& duals)
{
    if (fns.size() != t.size()) throw ShapeMismatch("one observable per tuple position required");
    PreparedAverage pa;
    pa.dual_values.reserve(duals.size());
    for (const auto& d : duals) {
        if (d.transform >= sys.ell()) throw ShapeMismatch("dual transform out of range");
        pa.dual_values.push_back(dual_function(sys, d.generator, d.transform, d.s));
    }
    for (std::size_t j = 0; j < t.size(); ++j) {
        if (t.eta[j] >= sys.ell()) throw ShapeMismatch("tuple uses transform " + std::to_string(t.eta[j] + 1) +
                                                       " but the system has " + std::to_string(sys.ell()));
        check_obs(sys, fns[j]);
        const auto& cd = sys.cycles(t.eta[j]);
        pa.factors.push_back({&fns[j], &cd, ModPoly(t.rhos[j], cd.order), 0});
        pa.period = lcm64(pa.period, cd.order);
    }
    for (std::size_t d = 0; d < duals.size(); ++d) {
        const auto& cd = sys.cycles(duals[d].transform);
        pa.factors.push_back({&pa.dual_values[d], &cd, ModPoly(duals[d].q, cd.order), mod_int(duals[d].shift, cd.order)});
        pa.period = lcm64(pa.period, cd.order);
    }
    return pa;
}

inline Observable run_average(const FiniteSystem& sys, const PreparedAverage& pa, std::int64_t N)
{
    const std::size_t n = sys.size();
    using Acc = std::vector<Complex>;
    const std::size_t chunk = std::max<std::size_t>(1, static_cast<std::size_t>(N) / 64);
    Acc sum = chunked_reduce<Acc>(
        static_cast<std::size_t>(N), chunk, Acc(n, 0),
        [&](std::size_t b, std::size_t e) {
            Acc acc(n, 0);
            accumulate_average(sys, pa.factors, static_cast<std::int64_t>(b) + 1, static_cast<std::int64_t>(e) + 1, acc);
            return acc;
        },
        [](Acc& a, const Acc& b) {
            for (std::size_t x = 0; x < a.size(); ++x) a[x] += b[x];
        });
    Observable out;
    out.values.resize(n);
    for (std::size_t x = 0; x < n; ++x) out.values[x] = sum[x] / static_cast<double>(N);
    return out;
}

inline Observable serial_limit(const FiniteSystem& sys, const PreparedAverage& pa)
{
    std::vector<Complex> acc(sys.size(), 0);
    accumulate_average(sys, pa.factors, 1, pa.period + 1, acc);
    Observable out;
    out.values.resize(acc.size());
    for (std::size_t x = 0; x < acc.size(); ++x) out.values[x] = acc[x] / static_cast<double>(pa.period);
    return out;
}

} // namespace detail

/** (1/N) sum_{n=1}^N prod_j f_j(T_{eta_j}^{rho_j(n)} x) * prod of dual terms. */
inline Observable multi_average(const FiniteSystem& sys, const TupleState& t, const std::vector<Observable>& fns,
                                const std::vector<DualSeq>& duals, std::int64_t N)
{
    if (N < 1) throw InvalidSpec("N must be positive");
    return detail::run_average(sys, detail::prepare_average(sys, t, fns, duals), N);
}

/** Period of the exponent sequence of an average. */
inline std::int64_t limit_period(const FiniteSystem& sys, const TupleState& t, const std::vector<DualSeq>& duals = {})
{
    std::int64_t P = 1;
    for (Index e : t.eta) P = lcm64(P, sys.order(e));
    for (const auto& d : duals) P = lcm64(P, sys.order(d.transform));
    return P;
}

/** Cesaro limit: mean over one period. */
inline Observable exact_limit_average(const FiniteSystem& sys, const TupleState& t, const std::vector<Observable>& fns,
                                      const std::vector<DualSeq>& duals = {})
{
    auto pa = detail::prepare_average(sys, t, fns, duals);
    return detail::run_average(sys, pa, pa.period);
}

struct AverageReport {
    Observable value;
    std::int64_t N = 0;
    std::int64_t period = 1;
    bool exact = false;
    std::optional<double> deviation;
};

inline AverageReport average_report(const FiniteSystem& sys, const TupleState& t, const std::vector<Observable>& fns,
                                    const std::vector<DualSeq>& duals, std::int64_t N,
                                    const std::optional<Observable>& target = std::nullopt)
{
    AverageReport r;
    r.value = multi_average(sys, t, fns, duals, N);
    r.N = N;
    r.period = limit_period(sys, t, duals);
    r.exact = N % r.period == 0;
    if (target) r.deviation = l2_distance(sys, r.value, *target);
    return r;
}

struct WeylResult {
    Complex value;
    bool vanishes = false;
    std::int64_t period = 1;
};

/** lim (1/N) sum e(alpha_1 p_1(n) + ... ), exact over one period. */
inline WeylResult weyl_mean(const std::vector<IntPoly>& polys, const std::vector<Rational>& alphas, double tol = 1e-9)
{
    if (polys.size() != alphas.size()) throw ShapeMismatch("one alpha per polynomial required");
    std::int64_t q = 1;
    for (const auto& a : alphas) q = lcm64(q, a.denominator());
    std::vector<std::int64_t> c(alphas.size());
    std::vector<detail::ModPoly> mp;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        std::int64_t num = alphas[i].numerator() % alphas[i].denominator();
        if (num < 0) num += alphas[i].denominator();
        c[i] = static_cast<std::int64_t>(static_cast<__int128>(num) * (q / alphas[i].denominator()) % q);
        mp.emplace_back(polys[i], q);
    }
    std::vector<Complex> roots;
    if (q <= (1 << 20)) {
        roots.resize(static_cast<std::size_t>(q));
        for (std::int64_t k = 0; k < q; ++k) roots[static_cast<std::size_t>(k)] = e_rational(Rational(k, q));
    }
    auto body = [&](std::size_t b, std::size_t e) {
        Complex acc = 0;
        for (std::size_t n = b + 1; n <= e; ++n) {
            __int128 ph = 0;
            for (std::size_t i = 0; i < c.size(); ++i)
                ph = (ph + static_cast<__int128>(c[i]) * mp[i](static_cast<std::int64_t>(n))) % q;
            const auto k = static_cast<std::int64_t>(ph);
            acc += roots.empty() ? e_rational(Rational(k, q)) : roots[static_cast<std::size_t>(k)];
        }
        return acc;
    };
    const std::size_t chunk = std::max<std::size_t>(1024, static_cast<std::size_t>(q) / 64);
    Complex sum = chunked_reduce<Complex>(static_cast<std::size_t>(q), chunk, Complex(0), body,
                                          [](Complex& a, const Complex& b) { a += b; });
    WeylResult r;
    r.value = sum / static_cast<double>(q);
    r.vanishes = std::abs(r.value) <= tol;
    r.period = q;
    return r;
}

// ---------------------------------------------------------------------------
// verifiers

struct VerifyOptions {
    double tol = 1e-9;
    std::size_t full_family_budget = 20000;  // character tuples checked in full
    std::size_t eigen_budget = 200000;       // per-cycle eigen tuples on permutation systems
    std::size_t product_budget = 1000000;    // cells of X^l
};

/** An eigen tuple (chi_1..chi_l) and its limit deviation. */
struct EigenWitness {
    std::vector<Rational> alphas;
    std::vector<Coords> characters;     // translation systems
    std::vector<CycleEigen> cycles;     // permutation systems
    Complex mean;                       // Weyl mean of the phases, when applicable
    double deviation = 0;
};

struct DirectCheck {
    double max_deviation = 0;
    std::size_t tuples = 0;
    std::string family;  // full, representatives or supplied
    std::size_t worst = 0;
    std::vector<Coords> worst_characters;
};

struct WjeReport {
    std::vector<ErgodicityObligation> obligations;
    std::vector<ErgodicityObligation> failing_obligations;
    bool criterion_i = false;
    bool criterion_ii = false;
    std::size_t eigen_tuples = 0;
    std::vector<EigenWitness> failing_eigen;
    DirectCheck direct;
    bool verdict = false;
    bool agreement = false;
};

struct JeReport {
    std::vector<bool> ergodic;
    std::vector<ErgodicityObligation> obligations;
    std::vector<ErgodicityObligation> failing_obligations;
    bool criterion_i = false;
    bool criterion_ii = false;
    std::size_t spectral_tuples = 0;
    std::vector<EigenWitness> failing_eigen;
    DirectCheck direct;
    bool verdict = false;
    bool agreement = false;
    bool wje_verdict = false;
    bool lemma_agreement = false;  // JE iff (WJE and every T_j ergodic)
};

namespace detail {

inline void check_family(const FiniteSystem& sys, const BaseFamily& base)
{
    if (base.size() != sys.ell())
        throw ShapeMismatch("family has " + std::to_string(base.size()) + " polynomials but the system has " +
                            std::to_string(sys.ell()) + " transforms");
}

/** Iterate over the mixed-radix product of sizes; f returns false to stop. */
template <class F>
void for_each_tuple(const std::vector<std::size_t>& sizes, F f)
{
    std::vector<std::size_t> idx(sizes.size(), 0);
    for (auto s : sizes)
        if (s == 0) return;
    while (true) {
        if (!f(idx)) return;
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == sizes[k]) idx[k++] = 0;
        if (k == idx.size()) return;
    }
}

inline std::size_t product_size(const std::vector<std::size_t>& sizes, std::size_t cap)
{
    std::size_t p = 1;
    for (auto s : sizes) {
        if (s != 0 && p > cap / s) return cap + 1;
        p *= s;
    }
    return p;
}

/** Translation: Weyl check over Spec(T_1) x ... x Spec(T_l). target(all_zero) gives the expected limit factor. */
inline std::vector<EigenWitness> spectral_weyl_check(const FiniteSystem& sys, const BaseFamily& base, double tol,
                                                     std::size_t& count, bool character_witnesses)
{
    std::vector<std::vector<Rational>> specs;
    std::vector<std::vector<SpectralPoint>> points;
    for (Index j = 0; j < sys.ell(); ++j) {
        if (character_witnesses) {
            points.push_back(spectrum_cyclic(sys, j));
            specs.emplace_back();
            for (const auto& sp : points.back()) specs.back().push_back(sp.alpha);
        } else {
            specs.push_back(spectrum_values(sys, j));
        }
    }
    std::vector<std::size_t> sizes;
    for (const auto& s : specs) sizes.push_back(s.size());
    std::vector<EigenWitness> fails;
    count = 0;
    for_each_tuple(sizes, [&](const std::vector<std::size_t>& idx) {
        std::vector<Rational> a(idx.size());
        bool all_zero = true;
        for (std::size_t j = 0; j < idx.size(); ++j) {
            a[j] = specs[j][idx[j]];
            all_zero = all_zero && a[j].numerator() == 0;
        }
        ++count;
        auto w = weyl_mean(base.polys(), a, tol);
        double dev = std::abs(w.value - Complex(all_zero ? 1.0 : 0.0));
        if (dev > tol) {
            EigenWitness ew;
            ew.alphas = a;
            if (character_witnesses)
                for (std::size_t j = 0; j < idx.size(); ++j) ew.characters.push_back(points[j][idx[j]].witnesses.front());
            ew.mean = w.value;
            ew.deviation = dev;
            fails.push_back(std::move(ew));
        }
        return true;
    });
    return fails;
}

} // namespace detail

/** Conditions (i) and (ii) of the weak joint ergodicity criterion, without the direct check. */
inline WjeReport wje_criteria(const FiniteSystem& sys, const BaseFamily& base, const VerifyOptions& opt = {})
{
    detail::check_family(sys, base);
    WjeReport r;
    const TupleState id = TupleState::identity(base);
    r.obligations = goodness_obligations(id, indexing_data(base));
    for (const auto& ob : r.obligations)
        if (!check_obligation(sys, ob)) r.failing_obligations.push_back(ob);
    r.criterion_i = r.failing_obligations.empty();

    if (sys.is_translation()) {
        // characters are common eigenfunctions; chi is T_j-invariant iff its eigenvalue is 0
        r.failing_eigen = detail::spectral_weyl_check(sys, base, opt.tol, r.eigen_tuples, true);
    } else {
        std::vector<std::vector<CycleEigen>> evs;
        std::vector<std::size_t> sizes;
        for (Index j = 0; j < sys.ell(); ++j) {
            evs.push_back(cycle_spectrum(sys, j));
            sizes.push_back(evs.back().size());
        }
        if (detail::product_size(sizes, opt.eigen_budget) > opt.eigen_budget)
            throw ProductTooLarge("eigen tuple count exceeds budget");
        std::vector<std::vector<Observable>> eig(sys.ell());
        for (Index j = 0; j < sys.ell(); ++j)
            for (const auto& ev : evs[j]) eig[j].push_back(cycle_eigenfunction(sys, j, ev));
        r.eigen_tuples = 0;
        detail::for_each_tuple(sizes, [&](const std::vector<std::size_t>& idx) {
            std::vector<Observable> fs;
            Observable target = Observable::constant(sys.size(), 1);
            for (Index j = 0; j < sys.ell(); ++j) {
                fs.push_back(eig[j][idx[j]]);
                target = target * (evs[j][idx[j]].k == 0 ? eig[j][idx[j]] : Observable::constant(sys.size(), 0));
            }
            auto pa = detail::prepare_average(sys, id, fs, {});
            double dev = l2_distance(sys, detail::serial_limit(sys, pa), target);
            ++r.eigen_tuples;
            if (dev > opt.tol) {
                EigenWitness ew;
                for (Index j = 0; j < sys.ell(); ++j) {
                    ew.alphas.push_back(evs[j][idx[j]].alpha);
                    ew.cycles.push_back(evs[j][idx[j]]);
                }
                ew.deviation = dev;
                r.failing_eigen.push_back(std::move(ew));
            }
            return true;
        });
    }
    r.criterion_ii = r.failing_eigen.empty();
    r.verdict = r.criterion_i && r.criterion_ii;
    return r;
}

namespace detail {

/**
 * Max over test tuples of ||lim average - target(tuple)||_2. Translation
 * systems without a supplied family use all character tuples, or, when the
 * full family exceeds the budget, per transform one nonzero character for
 * each eigenvalue plus the trivial character. The deviation of a character
 * tuple depends only on its eigenvalues and on which characters are trivial.
 */
inline DirectCheck direct_check(const FiniteSystem& sys, const BaseFamily& base,
                                const std::vector<std::vector<Observable>>* family, const VerifyOptions& opt,
                                const std::function<Observable(const std::vector<Observable>&)>& target)
{
    const TupleState id = TupleState::identity(base);
    DirectCheck dc;
    std::vector<std::vector<Observable>> tuples;
    std::vector<std::vector<Coords>> labels;
    if (family) {
        dc.family = "supplied";
        tuples = *family;
    } else if (sys.is_translation()) {
        std::vector<Coords> xis = all_characters(sys);
        std::vector<std::size_t> sizes(sys.ell(), xis.size());
        std::vector<std::vector<Coords>> choices(sys.ell());
        if (product_size(sizes, opt.full_family_budget) <= opt.full_family_budget) {
            dc.family = "full";
            for (auto& c : choices) c = xis;
        } else {
            dc.family = "representatives";
            const Coords zero(sys.translation().moduli.size(), 0);
            for (Index j = 0; j < sys.ell(); ++j)
                for (const auto& sp : spectrum_cyclic(sys, j)) {
                    auto nz = std::find_if(sp.witnesses.begin(), sp.witnesses.end(), [&](const Coords& c) { return c != zero; });
                    if (nz != sp.witnesses.end()) choices[j].push_back(*nz);
                    if (sp.alpha.numerator() == 0) choices[j].push_back(zero);
                }
        }
        std::vector<std::size_t> csz;
        for (const auto& c : choices) csz.push_back(c.size());
        std::map<Coords, Observable> cache;
        auto chi = [&](const Coords& xi) -> const Observable& {
            auto it = cache.find(xi);
            if (it == cache.end()) it = cache.emplace(xi, character(sys, xi)).first;
            return it->second;
        };
        for_each_tuple(csz, [&](const std::vector<std::size_t>& idx) {
            std::vector<Observable> fs;
            std::vector<Coords> lab;
            for (Index j = 0; j < idx.size(); ++j) {
                fs.push_back(chi(choices[j][idx[j]]));
                lab.push_back(choices[j][idx[j]]);
            }
            tuples.push_back(std::move(fs));
            labels.push_back(std::move(lab));
            return true;
        });
    } else {
        throw SpanNotCertified("permutation system needs a supplied test family");
    }
    for (const auto& fs : tuples)
        if (fs.size() != sys.ell()) throw ShapeMismatch("test tuple has wrong length");

    using Acc = std::pair<double, std::size_t>;
    Acc best = chunked_reduce<Acc>(
        tuples.size(), 16, Acc{-1.0, 0},
        [&](std::size_t b, std::size_t e) {
            Acc acc{-1.0, 0};
            for (std::size_t i = b; i < e; ++i) {
                auto pa = prepare_average(sys, id, tuples[i], {});
                double d = l2_distance(sys, serial_limit(sys, pa), target(tuples[i]));
                if (d > acc.first) acc = {d, i};
            }
            return acc;
        },
        [](Acc& a, const Acc& b) {
            if (b.first > a.first) a = b;
        });
    dc.tuples = tuples.size();
    dc.max_deviation = std::max(best.first, 0.0);
    dc.worst = best.second;
    if (!labels.empty()) dc.worst_characters = labels[best.second];
    return dc;
}

} // namespace detail

/** Weak joint ergodicity: (i) and (ii) versus the direct limit check. */
inline WjeReport verify_wje(const FiniteSystem& sys, const BaseFamily& base,
                            const std::vector<std::vector<Observable>>* test_family = nullptr,
                            const VerifyOptions& opt = {})
{
    if (!sys.is_translation() && !test_family) throw SpanNotCertified("permutation system needs a supplied test family");
    WjeReport r = wje_criteria(sys, base, opt);
    std::vector<OrbitPartition> inv;
    for (Index j = 0; j < sys.ell(); ++j) inv.push_back(invariant_partition(sys, {unit_vector(sys.ell(), j)}));
    r.direct = detail::direct_check(sys, base, test_family, opt, [&](const std::vector<Observable>& fs) {
        Observable t = Observable::constant(sys.size(), 1);
        for (Index j = 0; j < fs.size(); ++j) t = t * cond_expectation(sys, fs[j], inv[j]);
        return t;
    });
    r.agreement = r.verdict == (r.direct.max_deviation <= opt.tol);
    return r;
}

/** Conditions of the joint ergodicity criterion, without the direct check. */
inline JeReport je_criteria(const FiniteSystem& sys, const BaseFamily& base, const VerifyOptions& opt = {})
{
    detail::check_family(sys, base);
    JeReport r;
    bool all_ergodic = true;
    for (Index j = 0; j < sys.ell(); ++j) {
        r.ergodic.push_back(is_ergodic(sys, j));
        all_ergodic = all_ergodic && r.ergodic.back();
    }
    r.obligations = goodness_obligations(TupleState::identity(base), indexing_data(base));
    for (const auto& ob : r.obligations)
        if (!check_obligation(sys, ob, true)) r.failing_obligations.push_back(ob);
    r.criterion_i = all_ergodic && r.failing_obligations.empty();
    r.failing_eigen = detail::spectral_weyl_check(sys, base, opt.tol, r.spectral_tuples, sys.is_translation());
    r.criterion_ii = r.failing_eigen.empty();
    r.verdict = r.criterion_i && r.criterion_ii;
    return r;
}

/** Joint ergodicity: criteria versus the direct check against prod int f_j. */
inline JeReport verify_je(const FiniteSystem& sys, const BaseFamily& base,
                          const std::vector<std::vector<Observable>>* test_family = nullptr,
                          const VerifyOptions& opt = {})
{
    if (!sys.is_translation() && !test_family) throw SpanNotCertified("permutation system needs a supplied test family");
    JeReport r = je_criteria(sys, base, opt);
    r.direct = detail::direct_check(sys, base, test_family, opt, [&](const std::vector<Observable>& fs) {
        Complex c = 1;
        for (const auto& f : fs) c *= integral(sys, f);
        return Observable::constant(sys.size(), c);
    });
    r.agreement = r.verdict == (r.direct.max_deviation <= opt.tol);
    bool all_ergodic = std::all_of(r.ergodic.begin(), r.ergodic.end(), [](bool b) { return b; });
    r.wje_verdict = verify_wje(sys, base, test_family, opt).verdict;
    r.lemma_agreement = r.verdict == (r.wje_verdict && all_ergodic);
    return r;
}

struct DksPair {
    Index i = 0, j = 0;
    bool ergodic = false;
};

struct DksReport {
    std::vector<DksPair> cond_i;
    bool cond_i_all = true;
    bool cond_ii = false;
    std::size_t product_cells = 0;
    bool je_verdict = false;
    bool equivalence = false;
};

namespace detail {

/** True when the visit frequencies over one period match the target weights. */
inline bool frequencies_match(std::vector<std::uint64_t>& codes, const std::function<double(std::uint64_t)>& weight,
                              double tol)
{
    std::sort(codes.begin(), codes.end());
    const double P = static_cast<double>(codes.size());
    double covered = 0;
    for (std::size_t a = 0; a < codes.size();) {
        std::size_t b = a;
        while (b < codes.size() && codes[b] == codes[a]) ++b;
        const double w = weight(codes[a]);
        if (std::abs(static_cast<double>(b - a) / P - w) > tol) return false;
        covered += w;
        a = b;
    }
    return std::abs(covered - 1.0) <= tol;
}

} // namespace detail

/**
 * (i) each (T_i^{p_i(n)} T_j^{-p_j(n)}) is ergodic for mu; (ii) the product
 * sequence is ergodic for mu^l. Decided by visit frequencies over one period.
 */
inline DksReport verify_dks(const FiniteSystem& sys, const BaseFamily& base, const VerifyOptions& opt = {})
{
    detail::check_family(sys, base);
    const std::size_t n = sys.size(), l = sys.ell();
    DksReport r;
    std::vector<detail::ModPoly> mp;
    std::int64_t P = 1;
    for (Index j = 0; j < l; ++j) P = lcm64(P, sys.order(j));
    for (Index j = 0; j < l; ++j) mp.emplace_back(base.poly(j), sys.order(j));

    for (Index i = 0; i < l; ++i)
        for (Index j = i + 1; j < l; ++j) {
            const std::int64_t Pij = lcm64(sys.order(i), sys.order(j));
            const auto &ci = sys.cycles(i), &cj = sys.cycles(j);
            bool ok = chunked_reduce<char>(
                n, 64, 1,
                [&](std::size_t b, std::size_t e) -> char {
                    std::vector<std::uint64_t> codes(static_cast<std::size_t>(Pij));
                    for (std::size_t x = b; x < e; ++x) {
                        if (sys.weight(x) == 0) continue;
                        for (std::int64_t t = 1; t <= Pij; ++t)
                            codes[static_cast<std::size_t>(t - 1)] = ci.apply(cj.apply(x, -mp[j](t)), mp[i](t));
                        if (!detail::frequencies_match(codes, [&](std::uint64_t y) { return sys.weight(y); }, opt.tol))
                            return 0;
                    }
                    return 1;
                },
                [](char& a, const char& b) { a = a && b; });
            r.cond_i.push_back({i, j, ok});
            r.cond_i_all = r.cond_i_all && ok;
        }

    std::vector<std::size_t> sizes(l, n);
    const std::size_t cells = detail::product_size(sizes, opt.product_budget);
    if (cells > opt.product_budget)
        throw ProductTooLarge("product space has more than " + std::to_string(opt.product_budget) + " cells");
    r.product_cells = cells;
    auto cell_weight = [&](std::uint64_t code) {
        double w = 1;
        for (std::size_t k = 0; k < l; ++k) {
            w *= sys.weight(code % n);
            code /= n;
        }
        return w;
    };
    r.cond_ii = chunked_reduce<char>(
        cells, 256, 1,
        [&](std::size_t b, std::size_t e) -> char {
            std::vector<std::uint64_t> codes(static_cast<std::size_t>(P));
            std::vector<std::size_t> start(l);
            for (std::size_t c = b; c < e; ++c) {
                if (cell_weight(c) == 0) continue;
                std::size_t rem = c;
                for (std::size_t k = 0; k < l; ++k) {
                    start[k] = rem % n;
                    rem /= n;
                }
                for (std::int64_t t = 1; t <= P; ++t) {
                    std::uint64_t code = 0;
                    for (std::size_t k = l; k-- > 0;) code = code * n + sys.cycles(k).apply(start[k], mp[k](t));
                    codes[static_cast<std::size_t>(t - 1)] = code;
                }
                if (!detail::frequencies_match(codes, cell_weight, opt.tol)) return 0;
            }
            return 1;
        },
        [](char& a, const char& b) { a = a && b; });

    r.je_verdict = je_criteria(sys, base, opt).verdict;
    r.equivalence = (r.cond_i_all && r.cond_ii) == r.je_verdict;
    return r;
}

} // namespace ergomax
