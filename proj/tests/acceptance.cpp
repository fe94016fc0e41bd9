// Acceptance run: one PASS/FAIL line per criterion. Exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ergomax/averages.hpp"
#include "ergomax/family.hpp"
#include "ergomax/finsys.hpp"
#include "ergomax/reduction.hpp"

using namespace ergomax;

namespace {

constexpr double kExact = 1e-9;

struct Verdict {
    bool pass = true;
    std::ostringstream note;

    void require(bool cond, const std::string& what)
    {
        if (!cond && pass) note << "first failure: " << what << "; ";
        pass = pass && cond;
    }
};

IntPoly P(std::initializer_list<long long> c) { return IntPoly(c); }

std::vector<Index> zb(std::initializer_list<Index> v)
{
    std::vector<Index> out;
    for (Index x : v) out.push_back(x - 1);
    return out;
}

TypeVec T(std::vector<long> w, long K3)
{
    return TypeVec{std::move(w), K3};
}

Complex ex(double t) { return std::polar(1.0, 2 * std::numbers::pi * t); }

Observable random_bounded(std::size_t n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> U(0, 1);
    std::vector<Complex> v(n);
    for (auto& z : v) z = std::polar(U(rng), 2 * std::numbers::pi * U(rng));
    return Observable(v, 1.0);
}

// (sum_xi |f^(xi)|^4)^(1/4) on Z_N
double fourier_u2(const Observable& f)
{
    const std::size_t N = f.size();
    double s = 0;
    for (std::size_t xi = 0; xi < N; ++xi) {
        Complex c = 0;
        for (std::size_t x = 0; x < N; ++x) c += f[x] * ex(-static_cast<double>(x * xi % N) / static_cast<double>(N));
        c /= static_cast<double>(N);
        s += std::norm(c) * std::norm(c);
    }
    return std::pow(s, 0.25);
}

// Gowers U^s on Z_N straight from the cube definition
double cube_gowers(const Observable& f, int s)
{
    const std::size_t N = f.size();
    std::size_t cells = 1;
    for (int k = 0; k < s; ++k) cells *= N;
    Complex acc = 0;
    std::vector<std::size_t> h(static_cast<std::size_t>(s));
    for (std::size_t x = 0; x < N; ++x)
        for (std::size_t c = 0; c < cells; ++c) {
            std::size_t r = c;
            for (auto& v : h) {
                v = r % N;
                r /= N;
            }
            Complex prod = 1;
            for (unsigned eps = 0; eps < (1u << s); ++eps) {
                std::size_t y = x;
                for (int k = 0; k < s; ++k)
                    if (eps >> k & 1u) y += h[static_cast<std::size_t>(k)];
                Complex v = f[y % N];
                prod *= std::popcount(eps) % 2 ? std::conj(v) : v;
            }
            acc += prod;
        }
    acc /= static_cast<double>(N * cells);
    return std::pow(std::max(0.0, acc.real()), 1.0 / std::ldexp(1.0, s));
}

BaseFamily ex41() { return BaseFamily({P({0, 1}), P({0, 1}), P({1, 1}), P({2, 2}), P({2, 1}), P({1}), P({3, 1})}); }
BaseFamily ex62() { return BaseFamily({P({0, 1}), P({0, 3}), P({0, 2}), P({1, 2}), P({1, 1}), P({1, 1}), P({1})}); }
BaseFamily ex8() { return BaseFamily({P({0, 1}), P({0, 1}), P({0, 1}), P({0, 1}), P({1, 1}), P({1, 1}), P({2, 1}), P({2, 1})}); }

// ---------------------------------------------------------------------------

void c1(Verdict& v)
{
    auto idx = indexing_data(ex41());
    TupleState t = TupleState::identity(ex41());
    t.eta = zb({1, 2, 3, 4, 3, 6, 2});
    auto w = tuple_type(t, idx);
    v.require(w.w == std::vector<long>{3, 3, 0, 0}, "type (3,3,0,0)");
    v.require(idx.K1 == 5 && idx.K2 == 4 && idx.K3 == 6, "K1,K2,K3 = 5,4,6");
    v.require(idx.maxdeg == zb({1, 2, 3, 4, 5, 7}), "L = {1,2,3,4,5,7}");
    v.note << "type (3,3,0,0), K=(5,4,6), L={1,2,3,4,5,7}";
}

void c2(Verdict& v)
{
    std::vector<TypeVec> chain{T({4, 0, 0}, 4), T({3, 0, 1}, 4), T({3, 1, 0}, 4), T({2, 0, 2}, 4), T({2, 2, 0}, 4),
                               T({2, 1, 1}, 4), T({1, 0, 3}, 4), T({1, 2, 1}, 4), T({1, 1, 2}, 4)};
    int held = 0, reverses = 0;
    for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
        held += type_less(chain[k], chain[k + 1]);
        reverses += !type_less(chain[k + 1], chain[k]);
    }
    v.require(held == 8 && reverses == 8, "chain inequalities");
    v.note << held << "/8 hold, " << reverses << "/8 reverses fail";
}

void c3(Verdict& v)
{
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> pick(0, 3);
    auto random_type = [&] {
        std::vector<long> w(4, 0);
        for (int k = 0; k < 8; ++k) ++w[static_cast<std::size_t>(pick(rng))];
        return T(w, 8);
    };
    int violations = 0, transitive = 0, triples = 0;
    for (; triples < 2000; ++triples) {
        TypeVec a = random_type(), b = random_type(), c = random_type();
        violations += type_less(a, a);
        violations += type_less(a, b) && type_less(b, a);
        if (type_less(a, b) && type_less(b, c)) {
            ++transitive;
            violations += !type_less(a, c);
        }
    }
    v.require(violations == 0, "order axioms");
    v.note << triples << " triples, " << transitive << " transitivity premises, " << violations << " violations";
}

void c4(Verdict& v)
{
    auto tr = run_induction(ex62(), named_policy("paper-ex62"));
    const std::vector<std::vector<IntPoly>> tuples{
        {P({4, 4}), P({12, 12}), P({8, 8}), P({5, 4}), P({6, 4}), P({6, 4}), P({2})},
        {P({8, 16}), P({24, 48}), P({16, 32}), P({10, 16}), P({24, 32}), P({12, 16}), P({4})},
        {P({416, 256}), P({1248, 768}), P({832, 512}), P({424, 256}), P({864, 512}), P({432, 256}), P({16})}};
    const std::vector<std::vector<long>> types{{4, 2, 0}, {5, 1, 0}, {6, 0, 0}};
    v.require(tr.initial_type.w == std::vector<long>{3, 2, 1}, "initial type (3,2,1)");
    v.require(tr.steps.size() == 3, "three steps");
    for (std::size_t k = 0; k < std::min<std::size_t>(3, tr.steps.size()); ++k) {
        v.require(tr.steps[k].step.after.rhos == tuples[k], "tuple after step " + std::to_string(k + 1));
        v.require(tr.steps[k].step.type_after.w == types[k], "type after step " + std::to_string(k + 1));
    }
    std::string fin;
    for (const auto& p : tr.final_state.rhos) fin += p.str() + " ";
    v.note << "final " << fin << "types (3,2,1)->(4,2,0)->(5,1,0)->(6,0,0)";
}

void c5(Verdict& v)
{
    auto tr = run_induction(ex8(), named_policy("paper-ex78"));
    const std::vector<std::vector<long>> types{{4, 3, 1}, {4, 4, 0}, {5, 3, 0}, {6, 2, 0}, {6, 0, 2}, {7, 0, 1}, {8, 0, 0}};
    const std::vector<std::vector<Index>> etas{zb({1, 2, 3, 4, 5, 6, 7, 5}), zb({1, 2, 3, 4, 5, 6, 5, 5}),
                                               zb({1, 2, 3, 4, 1, 6, 5, 5}), zb({1, 2, 3, 4, 1, 1, 5, 5}),
                                               zb({1, 2, 3, 4, 1, 1, 7, 8}), zb({1, 2, 3, 4, 1, 1, 7, 2}),
                                               zb({1, 2, 3, 4, 1, 1, 2, 2})};
    v.require(tr.initial_type.w == std::vector<long>{4, 2, 2}, "initial type (4,2,2)");
    v.require(tr.steps.size() == 7, "seven steps");
    int flips = 0;
    for (std::size_t k = 0; k < std::min<std::size_t>(7, tr.steps.size()); ++k) {
        const auto& st = tr.steps[k].step;
        v.require(st.type_after.w == types[k], "type after step " + std::to_string(k + 1));
        v.require(st.after.eta == etas[k], "indexing tuple after step " + std::to_string(k + 1));
        v.require(st.after.rhos == ex8().polys(), "polynomials unchanged");
        if (st.kind == StepKind::Flip) {
            ++flips;
            v.require(k == 4, "flip at the uncontrollable stage");
            v.require(controllable_indices(st.before, tr.idx).empty(), "flipped tuple is uncontrollable");
        }
    }
    v.require(flips == 1, "exactly one flip");
    v.note << "8 tuples (4,2,2)>...>(8,0,0), " << flips << " flip at step 5";
}

void c6(Verdict& v)
{
    auto idx = indexing_data(ex8());
    TupleState a = TupleState::identity(ex8());
    a.eta = zb({1, 2, 3, 4, 5, 1, 5, 5});
    TupleState b = a;
    b.eta = zb({1, 2, 3, 4, 1, 1, 5, 5});
    auto ca = controllable_indices(a, idx);
    auto cb = controllable_indices(b, idx);
    v.require(ca == zb({5}), "first tuple controllable at 5");
    v.require(cb.empty(), "second tuple uncontrollable");
    v.note << "controllable {" << (ca.empty() ? 0 : ca.front() + 1) << "} and {}";
}

// independent descendant oracle for small lambda
bool brute_descendant(const TupleState& t, long bound)
{
    for (long lam = 1; lam <= bound; ++lam)
        for (long r = 0; r < lam; ++r) {
            bool ok = true;
            for (Index j = 0; j < t.size() && ok; ++j)
                ok = t.rhos[j] * t.base.lead(j) == compose_affine(t.base.poly(j), lam, r) * t.base.lead(t.eta[j]);
            if (ok) return true;
        }
    return false;
}

void c7(Verdict& v)
{
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> Ld(1, 5), Dd(1, 3), Cd(-4, 4);
    std::size_t steps = 0, max_steps = 0, brute = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int l = Ld(rng);
        std::vector<IntPoly> ps;
        for (int j = 0; j < l; ++j) {
            std::vector<Int> c(static_cast<std::size_t>(Dd(rng)));
            for (auto& x : c) x = Cd(rng);
            while (c.back() == 0) c.back() = Cd(rng);
            ps.emplace_back(c);
        }
        // half of the bases get dependent pairs so that reductions occur
        if (l >= 2 && trial % 2 == 0) ps[1] = ps[0] * Int(trial % 4 == 0 ? 2 : -1);
        if (l >= 4 && trial % 3 == 0) ps[3] = ps[2];
        BaseFamily base(ps);
        ReductionTrace tr;
        try {
            tr = run_induction(base);
        } catch (const Error& e) {
            v.require(false, std::string("trace ") + std::to_string(trial) + ": " + e.what());
            continue;
        }
        Int bound = 1;
        for (int k = 0; k < l; ++k) bound *= (l + 1);
        v.require(Int(tr.steps.size()) < bound, "step bound");
        TypeVec prev = tr.initial_type;
        for (const auto& e : tr.steps) {
            const TypeVec w = tuple_type(e.step.after, tr.idx);
            v.require(w == e.step.type_after, "recorded type");
            v.require(type_less(w, prev), "strict decrease");
            prev = w;
            v.require(verify_descendant(e.step.after).ok, "descendant");
            if (e.descendant.lambda <= 8) {
                ++brute;
                v.require(brute_descendant(e.step.after, 8), "brute-force descendant");
            }
            v.require(ledger_sound(e.step.after, e.ledger), "ledger extraction");
        }
        v.require(tuple_type(tr.final_state, tr.idx).basic(), "final type basic");
        for (Index j : tr.idx.classes.front()) v.require(tr.final_state.eta[j] == j, "identity on first class");
        steps += tr.steps.size();
        max_steps = std::max(max_steps, tr.steps.size());
    }
    v.note << "200 bases, " << steps << " steps (max " << max_steps << "), " << brute << " brute-force descendant checks";
}

void c8(Verdict& v)
{
    auto sys = build_translation_system({16}, {{1}});
    std::mt19937_64 rng(8);
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
        auto f = random_bounded(16, rng);
        for (int s : {2, 3}) {
            const double g = gowers_oracle(sys, f, 0, s);
            const double a = ghk_seminorm(sys, f, 0, s, 16);
            const double it = box_seminorm_iterated(sys, f, SeminormSpec::repeat({1}, s), 16).value;
            const double lv = box_seminorm_levels(sys, f, SeminormSpec::repeat({1}, s), std::vector<std::int64_t>(s, 16)).value;
            worst = std::max({worst, std::abs(a - g), std::abs(it - g), std::abs(lv - g)});
            if (s == 2) worst = std::max({worst, std::abs(a - fourier_u2(f)), std::abs(a - cube_gowers(f, 2))});
            if (s == 3 && t < 20) worst = std::max(worst, std::abs(a - cube_gowers(f, 3)));
        }
    }
    v.require(worst <= kExact, "oracle agreement");
    v.note << "max deviation " << worst;
}

void c9(Verdict& v)
{
    std::mt19937_64 rng(9);
    std::size_t checks = 0;
    // monotonicity in s, full period on a non-ergodic rotation
    {
        auto sys = build_translation_system({12}, {{2}});
        for (int t = 0; t < 50; ++t) {
            auto f = random_bounded(12, rng);
            for (int s = 0; s <= 3; ++s) {
                ++checks;
                v.require(ghk_seminorm(sys, f, 0, s, 6) <= ghk_seminorm(sys, f, 0, s + 1, 6) + kExact, "monotonicity");
            }
        }
    }
    // power bounds, r_i in {2, 3}; H = 12 is a period multiple of every r_i
    {
        auto sys = build_translation_system({12}, {{1}});
        std::uniform_int_distribution<int> R(2, 3);
        for (int t = 0; t < 50; ++t) {
            auto f = random_bounded(12, rng);
            for (int s : {2, 3}) {
                SeminormSpec scaled;
                double prod = 1;
                for (int k = 0; k < s; ++k) {
                    const int r = R(rng);
                    prod *= r;
                    scaled.vectors.push_back({r});
                }
                const double base = box_seminorm(sys, f, SeminormSpec::repeat({1}, s), 12);
                const double sc = box_seminorm(sys, f, scaled, 12);
                ++checks;
                v.require(base <= sc + kExact, "power lower bound");
                v.require(sc <= std::pow(prod, 1.0 / std::ldexp(1.0, s)) * base + kExact, "power upper bound");
            }
        }
    }
    // bounding seminorms: Z2 x Z3, T1 = (0,1), T2 = (1,2); I(T1 T2^-1) is trivial, inside I(T1)
    {
        auto sys = build_translation_system({2, 3}, {{0, 1}, {1, 2}});
        IntVec b{1, -1}, c{1, 0};
        v.require(invariant_algebra_contained(sys, b, c), "algebra containment holds");
        v.require(!invariant_algebra_contained(sys, c, b), "containment is strict");
        for (int t = 0; t < 50; ++t) {
            auto f = random_bounded(6, rng);
            for (int s : {1, 2, 3}) {
                ++checks;
                v.require(box_seminorm(sys, f, SeminormSpec::repeat(b, s), 6) <=
                              box_seminorm(sys, f, SeminormSpec::repeat(c, s), 6) + kExact,
                          "bounding seminorms");
            }
        }
    }
    // dual identity
    {
        auto sys = build_translation_system({16}, {{1}});
        for (int t = 0; t < 50; ++t) {
            auto f = random_bounded(16, rng);
            for (int s : {1, 2, 3}) {
                const Complex lhs = integral(sys, f * dual_function(sys, f, 0, s));
                ++checks;
                v.require(std::abs(lhs - std::pow(ghk_seminorm(sys, f, 0, s, 16), std::ldexp(1.0, s))) <= kExact,
                          "dual identity");
            }
        }
    }
    // Gowers-Cauchy-Schwarz on Z12^2, s = 2
    {
        auto sys = build_translation_system({12, 12}, {{1, 0}, {0, 1}});
        SeminormSpec sp{{{1, 0}, {1, 1}}};
        for (int t = 0; t < 50; ++t) {
            std::vector<Observable> fe;
            double bound = 1;
            for (int e = 0; e < 4; ++e) {
                fe.push_back(random_bounded(144, rng));
                bound *= box_seminorm(sys, fe.back(), sp, 12);
            }
            ++checks;
            v.require(std::abs(box_cube_average(sys, fe, sp, 12)) <= bound + 1e-6, "GCS inequality");
        }
    }
    // difference sequences, exact integer arithmetic; a is zero outside N^s
    {
        std::uniform_int_distribution<int> D(0, 100);
        std::uniform_int_distribution<int> Hd(1, 6);
        for (int t = 0; t < 60; ++t) {
            const int s = 1 + t % 2;
            const std::int64_t H = Hd(rng);
            std::size_t cells = 1;
            for (int k = 0; k < s; ++k) cells *= static_cast<std::size_t>(H);
            std::vector<long long> a(cells);
            for (auto& x : a) x = D(rng);
            auto at = [&](const std::vector<std::int64_t>& d) -> long long {
                std::size_t i = 0;
                for (int k = s - 1; k >= 0; --k) {
                    const auto dk = d[static_cast<std::size_t>(k)];
                    if (dk < 1 || dk > H) return 0;
                    i = i * static_cast<std::size_t>(H) + static_cast<std::size_t>(dk - 1);
                }
                return a[i];
            };
            auto unpack = [&](std::size_t c) {
                std::vector<std::int64_t> h(static_cast<std::size_t>(s));
                for (auto& x : h) {
                    x = static_cast<std::int64_t>(c % static_cast<std::size_t>(H)) + 1;
                    c /= static_cast<std::size_t>(H);
                }
                return h;
            };
            long long lhs = 0, rhs = 0;
            for (std::size_t i = 0; i < cells; ++i) {
                auto h = unpack(i);
                rhs += at(h);
                for (std::size_t i2 = 0; i2 < cells; ++i2) {
                    auto hp = unpack(i2);
                    std::vector<std::int64_t> d(h.size());
                    for (std::size_t k = 0; k < h.size(); ++k) d[k] = h[k] - hp[k];
                    lhs += at(d);
                }
            }
            ++checks;
            v.require(lhs <= rhs * static_cast<long long>(cells), "difference sequences");
        }
    }
    v.note << checks << " inequality checks";
}

// E(chi_xi | I(T_j)) for a coordinate rotation: chi_xi if xi_j = 0, else 0
void c10(Verdict& v)
{
    auto sys = build_translation_system({5, 7}, {{1, 0}, {0, 1}});
    BaseFamily base({P({1}), P({1})});
    auto r = verify_wje(sys, base);
    v.require(r.criterion_i && r.criterion_ii, "criteria (i) and (ii)");
    v.require(r.direct.family == "full" && r.direct.max_deviation <= kExact, "direct deviation");
    v.require(r.agreement, "agreement");

    // brute-force oracle over all 35 x 35 character pairs and one period
    double worst = 0;
    for (int a1 = 0; a1 < 5; ++a1)
        for (int b1 = 0; b1 < 7; ++b1)
            for (int a2 = 0; a2 < 5; ++a2)
                for (int b2 = 0; b2 < 7; ++b2) {
                    double dev = 0;
                    for (int x = 0; x < 5; ++x)
                        for (int y = 0; y < 7; ++y) {
                            Complex avg = 0;
                            for (int n = 1; n <= 35; ++n)
                                avg += ex(a1 * (x + n) / 5.0 + b1 * y / 7.0) * ex(a2 * x / 5.0 + b2 * (y + n) / 7.0);
                            avg /= 35.0;
                            Complex target = (a1 == 0 ? ex(b1 * y / 7.0) : 0.0) * (b2 == 0 ? ex(a2 * x / 5.0) : 0.0);
                            dev += std::norm(avg - target) / 35.0;
                        }
                    worst = std::max(worst, std::sqrt(dev));
                }
    v.require(worst <= kExact, "brute-force oracle");
    v.note << "criteria pass, direct " << r.direct.max_deviation << " over " << r.direct.tuples << " tuples, oracle "
           << worst;
}

void c11(Verdict& v)
{
    auto sys = build_translation_system({7, 7, 7}, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    BaseFamily base({P({1}), P({1}), P({1})});
    auto r = verify_wje(sys, base);
    bool t12 = false;
    for (const auto& ob : r.failing_obligations) t12 = t12 || (ob.eta1 == 0 && ob.eta2 == 1);
    v.require(t12, "obligation (T1,T2) fails");
    v.require(!r.verdict, "negative verdict");
    v.require(std::abs(r.direct.max_deviation - 1.0) <= kExact, "direct deviation 1");
    v.require(r.agreement, "agreement");

    // the stated witness: f1 = e(x/7), f2 = e(-y/7), f3 = 1; targets vanish for f1, f2
    std::vector<Observable> fs{character(sys, {1, 0, 0}), character(sys, {0, -1, 0}), Observable::constant(343, 1)};
    auto lim = exact_limit_average(sys, TupleState::identity(base), fs);
    Observable target = Observable::constant(343, 1);
    for (Index j = 0; j < 3; ++j)
        target = target * cond_expectation(sys, fs[j], invariant_partition(sys, {unit_vector(3, j)}));
    const double witness = l2_distance(sys, lim, target);
    v.require(std::abs(witness - 1.0) <= kExact, "witness deviation 1");
    // oracle: the average is e((x - y)/7) pointwise
    double dev = 0;
    for (std::size_t x = 0; x < 343; ++x) {
        auto c = sys.coords(x);
        dev = std::max(dev, std::abs(lim[x] - ex((c[0] - c[1]) / 7.0)));
    }
    v.require(dev <= kExact, "pointwise oracle");
    v.note << "witness deviation " << witness << ", direct " << r.direct.max_deviation;
}

void c12(Verdict& v)
{
    auto sys = build_translation_system({5, 7}, {{1, 0}, {0, 1}});
    BaseFamily base({P({0, 1}), P({1, 1})});
    auto r = verify_wje(sys, base);
    v.require(r.criterion_i, "criterion (i) holds");
    v.require(!r.criterion_ii, "criterion (ii) fails");
    // oracle: |sum_{n<5} e(n^2/5)| / 5
    Complex g = 0;
    for (int n = 0; n < 5; ++n) g += ex(n * n / 5.0);
    const double gauss = std::abs(g) / 5.0;
    double best = 1e9;
    for (const auto& w : r.failing_eigen) best = std::min(best, std::abs(std::abs(w.mean) - 0.4472135955));
    auto wm = weyl_mean({P({0, 1})}, {Rational(1, 5)});
    v.require(best <= kExact, "Gauss-sum witness among failures");
    v.require(std::abs(std::abs(wm.value) - gauss) <= kExact && std::abs(gauss - 0.4472135955) <= kExact,
              "weyl_mean matches the Gauss sum");
    v.require(r.direct.max_deviation >= 0.44, "direct deviation >= 0.44");
    v.require(r.agreement, "agreement");
    v.note << "witness modulus " << std::abs(wm.value) << ", direct " << r.direct.max_deviation;
}

void c13(Verdict& v)
{
    struct Case {
        std::vector<std::int64_t> moduli;
        std::vector<Coords> shifts;
        std::vector<IntPoly> polys;
    };
    std::vector<Case> cases;
    const std::vector<std::vector<IntPoly>> fam1{{P({1})}, {P({0, 1})}, {P({1, 1})}, {P({2})}};
    const std::vector<std::vector<IntPoly>> fam2{{P({1}), P({1})},         {P({1}), P({0, 1})},     {P({0, 1}), P({1, 1})},
                                                 {P({1}), P({2})},         {P({0, 1}), P({0, 1})},  {P({1}), P({1, 1})},
                                                 {P({0, 1}), P({0, 2})}};
    for (std::int64_t q : {5, 7, 6}) {
        for (const auto& f : fam1) cases.push_back({{q}, {{1}}, f});
    }
    for (const auto& f : fam2) {
        cases.push_back({{7}, {{1}, {2}}, f});
        cases.push_back({{5, 7}, {{1, 0}, {0, 1}}, f});
        cases.push_back({{6}, {{1}, {5}}, f});
        cases.push_back({{3, 3}, {{1, 0}, {1, 1}}, f});
        cases.push_back({{2, 4}, {{1, 1}, {0, 1}}, f});
    }
    int agree = 0, positive = 0;
    for (const auto& c : cases) {
        auto sys = build_translation_system(c.moduli, c.shifts);
        BaseFamily base(c.polys);
        auto d = verify_dks(sys, base);
        auto je = verify_je(sys, base);
        const bool dks = d.cond_i_all && d.cond_ii;
        v.require(dks == je.verdict, "DKS vs JE on case " + std::to_string(agree));
        v.require(je.agreement, "JE criteria vs direct check");
        agree += dks == je.verdict;
        positive += je.verdict;
    }
    v.require(cases.size() >= 20, "at least 20 systems");
    v.note << agree << "/" << cases.size() << " systems agree (" << positive << " jointly ergodic)";
}

void c14(Verdict& v)
{
    std::vector<FiniteSystem> systems;
    systems.push_back(build_translation_system({16}, {{1}}));
    systems.push_back(build_translation_system({12}, {{2}}));
    systems.push_back(build_translation_system({5, 7}, {{1, 0}, {0, 1}}));
    systems.push_back(build_translation_system({2, 3}, {{0, 1}, {1, 2}}));
    systems.push_back(build_translation_system({6, 4}, {{2, 1}, {3, 2}}));
    systems.push_back(build_translation_system({7, 7}, {{1, 0}, {1, 1}}));
    systems.push_back(FiniteSystem({0.25, 0.25, 0.25, 0.25, 0.0}, {{1, 0, 3, 2, 4}}));
    std::mt19937_64 rng(14);
    std::size_t tested = 0, vanishing = 0;
    for (const auto& sys : systems) {
        const std::size_t n = sys.size();
        std::vector<Observable> fs;
        fs.push_back(Observable::constant(n, 0));
        fs.push_back(Observable::constant(n, 1));
        if (sys.is_translation())
            for (const auto& xi : all_characters(sys)) {
                fs.push_back(character(sys, xi));
                Observable tiny = character(sys, xi);
                for (auto& z : tiny.values) z *= 1e-13;
                fs.push_back(tiny);
            }
        for (int t = 0; t < 20; ++t) {
            fs.push_back(random_bounded(n, rng));
            // mean-zero on every T_1 orbit
            Observable g = random_bounded(n, rng);
            auto E = cond_expectation(sys, g, invariant_partition(sys, {unit_vector(sys.ell(), 0)}));
            for (std::size_t x = 0; x < n; ++x) g[x] -= E[x];
            fs.push_back(g);
        }
        // supported on a null point only
        std::vector<Complex> null_only(n, 0);
        for (std::size_t x = 0; x < n; ++x)
            if (sys.weight(x) == 0) null_only[x] = 1;
        fs.push_back(Observable(null_only));

        for (const auto& f : fs)
            for (Index j = 0; j < sys.ell(); ++j) {
                ++tested;
                const double u2 = ghk_seminorm(sys, f, j, 2, sys.order(j));
                if (u2 <= kExact) {
                    ++vanishing;
                    v.require(l2_norm(sys, f) <= 1e-6, "vanishing seminorm forces a null function");
                }
            }
    }
    v.note << tested << " (system, f, T) checks, " << vanishing << " with vanishing U2 seminorm, all null";
}

} // namespace

int main()
{
    struct Criterion {
        int id;
        const char* name;
        double limit;  // seconds, 0 = none
        std::function<void(Verdict&)> body;
    };
    const std::vector<Criterion> all{
        {1, "golden indexing data (7-term family)", 1, c1},
        {2, "golden type chain", 1, c2},
        {3, "type order properties", 0, c3},
        {4, "golden non-monic reduction trace", 1, c4},
        {5, "golden induction trace with flip", 1, c5},
        {6, "controllability golden", 0, c6},
        {7, "induction properties on 200 random bases", 60, c7},
        {8, "seminorm oracle equivalence on Z16", 30, c8},
        {9, "seminorm inequality suite", 60, c9},
        {10, "positive weak joint ergodicity on Z5 x Z7", 5, c10},
        {11, "good-ergodicity failure on Z7^3", 0, c11},
        {12, "spectral failure with Gauss-sum witness", 0, c12},
        {13, "DKS conditions versus joint ergodicity", 60, c13},
        {14, "vanishing U2 seminorm only for null functions", 0, c14},
    };
    int failed = 0;
    for (const auto& c : all) {
        Verdict v;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.body(v);
        } catch (const std::exception& e) {
            v.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit > 0 && secs >= c.limit) v.require(false, "runtime limit " + std::to_string(c.limit) + " s");
        failed += !v.pass;
        std::printf("%s %2d  %s: %s [%.3f s]\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.note.str().c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
    return failed ? 1 : 0;
}
