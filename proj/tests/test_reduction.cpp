#include <ergomax/reduction.hpp>
#include <gtest/gtest.h>

#include <random>

using namespace ergomax;

namespace {

IntPoly P(std::initializer_list<long long> c) { return IntPoly(c); }

std::vector<Index> zb(std::initializer_list<Index> one_based)
{
    std::vector<Index> v;
    for (Index i : one_based) v.push_back(i - 1);
    return v;
}

TypeVec T(std::vector<long> w)
{
    long s = 0;
    for (long x : w) s += x;
    return TypeVec{std::move(w), s};
}

BaseFamily ex62()
{
    return BaseFamily({P({0, 1}), P({0, 3}), P({0, 2}), P({1, 2}), P({1, 1}), P({1, 1}), P({1})});
}

BaseFamily ex78()
{
    return BaseFamily({P({0, 1}), P({0, 1}), P({0, 1}), P({0, 1}), P({1, 1}), P({1, 1}), P({2, 1}), P({2, 1})});
}

IntVec unit(std::size_t l, std::initializer_list<std::pair<Index, long>> terms)
{
    IntVec v(l, 0);
    for (auto [k, c] : terms) v[k - 1] += c;
    return v;
}

// Brute-force descendant oracle: search all lambda <= bound and r < lambda.
std::optional<std::pair<long, long>> brute_descendant(const TupleState& t, long bound)
{
    for (long lam = 1; lam <= bound; ++lam)
        for (long r = 0; r < lam; ++r) {
            bool ok = true;
            for (Index j = 0; j < t.size() && ok; ++j)
                ok = t.rhos[j] * t.base.lead(j) == compose_affine(t.base.poly(j), lam, r) * t.base.lead(t.eta[j]);
            if (ok) return std::make_pair(lam, r);
        }
    return std::nullopt;
}

} // namespace

TEST(Tau, Examples)
{
    auto e = tau(zb({1, 2, 3, 4, 5, 6, 7}), 3, 0);
    EXPECT_EQ(e, zb({1, 2, 3, 1, 5, 6, 7}));
    e = tau(e, 4, 2);
    EXPECT_EQ(e, zb({1, 2, 3, 1, 3, 6, 7}));
    EXPECT_EQ(tau(e, 4, 2), e);
    EXPECT_THROW(tau(e, 2, 2), SameIndex);
}

TEST(Sigma, Examples)
{
    EXPECT_EQ(sigma(T({3, 2, 2}), 2, 1), T({3, 3, 1}));
    EXPECT_EQ(sigma(T({3, 2, 1}), 2, 0), T({4, 2, 0}));
    EXPECT_EQ(sigma(T({5, 1, 0}), 1, 0), T({6, 0, 0}));
    EXPECT_THROW(sigma(T({5, 1, 0}), 2, 0), OutOfSupport);
    EXPECT_THROW(sigma(T({5, 1, 0}), 1, 2), OutOfSupport);
    // decreasing into an earlier class always lowers the type
    EXPECT_TRUE(type_less(sigma(T({2, 1, 3}), 2, 1), T({2, 1, 3})));
}

TEST(TypeReduce, Example62Trace)
{
    auto idx = indexing_data(ex62(), std::vector<std::vector<Index>>{zb({1, 2, 3}), zb({5, 6}), zb({4}), zb({7})});
    TupleState t0 = TupleState::identity(ex62());
    EXPECT_EQ(tuple_type(t0, idx), T({3, 2, 1}));

    auto [t1, s1] = type_reduce(t0, idx, 3, 0, 1);
    EXPECT_EQ(s1.lambda, 2);
    EXPECT_EQ(t1.eta, zb({1, 2, 3, 1, 5, 6, 7}));
    std::vector<IntPoly> r1{P({4, 4}), P({12, 12}), P({8, 8}), P({5, 4}), P({6, 4}), P({6, 4}), P({2})};
    EXPECT_EQ(t1.rhos, r1);
    EXPECT_EQ(tuple_type(t1, idx), T({4, 2, 0}));
    EXPECT_EQ(s1.type_after, T({4, 2, 0}));
    auto c1 = controllable_indices(t1, idx);
    EXPECT_EQ(c1, zb({5, 6}));

    auto [t2, s2] = type_reduce(t1, idx, 4, 2, 0);
    EXPECT_EQ(s2.lambda, 2);
    EXPECT_EQ(t2.eta, zb({1, 2, 3, 1, 3, 6, 7}));
    std::vector<IntPoly> r2{P({8, 16}), P({24, 48}), P({16, 32}), P({10, 16}), P({24, 32}), P({12, 16}), P({4})};
    EXPECT_EQ(t2.rhos, r2);
    EXPECT_EQ(tuple_type(t2, idx), T({5, 1, 0}));

    auto [t3, s3] = type_reduce(t2, idx, 5, 0, 3);
    EXPECT_EQ(s3.lambda, 4);
    EXPECT_EQ(t3.eta, zb({1, 2, 3, 1, 3, 1, 7}));
    std::vector<IntPoly> r3{P({416, 256}), P({1248, 768}), P({832, 512}), P({424, 256}),
                            P({864, 512}), P({432, 256}), P({16})};
    EXPECT_EQ(t3.rhos, r3);
    EXPECT_EQ(tuple_type(t3, idx), T({6, 0, 0}));

    // witness by transitive composition, cross-checked against brute force
    auto w = compose_witness(compose_witness({2, 1}, {2, 0}), {4, 3});
    EXPECT_EQ(w.first, 16);
    EXPECT_EQ(w.second, 13);
    auto d = verify_descendant(t3);
    ASSERT_TRUE(d.ok) << d.reason;
    EXPECT_EQ(d.lambda, 16);
    EXPECT_EQ(d.r, 13);
    auto bf = brute_descendant(t3, 20);
    ASSERT_TRUE(bf);
    EXPECT_EQ(bf->first, 16);
    EXPECT_EQ(bf->second, 13);
}

TEST(TypeReduce, Errors)
{
    auto idx = indexing_data(ex62(), std::vector<std::vector<Index>>{zb({1, 2, 3}), zb({5, 6}), zb({4}), zb({7})});
    TupleState t0 = TupleState::identity(ex62());
    EXPECT_THROW(type_reduce(t0, idx, 0, 3, 0), NotControllable);
    EXPECT_THROW(type_reduce(t0, idx, 3, 6, 0), BadTarget);
    EXPECT_THROW(type_reduce(t0, idx, 3, 3, 0), BadTarget);
    EXPECT_THROW(type_reduce(t0, idx, 3, 0, 2), RangeR);
}

TEST(TypeReduce, MonicExample61)
{
    BaseFamily f({P({0, 1}), P({0, 1}), P({1, 1})});
    auto idx = indexing_data(f);
    auto [t, st] = type_reduce(TupleState::identity(f), idx, 2, 1, 0);
    EXPECT_EQ(st.lambda, 1);
    EXPECT_EQ(t.rhos, f.polys());
    EXPECT_EQ(t.eta, zb({1, 2, 2}));
    EXPECT_EQ(tuple_type(t, idx), T({3, 0}));

    auto tr = run_induction(f);
    ASSERT_EQ(tr.steps.size(), 1u);
    EXPECT_EQ(tr.steps[0].step.kind, StepKind::TypeReduce);
    EXPECT_EQ(tr.steps[0].step.type_after, T({3, 0}));
}

TEST(TypeReduce, AllRBranches)
{
    auto idx = indexing_data(ex62(), std::vector<std::vector<Index>>{zb({1, 2, 3}), zb({5, 6}), zb({4}), zb({7})});
    TupleState t0 = TupleState::identity(ex62());
    for (long r = 0; r < 2; ++r) {
        auto [t1, s1] = type_reduce(t0, idx, 3, 0, r);
        auto d = verify_descendant(t1);
        ASSERT_TRUE(d.ok);
        EXPECT_EQ(d.lambda, 2);
        EXPECT_EQ(d.r, r);
        EXPECT_TRUE(type_less(s1.type_after, s1.type_before));
    }
}

TEST(Descendant, Basics)
{
    TupleState t = TupleState::identity(ex62());
    auto d = verify_descendant(t);
    ASSERT_TRUE(d.ok);
    EXPECT_EQ(d.lambda, 1);
    EXPECT_EQ(d.r, 0);
    t.rhos[2] = P({1, 2});
    EXPECT_FALSE(verify_descendant(t).ok);
    t = TupleState::identity(ex62());
    t.rhos[6] = P({5});
    EXPECT_FALSE(verify_descendant(t).ok);
}

TEST(Descendant, TransitiveComposition)
{
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> L(1, 6);
    BaseFamily base({P({1, 2}), P({-3, 0, 2}), P({4})});
    for (int trial = 0; trial < 100; ++trial) {
        long l1 = L(rng), l2 = L(rng);
        long r1 = std::uniform_int_distribution<int>(0, static_cast<int>(l1) - 1)(rng);
        long r2 = std::uniform_int_distribution<int>(0, static_cast<int>(l2) - 1)(rng);
        TupleState t = TupleState::identity(base);
        for (auto& p : t.rhos) p = compose_affine(compose_affine(p, l1, r1), l2, r2);
        auto w = compose_witness({l1, r1}, {l2, r2});
        auto d = verify_descendant(t);
        ASSERT_TRUE(d.ok);
        EXPECT_EQ(d.lambda, w.first);
        EXPECT_EQ(d.r, w.second);
    }
}

TEST(Ledger, Example65CombinedInvariance)
{
    BaseFamily f({P({0, 1}), P({0, 1}), P({1, 1}), P({1, 1}), P({2, 1}), P({2, 1})});
    auto tr = run_induction(f, scripted_policy("ex65", {Choice{6, 4, 0}, Choice{5, 1, 0}, Choice{6, 1, 0},
                                                        Choice{4, 1, 0}, Choice{3, 2, 0}}));
    ASSERT_EQ(tr.steps.size(), 5u);
    EXPECT_EQ(tr.steps[0].ledger.entries[5], (std::vector<IntVec>{unit(6, {{4, 1}, {6, -1}})}));
    EXPECT_EQ(tr.steps[2].ledger.entries[5], (std::vector<IntVec>{unit(6, {{1, 1}, {6, -1}})}));
    EXPECT_EQ(tr.final_state.eta, zb({1, 2, 2, 1, 1, 1}));
    // identity positions keep the trivial entry
    EXPECT_EQ(tr.final_ledger.entries[0], (std::vector<IntVec>{IntVec(6, 0)}));
    EXPECT_EQ(tr.final_ledger.entries[1], (std::vector<IntVec>{IntVec(6, 0)}));
}

TEST(Ledger, FreshMonicEntry)
{
    BaseFamily f({P({0, 1}), P({0, 1}), P({1, 1})});
    auto idx = indexing_data(f);
    TupleState t = TupleState::identity(f);
    auto [u, st] = type_reduce(t, idx, 2, 1, 0);
    auto L = propagate_ledger(InvarianceLedger::trivial(3), st);
    // (e_{eta_m} - e_m) + (e_i - e_{eta_m}) with eta_m = m
    EXPECT_EQ(L.entries[2], (std::vector<IntVec>{unit(3, {{2, 1}, {3, -1}})}));
    EXPECT_EQ(L.entries[0], (std::vector<IntVec>{IntVec(3, 0)}));
    EXPECT_TRUE(ledger_sound(u, L));
}

TEST(Flip, Example66)
{
    auto idx = indexing_data(ex78());
    TupleState t = TupleState::identity(ex78());
    t.eta = zb({1, 2, 3, 4, 1, 1, 5, 5});
    InvarianceLedger L = InvarianceLedger::trivial(8);
    L.entries[4] = {unit(8, {{1, 1}, {5, -1}})};
    L.entries[5] = {unit(8, {{1, 1}, {6, -1}})};
    L.entries[6] = {unit(8, {{5, 1}, {7, -1}})};
    L.entries[7] = {unit(8, {{5, 1}, {8, -1}})};
    auto [u, nl, st] = flip_uncontrollable(t, idx, L);
    EXPECT_EQ(st.A, zb({7, 8}));
    EXPECT_EQ(st.gamma, 1);
    EXPECT_EQ(u.eta, zb({1, 2, 3, 4, 1, 1, 7, 8}));
    EXPECT_EQ(u.rhos, ex78().polys());
    EXPECT_EQ(tuple_type(u, idx), T({6, 0, 2}));
    EXPECT_TRUE(type_less(T({6, 0, 2}), T({6, 2, 0})));
    EXPECT_EQ(nl.entries[6], (std::vector<IntVec>{IntVec(8, 0)}));
    EXPECT_TRUE(ledger_sound(u, nl));

    EXPECT_THROW(flip_uncontrollable(t, idx, InvarianceLedger::trivial(8)), MissingInvariance);
    TupleState c = t;
    c.eta = zb({1, 2, 3, 4, 5, 1, 5, 5});
    EXPECT_THROW(flip_uncontrollable(c, idx, L), Controllable);
}

TEST(Flip, EmptyAndNonMonic)
{
    TupleState t = TupleState::identity(ex62());
    auto L = InvarianceLedger::trivial(7);
    auto [u, nl, st] = flip(t, L, {});
    EXPECT_EQ(u, t);
    EXPECT_EQ(nl, L);
    EXPECT_EQ(st.gamma, 1);

    // non-monic flip: position 4 (2n^2+n) carried to T_1 with lambda 2, r 1, then flipped back
    auto idx = indexing_data(ex62(), std::vector<std::vector<Index>>{zb({1, 2, 3}), zb({5, 6}), zb({4}), zb({7})});
    auto [t1, s1] = type_reduce(t, idx, 3, 0, 1);
    auto L1 = propagate_ledger(L, s1);
    // gamma_2 = b_4 / a_4 = 1, entry a_1 e_1 - a_4 e_4
    EXPECT_EQ(L1.entries[3], (std::vector<IntVec>{unit(7, {{1, 1}, {4, -2}})}));
    auto g = ledger_gamma(t1, L1, 3);
    ASSERT_TRUE(g);
    EXPECT_EQ(*g, 1);
    {
        auto [t2, L2, s2] = flip(t1, L1, {3});
        EXPECT_EQ(s2.gamma, 1);
        EXPECT_EQ(t2.rhos[3], P({10, 8}));
    }
    // a larger recorded multiple forces a larger gamma
    L1.entries[3] = {unit(7, {{1, 3}, {4, -6}})};
    for (long r = 0; r < 3; ++r) {
        auto [t2, L2, s2] = flip(t1, L1, {3}, Int(r));
        EXPECT_EQ(t2.eta, zb({1, 2, 3, 4, 5, 6, 7}));
        auto d = verify_descendant(t2);
        ASSERT_TRUE(d.ok) << d.reason;
        EXPECT_EQ(s2.gamma, 3);
        EXPECT_EQ(d.lambda, 2 * s2.gamma);
        EXPECT_TRUE(ledger_sound(t2, L2));
    }
    EXPECT_THROW(flip(t1, L1, {3}, Int(1000)), RangeR);
}

TEST(Induction, Example78)
{
    auto tr = run_induction(ex78(), named_policy("paper-ex78"));
    std::vector<TypeVec> types{T({4, 3, 1}), T({4, 4, 0}), T({5, 3, 0}), T({6, 2, 0}),
                               T({6, 0, 2}), T({7, 0, 1}), T({8, 0, 0})};
    std::vector<std::vector<Index>> etas{zb({1, 2, 3, 4, 5, 6, 7, 5}), zb({1, 2, 3, 4, 5, 6, 5, 5}),
                                         zb({1, 2, 3, 4, 1, 6, 5, 5}), zb({1, 2, 3, 4, 1, 1, 5, 5}),
                                         zb({1, 2, 3, 4, 1, 1, 7, 8}), zb({1, 2, 3, 4, 1, 1, 7, 2}),
                                         zb({1, 2, 3, 4, 1, 1, 2, 2})};
    EXPECT_EQ(tr.initial_type, T({4, 2, 2}));
    ASSERT_EQ(tr.steps.size(), 7u);
    for (std::size_t k = 0; k < 7; ++k) {
        EXPECT_EQ(tr.steps[k].step.type_after, types[k]) << k;
        EXPECT_EQ(tr.steps[k].step.after.eta, etas[k]) << k;
        EXPECT_EQ(tr.steps[k].step.after.rhos, ex78().polys());
        EXPECT_EQ(tr.steps[k].step.kind, k == 4 ? StepKind::Flip : StepKind::TypeReduce);
    }
}

TEST(Induction, Example62Policy)
{
    auto tr = run_induction(ex62(), named_policy("paper-ex62"));
    ASSERT_EQ(tr.steps.size(), 3u);
    EXPECT_EQ(tr.final_state.rhos[0], P({416, 256}));
    EXPECT_EQ(tr.steps.back().descendant.lambda, 16);
    EXPECT_EQ(tr.steps.back().descendant.r, 13);
}

TEST(Induction, BasicBaseHasEmptyTrace)
{
    BaseFamily f({P({0, 1}), P({0, 3}), P({1})});
    auto tr = run_induction(f);
    EXPECT_TRUE(tr.steps.empty());
}

TEST(Induction, PolicyErrors)
{
    EXPECT_THROW(run_induction(ex62(), scripted_policy("bad", {Choice{1, 2, 0}})), PolicyExhausted);
    EXPECT_THROW(run_induction(ex62(), scripted_policy("short", {})), PolicyExhausted);
    EXPECT_THROW(named_policy("nope"), PolicyExhausted);
}

namespace {

void check_random_traces(std::uint64_t seed, bool random_choices, int& flips)
{
    std::mt19937 rng(static_cast<unsigned>(seed));
    std::uniform_int_distribution<int> Ld(1, 5), Dd(1, 3), Cd(-4, 4);
    for (int trial = 0; trial < 200; ++trial) {
        const int l = Ld(rng);
        std::vector<IntPoly> ps;
        for (int j = 0; j < l; ++j) {
            std::vector<Int> c(static_cast<std::size_t>(Dd(rng)));
            for (auto& v : c) v = Cd(rng);
            if (c.back() == 0) c.back() = Cd(rng) >= 0 ? 1 : -1;
            ps.emplace_back(c);
        }
        // bias toward dependence so that reductions happen
        if (l >= 2 && trial % 2 == 0) ps[1] = ps[0] * Int(trial % 4 == 0 ? 2 : -1);
        if (l >= 4 && trial % 3 == 0) {
            ps[3] = ps[2];
            ps[1] = ps[0] * Int(3);
        }
        BaseFamily base(ps);
        auto tr = random_choices ? run_induction(base, random_policy(seed + static_cast<std::uint64_t>(trial)))
                                 : run_induction(base);
        Int bound = 1;
        for (int k = 0; k < l; ++k) bound *= (l + 1);
        EXPECT_LT(Int(tr.steps.size()), bound);
        auto base_obs = goodness_obligations(tr.initial, tr.idx);
        std::set<IntVec> base_vecs;
        for (auto& o : base_obs) base_vecs.insert(normalize_vector(o.vector));
        TypeVec prev = tr.initial_type;
        for (const auto& e : tr.steps) {
            EXPECT_TRUE(type_less(e.step.type_after, prev));
            prev = e.step.type_after;
            EXPECT_TRUE(e.descendant.ok);
            EXPECT_TRUE(ledger_sound(e.step.after, e.ledger));
            auto idx2 = indexing_data(BaseFamily(e.step.after.rhos));
            EXPECT_EQ(idx2.K1, tr.idx.K1);
            EXPECT_EQ(idx2.K2, tr.idx.K2);
            EXPECT_EQ(idx2.K3, tr.idx.K3);
            for (Index j = 0; j < e.step.after.size(); ++j)
                EXPECT_EQ(e.step.after.rhos[j].degree(), base.poly(j).degree());
            for (auto& o : goodness_obligations(e.step.after, tr.idx))
                EXPECT_TRUE(base_vecs.count(normalize_vector(o.vector)));
            if (e.step.kind == StepKind::Flip) ++flips;
            // brute-force witness agrees when small enough
            if (e.descendant.lambda <= 12) {
                auto bf = brute_descendant(e.step.after, 12);
                ASSERT_TRUE(bf);
                EXPECT_EQ(Int(bf->first), e.descendant.lambda);
            }
        }
        EXPECT_TRUE(tr.final_state.eta.size() == base.size());
        TypeVec fin = tuple_type(tr.final_state, tr.idx);
        EXPECT_TRUE(fin.basic());
        for (Index j : tr.idx.classes.front()) EXPECT_EQ(tr.final_state.eta[j], j);
    }
}

} // namespace

TEST(Induction, RandomBasesDefaultPolicy)
{
    int flips = 0;
    check_random_traces(12345, false, flips);
}

TEST(Induction, RandomBasesRandomPolicy)
{
    int flips = 0;
    for (std::uint64_t seed : {1u, 2u, 3u}) check_random_traces(seed, true, flips);
}

TEST(Induction, FlipRichBases)
{
    // three dependence classes of quadratics, duplicated members in the later classes
    std::mt19937 rng(77);
    std::uniform_int_distribution<int> Cd(-3, 3), Sd(1, 3);
    int flips = 0;
    for (int trial = 0; trial < 150; ++trial) {
        auto quad = [&] {
            int a = Cd(rng);
            return IntPoly(std::vector<Int>{Cd(rng), a == 0 ? 1 : a});
        };
        IntPoly q1 = quad(), q2 = quad(), q3 = quad();
        if (linear_dependence(q1, q2) || linear_dependence(q1, q3) || linear_dependence(q2, q3)) continue;
        BaseFamily base({q1, q1 * Int(Sd(rng)), q2 * Int(Sd(rng)), q2 * Int(Sd(rng)), q3, q3});
        auto tr = run_induction(base, random_policy(static_cast<std::uint64_t>(trial)));
        TypeVec prev = tr.initial_type;
        for (const auto& e : tr.steps) {
            EXPECT_TRUE(type_less(e.step.type_after, prev));
            prev = e.step.type_after;
            EXPECT_TRUE(e.descendant.ok);
            EXPECT_TRUE(ledger_sound(e.step.after, e.ledger));
            if (e.step.kind == StepKind::Flip) {
                ++flips;
                for (Index j : e.step.A) EXPECT_EQ(e.step.after.eta[j], j);
            }
        }
        EXPECT_TRUE(tuple_type(tr.final_state, tr.idx).basic());
    }
    EXPECT_GT(flips, 0);
}
