#pragma once

/**
 * @file report.hpp
 * @brief JSON serialisation of library results. Floating values are rounded
 *        to 12 significant digits so reports are byte-stable.
 */

#include <cmath>
#include <cstdio>
#include <string>

#include <nlohmann/json.hpp>

#include "ergomax/averages.hpp"
#include "ergomax/family.hpp"
#include "ergomax/finsys.hpp"
#include "ergomax/reduction.hpp"
#include "ergomax/cli/config.hpp"

namespace ergomax::cli {

inline json num(double v)
{
    if (!std::isfinite(v)) return nullptr;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    double r = std::stod(buf);
    return r == 0 ? 0.0 : r;
}

inline json cnum(Complex z) { return json::array({num(z.real()), num(z.imag())}); }

inline json observable_values(const Observable& f)
{
    json a = json::array();
    for (const auto& v : f.values) a.push_back(cnum(v));
    return a;
}

inline json rational_json(const Rational& r)
{
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

inline json vec_json(const IntVec& v) { return detail::coeffs_json(v); }

inline json poly_json(const IntPoly& p) { return detail::coeffs_json(p.coeffs()); }

inline json one_based(const std::vector<Index>& v)
{
    json a = json::array();
    for (Index x : v) a.push_back(x + 1);
    return a;
}

inline json type_json(const TypeVec& w) { return w.w; }

inline json indexing_json(const IndexingData& idx)
{
    json classes = json::array();
    for (const auto& c : idx.classes) classes.push_back(one_based(c));
    return {{"degree", idx.degree}, {"classes", classes}, {"L", one_based(idx.maxdeg)},
            {"K1", idx.K1},         {"K2", idx.K2},       {"K3", idx.K3}};
}

inline json obligation_json(const ErgodicityObligation& ob)
{
    return {{"pair", {ob.eta1 + 1, ob.eta2 + 1}},
            {"positions", {ob.j1 + 1, ob.j2 + 1}},
            {"exps", {detail::int_json(ob.beta1), detail::int_json(ob.beta2)}},
            {"vector", vec_json(ob.vector)}};
}

inline json obligations_json(const std::vector<ErgodicityObligation>& obs)
{
    json a = json::array();
    for (const auto& ob : obs) a.push_back(obligation_json(ob));
    return a;
}

inline json tuple_json(const TupleState& t, const IndexingData& idx)
{
    json rhos = json::array(), polys = json::array();
    for (const auto& r : t.rhos) {
        rhos.push_back(poly_json(r));
        polys.push_back(r.str());
    }
    json j = {{"eta", one_based(t.eta)}, {"rhos", rhos}, {"polys", polys}, {"type", type_json(tuple_type(t, idx))}};
    if (!t.duals.empty()) {
        json d = json::array();
        for (const auto& du : t.duals)
            d.push_back({{"transform", du.transform + 1}, {"q", poly_json(du.q)}, {"shift", detail::int_json(du.shift)}});
        j["duals"] = d;
    }
    return j;
}

inline json ledger_json(const InvarianceLedger& L)
{
    json a = json::array();
    for (const auto& vs : L.entries) {
        json e = json::array();
        for (const auto& v : vs) e.push_back(vec_json(v));
        a.push_back(e);
    }
    return a;
}

inline json trace_json(const ReductionTrace& tr)
{
    json steps = json::array();
    for (std::size_t k = 0; k < tr.steps.size(); ++k) {
        const auto& e = tr.steps[k];
        const auto& st = e.step;
        json s = tuple_json(st.after, tr.idx);
        s["step"] = k + 1;
        s["kind"] = st.kind == StepKind::TypeReduce ? "reduce" : "flip";
        if (st.kind == StepKind::TypeReduce) {
            s["m"] = st.m + 1;
            s["i"] = st.i + 1;
            s["lambda"] = detail::int_json(st.lambda);
        } else {
            s["A"] = one_based(st.A);
            s["gamma"] = detail::int_json(st.gamma);
        }
        s["r"] = detail::int_json(st.r);
        s["type_before"] = type_json(st.type_before);
        s["ledger"] = ledger_json(e.ledger);
        s["descendant"] = {detail::int_json(e.descendant.lambda), detail::int_json(e.descendant.r)};
        steps.push_back(s);
    }
    json base = json::array();
    for (const auto& p : tr.base.polys()) base.push_back(poly_json(p));
    return {{"base", base},
            {"indexing", indexing_json(tr.idx)},
            {"initial", tuple_json(tr.initial, tr.idx)},
            {"steps", steps},
            {"final", tuple_json(tr.final_state, tr.idx)}};
}

inline json coords_list(const std::vector<Coords>& cs)
{
    json a = json::array();
    for (const auto& c : cs) a.push_back(c);
    return a;
}

inline json eigen_json(const EigenWitness& w)
{
    json a = json::array();
    for (const auto& r : w.alphas) a.push_back(rational_json(r));
    json j = {{"alphas", a}, {"mean", cnum(w.mean)}, {"modulus", num(std::abs(w.mean))}, {"deviation", num(w.deviation)}};
    if (!w.characters.empty()) j["characters"] = coords_list(w.characters);
    if (!w.cycles.empty()) {
        json c = json::array();
        for (const auto& ce : w.cycles) c.push_back({{"alpha", rational_json(ce.alpha)}, {"cycle", ce.cycle}, {"k", ce.k}});
        j["cycles"] = c;
    }
    return j;
}

inline json eigen_list(const std::vector<EigenWitness>& ws)
{
    json a = json::array();
    for (const auto& w : ws) a.push_back(eigen_json(w));
    return a;
}

inline json direct_json(const DirectCheck& d)
{
    json j = {{"max_deviation", num(d.max_deviation)}, {"tuples", d.tuples}, {"family", d.family}, {"worst", d.worst}};
    if (!d.worst_characters.empty()) j["worst_characters"] = coords_list(d.worst_characters);
    return j;
}

inline json wje_json(const WjeReport& r)
{
    return {{"obligations", obligations_json(r.obligations)},
            {"failing_obligations", obligations_json(r.failing_obligations)},
            {"criterion_i", r.criterion_i},
            {"criterion_ii", r.criterion_ii},
            {"eigen_tuples", r.eigen_tuples},
            {"witnesses", eigen_list(r.failing_eigen)},
            {"direct", direct_json(r.direct)},
            {"verdict", r.verdict},
            {"agreement", r.agreement}};
}

inline json je_json(const JeReport& r)
{
    return {{"ergodic", r.ergodic},
            {"obligations", obligations_json(r.obligations)},
            {"failing_obligations", obligations_json(r.failing_obligations)},
            {"criterion_i", r.criterion_i},
            {"criterion_ii", r.criterion_ii},
            {"spectral_tuples", r.spectral_tuples},
            {"witnesses", eigen_list(r.failing_eigen)},
            {"direct", direct_json(r.direct)},
            {"verdict", r.verdict},
            {"agreement", r.agreement},
            {"wje_verdict", r.wje_verdict},
            {"lemma_agreement", r.lemma_agreement}};
}

inline json dks_json(const DksReport& r)
{
    json pairs = json::array();
    for (const auto& p : r.cond_i) pairs.push_back({{"pair", {p.i + 1, p.j + 1}}, {"ergodic", p.ergodic}});
    return {{"cond_i", pairs},         {"cond_i_all", r.cond_i_all}, {"cond_ii", r.cond_ii},
            {"product_cells", r.product_cells}, {"je_verdict", r.je_verdict}, {"equivalence", r.equivalence}};
}

inline json seminorm_json(const SeminormResult& r)
{
    return {{"value", num(r.value)}, {"power", num(r.power)}, {"imag", num(r.imag)}, {"exact", r.exact},
            {"period", r.period}};
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

} // namespace ergomax::cli
