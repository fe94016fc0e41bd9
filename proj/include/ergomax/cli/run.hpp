#pragma once

/**
 * @file run.hpp
 * @brief Subcommand execution: one experiment per call, JSON or CSV report.
 *
 * Exit status: 0 success, 1 verification failure or library error,
 * 2 configuration error.
 */

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ergomax/averages.hpp"
#include "ergomax/family.hpp"
#include "ergomax/finsys.hpp"
#include "ergomax/reduction.hpp"
#include "ergomax/cli/config.hpp"
#include "ergomax/cli/report.hpp"

namespace ergomax::cli {

inline const std::vector<std::string>& subcommands()
{
    static const std::vector<std::string> names{"analyze", "reduce",     "check-goodness", "average",   "seminorm",
                                                "weyl",    "verify-wje", "verify-je",      "verify-dks", "golden"};
    return names;
}

/** Command-line values that take precedence over the config file. */
struct Overrides {
    std::optional<std::string> out, format, policy;
    std::optional<double> tolerance;
    std::optional<std::int64_t> N, H;
    std::optional<int> s;
    std::optional<std::uint64_t> seed;
};

inline void apply_overrides(ExperimentConfig& c, const Overrides& o)
{
    if (o.out) c.output.path = *o.out;
    if (o.format) {
        if (*o.format != "json" && *o.format != "csv") throw ConfigError("--format: expected json or csv");
        c.output.format = *o.format;
    }
    if (o.policy) c.params.policy = *o.policy;
    if (o.tolerance) {
        if (!(*o.tolerance >= 0)) throw ConfigError("--tolerance: must be nonnegative");
        c.params.tolerance = *o.tolerance;
    }
    if (o.N) {
        if (*o.N < 1) throw ConfigError("--N: must be positive");
        c.params.N = *o.N;
    }
    if (o.H) {
        if (*o.H < 0) throw ConfigError("--H: must be nonnegative");
        c.params.H = *o.H;
    }
    if (o.s) {
        if (*o.s < 0) throw ConfigError("--s: must be nonnegative");
        c.params.s = *o.s;
    }
    if (o.seed) c.params.seed = *o.seed;
}

struct Outcome {
    json report;
    std::string csv;
    std::vector<std::string> failures;  // failed consistency assertions
};

namespace detail {

inline double tol_of(const ExperimentConfig& c) { return c.params.tolerance.value_or(1e-9); }

inline void require_csv_support(const ExperimentConfig& c)
{
    if (c.output.format == "csv" && c.command != "average" && c.command != "seminorm")
        c.fail("output.format", "csv output is available for average and seminorm only");
}

inline Outcome cmd_analyze(const ExperimentConfig& c)
{
    BaseFamily base = build_family(c);
    IndexingData idx = build_indexing(c, base);
    TupleState t = build_tuple(c, base);
    TypeVec w = tuple_type(t, idx);
    Outcome o;
    json& r = o.report;
    r = indexing_json(idx);
    r["command"] = c.command;
    r["tuple"] = tuple_json(t, idx);
    r["type"] = type_json(w);
    r["basic"] = w.basic();
    r["obligations"] = obligations_json(goodness_obligations(t, idx));
    if (!w.basic()) r["controllable"] = one_based(controllable_indices(t, idx));
    return o;
}

inline Outcome cmd_reduce(const ExperimentConfig& c)
{
    BaseFamily base = build_family(c);
    Policy p = build_policy(c);
    Outcome o;
    o.report = trace_json(run_induction(base, p));
    o.report["command"] = c.command;
    o.report["policy"] = p.name;
    if (p.name == "random") o.report["seed"] = c.params.seed.value_or(0);
    return o;
}

inline Outcome cmd_check_goodness(const ExperimentConfig& c)
{
    BaseFamily base = build_family(c);
    IndexingData idx = build_indexing(c, base);
    TupleState t = build_tuple(c, base);
    FiniteSystem sys = build_system(c);
    located(c, "system", [&] { ergomax::detail::check_family(sys, base); });
    Outcome o;
    json obs = json::array();
    bool good = true, very_good = true;
    for (const auto& ob : goodness_obligations(t, idx)) {
        auto chk = evaluate_obligation(sys, ob);
        json j = obligation_json(ob);
        j["good"] = chk.good;
        j["very_good"] = chk.very_good;
        j["left_blocks"] = chk.left_blocks;
        j["right_blocks"] = chk.right_blocks;
        obs.push_back(j);
        good = good && chk.good;
        very_good = very_good && chk.very_good;
    }
    o.report = {{"command", c.command}, {"obligations", obs}, {"all_good", good}, {"all_very_good", very_good}};
    return o;
}

inline Outcome cmd_average(const ExperimentConfig& c)
{
    BaseFamily base = build_family(c);
    TupleState t = build_tuple(c, base);
    FiniteSystem sys = build_system(c);
    std::vector<Observable> fns = build_observables(c, sys);
    if (fns.size() != t.size()) c.fail("observables", "one observable per tuple position required");
    std::vector<DualSeq> duals = build_duals(c, sys);
    auto pa = located(c, "tuple", [&] { return ergomax::detail::prepare_average(sys, t, fns, duals); });
    const std::int64_t N = c.params.N.value_or(pa.period);

    std::optional<Observable> target;
    const std::string tgt = c.params.target.value_or("none");
    if (tgt == "je") {
        Complex prod = 1;
        for (const auto& f : fns) prod *= integral(sys, f);
        target = Observable::constant(sys.size(), prod);
    } else if (tgt == "wje") {
        Observable prod = Observable::constant(sys.size(), 1);
        for (Index j = 0; j < t.size(); ++j)
            prod = prod * cond_expectation(sys, fns[j], invariant_partition(sys, {unit_vector(sys.ell(), t.eta[j])}));
        target = prod;
    }

    Outcome o;
    std::vector<Complex> acc(sys.size(), 0);
    Observable cur;
    cur.values.resize(sys.size());
    std::ostringstream csv;
    const bool want_csv = c.output.format == "csv";
    if (want_csv) csv << "n,norm,deviation\n";
    if (want_csv) {
        for (std::int64_t n = 1; n <= N; ++n) {
            ergomax::detail::accumulate_average(sys, pa.factors, n, n + 1, acc);
            for (std::size_t x = 0; x < acc.size(); ++x) cur.values[x] = acc[x] / static_cast<double>(n);
            csv << n << ',' << num(l2_norm(sys, cur)).dump() << ',';
            if (target) csv << num(l2_distance(sys, cur, *target)).dump();
            csv << '\n';
        }
    } else {
        cur = ergomax::detail::run_average(sys, pa, N);
    }
    o.csv = csv.str();
    o.report = {{"command", c.command},
                {"value", observable_values(cur)},
                {"norm", num(l2_norm(sys, cur))},
                {"N", N},
                {"period", pa.period},
                {"exact", N % pa.period == 0},
                {"target", tgt}};
    if (target) o.report["deviation"] = num(l2_distance(sys, cur, *target));
    return o;
}

inline SeminormSpec seminorm_spec(const ExperimentConfig& c, const FiniteSystem& sys, std::optional<Index>& ghk)
{
    if (!c.params.spec.empty()) {
        SeminormSpec sp;
        sp.vectors = c.params.spec;
        located(c, "params.spec", [&] { sp.validate(sys.ell()); });
        return sp;
    }
    const Index j = c.params.transform.value_or(1);
    if (j > sys.ell()) c.fail("params.transform", "transform out of range");
    const int s = c.params.s.value_or(2);
    if (s < 1) c.fail("params.s", "s must be at least 1 for a seminorm");
    ghk = j - 1;
    return SeminormSpec::repeat(unit_vector(sys.ell(), j - 1), s);
}

inline json guarded(const std::function<SeminormResult()>& f)
{
    try {
        return seminorm_json(f());
    } catch (const NegativeBeyondTolerance& e) {
        return {{"error", e.what()}};
    }
}

inline Outcome cmd_seminorm(const ExperimentConfig& c)
{
    FiniteSystem sys = build_system(c);
    std::vector<Observable> fns = build_observables(c, sys);
    if (fns.empty()) c.fail("observables", "seminorm needs one observable");
    const Observable& f = fns.front();
    std::optional<Index> ghk;
    SeminormSpec spec = seminorm_spec(c, sys, ghk);
    const double tol = tol_of(c);
    const std::int64_t H = c.params.H.value_or(0);

    Outcome o;
    json& r = o.report;
    r = {{"command", c.command}, {"s", spec.s()}, {"H", H}};
    json vs = json::array();
    for (const auto& v : spec.vectors) vs.push_back(vec_json(v));
    r["spec"] = vs;
    if (H == 0) {
        r["simultaneous"] = guarded([&] { return box_seminorm_levels(sys, f, spec, std::vector<std::int64_t>(spec.s(), 0), tol); });
        r["iterated"] = r["simultaneous"];
    } else {
        r["simultaneous"] = guarded([&] { return box_seminorm_report(sys, f, spec, H, tol); });
        r["iterated"] = guarded([&] { return box_seminorm_iterated(sys, f, spec, H, tol); });
    }
    if (ghk) r["oracle"] = num(gowers_oracle(sys, f, *ghk, static_cast<int>(spec.s()), tol));

    if (c.output.format == "csv") {
        if (H == 0) c.fail("params.H", "csv output needs a positive H");
        std::ostringstream csv;
        csv << "H,simultaneous,iterated\n";
        auto cell = [&](const std::function<SeminormResult()>& g) {
            try {
                return num(g().value).dump();
            } catch (const NegativeBeyondTolerance&) {
                return std::string();
            }
        };
        for (std::int64_t h = 1; h <= H; ++h)
            csv << h << ',' << cell([&] { return box_seminorm_report(sys, f, spec, h, tol); }) << ','
                << cell([&] { return box_seminorm_iterated(sys, f, spec, h, tol); }) << '\n';
        o.csv = csv.str();
    }
    return o;
}

inline Outcome cmd_weyl(const ExperimentConfig& c)
{
    BaseFamily base = build_family(c);
    std::vector<Rational> alphas = build_alphas(c);
    if (alphas.size() != base.size()) c.fail("params.alphas", "one alpha per polynomial required");
    WeylResult w = weyl_mean(base.polys(), alphas, tol_of(c));
    json a = json::array();
    for (const auto& x : alphas) a.push_back(rational_json(x));
    Outcome o;
    o.report = {{"command", c.command}, {"alphas", a},          {"value", cnum(w.value)},
                {"modulus", num(std::abs(w.value))}, {"vanishes", w.vanishes}, {"period", w.period},
                {"exact", true}};
    return o;
}

inline Outcome cmd_verify(const ExperimentConfig& c)
{
    BaseFamily base = build_family(c);
    FiniteSystem sys = build_system(c);
    located(c, "system", [&] { ergomax::detail::check_family(sys, base); });
    auto fam = build_test_family(c, sys);
    for (std::size_t k = 0; k < fam.size(); ++k)
        if (fam[k].size() != base.size())
            c.fail("test_family[" + std::to_string(k) + "]", "one observable per polynomial required");
    const auto* famp = fam.empty() ? nullptr : &fam;
    if (!sys.is_translation() && !famp && c.command != "verify-dks")
        c.fail("test_family", "permutation systems need a supplied test family");
    VerifyOptions opt = build_verify_options(c);
    Outcome o;
    if (c.command == "verify-wje") {
        auto r = verify_wje(sys, base, famp, opt);
        o.report = wje_json(r);
        if (!r.agreement) o.failures.push_back("criteria verdict disagrees with the direct check");
    } else if (c.command == "verify-je") {
        auto r = verify_je(sys, base, famp, opt);
        o.report = je_json(r);
        if (!r.agreement) o.failures.push_back("criteria verdict disagrees with the direct check");
        if (!r.lemma_agreement) o.failures.push_back("JE verdict differs from WJE plus ergodicity");
    } else {
        auto r = verify_dks(sys, base, opt);
        o.report = dks_json(r);
        if (!r.equivalence) o.failures.push_back("DKS conditions disagree with the JE criteria");
    }
    o.report["command"] = c.command;
    return o;
}

} // namespace detail

inline Outcome golden_suite();

/** Runs one configured experiment. Throws ConfigError or library errors. */
inline Outcome execute(const ExperimentConfig& c)
{
    detail::require_csv_support(c);
    const std::string& cmd = c.command;
    Outcome o;
    if (cmd == "analyze") o = detail::cmd_analyze(c);
    else if (cmd == "reduce") o = detail::cmd_reduce(c);
    else if (cmd == "check-goodness") o = detail::cmd_check_goodness(c);
    else if (cmd == "average") o = detail::cmd_average(c);
    else if (cmd == "seminorm") o = detail::cmd_seminorm(c);
    else if (cmd == "weyl") o = detail::cmd_weyl(c);
    else if (cmd == "verify-wje" || cmd == "verify-je" || cmd == "verify-dks") o = detail::cmd_verify(c);
    else if (cmd == "golden") o = golden_suite();
    else if (cmd.empty()) c.fail("command", "no subcommand given");
    else c.fail("command", "unknown subcommand '" + cmd + "'");
    if (!o.failures.empty()) o.report["failures"] = o.failures;
    return o;
}

/** execute() plus report emission and exit-status mapping. */
inline int run(ExperimentConfig c, std::ostream& out, std::ostream& err)
{
    Outcome o;
    try {
        o = execute(c);
    } catch (const ConfigError& e) {
        err << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return 1;
    }
    const std::string text = c.output.format == "csv" ? o.csv : dump(o.report);
    if (c.output.path.empty()) {
        out << text;
    } else {
        std::ofstream f(c.output.path, std::ios::binary);
        if (!f) {
            err << "ConfigError: " << c.output.path << ": cannot write report\n";
            return 2;
        }
        f << text;
    }
    for (const auto& msg : o.failures) err << "VerificationFailure: " << msg << "\n";
    return o.failures.empty() ? 0 : 1;
}

/** Full invocation: load (optional) config, apply overrides, run. */
inline int run(const std::string& command, const std::optional<std::string>& config_path, const Overrides& ov,
               std::ostream& out, std::ostream& err)
{
    ExperimentConfig c;
    try {
        if (config_path) c = load_config(*config_path);
        else if (command != "golden") throw ConfigError("--config is required for '" + command + "'");
        if (!c.command.empty() && c.command != command)
            c.fail("command", "config is for '" + c.command + "', invoked as '" + command + "'");
        c.command = command;
        apply_overrides(c, ov);
    } catch (const ConfigError& e) {
        err << e.what() << "\n";
        return 2;
    }
    return run(std::move(c), out, err);
}

} // namespace ergomax::cli

#include "ergomax/cli/golden.hpp"
