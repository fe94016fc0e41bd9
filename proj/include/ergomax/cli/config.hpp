#pragma once

/**
 * @file config.hpp
 * @brief Experiment configuration: YAML parsing with located diagnostics,
 *        conversion to library objects, and canonical JSON emission.
 *
 * Transform indices, tuple positions and class orders are 1-based in the
 * file; points of X are 0-based.
 */

#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "ergomax/averages.hpp"
#include "ergomax/errors.hpp"
#include "ergomax/family.hpp"
#include "ergomax/finsys.hpp"
#include "ergomax/polyalg.hpp"
#include "ergomax/reduction.hpp"

namespace ergomax::cli {

using json = nlohmann::json;
using Coeffs = std::vector<Int>;

struct ObservableSpec {
    enum class Kind { Values, Character, Constant };
    Kind kind = Kind::Values;
    std::vector<Complex> values;
    Coords xi;
    Complex constant = 0;
    friend bool operator==(const ObservableSpec&, const ObservableSpec&) = default;
};

struct SystemSpec {
    std::string kind = "translation";
    std::vector<std::int64_t> moduli;
    std::vector<Coords> shifts;
    std::vector<Perm> perms;
    std::vector<double> weights;  // empty: uniform
    friend bool operator==(const SystemSpec&, const SystemSpec&) = default;
};

struct FamilySpec {
    std::vector<Coeffs> polys;
    std::optional<std::vector<std::vector<Index>>> class_order;
    friend bool operator==(const FamilySpec&, const FamilySpec&) = default;
};

struct TupleSpec {
    std::vector<Index> eta;
    std::vector<Coeffs> rhos;  // empty: the base polynomials
    friend bool operator==(const TupleSpec&, const TupleSpec&) = default;
};

struct DualSpec {
    Index transform = 1;
    int s = 1;
    ObservableSpec generator;
    Coeffs q;
    Int shift = 0;
    friend bool operator==(const DualSpec&, const DualSpec&) = default;
};

struct Params {
    std::optional<std::int64_t> N, H, M;
    std::optional<int> s;
    std::optional<Index> transform;
    std::vector<Coeffs> spec;
    std::vector<std::string> alphas;
    std::optional<std::string> policy;
    std::optional<std::uint64_t> seed;
    std::optional<double> tolerance;
    std::optional<std::size_t> product_budget, full_family_budget, eigen_budget;
    std::optional<std::string> target;
    friend bool operator==(const Params&, const Params&) = default;
};

struct OutputSpec {
    std::string path;
    std::string format = "json";
    friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct Location {
    int line = 0, column = 0;
};

struct ExperimentConfig {
    std::string command;
    std::optional<FamilySpec> family;
    std::optional<SystemSpec> system;
    std::vector<ObservableSpec> observables;
    std::optional<TupleSpec> tuple;
    std::vector<DualSpec> duals;
    std::vector<std::vector<ObservableSpec>> test_family;
    Params params;
    OutputSpec output;

    // diagnostics only; not part of equality
    std::string source = "<config>";
    std::map<std::string, Location> locations;

    friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b)
    {
        return a.command == b.command && a.family == b.family && a.system == b.system &&
               a.observables == b.observables && a.tuple == b.tuple && a.duals == b.duals &&
               a.test_family == b.test_family && a.params == b.params && a.output == b.output;
    }

    /** ConfigError "file:line:col: key 'k': msg", using the nearest recorded ancestor of k. */
    [[noreturn]] void fail(const std::string& key, const std::string& msg) const
    {
        std::string k = key;
        for (;;) {
            auto it = locations.find(k);
            if (it != locations.end())
                throw ConfigError(source + ":" + std::to_string(it->second.line) + ":" +
                                  std::to_string(it->second.column) + ": key '" + key + "': " + msg);
            auto cut = k.find_last_of(".[");
            if (cut == std::string::npos) break;
            k = k.substr(0, cut);
        }
        throw ConfigError(source + ": key '" + key + "': " + msg);
    }
};

namespace detail {

class Parser {
public:
    explicit Parser(ExperimentConfig& cfg) : cfg_(cfg) {}

    [[noreturn]] void fail(const YAML::Node& n, const std::string& key, const std::string& msg) const
    {
        const auto m = n.Mark();
        if (m.line >= 0)
            throw ConfigError(cfg_.source + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1) +
                              ": key '" + key + "': " + msg);
        cfg_.fail(key, msg);
    }

    void mark(const YAML::Node& n, const std::string& key)
    {
        const auto m = n.Mark();
        if (m.line >= 0) cfg_.locations[key] = {m.line + 1, m.column + 1};
    }

    void allow(const YAML::Node& map, const std::string& key, std::initializer_list<const char*> names)
    {
        if (!map.IsMap()) fail(map, key, "expected a mapping");
        for (const auto& kv : map) {
            const std::string name = kv.first.as<std::string>();
            bool ok = false;
            for (const char* a : names) ok = ok || name == a;
            if (!ok) fail(kv.first, key.empty() ? name : key + "." + name, "unknown key");
        }
    }

    std::string str(const YAML::Node& n, const std::string& key)
    {
        mark(n, key);
        if (!n.IsScalar()) fail(n, key, "expected a string");
        return n.Scalar();
    }

    Int integer(const YAML::Node& n, const std::string& key)
    {
        mark(n, key);
        static const std::regex re("[-+]?[0-9]+");
        if (!n.IsScalar() || !std::regex_match(n.Scalar(), re)) fail(n, key, "expected an integer");
        std::string s = n.Scalar();
        if (s[0] == '+') s.erase(0, 1);
        return Int(s);
    }

    std::int64_t int64(const YAML::Node& n, const std::string& key, std::int64_t lo = INT64_MIN)
    {
        Int v = integer(n, key);
        if (v > std::numeric_limits<std::int64_t>::max() || v < lo) fail(n, key, "integer out of range");
        return static_cast<std::int64_t>(v);
    }

    double real(const YAML::Node& n, const std::string& key)
    {
        mark(n, key);
        double v = 0;
        if (!n.IsScalar() || !YAML::convert<double>::decode(n, v) || !std::isfinite(v)) fail(n, key, "expected a number");
        return v;
    }

    Complex complex(const YAML::Node& n, const std::string& key)
    {
        if (n.IsScalar()) return {real(n, key), 0.0};
        mark(n, key);
        if (!n.IsSequence() || n.size() != 2) fail(n, key, "expected a number or an [re, im] pair");
        return {real(n[0], key + "[0]"), real(n[1], key + "[1]")};
    }

    template <class F>
    auto seq(const YAML::Node& n, const std::string& key, F item)
    {
        mark(n, key);
        if (!n.IsSequence()) fail(n, key, "expected a sequence");
        std::vector<decltype(item(n, key))> out;
        for (std::size_t k = 0; k < n.size(); ++k) out.push_back(item(n[k], key + "[" + std::to_string(k) + "]"));
        return out;
    }

    Coeffs coeffs(const YAML::Node& n, const std::string& key)
    {
        return seq(n, key, [this](const YAML::Node& x, const std::string& k) { return integer(x, k); });
    }

    std::vector<std::int64_t> ints(const YAML::Node& n, const std::string& key)
    {
        return seq(n, key, [this](const YAML::Node& x, const std::string& k) { return int64(x, k); });
    }

    std::vector<Index> indices(const YAML::Node& n, const std::string& key)
    {
        return seq(n, key, [this](const YAML::Node& x, const std::string& k) {
            return static_cast<Index>(int64(x, k, 1));
        });
    }

    ObservableSpec observable(const YAML::Node& n, const std::string& key)
    {
        mark(n, key);
        ObservableSpec o;
        if (n.IsSequence()) {
            o.values = seq(n, key, [this](const YAML::Node& x, const std::string& k) { return complex(x, k); });
            return o;
        }
        allow(n, key, {"values", "character", "constant"});
        if (n.size() != 1) fail(n, key, "observable needs exactly one of values, character, constant");
        if (n["values"]) {
            o.values = seq(n["values"], key + ".values",
                           [this](const YAML::Node& x, const std::string& k) { return complex(x, k); });
        } else if (n["character"]) {
            o.kind = ObservableSpec::Kind::Character;
            o.xi = ints(n["character"], key + ".character");
        } else {
            o.kind = ObservableSpec::Kind::Constant;
            o.constant = complex(n["constant"], key + ".constant");
        }
        return o;
    }

    void parse(const YAML::Node& root)
    {
        if (!root || root.IsNull()) fail(root, "", "empty configuration");
        allow(root, "", {"command", "family", "system", "observables", "tuple", "duals", "test_family", "params",
                         "output"});
        if (root["command"]) cfg_.command = str(root["command"], "command");

        if (auto f = root["family"]) {
            mark(f, "family");
            allow(f, "family", {"polys", "class_order"});
            FamilySpec fs;
            if (!f["polys"]) fail(f, "family.polys", "missing");
            fs.polys = seq(f["polys"], "family.polys",
                           [this](const YAML::Node& x, const std::string& k) { return coeffs(x, k); });
            if (f["class_order"])
                fs.class_order = seq(f["class_order"], "family.class_order",
                                     [this](const YAML::Node& x, const std::string& k) { return indices(x, k); });
            cfg_.family = std::move(fs);
        }

        if (auto s = root["system"]) {
            mark(s, "system");
            allow(s, "system", {"kind", "moduli", "shifts", "perms", "weights"});
            SystemSpec ss;
            if (s["kind"]) ss.kind = str(s["kind"], "system.kind");
            if (ss.kind != "translation" && ss.kind != "permutation")
                fail(s["kind"], "system.kind", "expected translation or permutation");
            if (s["moduli"]) ss.moduli = ints(s["moduli"], "system.moduli");
            if (s["shifts"])
                ss.shifts = seq(s["shifts"], "system.shifts",
                                [this](const YAML::Node& x, const std::string& k) { return ints(x, k); });
            if (s["perms"])
                ss.perms = seq(s["perms"], "system.perms", [this](const YAML::Node& x, const std::string& k) {
                    return seq(x, k, [this](const YAML::Node& y, const std::string& kk) {
                        return static_cast<std::size_t>(int64(y, kk, 0));
                    });
                });
            if (s["weights"])
                ss.weights = seq(s["weights"], "system.weights",
                                 [this](const YAML::Node& x, const std::string& k) { return real(x, k); });
            cfg_.system = std::move(ss);
        }

        if (auto o = root["observables"])
            cfg_.observables = seq(o, "observables",
                                   [this](const YAML::Node& x, const std::string& k) { return observable(x, k); });

        if (auto t = root["tuple"]) {
            mark(t, "tuple");
            allow(t, "tuple", {"eta", "rhos"});
            TupleSpec ts;
            if (!t["eta"]) fail(t, "tuple.eta", "missing");
            ts.eta = indices(t["eta"], "tuple.eta");
            if (t["rhos"])
                ts.rhos = seq(t["rhos"], "tuple.rhos",
                              [this](const YAML::Node& x, const std::string& k) { return coeffs(x, k); });
            cfg_.tuple = std::move(ts);
        }

        if (auto d = root["duals"])
            cfg_.duals = seq(d, "duals", [this](const YAML::Node& x, const std::string& k) {
                allow(x, k, {"transform", "s", "generator", "q", "shift"});
                DualSpec ds;
                if (!x["generator"] || !x["q"]) fail(x, k, "dual needs generator and q");
                if (x["transform"]) ds.transform = static_cast<Index>(int64(x["transform"], k + ".transform", 1));
                if (x["s"]) ds.s = static_cast<int>(int64(x["s"], k + ".s", 1));
                ds.generator = observable(x["generator"], k + ".generator");
                ds.q = coeffs(x["q"], k + ".q");
                if (x["shift"]) ds.shift = integer(x["shift"], k + ".shift");
                return ds;
            });

        if (auto tf = root["test_family"])
            cfg_.test_family = seq(tf, "test_family", [this](const YAML::Node& x, const std::string& k) {
                return seq(x, k, [this](const YAML::Node& y, const std::string& kk) { return observable(y, kk); });
            });

        if (auto p = root["params"]) {
            mark(p, "params");
            allow(p, "params", {"N", "H", "M", "s", "transform", "spec", "alphas", "policy", "seed", "tolerance",
                                "product_budget", "full_family_budget", "eigen_budget", "target"});
            Params& pr = cfg_.params;
            if (p["N"]) pr.N = int64(p["N"], "params.N", 1);
            if (p["H"]) pr.H = int64(p["H"], "params.H", 0);
            if (p["M"]) pr.M = int64(p["M"], "params.M", 0);
            if (p["s"]) pr.s = static_cast<int>(int64(p["s"], "params.s", 0));
            if (p["transform"]) pr.transform = static_cast<Index>(int64(p["transform"], "params.transform", 1));
            if (p["spec"])
                pr.spec = seq(p["spec"], "params.spec",
                              [this](const YAML::Node& x, const std::string& k) { return coeffs(x, k); });
            if (p["alphas"])
                pr.alphas = seq(p["alphas"], "params.alphas",
                                [this](const YAML::Node& x, const std::string& k) { return str(x, k); });
            if (p["policy"]) pr.policy = str(p["policy"], "params.policy");
            if (p["seed"]) pr.seed = static_cast<std::uint64_t>(int64(p["seed"], "params.seed", 0));
            if (p["tolerance"]) {
                pr.tolerance = real(p["tolerance"], "params.tolerance");
                if (*pr.tolerance < 0) fail(p["tolerance"], "params.tolerance", "must be nonnegative");
            }
            if (p["product_budget"])
                pr.product_budget = static_cast<std::size_t>(int64(p["product_budget"], "params.product_budget", 0));
            if (p["full_family_budget"])
                pr.full_family_budget =
                    static_cast<std::size_t>(int64(p["full_family_budget"], "params.full_family_budget", 0));
            if (p["eigen_budget"])
                pr.eigen_budget = static_cast<std::size_t>(int64(p["eigen_budget"], "params.eigen_budget", 0));
            if (p["target"]) {
                pr.target = str(p["target"], "params.target");
                if (*pr.target != "none" && *pr.target != "wje" && *pr.target != "je")
                    fail(p["target"], "params.target", "expected none, wje or je");
            }
        }

        if (auto o = root["output"]) {
            mark(o, "output");
            allow(o, "output", {"path", "format"});
            if (o["path"]) cfg_.output.path = str(o["path"], "output.path");
            if (o["format"]) cfg_.output.format = str(o["format"], "output.format");
            if (cfg_.output.format != "json" && cfg_.output.format != "csv")
                fail(o["format"], "output.format", "expected json or csv");
        }
    }

private:
    ExperimentConfig& cfg_;
};

inline json int_json(const Int& v)
{
    if (v <= std::numeric_limits<std::int64_t>::max() && v >= std::numeric_limits<std::int64_t>::min())
        return static_cast<std::int64_t>(v);
    return v.str();
}

inline json coeffs_json(const Coeffs& c)
{
    json a = json::array();
    for (const auto& v : c) a.push_back(int_json(v));
    return a;
}

inline json observable_json(const ObservableSpec& o)
{
    switch (o.kind) {
    case ObservableSpec::Kind::Character:
        return {{"character", o.xi}};
    case ObservableSpec::Kind::Constant:
        return {{"constant", {o.constant.real(), o.constant.imag()}}};
    default: {
        json a = json::array();
        for (const auto& v : o.values) a.push_back({v.real(), v.imag()});
        return a;
    }
    }
}

} // namespace detail

inline ExperimentConfig parse_config_string(const std::string& text, const std::string& source = "<config>")
{
    ExperimentConfig cfg;
    cfg.source = source;
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                          ": " + e.msg);
    }
    detail::Parser(cfg).parse(root);
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_string(ss.str(), path);
}

/** Canonical JSON form; it re-parses to an equal config. */
inline json to_json(const ExperimentConfig& c)
{
    using namespace detail;
    json j = json::object();
    if (!c.command.empty()) j["command"] = c.command;
    if (c.family) {
        json f;
        f["polys"] = json::array();
        for (const auto& p : c.family->polys) f["polys"].push_back(coeffs_json(p));
        if (c.family->class_order) f["class_order"] = *c.family->class_order;
        j["family"] = f;
    }
    if (c.system) {
        json s;
        s["kind"] = c.system->kind;
        if (!c.system->moduli.empty()) s["moduli"] = c.system->moduli;
        if (!c.system->shifts.empty()) s["shifts"] = c.system->shifts;
        if (!c.system->perms.empty()) s["perms"] = c.system->perms;
        if (!c.system->weights.empty()) s["weights"] = c.system->weights;
        j["system"] = s;
    }
    if (!c.observables.empty()) {
        j["observables"] = json::array();
        for (const auto& o : c.observables) j["observables"].push_back(observable_json(o));
    }
    if (c.tuple) {
        json t;
        t["eta"] = c.tuple->eta;
        if (!c.tuple->rhos.empty()) {
            t["rhos"] = json::array();
            for (const auto& r : c.tuple->rhos) t["rhos"].push_back(coeffs_json(r));
        }
        j["tuple"] = t;
    }
    if (!c.duals.empty()) {
        j["duals"] = json::array();
        for (const auto& d : c.duals)
            j["duals"].push_back({{"transform", d.transform},
                                  {"s", d.s},
                                  {"generator", observable_json(d.generator)},
                                  {"q", coeffs_json(d.q)},
                                  {"shift", int_json(d.shift)}});
    }
    if (!c.test_family.empty()) {
        j["test_family"] = json::array();
        for (const auto& tup : c.test_family) {
            json a = json::array();
            for (const auto& o : tup) a.push_back(observable_json(o));
            j["test_family"].push_back(a);
        }
    }
    json p = json::object();
    const Params& pr = c.params;
    if (pr.N) p["N"] = *pr.N;
    if (pr.H) p["H"] = *pr.H;
    if (pr.M) p["M"] = *pr.M;
    if (pr.s) p["s"] = *pr.s;
    if (pr.transform) p["transform"] = *pr.transform;
    if (!pr.spec.empty()) {
        p["spec"] = json::array();
        for (const auto& v : pr.spec) p["spec"].push_back(coeffs_json(v));
    }
    if (!pr.alphas.empty()) p["alphas"] = pr.alphas;
    if (pr.policy) p["policy"] = *pr.policy;
    if (pr.seed) p["seed"] = *pr.seed;
    if (pr.tolerance) p["tolerance"] = *pr.tolerance;
    if (pr.product_budget) p["product_budget"] = *pr.product_budget;
    if (pr.full_family_budget) p["full_family_budget"] = *pr.full_family_budget;
    if (pr.eigen_budget) p["eigen_budget"] = *pr.eigen_budget;
    if (pr.target) p["target"] = *pr.target;
    if (!p.empty()) j["params"] = p;
    json o = {{"format", c.output.format}};
    if (!c.output.path.empty()) o["path"] = c.output.path;
    j["output"] = o;
    return j;
}

// ---------------------------------------------------------------------------
// conversion to library objects; library errors surface as located ConfigError

namespace detail {

template <class F>
auto located(const ExperimentConfig& c, const std::string& key, F f)
{
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        c.fail(key, e.what());
    }
}

} // namespace detail

inline IntPoly to_poly(const Coeffs& c) { return IntPoly(c); }

inline BaseFamily build_family(const ExperimentConfig& c)
{
    if (!c.family) c.fail("family", "section required by '" + c.command + "'");
    return detail::located(c, "family.polys", [&] {
        std::vector<IntPoly> ps;
        for (const auto& p : c.family->polys) ps.push_back(to_poly(p));
        return BaseFamily(std::move(ps));
    });
}

inline std::optional<std::vector<std::vector<Index>>> class_order(const ExperimentConfig& c)
{
    if (!c.family || !c.family->class_order) return std::nullopt;
    auto order = *c.family->class_order;
    for (auto& cls : order)
        for (auto& j : cls) --j;
    return order;
}

inline IndexingData build_indexing(const ExperimentConfig& c, const BaseFamily& base)
{
    return detail::located(c, "family.class_order", [&] { return indexing_data(base, class_order(c)); });
}

inline TupleState build_tuple(const ExperimentConfig& c, const BaseFamily& base)
{
    TupleState t = TupleState::identity(base);
    if (!c.tuple) return t;
    if (c.tuple->eta.size() != base.size()) c.fail("tuple.eta", "needs one entry per polynomial");
    for (std::size_t j = 0; j < base.size(); ++j) {
        if (c.tuple->eta[j] > base.size()) c.fail("tuple.eta", "index out of range");
        t.eta[j] = c.tuple->eta[j] - 1;
    }
    if (!c.tuple->rhos.empty()) {
        if (c.tuple->rhos.size() != base.size()) c.fail("tuple.rhos", "needs one entry per polynomial");
        t.rhos.clear();
        for (const auto& r : c.tuple->rhos) t.rhos.push_back(to_poly(r));
    }
    return t;
}

inline FiniteSystem build_system(const ExperimentConfig& c)
{
    if (!c.system) c.fail("system", "section required by '" + c.command + "'");
    const SystemSpec& s = *c.system;
    if (s.kind == "translation") {
        if (!s.perms.empty()) c.fail("system.perms", "not allowed for a translation system");
        if (!s.weights.empty()) c.fail("system.weights", "translation systems carry the uniform measure");
        try {
            return build_translation_system(s.moduli, s.shifts);
        } catch (const EmptyModulus& e) {
            c.fail("system.moduli", e.what());
        } catch (const ShapeMismatch& e) {
            c.fail("system.shifts", e.what());
        } catch (const Error& e) {
            c.fail("system", e.what());
        }
    }
    if (!s.moduli.empty() || !s.shifts.empty()) c.fail("system", "permutation systems take perms and weights only");
    if (s.perms.empty()) c.fail("system.perms", "at least one permutation required");
    return detail::located(c, "system", [&] {
        const std::size_t n = s.perms.front().size();
        if (s.weights.empty()) return FiniteSystem::uniform(n, s.perms);
        return FiniteSystem(s.weights, s.perms);
    });
}

inline Observable build_observable(const ExperimentConfig& c, const FiniteSystem& sys, const ObservableSpec& o,
                                   const std::string& key)
{
    return detail::located(c, key, [&] {
        switch (o.kind) {
        case ObservableSpec::Kind::Character:
            return character(sys, o.xi);
        case ObservableSpec::Kind::Constant:
            return Observable::constant(sys.size(), o.constant);
        default:
            if (o.values.size() != sys.size())
                throw ShapeMismatch("observable has " + std::to_string(o.values.size()) + " values, system has " +
                                    std::to_string(sys.size()) + " points");
            return Observable(o.values);
        }
    });
}

inline std::vector<Observable> build_observables(const ExperimentConfig& c, const FiniteSystem& sys)
{
    std::vector<Observable> out;
    for (std::size_t k = 0; k < c.observables.size(); ++k)
        out.push_back(build_observable(c, sys, c.observables[k], "observables[" + std::to_string(k) + "]"));
    return out;
}

inline std::vector<DualSeq> build_duals(const ExperimentConfig& c, const FiniteSystem& sys)
{
    std::vector<DualSeq> out;
    for (std::size_t k = 0; k < c.duals.size(); ++k) {
        const auto& d = c.duals[k];
        const std::string key = "duals[" + std::to_string(k) + "]";
        if (d.transform > sys.ell()) c.fail(key + ".transform", "transform out of range");
        DualSeq ds;
        ds.transform = d.transform - 1;
        ds.s = d.s;
        ds.generator = build_observable(c, sys, d.generator, key + ".generator");
        ds.q = to_poly(d.q);
        ds.shift = d.shift;
        out.push_back(std::move(ds));
    }
    return out;
}

inline std::vector<std::vector<Observable>> build_test_family(const ExperimentConfig& c, const FiniteSystem& sys)
{
    std::vector<std::vector<Observable>> out;
    for (std::size_t k = 0; k < c.test_family.size(); ++k) {
        std::vector<Observable> tup;
        for (std::size_t j = 0; j < c.test_family[k].size(); ++j)
            tup.push_back(build_observable(c, sys, c.test_family[k][j],
                                           "test_family[" + std::to_string(k) + "][" + std::to_string(j) + "]"));
        out.push_back(std::move(tup));
    }
    return out;
}

inline Rational parse_rational(const ExperimentConfig& c, const std::string& text, const std::string& key)
{
    static const std::regex re("\\s*([-+]?[0-9]+)\\s*(?:/\\s*([0-9]+)\\s*)?");
    std::smatch m;
    if (!std::regex_match(text, m, re)) c.fail(key, "expected a rational p/q");
    try {
        std::int64_t p = std::stoll(m[1].str());
        std::int64_t q = m[2].matched ? std::stoll(m[2].str()) : 1;
        if (q == 0) c.fail(key, "zero denominator");
        return Rational(p, q);
    } catch (const std::out_of_range&) {
        c.fail(key, "rational out of range");
    }
}

inline std::vector<Rational> build_alphas(const ExperimentConfig& c)
{
    std::vector<Rational> out;
    for (std::size_t k = 0; k < c.params.alphas.size(); ++k)
        out.push_back(parse_rational(c, c.params.alphas[k], "params.alphas[" + std::to_string(k) + "]"));
    return out;
}

inline Policy build_policy(const ExperimentConfig& c)
{
    const std::string name = c.params.policy.value_or("default");
    Policy p = name == "random" ? random_policy(c.params.seed.value_or(0))
                                : detail::located(c, "params.policy", [&] { return named_policy(name); });
    if (c.family && c.family->class_order) p.class_order = class_order(c);
    return p;
}

inline VerifyOptions build_verify_options(const ExperimentConfig& c)
{
    VerifyOptions o;
    if (c.params.tolerance) o.tol = *c.params.tolerance;
    if (c.params.product_budget) o.product_budget = *c.params.product_budget;
    if (c.params.full_family_budget) o.full_family_budget = *c.params.full_family_budget;
    if (c.params.eigen_budget) o.eigen_budget = *c.params.eigen_budget;
    return o;
}

} // namespace ergomax::cli
