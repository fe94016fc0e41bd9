#pragma once

/**
 * @file golden.hpp
 * @brief Built-in suite of worked examples, each run through the same
 *        config pipeline as user experiments.
 */

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "ergomax/cli/run.hpp"

namespace ergomax::cli {

namespace golden {

inline const char* ex41 = R"(
command: analyze
family:
  polys: [[0, 1], [0, 1], [1, 1], [2, 2], [2, 1], [1], [3, 1]]
tuple:
  eta: [1, 2, 3, 4, 3, 6, 2]
)";

inline const char* ex62 = R"(
command: reduce
family:
  polys: [[0, 1], [0, 3], [0, 2], [1, 2], [1, 1], [1, 1], [1]]
params:
  policy: paper-ex62
)";

inline const char* ex78 = R"(
command: reduce
family:
  polys: [[0, 1], [0, 1], [0, 1], [0, 1], [1, 1], [1, 1], [2, 1], [2, 1]]
params:
  policy: paper-ex78
)";

inline const char* ex53a = R"(
command: analyze
family:
  polys: [[0, 1], [0, 1], [0, 1], [0, 1], [1, 1], [1, 1], [2, 1], [2, 1]]
tuple:
  eta: [1, 2, 3, 4, 5, 1, 5, 5]
)";

inline const char* ex53b = R"(
command: analyze
family:
  polys: [[0, 1], [0, 1], [0, 1], [0, 1], [1, 1], [1, 1], [2, 1], [2, 1]]
tuple:
  eta: [1, 2, 3, 4, 1, 1, 5, 5]
)";

inline const char* wje_positive = R"(
command: verify-wje
system: {kind: translation, moduli: [5, 7], shifts: [[1, 0], [0, 1]]}
family: {polys: [[1], [1]]}
)";

inline const char* wje_goodness = R"(
command: verify-wje
system: {kind: translation, moduli: [7, 7, 7], shifts: [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}
family: {polys: [[1], [1], [1]]}
)";

inline const char* wje_spectral = R"(
command: verify-wje
system: {kind: translation, moduli: [5, 7], shifts: [[1, 0], [0, 1]]}
family: {polys: [[0, 1], [1, 1]]}
)";

inline const char* weyl_gauss = R"(
command: weyl
family: {polys: [[0, 1]]}
params: {alphas: ["1/5"]}
)";

struct Case {
    std::string name;
    const char* config;
    std::function<bool(json)> check;
};

inline bool near(const json& v, double x, double tol = 1e-9) { return v.is_number() && std::abs(v.get<double>() - x) <= tol; }

inline std::vector<json> types_of(json trace)
{
    std::vector<json> out{trace["initial"]["type"]};
    for (const auto& s : trace["steps"]) out.push_back(s["type"]);
    return out;
}

inline std::vector<Case> cases()
{
    std::vector<Case> cs;
    cs.push_back({"indexing-ex41", ex41, [](json r) {
                      return r["type"] == json::array({3, 3, 0, 0}) && r["K1"] == 5 && r["K2"] == 4 && r["K3"] == 6 &&
                             r["L"] == json::array({1, 2, 3, 4, 5, 7});
                  }});
    cs.push_back({"trace-ex62", ex62, [](json r) {
                      const json polys = {"256n^2+416n", "768n^2+1248n", "512n^2+832n", "256n^2+424n",
                                          "512n^2+864n", "256n^2+432n",  "16n"};
                      const std::vector<json> types{{3, 2, 1}, {4, 2, 0}, {5, 1, 0}, {6, 0, 0}};
                      return r["final"]["polys"] == polys && types_of(r) == types;
                  }});
    cs.push_back({"trace-ex78", ex78, [](json r) {
                      const std::vector<json> types{{4, 2, 2}, {4, 3, 1}, {4, 4, 0}, {5, 3, 0},
                                                    {6, 2, 0}, {6, 0, 2}, {7, 0, 1}, {8, 0, 0}};
                      int flips = 0;
                      for (const auto& s : r["steps"]) flips += s["kind"] == "flip";
                      return types_of(r) == types && flips == 1 && r["steps"][4]["kind"] == "flip";
                  }});
    cs.push_back({"controllable-ex53", ex53a, [](json r) { return r["controllable"] == json::array({5}); }});
    cs.push_back({"uncontrollable-ex53", ex53b, [](json r) { return r["controllable"] == json::array(); }});
    cs.push_back({"wje-positive", wje_positive, [](json r) {
                      return r["criterion_i"] == true && r["criterion_ii"] == true &&
                             r["direct"]["max_deviation"].get<double>() <= 1e-9 && r["agreement"] == true;
                  }});
    cs.push_back({"wje-goodness-failure", wje_goodness, [](json r) {
                      return r["criterion_i"] == false && !r["failing_obligations"].empty() &&
                             r["failing_obligations"][0]["pair"] == json::array({1, 2}) &&
                             near(r["direct"]["max_deviation"], 1.0) && r["agreement"] == true;
                  }});
    cs.push_back({"wje-spectral-failure", wje_spectral, [](json r) {
                      bool gauss = false;
                      for (const auto& w : r["witnesses"]) gauss = gauss || near(w["modulus"], 1 / std::sqrt(5.0));
                      return r["criterion_ii"] == false && gauss &&
                             r["direct"]["max_deviation"].get<double>() >= 0.44 && r["agreement"] == true;
                  }});
    cs.push_back({"weyl-gauss", weyl_gauss, [](json r) { return near(r["modulus"], 1 / std::sqrt(5.0)); }});
    return cs;
}

} // namespace golden

inline Outcome golden_suite()
{
    Outcome o;
    json results = json::array();
    for (const auto& gc : golden::cases()) {
        json entry = {{"name", gc.name}};
        bool pass = false;
        try {
            json r = execute(parse_config_string(gc.config, "golden:" + gc.name)).report;
            pass = gc.check(r);
        } catch (const std::exception& e) {
            entry["error"] = e.what();
        }
        entry["pass"] = pass;
        if (!pass) o.failures.push_back("golden case " + gc.name + " failed");
        results.push_back(entry);
    }
    o.report = {{"command", "golden"}, {"cases", results}, {"passed", o.failures.empty()}};
    return o;
}

} // namespace ergomax::cli
