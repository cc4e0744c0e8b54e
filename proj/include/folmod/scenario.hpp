#pragma once

// Scenario configs: a single JSON document describing chart, submersion,
// exponent, grids, optional vector field / test function / sweep range, and
// tolerance overrides. Schema-validated before any computation; unknown keys
// are rejected so typos fail loudly.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "folmod/chart.hpp"
#include "folmod/common.hpp"
#include "folmod/field.hpp"
#include "folmod/foliation.hpp"

namespace folmod {

using json = nlohmann::json;

struct ToleranceSet {
    double modulus_gap = 5e-3;       // closed form vs solver, relative
    double extremal_gap = 3e-2;      // solver extremal function, relative L^p
    double variation_gap = 1e-2;     // |analytic - fd| / max(|fd|, 1e-8)
    double variation_floor = 1e-5;   // both-sides bound for variation-null fields
    double identity = 5e-4;
    double criticality = 1e-4;
    double pair_residual = 1e-4;
    double holder = 5e-4;
    double solver = 1e-8;
    int max_sweeps = 100000;
};

struct SweepSpec {
    double t_min = 0.0;
    double t_max = 0.0;
    int n_steps = 0;
};

struct Scenario {
    MetricChart chart;
    ScalarField submersion;
    std::string submersion_src;
    std::optional<std::string> submersion2_src;
    double p = 2.0;
    std::optional<double> q_explicit;
    GridSpec grid{96, 96};
    int leaves = 96;
    std::optional<VectorField> vector_field;
    std::optional<VectorField> vector_field2;
    std::optional<std::string> test_function_src;
    std::optional<SweepSpec> sweep;
    ToleranceSet tol;
    std::uint64_t seed = 42;
    std::string digest;

    SubmersionFoliation foliation() const { return SubmersionFoliation(chart, submersion); }
    SubmersionFoliation foliation2() const {
        if (!submersion2_src) throw ConfigError("scenario has no second submersion");
        return SubmersionFoliation(chart, ScalarField::expression(*submersion2_src));
    }
};

namespace detail {

inline void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

inline double require_number(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw ConfigError("missing or non-numeric '" + key + "' in " + where);
    return j.at(key).get<double>();
}

inline std::string require_string(const json& j, const std::string& key,
                                  const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_string())
        throw ConfigError("missing or non-string '" + key + "' in " + where);
    return j.at(key).get<std::string>();
}

inline NumericParams parse_params(const json& j, NumericParams np) {
    reject_unknown_keys(j,
                        {"h_fd", "h_grad_field", "arc_step_frac", "flow_step", "table_levels",
                         "gauss_points", "trace_tol", "max_leaf_length_factor"},
                        "params");
    if (j.contains("h_fd")) np.h_fd = j.at("h_fd").get<double>();
    if (j.contains("h_grad_field")) np.h_grad_field = j.at("h_grad_field").get<double>();
    if (j.contains("arc_step_frac")) np.arc_step_frac = j.at("arc_step_frac").get<double>();
    if (j.contains("flow_step")) np.flow_step = j.at("flow_step").get<double>();
    if (j.contains("table_levels")) np.table_levels = j.at("table_levels").get<int>();
    if (j.contains("gauss_points")) np.gauss_points = j.at("gauss_points").get<int>();
    if (j.contains("trace_tol")) np.trace_tol = j.at("trace_tol").get<double>();
    if (j.contains("max_leaf_length_factor"))
        np.max_leaf_length_factor = j.at("max_leaf_length_factor").get<double>();
    return np;
}

inline MetricChart parse_chart(const json& j, const NumericParams& np) {
    if (!j.is_object()) throw ConfigError("'chart' must be an object");
    const std::string type = require_string(j, "type", "chart");
    if (type == "rectangle") {
        reject_unknown_keys(j, {"type", "a", "b"}, "chart");
        return rectangle_chart(require_number(j, "a", "chart"), require_number(j, "b", "chart"),
                               np);
    }
    if (type == "annulus") {
        reject_unknown_keys(j, {"type", "r1", "r2"}, "chart");
        return annulus_chart(require_number(j, "r1", "chart"), require_number(j, "r2", "chart"),
                             np);
    }
    if (type == "custom") {
        reject_unknown_keys(j, {"type", "u_range", "v_range", "g11", "g12", "g22", "periodic"},
                            "chart");
        auto range = [&](const char* key) -> Interval {
            if (!j.contains(key) || !j.at(key).is_array() || j.at(key).size() != 2)
                throw ConfigError(std::string("chart '") + key + "' must be [lo, hi]");
            return {j.at(key).at(0).get<double>(), j.at(key).at(1).get<double>()};
        };
        BoundaryPolicy policy = BoundaryPolicy::none;
        if (j.contains("periodic")) {
            const std::string per = j.at("periodic").get<std::string>();
            if (per == "u")
                policy = BoundaryPolicy::periodic_u;
            else if (per == "v")
                policy = BoundaryPolicy::periodic_v;
            else if (per != "none")
                throw ConfigError("chart 'periodic' must be one of none|u|v");
        }
        try {
            return custom_chart(range("u_range"), range("v_range"),
                                require_string(j, "g11", "chart"),
                                require_string(j, "g12", "chart"),
                                require_string(j, "g22", "chart"), policy, np);
        } catch (const ParseError& e) {
            throw ConfigError(std::string("chart metric expression: ") + e.what());
        }
    }
    throw ConfigError("chart 'type' must be one of rectangle|annulus|custom");
}

inline VectorField parse_vector_field(const json& j, const std::string& where) {
    reject_unknown_keys(j, {"X1", "X2", "bump"}, where);
    std::optional<BumpSupport> support;
    if (j.contains("bump")) {
        const json& b = j.at("bump");
        reject_unknown_keys(b, {"center", "r_in", "r_out"}, where + ".bump");
        if (!b.contains("center") || !b.at("center").is_array() || b.at("center").size() != 2)
            throw ConfigError(where + ".bump 'center' must be [u, v]");
        BumpSupport s;
        s.center = {b.at("center").at(0).get<double>(), b.at("center").at(1).get<double>()};
        s.r_in = require_number(b, "r_in", where + ".bump");
        s.r_out = require_number(b, "r_out", where + ".bump");
        if (!(s.r_in >= 0.0) || !(s.r_out > s.r_in))
            throw ConfigError(where + ".bump radii must satisfy 0 <= r_in < r_out");
        support = s;
    }
    try {
        return VectorField::expressions(require_string(j, "X1", where),
                                        require_string(j, "X2", where), support);
    } catch (const ParseError& e) {
        throw ConfigError(where + " expression: " + e.what());
    }
}

inline ToleranceSet parse_tolerances(const json& j, ToleranceSet t) {
    reject_unknown_keys(j,
                        {"modulus_gap", "extremal_gap", "variation_gap", "variation_floor",
                         "identity", "criticality", "pair_residual", "holder", "solver",
                         "max_sweeps"},
                        "tolerances");
    if (j.contains("modulus_gap")) t.modulus_gap = j.at("modulus_gap").get<double>();
    if (j.contains("extremal_gap")) t.extremal_gap = j.at("extremal_gap").get<double>();
    if (j.contains("variation_gap")) t.variation_gap = j.at("variation_gap").get<double>();
    if (j.contains("variation_floor")) t.variation_floor = j.at("variation_floor").get<double>();
    if (j.contains("identity")) t.identity = j.at("identity").get<double>();
    if (j.contains("criticality")) t.criticality = j.at("criticality").get<double>();
    if (j.contains("pair_residual")) t.pair_residual = j.at("pair_residual").get<double>();
    if (j.contains("holder")) t.holder = j.at("holder").get<double>();
    if (j.contains("solver")) t.solver = j.at("solver").get<double>();
    if (j.contains("max_sweeps")) t.max_sweeps = j.at("max_sweeps").get<int>();
    return t;
}

}  // namespace detail

inline Scenario parse_scenario(const json& j) {
    if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
    detail::reject_unknown_keys(
        j,
        {"schema", "chart", "submersion", "submersion2", "p", "q", "grid", "leaves",
         "vector_field", "vector_field2", "test_function", "sweep", "tolerances", "seed",
         "params"},
        "scenario");
    if (!j.contains("schema") || !j.at("schema").is_number_integer() ||
        j.at("schema").get<int>() != 1)
        throw ConfigError("scenario requires \"schema\": 1");

    Scenario sc;
    NumericParams np;
    if (j.contains("params")) np = detail::parse_params(j.at("params"), np);
    if (!j.contains("chart")) throw ConfigError("scenario requires 'chart'");
    sc.chart = detail::parse_chart(j.at("chart"), np);

    sc.submersion_src = detail::require_string(j, "submersion", "scenario");
    try {
        sc.submersion = ScalarField::expression(sc.submersion_src);
    } catch (const ParseError& e) {
        throw ConfigError(std::string("submersion expression: ") + e.what());
    }
    if (j.contains("submersion2")) {
        sc.submersion2_src = j.at("submersion2").get<std::string>();
        try {
            ScalarField::expression(*sc.submersion2_src);
        } catch (const ParseError& e) {
            throw ConfigError(std::string("submersion2 expression: ") + e.what());
        }
    }

    sc.p = detail::require_number(j, "p", "scenario");
    if (!(sc.p > 1.0)) throw ConfigError("exponent p must be > 1");
    if (j.contains("q")) {
        sc.q_explicit = j.at("q").get<double>();
        if (std::abs(1.0 / sc.p + 1.0 / *sc.q_explicit - 1.0) > 1e-12)
            throw ConfigError("p and q are not conjugate (1/p + 1/q != 1)");
    }

    if (j.contains("grid")) {
        const json& g = j.at("grid");
        if (!g.is_array() || g.size() != 2) throw ConfigError("'grid' must be [n_u, n_v]");
        sc.grid = {g.at(0).get<int>(), g.at(1).get<int>()};
        if (sc.grid.nu < 2 || sc.grid.nv < 2) throw ConfigError("grid must be at least 2x2");
    }
    if (j.contains("leaves")) {
        sc.leaves = j.at("leaves").get<int>();
        if (sc.leaves < 1) throw ConfigError("'leaves' must be positive");
    }
    if (j.contains("vector_field"))
        sc.vector_field = detail::parse_vector_field(j.at("vector_field"), "vector_field");
    if (j.contains("vector_field2"))
        sc.vector_field2 = detail::parse_vector_field(j.at("vector_field2"), "vector_field2");
    if (j.contains("test_function")) {
        sc.test_function_src = j.at("test_function").get<std::string>();
        try {
            ScalarField::expression(*sc.test_function_src);
        } catch (const ParseError& e) {
            throw ConfigError(std::string("test_function expression: ") + e.what());
        }
    }
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        detail::reject_unknown_keys(s, {"t_min", "t_max", "n_steps"}, "sweep");
        SweepSpec sw;
        sw.t_min = detail::require_number(s, "t_min", "sweep");
        sw.t_max = detail::require_number(s, "t_max", "sweep");
        if (!s.contains("n_steps") || !s.at("n_steps").is_number_integer())
            throw ConfigError("sweep requires integer 'n_steps'");
        sw.n_steps = s.at("n_steps").get<int>();
        if (sw.n_steps < 1) throw ConfigError("sweep 'n_steps' must be positive");
        if (!(sw.t_max > sw.t_min)) throw ConfigError("sweep requires t_max > t_min");
        sc.sweep = sw;
    }
    if (j.contains("tolerances")) sc.tol = detail::parse_tolerances(j.at("tolerances"), sc.tol);
    if (j.contains("seed")) sc.seed = j.at("seed").get<std::uint64_t>();

    sc.digest = fnv1a64_hex(j.dump());
    return sc;
}

inline Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    return parse_scenario(j);
}

}  // namespace folmod
