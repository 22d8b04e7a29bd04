#pragma once

// INI-style run configuration.
//
//   [scenario]   kind, output, snapshot_every
//   [domain]     dim, lower, upper, subdivisions
//   [tags]       <name> = <face> [axis=lo:hi ...] [| <face> ...]
//   [compliance] young, poisson, ersatz, fixed, traction
//   [thermal]    kappa_material, kappa_void, heat_source, temperature_tags, temperature
//   [cavity]     enabled, a_p, epsilon_p, length, exit_tags, heaviside_threshold
//   [evolution]  tau, k, dt, material_tags, initial
//   [optimizer]  max_iterations, window, objective_tolerance, volume_tolerance,
//                cavity_tolerance, volume_fraction, volume_step, cavity_rate,
//                cavity_cap, non_design
//   [solver]     tolerance, max_iterations
//   [validation] enclosed_min, open_max, void_threshold
//   [geometry]   base, shape* (one primitive per key, applied in file order)
//
// Lists are whitespace separated; alternatives in [tags], traction and
// non_design are separated by '|'. Unknown sections or keys are errors.

#include "topopt/cavity.hpp"
#include "topopt/geometry.hpp"
#include "topopt/levelset.hpp"
#include "topopt/mesh.hpp"
#include "topopt/optimizer.hpp"
#include "topopt/physics.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace topopt {

enum class ScenarioKind { fictitious_validation, compliance_opt, thermal_opt, oracle_check };

std::string to_string(ScenarioKind kind);
std::optional<ScenarioKind> parse_scenario_kind(std::string_view text);

enum class InitialDesign { full, geometry };

struct ComplianceSettings {
    ElasticMaterial material{210e9, 0.3};
    double ersatz = 1e-3;
    std::vector<std::string> fixed_tags;
    std::vector<TractionLoad> tractions;
    bool operator==(const ComplianceSettings& o) const;
};

struct ThermalSettings {
    double material_conductivity = 26.0;
    double void_conductivity = 2.23e-2;
    double heat_source = 1.0;
    std::vector<std::string> temperature_tags;
    double boundary_temperature = 0.0;
    bool operator==(const ThermalSettings&) const = default;
};

/// Axis-aligned box of non-design (always material) elements.
struct NonDesignBox {
    Point lower{0.0, 0.0, 0.0};
    Point upper{0.0, 0.0, 0.0};
    bool operator==(const NonDesignBox&) const = default;
};

struct ValidationSettings {
    double enclosed_min = 0.9; // enclosed voids must read mean p above this
    double open_max = 0.05;    // open voids must read mean p below this
    double void_threshold = 0.5;
    bool operator==(const ValidationSettings&) const = default;
};

struct RunConfig {
    ScenarioKind kind = ScenarioKind::compliance_opt;
    std::string output_dir = "out";
    int snapshot_every = 0; // 0: final snapshot only

    BoxSpec domain;
    ComplianceSettings compliance;
    ThermalSettings thermal;

    bool cavity_enabled = true;
    CavityModelParams cavity;

    EvolutionParams evolution;
    InitialDesign initial = InitialDesign::full;

    StopCriteria stop;
    MultiplierSettings multipliers;
    std::optional<double> volume_fraction; // default depends on the scenario
    std::vector<NonDesignBox> non_design;

    SolveOptions solver;
    ValidationSettings validation;
    GeometryDescription geometry;
    bool has_geometry = false;

    /// Volume fraction in effect: explicit value, else 0.3 (compliance) or
    /// 0.4 (thermal).
    double effective_volume_fraction() const;

    /// Cross-field checks (tags referenced by physics exist, ...). Throws
    /// ConfigurationError naming the field.
    void validate() const;

    bool operator==(const RunConfig& o) const;
};

/// Parses and validates. Syntax errors carry "line N"; validation errors name
/// the offending key.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Text that parses back to an equal RunConfig.
std::string serialize_config(const RunConfig& config);

/// Replaces `section.key` in the configuration text, adding it when absent.
/// Used by sweeps; the result is parsed again so the value is validated.
RunConfig override_parameter(const RunConfig& config, std::string_view dotted_key, std::string_view value);

/// Builds the optimization problem (mesh, physics, constraints) described by
/// the configuration.
OptimizationProblem build_problem(const RunConfig& config);

} // namespace topopt
