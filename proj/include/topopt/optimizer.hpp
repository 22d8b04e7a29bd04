#pragma once

#include "topopt/cavity.hpp"
#include "topopt/levelset.hpp"
#include "topopt/physics.hpp"

#include <functional>
#include <memory>
#include <variant>
#include <vector>

namespace topopt {

/// Placeholder physics with zero objective and zero sensitivity.
struct NoObjective {};

using PhysicsCase = std::variant<ComplianceCase, ThermalCase, NoObjective>;

struct StopCriteria {
    int max_iterations = 200;
    int window = 5;                    // iterations in the objective-change window
    double objective_tolerance = 1e-3; // relative spread of the objective over the window
    double volume_tolerance = 0.01;    // G_vol <= tol * |D|
    double cavity_tolerance = 1e-2;    // J_h / |D|

    void validate() const;
    bool operator==(const StopCriteria&) const = default;
};

struct MultiplierSettings {
    double volume_step = 0.02; // max relative volume reduction per iteration
    double cavity_rate = 10.0; // rho in lambda_h += rho * J_h / |D|
    double cavity_cap = 1e3;
    bool operator==(const MultiplierSettings&) const = default;
};

struct OptimizationProblem {
    std::shared_ptr<const SimplexMesh> mesh;
    PhysicsCase physics = NoObjective{};
    double volume_limit = 0.0; // V_max, absolute measure
    bool cavity_enabled = true;
    CavityModelParams cavity;
    EvolutionParams evolution;
    MultiplierSettings multipliers;
    /// Starting design; phi = 1 everywhere when `values` is empty.
    Vector initial_phi;
    SolveOptions solver;
};

struct HistoryRow {
    int iteration = 0;
    double objective = 0.0;
    double volume_fraction = 0.0;
    double volume_violation = 0.0; // G_vol
    double cavity_value = 0.0;     // J_h
    double lambda_vol = 0.0;
    double lambda_h = 0.0;
};

struct OptimizationState {
    int iteration = 0;
    LevelSetField level_set;
    double lambda_vol = 0.0;
    double lambda_h = 0.0;
    double cavity_scale = 0.0;   // largest mean |J'_h| seen so far
    double cavity_damping = 1.0; // factor applied to the cavity drive in the last step
    std::vector<HistoryRow> history;
    bool converged = false;

    // Fields of the most recent evaluation.
    Vector chi;
    Vector physics_field;
    Vector p;
    Vector p_adjoint;
    Vector cavity_sensitivity;
};

using IterationObserver = std::function<void(const OptimizationState&)>;

/// normalize(obj) + lambda_h normalize(cav) + lambda_vol, on nodes. Each
/// element field is moved to the nodes and divided by its mean absolute
/// value over the domain; positive entries drive material removal.
Vector combined_sensitivity(const SimplexMesh& mesh, const Vector& objective_sensitivity,
                            const Vector& cavity_sensitivity, double lambda_h, double lambda_vol);

/// Same, but the cavity field is divided by max(cavity_scale, its mean |.|),
/// so it fades once the field itself shrinks.
Vector combined_sensitivity(const SimplexMesh& mesh, const Vector& objective_sensitivity,
                            const Vector& cavity_sensitivity, double lambda_h, double lambda_vol,
                            double cavity_scale);

/// Relative spread (max - min) / |mean| of the objective over the last
/// `window` history rows (fewer when the history is shorter).
double objective_spread(const std::vector<HistoryRow>& history, int window);

/// Objective value and physics field for the given design.
PhysicsSolution evaluate_physics(const SimplexMesh& mesh, const Vector& chi, const PhysicsCase& physics,
                                 const SolveOptions& options, const Vector* guess);

/// Descent-convention element sensitivity of the objective: the change of the
/// objective when material is added, i.e. minus the physics topological
/// derivative.
Vector objective_sensitivity(const SimplexMesh& mesh, const Vector& field, const Vector& chi,
                             const PhysicsCase& physics);

const std::vector<int>& non_design_elements(const PhysicsCase& physics);

/// Runs the optimization loop: initialize; evaluate physics and the fictitious
/// field; stop on convergence; solve the adjoint; build sensitivities; evolve.
/// Sub-solver failures propagate with the iteration number prepended.
OptimizationState run(const OptimizationProblem& problem, const StopCriteria& stop,
                      const IterationObserver& observer = {});

} // namespace topopt
