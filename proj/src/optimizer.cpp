#include "topopt/optimizer.hpp"

#include "topopt/errors.hpp"
#include "topopt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace topopt {

void StopCriteria::validate() const {
    if (max_iterations < 0) throw InvalidArgument("max_iterations must be nonnegative");
    if (window < 1) throw InvalidArgument("convergence window must be >= 1");
    if (!(objective_tolerance > 0.0)) throw InvalidArgument("objective tolerance must be positive");
    if (!(volume_tolerance > 0.0)) throw InvalidArgument("volume tolerance must be positive");
    if (!(cavity_tolerance > 0.0)) throw InvalidArgument("cavity tolerance must be positive");
}

namespace {

Vector normalized_nodal(const SimplexMesh& mesh, const Vector& element_values) {
    Vector nodal = element_to_node(mesh, element_values);
    const double scale = mean_abs_nodal(mesh, nodal);
    if (scale > 0.0) nodal /= scale;
    return nodal;
}

// Nodes of non-design elements keep phi = 1.
std::vector<int> non_design_nodes(const SimplexMesh& mesh, const std::vector<int>& elements) {
    std::vector<int> nodes;
    for (int e : elements) {
        for (int v : mesh.element(static_cast<std::size_t>(e))) nodes.push_back(v);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    return nodes;
}

} // namespace

Vector combined_sensitivity(const SimplexMesh& mesh, const Vector& objective_sens, const Vector& cavity_sens,
                            double lambda_h, double lambda_vol) {
    return combined_sensitivity(mesh, objective_sens, cavity_sens, lambda_h, lambda_vol, 0.0);
}

Vector combined_sensitivity(const SimplexMesh& mesh, const Vector& objective_sens, const Vector& cavity_sens,
                            double lambda_h, double lambda_vol, double cavity_scale) {
    Vector s = normalized_nodal(mesh, objective_sens);
    if (lambda_h != 0.0 && cavity_sens.size() > 0) {
        Vector c = element_to_node(mesh, cavity_sens);
        const double scale = std::max(cavity_scale, mean_abs_nodal(mesh, c));
        if (scale > 0.0) s += (lambda_h / scale) * c;
    }
    s.array() += lambda_vol;
    return s;
}

double objective_spread(const std::vector<HistoryRow>& history, int window) {
    const auto n = std::min(history.size(), static_cast<std::size_t>(std::max(window, 1)));
    if (n == 0) return std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double sum = 0.0;
    for (auto it = history.end() - static_cast<std::ptrdiff_t>(n); it != history.end(); ++it) {
        lo = std::min(lo, it->objective);
        hi = std::max(hi, it->objective);
        sum += it->objective;
    }
    const double mean = std::abs(sum / static_cast<double>(n));
    if (hi - lo == 0.0) return 0.0;
    return (hi - lo) / std::max(mean, std::numeric_limits<double>::min());
}

const std::vector<int>& non_design_elements(const PhysicsCase& physics) {
    static const std::vector<int> none;
    if (const auto* c = std::get_if<ComplianceCase>(&physics)) return c->non_design_elements;
    if (const auto* t = std::get_if<ThermalCase>(&physics)) return t->non_design_elements;
    return none;
}

PhysicsSolution evaluate_physics(const SimplexMesh& mesh, const Vector& chi, const PhysicsCase& physics,
                                 const SolveOptions& options, const Vector* guess) {
    if (const auto* c = std::get_if<ComplianceCase>(&physics)) return solve_compliance(mesh, chi, *c, options, guess);
    if (const auto* t = std::get_if<ThermalCase>(&physics)) return solve_thermal(mesh, chi, *t, options, guess);
    PhysicsSolution none;
    none.field = Vector::Zero(static_cast<Eigen::Index>(mesh.num_nodes()));
    return none;
}

Vector objective_sensitivity(const SimplexMesh& mesh, const Vector& field, const Vector& chi,
                             const PhysicsCase& physics) {
    if (const auto* c = std::get_if<ComplianceCase>(&physics))
        return -compliance_topological_derivative(mesh, field, chi, *c);
    if (const auto* t = std::get_if<ThermalCase>(&physics))
        return -thermal_topological_derivative(mesh, field, chi, *t);
    return Vector::Zero(static_cast<Eigen::Index>(mesh.num_elements()));
}

OptimizationState run(const OptimizationProblem& problem, const StopCriteria& stop, const IterationObserver& observer) {
    stop.validate();
    problem.evolution.validate();
    if (!problem.mesh) throw InvalidArgument("optimization problem has no mesh");
    if (problem.cavity_enabled) problem.cavity.validate();
    const SimplexMesh& mesh = *problem.mesh;
    const double domain = mesh.total_volume();
    if (!(problem.volume_limit > 0.0)) throw InvalidArgument("volume limit must be positive");

    const std::vector<int>& fixed_elements = non_design_elements(problem.physics);
    const std::vector<int> fixed_nodes = non_design_nodes(mesh, fixed_elements);
    auto pin_nodes = [&](Vector& phi) {
        for (int v : fixed_nodes) phi[v] = 1.0;
    };
    auto design_chi = [&](const Vector& phi) { return pin_non_design(characteristic(mesh, phi), fixed_elements); };

    OptimizationState state;
    state.level_set.mesh = problem.mesh;
    state.level_set.characteristic_length = problem.cavity.characteristic_length;
    state.level_set.values = problem.initial_phi.size() ? problem.initial_phi
                                                         : Vector::Ones(static_cast<Eigen::Index>(mesh.num_nodes()));
    if (static_cast<std::size_t>(state.level_set.values.size()) != mesh.num_nodes())
        throw InvalidArgument("initial level set must be nodal");
    clamp_level_set(state.level_set.values);
    pin_nodes(state.level_set.values);

    const bool track_cavity = !problem.cavity.exit_tags.empty();
    for (int k = 0;; ++k) {
        state.iteration = k;
        try {
            // Step 2: physics and fictitious field.
            state.chi = design_chi(state.level_set.values);
            const Vector* guess = state.physics_field.size() ? &state.physics_field : nullptr;
            PhysicsSolution phys = evaluate_physics(mesh, state.chi, problem.physics, problem.solver, guess);
            state.physics_field = std::move(phys.field);
            double cavity_value = 0.0;
            if (track_cavity) {
                const Vector* pg = state.p.size() ? &state.p : nullptr;
                state.p = solve_fictitious(mesh, state.chi, problem.cavity, problem.solver, pg);
                cavity_value = constraint_value(mesh, state.p);
            }
            const double volume = material_volume(mesh, state.chi);
            state.history.push_back({k, phys.objective, volume / domain, volume - problem.volume_limit, cavity_value,
                                     state.lambda_vol, state.lambda_h});
            if (observer) observer(state);

            // Step 3: convergence.
            const bool volume_ok = volume - problem.volume_limit <= stop.volume_tolerance * domain;
            // Thin cut walls leak, so a small J_h alone can hide sealed voids;
            // the flood fill has the final say.
            const bool cavity_ok = !problem.cavity_enabled ||
                                   (cavity_value / domain <= stop.cavity_tolerance &&
                                    label_voids(mesh, state.chi, problem.cavity.exit_tags).enclosed.empty());
            if (state.history.size() >= 2 && volume_ok && cavity_ok &&
                objective_spread(state.history, stop.window) < stop.objective_tolerance) {
                state.converged = true;
                break;
            }
            if (k >= stop.max_iterations) break;

            // Step 4: adjoint of the fictitious field.
            Vector cavity_sens;
            if (problem.cavity_enabled) {
                const Vector* ag = state.p_adjoint.size() ? &state.p_adjoint : nullptr;
                state.p_adjoint = solve_adjoint(mesh, state.chi, state.p, problem.cavity, problem.solver, ag);
                cavity_sens = topological_derivative(mesh, state.chi, state.p, state.p_adjoint, problem.cavity);
                for (int e : fixed_elements) cavity_sens[e] = 0.0;
                state.cavity_sensitivity = cavity_sens;
                state.cavity_scale =
                    std::max(state.cavity_scale, mean_abs_nodal(mesh, element_to_node(mesh, cavity_sens)));
                state.lambda_h = std::min(problem.multipliers.cavity_cap,
                                          state.lambda_h + problem.multipliers.cavity_rate * cavity_value / domain);
            }

            // Step 5: sensitivities, split into the objective part and the
            // cavity part so the latter can be damped below.
            const Vector obj_sens = objective_sensitivity(mesh, state.physics_field, state.chi, problem.physics);
            const Vector obj_drive = combined_sensitivity(mesh, obj_sens, Vector(), 0.0, 0.0);
            const Vector drive = combined_sensitivity(mesh, obj_sens, cavity_sens, state.lambda_h, 0.0,
                                                      state.cavity_scale);

            // Step 6: evolve. The update is affine in the drive, so three solves
            // give the family base + s * cavity + lambda_vol * slope.
            LevelSetField& ls = state.level_set;
            const Vector base = evolve_unclamped(ls, obj_drive, problem.evolution);
            const Vector with_cavity = evolve_unclamped(ls, drive, problem.evolution);
            const Vector shifted = evolve_unclamped(ls, (obj_drive.array() + 1.0).matrix(), problem.evolution);
            const Vector cavity_part = with_cavity - base;
            const Vector slope = shifted - base;
            const double target = std::max(problem.volume_limit, volume * (1.0 - problem.multipliers.volume_step));
            double damping = 1.0;
            auto trial = [&](double lambda) {
                Vector phi = base + damping * cavity_part + lambda * slope;
                clamp_level_set(phi);
                pin_nodes(phi);
                return phi;
            };
            auto trial_volume = [&](double lambda) { return material_volume(mesh, design_chi(trial(lambda))); };

            // The cavity term may not remove more than the per-iteration cap.
            if (cavity_part.size() && trial_volume(0.0) < target) {
                double lo = 0.0;
                double hi = 1.0;
                for (int it = 0; it < 40; ++it) {
                    damping = 0.5 * (lo + hi);
                    (trial_volume(0.0) < target ? hi : lo) = damping;
                }
                damping = lo;
            }

            double lambda = 0.0;
            if (trial_volume(0.0) > target) {
                double lo = 0.0;
                double hi = std::max(1.0, 2.0 * state.lambda_vol);
                while (trial_volume(hi) > target && hi < 1e8) {
                    lo = hi;
                    hi *= 2.0;
                }
                for (int it = 0; it < 60 && hi - lo > 1e-10 * hi; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (trial_volume(mid) > target ? lo : hi) = mid;
                }
                lambda = hi;
            }
            state.cavity_damping = damping;
            state.lambda_vol = lambda;
            ls.values = trial(lambda);
        } catch (const SolverError& err) {
            throw SolverError("iteration " + std::to_string(k) + ": " + err.what(), err.residual(), err.iterations());
        } catch (const Error& err) {
            throw Error("iteration " + std::to_string(k) + ": " + err.what());
        }
    }
    return state;
}

} // namespace topopt
