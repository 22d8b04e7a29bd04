#pragma once

// Fictitious "powder temperature" model for the no-enclosed-cavity constraint.
//
// The field p solves a steady diffusion problem with a unit-seeking source in
// the void, fast diffusion in the void and almost none in the material, and
// p = 0 on the boundary where powder can exit. Voids connected to the exit
// read p ~ 0; voids sealed off by material read p ~ 1.

#include "topopt/fem.hpp"

#include <string>
#include <vector>

namespace topopt {

struct CavityModelParams {
    double void_diffusion = 1e2;      // a_bar_p
    double material_diffusion = 1e-5; // epsilon_p
    double characteristic_length = 1.0;
    std::vector<std::string> exit_tags; // Gamma_p
    double heaviside_threshold = 1e-9;

    /// Throws InvalidArgument naming the offending field.
    void validate() const;
    bool operator==(const CavityModelParams&) const = default;
};

struct FictitiousField {
    Vector p;           // nodal state
    Vector p_adjoint;   // nodal adjoint
    double constraint = 0.0; // J_h
    Vector sensitivity; // per-element topological derivative
};

/// ((a_bar - eps)(1 - chi) + eps) L^2
double diffusion_coefficient(double chi, const CavityModelParams& params);

/// A_p(chi) of the topological derivative, for dim 2 or 3.
double topological_coefficient(double chi, int dim, const CavityModelParams& params);

/// -div(a_p grad p) + (1 - chi)(p - 1) = 0, p = 0 on the exit tags, zero flux
/// elsewhere. `guess` is an optional nodal starting vector.
Vector solve_fictitious(const SimplexMesh& mesh, const Vector& chi, const CavityModelParams& params,
                        const SolveOptions& options = {}, const Vector* guess = nullptr);

/// J_h = integral of max(p, 0), nodal (lumped) quadrature.
double constraint_value(const SimplexMesh& mesh, const Vector& p);

/// Same operator as the state, source -H(p), p_adj = 0 on the exit tags.
Vector solve_adjoint(const SimplexMesh& mesh, const Vector& chi, const Vector& p,
                     const CavityModelParams& params, const SolveOptions& options = {},
                     const Vector* guess = nullptr);

/// Element-wise A_p(chi) grad p . grad p_adj - (1 - chi)(p - 1) p_adj.
/// Positive values favour removing material.
Vector topological_derivative(const SimplexMesh& mesh, const Vector& chi, const Vector& p,
                              const Vector& p_adjoint, const CavityModelParams& params);

/// Load vectors of the shared bilinear form: state source (1 - chi) and
/// adjoint source -H(p), both with lumped quadrature.
Vector fictitious_state_load(const SimplexMesh& mesh, const Vector& chi);
Vector fictitious_adjoint_load(const SimplexMesh& mesh, const Vector& p, const CavityModelParams& params);

/// Solve state, constraint, adjoint and sensitivity in one go.
FictitiousField evaluate_cavity_constraint(const SimplexMesh& mesh, const Vector& chi,
                                           const CavityModelParams& params, const SolveOptions& options = {});

} // namespace topopt
