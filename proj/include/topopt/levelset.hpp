#pragma once

#include "topopt/fem.hpp"

#include <memory>
#include <string>
#include <vector>

namespace topopt {

/// Nodal design variable phi in [-1, 1]; material where phi >= 0.
struct LevelSetField {
    std::shared_ptr<const SimplexMesh> mesh;
    Vector values;
    double characteristic_length = 1.0;

    static LevelSetField uniform(std::shared_ptr<const SimplexMesh> mesh, double value, double length = 1.0);
};

struct EvolutionParams {
    double regularization = 1e-4;  // tau
    double proportionality = 1.0;  // K
    double time_step = 1.0;        // dt
    std::vector<std::string> material_tags; // phi = 1 held on these facets
    double solver_tolerance = 1e-12;

    void validate() const;
    bool operator==(const EvolutionParams&) const = default;
};

/// Pointwise indicator: 1 where phi >= 0, else 0.
Vector nodal_characteristic(const Vector& phi);

/// Per-element mean of the nodal indicator; fractional only on cut elements.
Vector characteristic(const LevelSetField& field);
Vector characteristic(const SimplexMesh& mesh, const Vector& phi);

/// Material measure of an element characteristic field.
double material_volume(const SimplexMesh& mesh, const Vector& chi);

/// One semi-implicit step of d(phi)/dt = -K (J' - tau L^2 lap phi): implicit
/// diffusion with lumped mass, zero flux except phi = 1 on the material tags.
/// No clamping.
Vector evolve_unclamped(const LevelSetField& field, const Vector& sensitivity, const EvolutionParams& params);

/// evolve_unclamped followed by clamping to [-1, 1].
LevelSetField evolve(const LevelSetField& field, const Vector& sensitivity, const EvolutionParams& params);

void clamp_level_set(Vector& phi);

} // namespace topopt
