#pragma once

#include "topopt/fem.hpp"

#include <string>
#include <vector>

namespace topopt {

/// Minimum mean compliance: fixed on `fixed_tags`, tractions on their tags.
struct ComplianceCase {
    ElasticMaterial material{210e9, 0.3};
    std::vector<TractionLoad> tractions;
    std::vector<std::string> fixed_tags;
    double ersatz = 1e-3;              // void stiffness relative to material
    std::vector<int> non_design_elements; // chi pinned to 1, sensitivity zeroed

    void validate() const;
};

/// Steady heat conduction with uniform volumetric source and a cold boundary.
struct ThermalCase {
    double material_conductivity = 26.0;
    double void_conductivity = 2.23e-2;
    double heat_source = 1.0;          // Q
    std::vector<std::string> temperature_tags;
    double boundary_temperature = 0.0; // T_bar
    std::vector<int> non_design_elements;

    void validate() const;
};

struct PhysicsSolution {
    Vector field;  // displacement (dim per node) or temperature
    double objective = 0.0;
    int iterations = 0;
};

/// Copy of chi with the case's non-design elements set to 1.
Vector pin_non_design(const Vector& chi, const std::vector<int>& non_design_elements);

/// Elastic tensor scale per element: ersatz + (1 - ersatz) chi.
Vector compliance_stiffness_scale(const Vector& chi, const ComplianceCase& c);

PhysicsSolution solve_compliance(const SimplexMesh& mesh, const Vector& chi, const ComplianceCase& c,
                                 const SolveOptions& options = {}, const Vector* guess = nullptr);

/// eps(u) : A chi : eps(u) per element, with the three-dimensional
/// point-inclusion tensor A (2D strains are embedded with eps_zz = 0).
Vector compliance_topological_derivative(const SimplexMesh& mesh, const Vector& displacement, const Vector& chi,
                                         const ComplianceCase& c);

/// eps : A : eps for a single symmetric strain tensor (3x3).
double compliance_td_density(const Eigen::Matrix3d& strain, const ElasticMaterial& material);

/// Leading factor 3(1 - nu) / (2 (1 + nu)(7 - 5 nu)) of A.
double compliance_td_prefactor(double poisson_ratio);

/// kappa_void + (kappa_material - kappa_void) chi
Vector thermal_conductivity(const Vector& chi, const ThermalCase& c);

PhysicsSolution solve_thermal(const SimplexMesh& mesh, const Vector& chi, const ThermalCase& c,
                              const SolveOptions& options = {}, const Vector* guess = nullptr);

/// (2/3) kappa grad u . grad u per element, kappa interpolated.
Vector thermal_topological_derivative(const SimplexMesh& mesh, const Vector& temperature, const Vector& chi,
                                      const ThermalCase& c);

} // namespace topopt
