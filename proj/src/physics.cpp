#include "topopt/physics.hpp"

#include "topopt/errors.hpp"

namespace topopt {

void ComplianceCase::validate() const {
    material.validate();
    if (!(ersatz > 0.0 && ersatz < 1.0)) throw InvalidArgument("ersatz factor must lie in (0, 1)");
    if (fixed_tags.empty()) throw InvalidArgument("compliance case needs fixed tags");
}

void ThermalCase::validate() const {
    if (!(void_conductivity > 0.0)) throw InvalidArgument("void conductivity must be positive");
    if (!(material_conductivity > void_conductivity))
        throw InvalidArgument("material conductivity must exceed void conductivity");
    if (!(heat_source >= 0.0)) throw InvalidArgument("heat source must be nonnegative");
    if (temperature_tags.empty()) throw InvalidArgument("thermal case needs temperature tags");
}

Vector pin_non_design(const Vector& chi, const std::vector<int>& non_design_elements) {
    Vector out = chi;
    for (int e : non_design_elements) out[e] = 1.0;
    return out;
}

Vector compliance_stiffness_scale(const Vector& chi, const ComplianceCase& c) {
    return (c.ersatz + (1.0 - c.ersatz) * chi.array()).matrix();
}

PhysicsSolution solve_compliance(const SimplexMesh& mesh, const Vector& chi, const ComplianceCase& c,
                                 const SolveOptions& options, const Vector* guess) {
    c.validate();
    const Vector pinned = pin_non_design(chi, c.non_design_elements);
    ElasticityProblem prob;
    prob.material = c.material;
    prob.stiffness_scale = compliance_stiffness_scale(pinned, c);
    prob.tractions = c.tractions;
    for (int k = 0; k < mesh.dim(); ++k) prob.dirichlet.push_back(DirichletCondition::constant(c.fixed_tags, 0.0, k));
    const SparseSystem sys = assemble_elasticity(mesh, prob);
    SolveResult r;
    try {
        r = solve(sys, options, guess);
    } catch (const SolverError& err) {
        if (pinned.maxCoeff() <= 0.0) {
            throw SolverError(std::string("elasticity solve failed on an all-void design: ") + err.what(),
                              err.residual(), err.iterations());
        }
        throw;
    }
    PhysicsSolution s;
    s.objective = sys.full_load.dot(r.solution);
    s.field = std::move(r.solution);
    s.iterations = r.iterations;
    return s;
}

double compliance_td_prefactor(double nu) { return 3.0 * (1.0 - nu) / (2.0 * (1.0 + nu) * (7.0 - 5.0 * nu)); }

double compliance_td_density(const Eigen::Matrix3d& strain, const ElasticMaterial& m) {
    const double nu = m.poisson_ratio;
    const double e = m.youngs_modulus;
    const double bulk_term = -(1.0 - 14.0 * nu + 15.0 * nu * nu) * e / ((1.0 - 2.0 * nu) * (1.0 - 2.0 * nu));
    const double tr = strain.trace();
    // (d_ik d_jl + d_il d_jk) eps_ij eps_kl = 2 eps:eps for symmetric eps.
    return compliance_td_prefactor(nu) * (bulk_term * tr * tr + 5.0 * e * 2.0 * strain.squaredNorm());
}

Vector compliance_topological_derivative(const SimplexMesh& mesh, const Vector& u, const Vector& chi,
                                         const ComplianceCase& c) {
    Vector td(static_cast<Eigen::Index>(mesh.num_elements()));
    const Vector pinned = pin_non_design(chi, c.non_design_elements);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto ei = static_cast<Eigen::Index>(e);
        td[ei] = pinned[ei] * compliance_td_density(element_strain(mesh, u, e), c.material);
    }
    for (int e : c.non_design_elements) td[e] = 0.0;
    return td;
}

Vector thermal_conductivity(const Vector& chi, const ThermalCase& c) {
    return (c.void_conductivity + (c.material_conductivity - c.void_conductivity) * chi.array()).matrix();
}

PhysicsSolution solve_thermal(const SimplexMesh& mesh, const Vector& chi, const ThermalCase& c,
                              const SolveOptions& options, const Vector* guess) {
    c.validate();
    const Vector pinned = pin_non_design(chi, c.non_design_elements);
    ScalarDiffusionProblem prob;
    prob.diffusion = thermal_conductivity(pinned, c);
    prob.source = Vector::Constant(pinned.size(), c.heat_source);
    prob.dirichlet.push_back(DirichletCondition::constant(c.temperature_tags, c.boundary_temperature));
    const SparseSystem sys = assemble_scalar(mesh, prob);
    SolveResult r = solve(sys, options, guess);
    PhysicsSolution s;
    s.objective = sys.full_load.dot(r.solution);
    s.field = std::move(r.solution);
    s.iterations = r.iterations;
    return s;
}

Vector thermal_topological_derivative(const SimplexMesh& mesh, const Vector& t, const Vector& chi, const ThermalCase& c) {
    const Vector kappa = thermal_conductivity(pin_non_design(chi, c.non_design_elements), c);
    Vector td(static_cast<Eigen::Index>(mesh.num_elements()));
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const Point g = element_gradient(mesh, t, e);
        td[static_cast<Eigen::Index>(e)] =
            2.0 / 3.0 * kappa[static_cast<Eigen::Index>(e)] * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
    }
    for (int e : c.non_design_elements) td[e] = 0.0;
    return td;
}

} // namespace topopt
