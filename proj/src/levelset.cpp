#include "topopt/levelset.hpp"

#include "topopt/errors.hpp"

#include <algorithm>

namespace topopt {

LevelSetField LevelSetField::uniform(std::shared_ptr<const SimplexMesh> mesh, double value, double length) {
    LevelSetField f;
    f.values = Vector::Constant(static_cast<Eigen::Index>(mesh->num_nodes()), value);
    f.mesh = std::move(mesh);
    f.characteristic_length = length;
    return f;
}

void EvolutionParams::validate() const {
    if (!(regularization > 0.0)) throw InvalidArgument("regularization tau must be positive");
    if (!(proportionality > 0.0)) throw InvalidArgument("proportionality constant K must be positive");
    if (!(time_step > 0.0)) throw InvalidArgument("time step must be positive");
}

Vector nodal_characteristic(const Vector& phi) {
    return phi.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : 0.0; });
}

Vector characteristic(const SimplexMesh& mesh, const Vector& phi) {
    Vector chi(static_cast<Eigen::Index>(mesh.num_elements()));
    const double npe = mesh.nodes_per_element();
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        int inside = 0;
        for (int v : mesh.element(e)) inside += phi[v] >= 0.0 ? 1 : 0;
        chi[static_cast<Eigen::Index>(e)] = inside / npe;
    }
    return chi;
}

Vector characteristic(const LevelSetField& field) { return characteristic(*field.mesh, field.values); }

double material_volume(const SimplexMesh& mesh, const Vector& chi) {
    double v = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) v += chi[static_cast<Eigen::Index>(e)] * mesh.volume(e);
    return v;
}

Vector evolve_unclamped(const LevelSetField& field, const Vector& sensitivity, const EvolutionParams& params) {
    params.validate();
    const SimplexMesh& mesh = *field.mesh;
    if (sensitivity.size() != field.values.size()) throw InvalidArgument("sensitivity must be nodal");

    ScalarDiffusionProblem problem;
    // tau is dimensionless: the Laplacian is taken in coordinates scaled by L.
    const double l2 = field.characteristic_length * field.characteristic_length;
    problem.diffusion = Vector::Constant(static_cast<Eigen::Index>(mesh.num_elements()),
                                         params.proportionality * params.regularization * l2);
    problem.reaction = Vector::Constant(problem.diffusion.size(), 1.0 / params.time_step);
    problem.nodal_source = field.values / params.time_step - params.proportionality * sensitivity;
    problem.lumped_mass = true;
    if (!params.material_tags.empty()) {
        problem.dirichlet.push_back(DirichletCondition::constant(params.material_tags, 1.0));
    }
    const SparseSystem sys = assemble_scalar(mesh, problem);
    return solve(sys, {params.solver_tolerance, 0}, &field.values).solution;
}

void clamp_level_set(Vector& phi) { phi = phi.cwiseMax(-1.0).cwiseMin(1.0); }

LevelSetField evolve(const LevelSetField& field, const Vector& sensitivity, const EvolutionParams& params) {
    LevelSetField out = field;
    out.values = evolve_unclamped(field, sensitivity, params);
    clamp_level_set(out.values);
    return out;
}

} // namespace topopt
