#include "topopt/cavity.hpp"

#include "topopt/errors.hpp"

#include <algorithm>

namespace topopt {

void CavityModelParams::validate() const {
    if (!(material_diffusion > 0.0)) throw InvalidArgument("epsilon_p must be positive");
    if (!(void_diffusion > material_diffusion)) throw InvalidArgument("a_p must exceed epsilon_p");
    if (!(characteristic_length > 0.0)) throw InvalidArgument("characteristic length must be positive");
    if (exit_tags.empty()) throw InvalidArgument("exit tags (Gamma_p) must not be empty");
    if (!(heaviside_threshold >= 0.0)) throw InvalidArgument("heaviside threshold must be nonnegative");
}

double diffusion_coefficient(double chi, const CavityModelParams& params) {
    const double l2 = params.characteristic_length * params.characteristic_length;
    return ((params.void_diffusion - params.material_diffusion) * (1.0 - chi) + params.material_diffusion) * l2;
}

double topological_coefficient(double chi, int dim, const CavityModelParams& params) {
    const double a = params.void_diffusion;
    const double eps = params.material_diffusion;
    const double l2 = params.characteristic_length * params.characteristic_length;
    if (dim == 2) {
        return 2.0 * a * (eps - a) / (a + eps) * l2 * (1.0 - chi) - 2.0 * eps * (a - eps) / (eps + a) * l2 * chi;
    }
    if (dim == 3) {
        return 3.0 * a * (eps - a) / (2.0 * a + eps) * l2 * (1.0 - chi) -
               3.0 * eps * (a - eps) / (2.0 * eps + a) * l2 * chi;
    }
    throw InvalidArgument("topological coefficient needs dim 2 or 3");
}

namespace {

ScalarDiffusionProblem fictitious_operator(const SimplexMesh& mesh, const Vector& chi, const CavityModelParams& params) {
    params.validate();
    if (static_cast<std::size_t>(chi.size()) != mesh.num_elements())
        throw InvalidArgument("chi must be given per element");
    for (const auto& t : params.exit_tags) {
        if (!mesh.has_tag(t)) throw ConfigurationError("exit tag '" + t + "' is not defined on the mesh");
    }
    if (mesh.facets_with_tags(params.exit_tags).empty())
        throw ConfigurationError("exit tags select no boundary facets");
    ScalarDiffusionProblem prob;
    prob.diffusion = chi.unaryExpr([&](double c) { return diffusion_coefficient(c, params); });
    prob.reaction = (1.0 - chi.array()).matrix();
    prob.lumped_mass = true;
    prob.dirichlet.push_back(DirichletCondition::constant(params.exit_tags, 0.0));
    return prob;
}

} // namespace

Vector fictitious_state_load(const SimplexMesh& mesh, const Vector& chi) {
    Vector load = Vector::Zero(static_cast<Eigen::Index>(mesh.num_nodes()));
    const double npe = mesh.nodes_per_element();
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double share = (1.0 - chi[static_cast<Eigen::Index>(e)]) * mesh.volume(e) / npe;
        for (int v : mesh.element(e)) load[v] += share;
    }
    return load;
}

Vector fictitious_adjoint_load(const SimplexMesh& mesh, const Vector& p, const CavityModelParams& params) {
    const auto& m = mesh.lumped_mass();
    Vector load(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        load[i] = p[i] >= params.heaviside_threshold ? -m[static_cast<std::size_t>(i)] : 0.0;
    }
    return load;
}

Vector solve_fictitious(const SimplexMesh& mesh, const Vector& chi, const CavityModelParams& params,
                        const SolveOptions& options, const Vector* guess) {
    ScalarDiffusionProblem prob = fictitious_operator(mesh, chi, params);
    // (1 - chi)(p - 1): the constant part moves to the right-hand side.
    prob.source = prob.reaction;
    return solve(assemble_scalar(mesh, prob), options, guess).solution;
}

double constraint_value(const SimplexMesh& mesh, const Vector& p) {
    const auto& m = mesh.lumped_mass();
    double j = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) j += m[i] * std::max(p[static_cast<Eigen::Index>(i)], 0.0);
    return j;
}

Vector solve_adjoint(const SimplexMesh& mesh, const Vector& chi, const Vector& p, const CavityModelParams& params,
                     const SolveOptions& options, const Vector* guess) {
    if (static_cast<std::size_t>(p.size()) != mesh.num_nodes()) throw InvalidArgument("p must be nodal");
    ScalarDiffusionProblem prob = fictitious_operator(mesh, chi, params);
    const auto& m = mesh.lumped_mass();
    prob.nodal_source = fictitious_adjoint_load(mesh, p, params);
    for (Eigen::Index i = 0; i < p.size(); ++i) prob.nodal_source[i] /= m[static_cast<std::size_t>(i)];
    return solve(assemble_scalar(mesh, prob), options, guess).solution;
}

Vector topological_derivative(const SimplexMesh& mesh, const Vector& chi, const Vector& p, const Vector& p_adjoint,
                              const CavityModelParams& params) {
    const int dim = mesh.dim();
    Vector td(static_cast<Eigen::Index>(mesh.num_elements()));
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto ei = static_cast<Eigen::Index>(e);
        const double c = chi[ei];
        const Point gp = element_gradient(mesh, p, e);
        const Point ga = element_gradient(mesh, p_adjoint, e);
        const double dot = gp[0] * ga[0] + gp[1] * ga[1] + gp[2] * ga[2];
        const double pm = element_mean(mesh, p, e);
        const double am = element_mean(mesh, p_adjoint, e);
        td[ei] = topological_coefficient(c, dim, params) * dot - (1.0 - c) * (pm - 1.0) * am;
    }
    return td;
}

FictitiousField evaluate_cavity_constraint(const SimplexMesh& mesh, const Vector& chi, const CavityModelParams& params,
                                           const SolveOptions& options) {
    FictitiousField f;
    f.p = solve_fictitious(mesh, chi, params, options);
    f.constraint = constraint_value(mesh, f.p);
    f.p_adjoint = solve_adjoint(mesh, chi, f.p, params, options);
    f.sensitivity = topological_derivative(mesh, chi, f.p, f.p_adjoint, params);
    return f;
}

} // namespace topopt
