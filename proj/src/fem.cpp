#include "topopt/fem.hpp"

#include "topopt/errors.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <cmath>
#include <sstream>

namespace topopt {

namespace {

using Triplet = Eigen::Triplet<double>;

void check_tags(const SimplexMesh& mesh, const std::vector<std::string>& tags, const char* what) {
    for (const auto& t : tags) {
        if (!mesh.has_tag(t)) throw ConfigurationError(std::string(what) + " references unknown tag '" + t + "'");
    }
}

// Builds the reduced system from a full matrix/load and the Dirichlet data.
SparseSystem eliminate(const SimplexMesh& mesh, int components, std::vector<Triplet>& triplets,
                       Vector load, const std::vector<DirichletCondition>& dirichlet) {
    const auto n = static_cast<Eigen::Index>(mesh.num_nodes() * static_cast<std::size_t>(components));
    SparseMatrix full(n, n);
    full.setFromTriplets(triplets.begin(), triplets.end());
    triplets.clear();
    triplets.shrink_to_fit();

    SparseSystem sys;
    sys.fixed_values = Vector::Zero(n);
    std::vector<bool> fixed(static_cast<std::size_t>(n), false);
    for (const auto& bc : dirichlet) {
        check_tags(mesh, bc.tags, "Dirichlet condition");
        if (bc.component < 0 || bc.component >= components)
            throw ConfigurationError("Dirichlet component out of range");
        for (int node : mesh.nodes_with_tags(bc.tags)) {
            const int dof = node * components + bc.component;
            fixed[static_cast<std::size_t>(dof)] = true;
            sys.fixed_values[dof] = bc.value ? bc.value(mesh.node(static_cast<std::size_t>(node))) : 0.0;
        }
    }

    sys.reduced_index.assign(static_cast<std::size_t>(n), -1);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!fixed[static_cast<std::size_t>(i)]) {
            sys.reduced_index[static_cast<std::size_t>(i)] = static_cast<int>(sys.free_dofs.size());
            sys.free_dofs.push_back(static_cast<int>(i));
        }
    }
    const auto nf = static_cast<Eigen::Index>(sys.free_dofs.size());
    sys.rhs.resize(nf);
    std::vector<Triplet> reduced;
    reduced.reserve(static_cast<std::size_t>(full.nonZeros()));
    for (Eigen::Index r = 0; r < nf; ++r) {
        const int i = sys.free_dofs[static_cast<std::size_t>(r)];
        double b = load[i];
        for (SparseMatrix::InnerIterator it(full, i); it; ++it) {
            const int ri = sys.reduced_index[static_cast<std::size_t>(it.col())];
            if (ri >= 0) {
                reduced.emplace_back(static_cast<int>(r), ri, it.value());
            } else {
                b -= it.value() * sys.fixed_values[it.col()];
            }
        }
        sys.rhs[r] = b;
    }
    sys.matrix.resize(nf, nf);
    sys.matrix.setFromTriplets(reduced.begin(), reduced.end());
    sys.full_load = std::move(load);
    return sys;
}

} // namespace

DirichletCondition DirichletCondition::constant(std::vector<std::string> tags, double v, int component) {
    return {std::move(tags), component, [v](const Point&) { return v; }};
}

Vector SparseSystem::expand(const Vector& reduced) const {
    Vector full = fixed_values;
    for (std::size_t r = 0; r < free_dofs.size(); ++r) full[free_dofs[r]] = reduced[static_cast<Eigen::Index>(r)];
    return full;
}

Vector SparseSystem::restrict_to_free(const Vector& full) const {
    Vector out(static_cast<Eigen::Index>(free_dofs.size()));
    for (std::size_t r = 0; r < free_dofs.size(); ++r) out[static_cast<Eigen::Index>(r)] = full[free_dofs[r]];
    return out;
}

void ElasticMaterial::validate() const {
    if (!(youngs_modulus > 0.0)) throw InvalidArgument("Young's modulus must be positive");
    if (!(poisson_ratio > -1.0 && poisson_ratio < 0.5)) throw InvalidArgument("Poisson ratio must lie in (-1, 0.5)");
}

SparseSystem assemble_scalar(const SimplexMesh& mesh, const ScalarDiffusionProblem& problem) {
    const std::size_t ne = mesh.num_elements();
    const int npe = mesh.nodes_per_element();
    const auto nn = static_cast<Eigen::Index>(mesh.num_nodes());
    if (static_cast<std::size_t>(problem.diffusion.size()) != ne)
        throw InvalidArgument("diffusion coefficient must be given on every element");
    auto optional_size_ok = [&](const Vector& v, std::size_t expected) {
        return v.size() == 0 || static_cast<std::size_t>(v.size()) == expected;
    };
    if (!optional_size_ok(problem.reaction, ne) || !optional_size_ok(problem.source, ne))
        throw InvalidArgument("reaction/source must be empty or given on every element");
    if (!optional_size_ok(problem.nodal_source, mesh.num_nodes()))
        throw InvalidArgument("nodal source must be empty or given on every node");
    for (std::size_t e = 0; e < ne; ++e) {
        if (!(problem.diffusion[static_cast<Eigen::Index>(e)] > 0.0))
            throw InvalidArgument("diffusion coefficient must be positive on every element");
    }

    const double denom = static_cast<double>((npe) * (npe + 1));
    std::vector<Triplet> triplets;
    triplets.reserve(ne * static_cast<std::size_t>(npe * npe));
    Vector load = Vector::Zero(nn);
    for (std::size_t e = 0; e < ne; ++e) {
        const auto ei = static_cast<Eigen::Index>(e);
        const double vol = mesh.volume(e);
        const double a = problem.diffusion[ei];
        const double c = problem.reaction.size() ? problem.reaction[ei] : 0.0;
        const double f = problem.source.size() ? problem.source[ei] : 0.0;
        auto el = mesh.element(e);
        for (int i = 0; i < npe; ++i) {
            const Point& gi = mesh.gradient(e, i);
            for (int j = 0; j < npe; ++j) {
                const Point& gj = mesh.gradient(e, j);
                double k = a * vol * (gi[0] * gj[0] + gi[1] * gj[1] + gi[2] * gj[2]);
                if (problem.lumped_mass) {
                    if (i == j) k += c * vol / npe;
                } else {
                    k += c * vol * (i == j ? 2.0 : 1.0) / denom;
                }
                triplets.emplace_back(el[i], el[j], k);
            }
            load[el[i]] += f * vol / npe;
            if (problem.nodal_source.size()) {
                if (problem.lumped_mass) {
                    load[el[i]] += problem.nodal_source[el[i]] * vol / npe;
                } else {
                    for (int j = 0; j < npe; ++j)
                        load[el[i]] += problem.nodal_source[el[j]] * vol * (i == j ? 2.0 : 1.0) / denom;
                }
            }
        }
    }
    return eliminate(mesh, 1, triplets, std::move(load), problem.dirichlet);
}

Eigen::MatrixXd elastic_voigt_matrix(int dim, const ElasticMaterial& m) {
    m.validate();
    const double e = m.youngs_modulus;
    const double nu = m.poisson_ratio;
    const double lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    const double mu = e / (2.0 * (1.0 + nu));
    if (dim == 2) {
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
        d(0, 0) = d(1, 1) = lambda + 2.0 * mu;
        d(0, 1) = d(1, 0) = lambda;
        d(2, 2) = mu;
        return d;
    }
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(6, 6);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) d(i, j) = lambda;
        d(i, i) = lambda + 2.0 * mu;
        d(i + 3, i + 3) = mu;
    }
    return d;
}

namespace {

Eigen::MatrixXd strain_displacement(const SimplexMesh& mesh, std::size_t e) {
    const int dim = mesh.dim();
    const int npe = mesh.nodes_per_element();
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(dim == 2 ? 3 : 6, npe * dim);
    for (int a = 0; a < npe; ++a) {
        const Point& g = mesh.gradient(e, a);
        if (dim == 2) {
            b(0, 2 * a) = g[0];
            b(1, 2 * a + 1) = g[1];
            b(2, 2 * a) = g[1];
            b(2, 2 * a + 1) = g[0];
        } else {
            const int c = 3 * a;
            b(0, c) = g[0];
            b(1, c + 1) = g[1];
            b(2, c + 2) = g[2];
            b(3, c + 1) = g[2];
            b(3, c + 2) = g[1];
            b(4, c) = g[2];
            b(4, c + 2) = g[0];
            b(5, c) = g[1];
            b(5, c + 1) = g[0];
        }
    }
    return b;
}

} // namespace

SparseSystem assemble_elasticity(const SimplexMesh& mesh, const ElasticityProblem& problem) {
    const int dim = mesh.dim();
    const int npe = mesh.nodes_per_element();
    const std::size_t ne = mesh.num_elements();
    const Eigen::MatrixXd d = elastic_voigt_matrix(dim, problem.material);
    if (problem.stiffness_scale.size() && static_cast<std::size_t>(problem.stiffness_scale.size()) != ne)
        throw InvalidArgument("stiffness scale must be empty or given on every element");

    const int edofs = npe * dim;
    std::vector<Triplet> triplets;
    triplets.reserve(ne * static_cast<std::size_t>(edofs * edofs));
    for (std::size_t e = 0; e < ne; ++e) {
        const double scale = problem.stiffness_scale.size() ? problem.stiffness_scale[static_cast<Eigen::Index>(e)] : 1.0;
        if (!(scale > 0.0)) throw InvalidArgument("interpolated stiffness must be positive");
        const Eigen::MatrixXd b = strain_displacement(mesh, e);
        const Eigen::MatrixXd ke = (scale * mesh.volume(e)) * (b.transpose() * d * b);
        auto el = mesh.element(e);
        for (int a = 0; a < npe; ++a) {
            for (int i = 0; i < dim; ++i) {
                const int row = el[a] * dim + i;
                for (int bn = 0; bn < npe; ++bn) {
                    for (int j = 0; j < dim; ++j) triplets.emplace_back(row, el[bn] * dim + j, ke(a * dim + i, bn * dim + j));
                }
            }
        }
    }

    Vector load = Vector::Zero(static_cast<Eigen::Index>(mesh.num_nodes()) * dim);
    for (const auto& t : problem.tractions) {
        check_tags(mesh, t.tags, "traction load");
        for (int f : mesh.facets_with_tags(t.tags)) {
            const auto& facet = mesh.boundary_facets()[static_cast<std::size_t>(f)];
            const double share = facet.measure / dim;
            for (int m = 0; m < dim; ++m) {
                for (int i = 0; i < dim; ++i) load[facet.nodes[static_cast<std::size_t>(m)] * dim + i] += share * t.traction[static_cast<std::size_t>(i)];
            }
        }
    }
    return eliminate(mesh, dim, triplets, std::move(load), problem.dirichlet);
}

SolveResult solve(const SparseSystem& system, const SolveOptions& options, const Vector* initial_guess) {
    SolveResult result;
    const Eigen::Index n = system.matrix.rows();
    if (n == 0) {
        result.solution = system.fixed_values;
        return result;
    }
    const double bnorm = system.rhs.norm();
    if (bnorm == 0.0) {
        result.solution = system.expand(Vector::Zero(n));
        return result;
    }

    const int max_it = options.max_iterations > 0 ? options.max_iterations : static_cast<int>(10 * n);
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    cg.setMaxIterations(max_it);
    cg.setTolerance(options.tolerance);
    cg.compute(system.matrix);

    Vector x = initial_guess ? system.restrict_to_free(*initial_guess) : Vector::Zero(n);
    int used = 0;
    double residual = (system.rhs - system.matrix * x).norm() / bnorm;
    // CG monitors the recursive residual; restart from the current iterate if
    // the true residual drifted above the target.
    for (int restart = 0; restart < 4 && residual > options.tolerance && used < max_it; ++restart) {
        cg.setMaxIterations(max_it - used);
        x = cg.solveWithGuess(system.rhs, x);
        used += static_cast<int>(cg.iterations());
        residual = (system.rhs - system.matrix * x).norm() / bnorm;
        if (!std::isfinite(residual)) break;
        if (cg.info() != Eigen::Success && cg.info() != Eigen::NoConvergence) break;
    }
    if (!(residual <= options.tolerance)) {
        std::ostringstream msg;
        msg << "conjugate gradients did not converge: relative residual " << residual << " after " << used
            << " iterations (tolerance " << options.tolerance << ")";
        throw SolverError(msg.str(), residual, used);
    }
    result.solution = system.expand(x);
    result.iterations = used;
    result.residual = residual;
    return result;
}

Eigen::Matrix3d element_strain(const SimplexMesh& mesh, const Vector& u, std::size_t e) {
    const int dim = mesh.dim();
    Eigen::Matrix3d grad = Eigen::Matrix3d::Zero(); // grad(i, j) = d u_i / d x_j
    auto el = mesh.element(e);
    for (int a = 0; a < mesh.nodes_per_element(); ++a) {
        const Point& g = mesh.gradient(e, a);
        for (int i = 0; i < dim; ++i) {
            for (int j = 0; j < dim; ++j) grad(i, j) += u[el[a] * dim + i] * g[static_cast<std::size_t>(j)];
        }
    }
    return 0.5 * (grad + grad.transpose());
}

Point element_gradient(const SimplexMesh& mesh, const Vector& field, std::size_t e) {
    Point g{0.0, 0.0, 0.0};
    auto el = mesh.element(e);
    for (int a = 0; a < mesh.nodes_per_element(); ++a) {
        const Point& ga = mesh.gradient(e, a);
        for (int r = 0; r < 3; ++r) g[static_cast<std::size_t>(r)] += field[el[a]] * ga[static_cast<std::size_t>(r)];
    }
    return g;
}

double element_mean(const SimplexMesh& mesh, const Vector& field, std::size_t e) {
    double s = 0.0;
    for (int v : mesh.element(e)) s += field[v];
    return s / mesh.nodes_per_element();
}

Vector element_to_node(const SimplexMesh& mesh, const Vector& element_values) {
    Vector sum = Vector::Zero(static_cast<Eigen::Index>(mesh.num_nodes()));
    Vector weight = Vector::Zero(sum.size());
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double vol = mesh.volume(e);
        for (int v : mesh.element(e)) {
            sum[v] += vol * element_values[static_cast<Eigen::Index>(e)];
            weight[v] += vol;
        }
    }
    return sum.cwiseQuotient(weight);
}

double mean_abs_nodal(const SimplexMesh& mesh, const Vector& nodal) {
    const auto& m = mesh.lumped_mass();
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) s += m[i] * std::abs(nodal[static_cast<Eigen::Index>(i)]);
    return s / mesh.total_volume();
}

} // namespace topopt
