#pragma once

#include "topopt/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>
#include <string>
#include <vector>

namespace topopt {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Prescribed value on the nodes of the tagged facets. `component` selects
/// the displacement component for vector problems.
struct DirichletCondition {
    std::vector<std::string> tags;
    int component = 0;
    std::function<double(const Point&)> value;

    static DirichletCondition constant(std::vector<std::string> tags, double v, int component = 0);
};

/// -div(a grad u) + c u = f with element-constant a, c, f.
struct ScalarDiffusionProblem {
    Vector diffusion;    // per element, > 0
    Vector reaction;     // per element; empty means 0
    Vector source;       // per element; empty means 0
    Vector nodal_source; // optional P1 source; added to `source`
    std::vector<DirichletCondition> dirichlet;
    /// Nodal quadrature for the reaction and nodal-source terms (row-sum
    /// mass). Keeps the assembled matrix an M-matrix on non-obtuse meshes.
    bool lumped_mass = false;
};

struct ElasticMaterial {
    double youngs_modulus = 1.0;
    double poisson_ratio = 0.3;

    void validate() const;
};

struct TractionLoad {
    std::vector<std::string> tags;
    Point traction{0.0, 0.0, 0.0}; // force per unit facet measure
};

/// Small-strain isotropic elasticity; 2D meshes use plane strain.
struct ElasticityProblem {
    ElasticMaterial material;
    Vector stiffness_scale; // per element multiplier of the elastic tensor; empty means 1
    std::vector<TractionLoad> tractions;
    std::vector<DirichletCondition> dirichlet;
};

/// Reduced SPD system over the free dofs after symmetric Dirichlet elimination.
struct SparseSystem {
    SparseMatrix matrix;
    Vector rhs;
    std::vector<int> free_dofs;     // reduced index -> full dof
    std::vector<int> reduced_index; // full dof -> reduced index, -1 when fixed
    Vector fixed_values;            // full size; prescribed values at fixed dofs
    Vector full_load;               // full-size load before elimination

    std::size_t full_size() const noexcept { return reduced_index.size(); }
    Vector expand(const Vector& reduced) const;
    Vector restrict_to_free(const Vector& full) const;
};

struct SolveOptions {
    double tolerance = 1e-8;
    int max_iterations = 0; // 0 selects 10 * system size
};

struct SolveResult {
    Vector solution; // full size, includes prescribed values
    int iterations = 0;
    double residual = 0.0; // ||A x - b|| / ||b|| on the reduced system
};

SparseSystem assemble_scalar(const SimplexMesh& mesh, const ScalarDiffusionProblem& problem);
SparseSystem assemble_elasticity(const SimplexMesh& mesh, const ElasticityProblem& problem);

/// Jacobi-preconditioned conjugate gradients. `initial_guess` (full size) is
/// optional. Throws SolverError when the tolerance is not reached.
SolveResult solve(const SparseSystem& system, const SolveOptions& options = {},
                  const Vector* initial_guess = nullptr);

/// Isotropic elastic tensor in Voigt notation (engineering shear strains):
/// 3x3 plane strain in 2D, 6x6 in 3D.
Eigen::MatrixXd elastic_voigt_matrix(int dim, const ElasticMaterial& material);

/// Element-constant small strain tensor; zero rows/cols beyond dim.
Eigen::Matrix3d element_strain(const SimplexMesh& mesh, const Vector& displacement, std::size_t e);

/// Element-constant gradient of a nodal scalar field.
Point element_gradient(const SimplexMesh& mesh, const Vector& field, std::size_t e);

/// Element average of a nodal field.
double element_mean(const SimplexMesh& mesh, const Vector& field, std::size_t e);

/// Volume-weighted element -> node transfer.
Vector element_to_node(const SimplexMesh& mesh, const Vector& element_values);

/// Volume-weighted mean of |v| for a nodal field (lumped quadrature).
double mean_abs_nodal(const SimplexMesh& mesh, const Vector& nodal);

} // namespace topopt
