#include "topopt/errors.hpp"
#include "topopt/levelset.hpp"

#include <doctest.h>

#include <random>

using namespace topopt;

namespace {

std::shared_ptr<const SimplexMesh> square(int n) {
    BoxSpec b;
    b.dim = 2;
    b.upper = {1.0, 1.0, 0.0};
    b.subdivisions = {n, n, 1};
    b.tag_rules = {{"top", BoxFace::ymax}};
    return std::make_shared<const SimplexMesh>(generate_box_mesh(b));
}

Vector random_nodal(std::size_t n, unsigned seed, double lo, double hi) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> d(lo, hi);
    Vector v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = d(rng);
    return v;
}

double lumped_integral(const SimplexMesh& mesh, const Vector& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) s += mesh.lumped_mass()[i] * v[static_cast<Eigen::Index>(i)];
    return s;
}

} // namespace

TEST_SUITE("levelset") {

TEST_CASE("characteristic counts material vertices") {
    auto mesh = square(1);
    Vector phi(4);
    // nodes: (0,0) (1,0) (0,1) (1,1)
    phi << 1.0, -1.0, 0.0, -0.5;
    const Vector chi = characteristic(*mesh, phi);
    for (std::size_t e = 0; e < 2; ++e) {
        int inside = 0;
        for (int n : mesh->element(e)) inside += phi[n] >= 0 ? 1 : 0;
        CHECK(chi[static_cast<Eigen::Index>(e)] == doctest::Approx(inside / 3.0));
    }
    CHECK(nodal_characteristic(phi) == Vector((Vector(4) << 1, 0, 1, 0).finished()));
    CHECK(material_volume(*mesh, Vector::Ones(2)) == doctest::Approx(1.0));
}

TEST_CASE("a constant field with zero sensitivity is a fixed point") {
    auto mesh = square(8);
    const auto f = LevelSetField::uniform(mesh, 0.3);
    const Vector out = evolve_unclamped(f, Vector::Zero(f.values.size()), {});
    CHECK((out - f.values).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("evolution conserves the lumped integral of phi - dt K s") {
    auto mesh = square(10);
    LevelSetField f;
    f.mesh = mesh;
    f.values = random_nodal(mesh->num_nodes(), 1, -1, 1);
    f.characteristic_length = 0.7;
    const Vector s = random_nodal(mesh->num_nodes(), 2, -0.2, 0.2);
    EvolutionParams prm;
    prm.regularization = 1e-2;
    prm.time_step = 0.5;
    prm.proportionality = 2.0;
    const Vector out = evolve_unclamped(f, s, prm);
    CHECK(lumped_integral(*mesh, out) ==
          doctest::Approx(lumped_integral(*mesh, f.values - prm.time_step * prm.proportionality * s)).epsilon(1e-9));
}

TEST_CASE("diffusion alone does not create new extrema") {
    auto mesh = square(12);
    LevelSetField f;
    f.mesh = mesh;
    f.values = random_nodal(mesh->num_nodes(), 5, -1, 1);
    EvolutionParams prm;
    prm.regularization = 0.05;
    const Vector out = evolve_unclamped(f, Vector::Zero(f.values.size()), prm);
    CHECK(out.maxCoeff() <= f.values.maxCoeff() + 1e-12);
    CHECK(out.minCoeff() >= f.values.minCoeff() - 1e-12);
    // and smooths
    CHECK(out.maxCoeff() - out.minCoeff() < f.values.maxCoeff() - f.values.minCoeff());
}

TEST_CASE("positive sensitivity lowers phi") {
    auto mesh = square(6);
    const auto f = LevelSetField::uniform(mesh, 0.5);
    const Vector out = evolve_unclamped(f, Vector::Constant(f.values.size(), 0.1), {});
    CHECK(out.maxCoeff() < 0.5);
    CHECK(out.minCoeff() == doctest::Approx(0.4));
}

TEST_CASE("larger regularization smooths more") {
    auto mesh = square(12);
    LevelSetField f;
    f.mesh = mesh;
    f.values = random_nodal(mesh->num_nodes(), 9, -1, 1);
    double prev = 1e300;
    for (double tau : {1e-5, 1e-3, 1e-1}) {
        EvolutionParams prm;
        prm.regularization = tau;
        const Vector out = evolve_unclamped(f, Vector::Zero(f.values.size()), prm);
        const double spread = out.maxCoeff() - out.minCoeff();
        CHECK(spread < prev);
        prev = spread;
    }
}

TEST_CASE("evolve clamps to [-1, 1] and honours material tags") {
    auto mesh = square(6);
    const auto f = LevelSetField::uniform(mesh, 0.9);
    EvolutionParams prm;
    prm.material_tags = {"top"};
    const LevelSetField out = evolve(f, Vector::Constant(f.values.size(), 5.0), prm);
    CHECK(out.values.maxCoeff() <= 1.0);
    CHECK(out.values.minCoeff() >= -1.0);
    for (int n : mesh->nodes_with_tags(prm.material_tags)) CHECK(out.values[n] == doctest::Approx(1.0));
    CHECK(out.values.minCoeff() == doctest::Approx(-1.0));
}

TEST_CASE("invalid parameters are rejected") {
    auto mesh = square(2);
    const auto f = LevelSetField::uniform(mesh, 1.0);
    EvolutionParams prm;
    prm.regularization = 0.0;
    CHECK_THROWS_AS(evolve(f, Vector::Zero(f.values.size()), prm), InvalidArgument);
    prm = {};
    prm.time_step = -1.0;
    CHECK_THROWS_AS(evolve(f, Vector::Zero(f.values.size()), prm), InvalidArgument);
    CHECK_THROWS_AS(evolve(f, Vector::Zero(3), {}), InvalidArgument);
}

TEST_CASE("reference characteristic values") {
    auto mesh = square(3);
    const auto n = static_cast<Eigen::Index>(mesh->num_nodes());
    CHECK(characteristic(*mesh, Vector::Ones(n)).minCoeff() == 1.0);
    CHECK(characteristic(*mesh, -Vector::Ones(n)).maxCoeff() == 0.0);
    Vector phi = Vector::Ones(n);
    phi[mesh->element(0)[2]] = -1.0;
    CHECK(characteristic(*mesh, phi)[0] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("with vanishing tau a uniform drive lowers phi by K c dt") {
    auto mesh = square(5);
    LevelSetField f;
    f.mesh = mesh;
    f.values = random_nodal(mesh->num_nodes(), 4, -0.5, 0.5);
    EvolutionParams prm;
    prm.regularization = 1e-12;
    prm.proportionality = 1.5;
    prm.time_step = 0.4;
    const Vector out = evolve_unclamped(f, Vector::Constant(f.values.size(), 0.2), prm);
    CHECK((out - (f.values.array() - 1.5 * 0.2 * 0.4).matrix()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("checkerboard variance drops under strong diffusion; the mean is kept") {
    auto mesh = square(10);
    LevelSetField f;
    f.mesh = mesh;
    f.values.resize(static_cast<Eigen::Index>(mesh->num_nodes()));
    for (std::size_t i = 0; i < mesh->num_nodes(); ++i) {
        const auto& x = mesh->node(i);
        f.values[static_cast<Eigen::Index>(i)] = (static_cast<int>(std::round(x[0] * 10 + x[1] * 10)) % 2) ? 1.0 : -1.0;
    }
    EvolutionParams prm;
    prm.regularization = 1.0;
    const Vector out = evolve_unclamped(f, Vector::Zero(f.values.size()), prm);
    auto variance = [&](const Vector& v) {
        const double mean = lumped_integral(*mesh, v);
        return lumped_integral(*mesh, (v.array() - mean).square().matrix());
    };
    CHECK(variance(out) < variance(f.values));
    CHECK(std::abs(lumped_integral(*mesh, out) - lumped_integral(*mesh, f.values)) <=
          1e-10 * std::max(1.0, std::abs(lumped_integral(*mesh, f.values))));
}

TEST_CASE("raising the drive at one node never raises phi there") {
    auto mesh = square(6);
    LevelSetField f;
    f.mesh = mesh;
    f.values = random_nodal(mesh->num_nodes(), 8, -1, 1);
    const Vector s = random_nodal(mesh->num_nodes(), 9, -1, 1);
    EvolutionParams prm;
    prm.regularization = 1e-2;
    const Vector base = evolve_unclamped(f, s, prm);
    for (Eigen::Index i = 0; i < s.size(); i += 5) {
        Vector bumped = s;
        bumped[i] += 0.3;
        const Vector out = evolve_unclamped(f, bumped, prm);
        CHECK(out[i] <= base[i] + 1e-12);
        // and nowhere else either: the update operator is an M-matrix inverse
        CHECK((out - base).maxCoeff() <= 1e-12);
    }
}

}
