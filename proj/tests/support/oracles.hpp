#pragma once

// Reference computations used by the tests. Nothing here calls into the code
// under test beyond reading mesh geometry, so a bug in the library cannot
// cancel against the same bug in its check.

#include "topopt/geometry.hpp"
#include "topopt/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/LU>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using topopt::Point;

// Barycentric points and weights (summing to 1) of a degree-5 rule on the
// triangle (7 points) and a degree-3 rule on the tetrahedron (5 points).
struct QuadPoint {
    std::array<double, 4> bary;
    double weight;
};

inline std::vector<QuadPoint> triangle_rule() {
    const double a1 = 0.059715871789770, b1 = 0.470142064105115;
    const double a2 = 0.797426985353087, b2 = 0.101286507323456;
    const double w0 = 0.225, w1 = 0.132394152788506, w2 = 0.125939180544827;
    return {{{1.0 / 3, 1.0 / 3, 1.0 / 3, 0}, w0}, {{a1, b1, b1, 0}, w1}, {{b1, a1, b1, 0}, w1},
            {{b1, b1, a1, 0}, w1},               {{a2, b2, b2, 0}, w2}, {{b2, a2, b2, 0}, w2},
            {{b2, b2, a2, 0}, w2}};
}

inline std::vector<QuadPoint> tetrahedron_rule() {
    std::vector<QuadPoint> q{{{0.25, 0.25, 0.25, 0.25}, -0.8}};
    const double a = 0.5, b = 1.0 / 6.0;
    for (int k = 0; k < 4; ++k) {
        std::array<double, 4> l{b, b, b, b};
        l[static_cast<std::size_t>(k)] = a;
        q.push_back({l, 0.45});
    }
    return q;
}

// Element measure from vertex coordinates (absolute determinant).
inline double simplex_measure(const std::vector<Point>& v) {
    if (v.size() == 3) {
        return 0.5 * std::abs((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]));
    }
    Eigen::Matrix3d m;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) m(r, c) = v[static_cast<std::size_t>(c + 1)][static_cast<std::size_t>(r)] - v[0][static_cast<std::size_t>(r)];
    }
    return std::abs(m.determinant()) / 6.0;
}

// || u_h - u ||_{L2(D)} where u_h is the P1 interpolant of nodal values
// (component `comp` of a field with `ncomp` values per node).
inline double l2_error(const topopt::SimplexMesh& mesh, const Eigen::VectorXd& uh,
                       const std::function<double(const Point&)>& exact, int ncomp = 1, int comp = 0) {
    const auto rule = mesh.dim() == 2 ? triangle_rule() : tetrahedron_rule();
    double sum = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        auto el = mesh.element(e);
        std::vector<Point> v;
        for (int n : el) v.push_back(mesh.node(static_cast<std::size_t>(n)));
        const double meas = simplex_measure(v);
        for (const auto& q : rule) {
            Point x{0, 0, 0};
            double val = 0.0;
            for (std::size_t a = 0; a < v.size(); ++a) {
                for (int d = 0; d < 3; ++d) x[static_cast<std::size_t>(d)] += q.bary[a] * v[a][static_cast<std::size_t>(d)];
                val += q.bary[a] * uh[el[a] * ncomp + comp];
            }
            const double diff = val - exact(x);
            sum += q.weight * meas * diff * diff;
        }
    }
    return std::sqrt(sum);
}

// Fourth-order isotropic elasticity tensor, plane strain in 2D.
inline double isotropic_tensor(int i, int j, int k, int l, double young, double nu) {
    const double lambda = young * nu / ((1 + nu) * (1 - 2 * nu));
    const double mu = young / (2 * (1 + nu));
    auto d = [](int a, int b) { return a == b ? 1.0 : 0.0; };
    return lambda * d(i, j) * d(k, l) + mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k));
}

// eps : A : eps with the point-inclusion tensor written out index by index.
inline double inclusion_energy(const Eigen::Matrix3d& eps, double young, double nu) {
    const double pre = 3 * (1 - nu) / (2 * (1 + nu) * (7 - 5 * nu));
    auto d = [](int a, int b) { return a == b ? 1.0 : 0.0; };
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) {
                    const double a = pre * (-(1 - 14 * nu + 15 * nu * nu) * young / ((1 - 2 * nu) * (1 - 2 * nu)) *
                                                d(i, j) * d(k, l) +
                                            5 * young * (d(i, k) * d(j, l) + d(i, l) * d(j, k)));
                    s += eps(i, j) * a * eps(k, l);
                }
    return s;
}

// Union-find labelling of void elements (chi < threshold) across shared
// faces, found by matching sorted face vertex lists rather than through the
// mesh's neighbour table. Returns per-element root ids (-1 for material) and
// the set of roots that own a facet with one of the given tag indices.
struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

struct VoidLabels {
    std::vector<int> root;          // per element, -1 for material
    std::vector<bool> root_is_open; // indexed by root id
};

inline VoidLabels union_find_voids(const topopt::SimplexMesh& mesh, const Eigen::VectorXd& chi,
                                   const std::vector<int>& exit_tag_indices, double threshold = 0.5) {
    const std::size_t ne = mesh.num_elements();
    UnionFind uf(ne);
    std::vector<std::pair<std::vector<int>, int>> faces;
    for (std::size_t e = 0; e < ne; ++e) {
        if (!(chi[static_cast<Eigen::Index>(e)] < threshold)) continue;
        auto el = mesh.element(e);
        for (std::size_t skip = 0; skip < el.size(); ++skip) {
            std::vector<int> f;
            for (std::size_t a = 0; a < el.size(); ++a) {
                if (a != skip) f.push_back(el[a]);
            }
            std::sort(f.begin(), f.end());
            faces.emplace_back(std::move(f), static_cast<int>(e));
        }
    }
    std::sort(faces.begin(), faces.end());
    for (std::size_t i = 1; i < faces.size(); ++i) {
        if (faces[i].first == faces[i - 1].first) uf.unite(faces[i].second, faces[i - 1].second);
    }
    VoidLabels out;
    out.root.assign(ne, -1);
    out.root_is_open.assign(ne, false);
    for (std::size_t e = 0; e < ne; ++e) {
        if (chi[static_cast<Eigen::Index>(e)] < threshold) out.root[e] = uf.find(static_cast<int>(e));
    }
    for (const auto& f : mesh.boundary_facets()) {
        const auto e = static_cast<std::size_t>(f.element);
        if (out.root[e] < 0) continue;
        if (std::find(exit_tag_indices.begin(), exit_tag_indices.end(), f.tag) != exit_tag_indices.end())
            out.root_is_open[static_cast<std::size_t>(out.root[e])] = true;
    }
    return out;
}

// Random geometry on the unit square: a few material rings (closed or cut
// open by a slot) and solid blobs in a void background. Deterministic for a
// given seed.
inline topopt::GeometryDescription random_blobs(unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> centre(0.25, 0.75);
    std::uniform_real_distribution<double> radius(0.12, 0.2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    topopt::GeometryDescription g;
    g.base_material = false;
    const int rings = 1 + static_cast<int>(unit(rng) * 3);
    for (int r = 0; r < rings; ++r) {
        const double cx = centre(rng), cy = centre(rng), ro = radius(rng);
        const double ri = ro * (0.45 + 0.2 * unit(rng));
        topopt::ShapePrimitive outer;
        outer.kind = topopt::ShapePrimitive::Kind::disc;
        outer.material = true;
        outer.center = {cx, cy, 0};
        outer.radius = ro;
        topopt::ShapePrimitive inner = outer;
        inner.material = false;
        inner.radius = ri;
        g.shapes.push_back(outer);
        g.shapes.push_back(inner);
        if (unit(rng) < 0.5) {
            topopt::ShapePrimitive slot;
            slot.kind = topopt::ShapePrimitive::Kind::box;
            slot.material = false;
            slot.lower = {cx - 0.04, cy, 0};
            slot.upper = {cx + 0.04, cy + ro + 0.05, 0};
            g.shapes.push_back(slot);
        }
    }
    const int solids = static_cast<int>(unit(rng) * 3);
    for (int s = 0; s < solids; ++s) {
        topopt::ShapePrimitive b;
        b.kind = topopt::ShapePrimitive::Kind::disc;
        b.material = true;
        b.center = {0.1 + 0.8 * unit(rng), 0.1 + 0.8 * unit(rng), 0};
        b.radius = 0.04 + 0.06 * unit(rng);
        g.shapes.push_back(b);
    }
    return g;
}

} // namespace oracle
