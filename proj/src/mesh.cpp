#include "topopt/mesh.hpp"

#include "topopt/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace topopt {

namespace {

struct FaceKey {
    std::array<int, 3> sorted;
    bool operator==(const FaceKey&) const = default;
};

struct FaceKeyHash {
    std::size_t operator()(const FaceKey& k) const noexcept {
        std::size_t h = 1469598103934665603ull;
        for (int v : k.sorted) {
            h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        }
        return h;
    }
};

// Local node lists of the face opposite local node k.
constexpr std::array<std::array<int, 3>, 3> tri_faces{{{1, 2, -1}, {2, 0, -1}, {0, 1, -1}}};
constexpr std::array<std::array<int, 3>, 4> tet_faces{{{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}}};

std::array<int, 3> face_locals(int dim, int k) {
    return dim == 2 ? tri_faces[static_cast<std::size_t>(k)] : tet_faces[static_cast<std::size_t>(k)];
}

double signed_measure(int dim, const std::vector<Point>& nodes, std::span<const int> el) {
    const Point& a = nodes[static_cast<std::size_t>(el[0])];
    if (dim == 2) {
        const Point& b = nodes[static_cast<std::size_t>(el[1])];
        const Point& c = nodes[static_cast<std::size_t>(el[2])];
        return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
    }
    Eigen::Matrix3d j;
    for (int k = 0; k < 3; ++k) {
        const Point& p = nodes[static_cast<std::size_t>(el[static_cast<std::size_t>(k + 1)])];
        for (int r = 0; r < 3; ++r) j(r, k) = p[static_cast<std::size_t>(r)] - a[static_cast<std::size_t>(r)];
    }
    return j.determinant() / 6.0;
}

double facet_measure(int dim, const std::vector<Point>& nodes, const std::array<int, 3>& f) {
    const Point& a = nodes[static_cast<std::size_t>(f[0])];
    const Point& b = nodes[static_cast<std::size_t>(f[1])];
    if (dim == 2) return std::hypot(b[0] - a[0], b[1] - a[1]);
    const Point& c = nodes[static_cast<std::size_t>(f[2])];
    Eigen::Vector3d u(b[0] - a[0], b[1] - a[1], b[2] - a[2]);
    Eigen::Vector3d v(c[0] - a[0], c[1] - a[1], c[2] - a[2]);
    return 0.5 * u.cross(v).norm();
}

} // namespace

std::string to_string(BoxFace face) {
    switch (face) {
    case BoxFace::any: return "any";
    case BoxFace::xmin: return "xmin";
    case BoxFace::xmax: return "xmax";
    case BoxFace::ymin: return "ymin";
    case BoxFace::ymax: return "ymax";
    case BoxFace::zmin: return "zmin";
    case BoxFace::zmax: return "zmax";
    }
    return "any";
}

std::optional<BoxFace> parse_box_face(std::string_view text) {
    for (BoxFace f : {BoxFace::any, BoxFace::xmin, BoxFace::xmax, BoxFace::ymin, BoxFace::ymax,
                      BoxFace::zmin, BoxFace::zmax}) {
        if (text == to_string(f)) return f;
    }
    return std::nullopt;
}

void BoxSpec::validate() const {
    if (dim != 2 && dim != 3) throw InvalidArgument("box dimension must be 2 or 3");
    for (int k = 0; k < dim; ++k) {
        auto i = static_cast<std::size_t>(k);
        if (subdivisions[i] < 1) throw InvalidArgument("box subdivisions must be >= 1 on every axis");
        if (!(upper[i] > lower[i])) throw InvalidArgument("box upper corner must exceed lower corner");
    }
    for (const auto& rule : tag_rules) {
        if (rule.name.empty()) throw InvalidArgument("tag rule without a name");
        if (rule.name == SimplexMesh::default_tag) throw InvalidArgument("tag name 'default' is reserved");
        if (dim == 2 && (rule.face == BoxFace::zmin || rule.face == BoxFace::zmax))
            throw InvalidArgument("tag rule '" + rule.name + "' uses a z face on a 2D box");
    }
}

double BoxSpec::diagonal() const {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) {
        auto i = static_cast<std::size_t>(k);
        s += (upper[i] - lower[i]) * (upper[i] - lower[i]);
    }
    return std::sqrt(s);
}

SimplexMesh::SimplexMesh(int dim, std::vector<Point> nodes, std::vector<int> connectivity,
                         std::vector<std::string> tag_names,
                         const std::function<std::optional<int>(const Point&)>& tagger)
    : dim_(dim), nodes_(std::move(nodes)), connectivity_(std::move(connectivity)) {
    if (dim_ != 2 && dim_ != 3) throw InvalidArgument("mesh dimension must be 2 or 3");
    const auto npe = static_cast<std::size_t>(dim_ + 1);
    if (connectivity_.size() % npe != 0) throw InvalidArgument("connectivity size is not a multiple of dim+1");
    const std::size_t ne = connectivity_.size() / npe;

    tag_names_.reserve(tag_names.size() + 1);
    tag_names_.emplace_back(default_tag);
    for (auto& t : tag_names) tag_names_.push_back(std::move(t));

    volumes_.resize(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        std::span<int> el(connectivity_.data() + e * npe, npe);
        for (int v : el) {
            if (v < 0 || static_cast<std::size_t>(v) >= nodes_.size())
                throw InvalidArgument("element references an invalid node index");
        }
        double vol = signed_measure(dim_, nodes_, el);
        if (vol < 0.0) {
            std::swap(el[npe - 2], el[npe - 1]);
            vol = -vol;
        }
        if (!(vol > 0.0)) throw InvalidArgument("degenerate element");
        volumes_[e] = vol;
        total_volume_ += vol;
    }

    gradients_.resize(ne * npe);
    for (std::size_t e = 0; e < ne; ++e) {
        auto el = element(e);
        const Point& x0 = nodes_[static_cast<std::size_t>(el[0])];
        Eigen::MatrixXd j(dim_, dim_);
        for (int k = 0; k < dim_; ++k) {
            const Point& xk = nodes_[static_cast<std::size_t>(el[static_cast<std::size_t>(k + 1)])];
            for (int r = 0; r < dim_; ++r) j(r, k) = xk[static_cast<std::size_t>(r)] - x0[static_cast<std::size_t>(r)];
        }
        Eigen::MatrixXd inv = j.inverse();
        Point g0{0.0, 0.0, 0.0};
        for (int k = 0; k < dim_; ++k) {
            Point g{0.0, 0.0, 0.0};
            for (int r = 0; r < dim_; ++r) {
                g[static_cast<std::size_t>(r)] = inv(k, r);
                g0[static_cast<std::size_t>(r)] -= inv(k, r);
            }
            gradients_[e * npe + static_cast<std::size_t>(k + 1)] = g;
        }
        gradients_[e * npe] = g0;
    }

    // Face matching: interior faces are shared by exactly two elements.
    neighbors_.assign(ne * npe, -1);
    std::unordered_map<FaceKey, std::pair<int, int>, FaceKeyHash> open_faces;
    open_faces.reserve(ne * npe);
    for (std::size_t e = 0; e < ne; ++e) {
        auto el = element(e);
        for (int k = 0; k < dim_ + 1; ++k) {
            auto loc = face_locals(dim_, k);
            FaceKey key{{-1, -1, -1}};
            for (int m = 0; m < dim_; ++m) key.sorted[static_cast<std::size_t>(m)] = el[static_cast<std::size_t>(loc[static_cast<std::size_t>(m)])];
            std::sort(key.sorted.begin(), key.sorted.begin() + dim_);
            auto [it, inserted] = open_faces.try_emplace(key, static_cast<int>(e), k);
            if (!inserted) {
                if (it->second.first < 0) throw InvalidArgument("face shared by more than two elements");
                auto [other, ok] = it->second;
                neighbors_[e * npe + static_cast<std::size_t>(k)] = other;
                neighbors_[static_cast<std::size_t>(other) * npe + static_cast<std::size_t>(ok)] = static_cast<int>(e);
                it->second = {-1, -1};
            }
        }
    }

    for (std::size_t e = 0; e < ne; ++e) {
        auto el = element(e);
        for (int k = 0; k < dim_ + 1; ++k) {
            if (neighbors_[e * npe + static_cast<std::size_t>(k)] >= 0) continue;
            BoundaryFacet f;
            auto loc = face_locals(dim_, k);
            for (int m = 0; m < dim_; ++m) {
                f.nodes[static_cast<std::size_t>(m)] = el[static_cast<std::size_t>(loc[static_cast<std::size_t>(m)])];
                const Point& p = nodes_[static_cast<std::size_t>(f.nodes[static_cast<std::size_t>(m)])];
                for (int r = 0; r < 3; ++r) f.centroid[static_cast<std::size_t>(r)] += p[static_cast<std::size_t>(r)] / dim_;
            }
            f.element = static_cast<int>(e);
            f.local_face = k;
            f.measure = facet_measure(dim_, nodes_, f.nodes);
            f.tag = tagger ? tagger(f.centroid).value_or(0) : 0;
            if (f.tag < 0 || static_cast<std::size_t>(f.tag) >= tag_names_.size())
                throw InvalidArgument("tagger returned an out-of-range tag index");
            facets_.push_back(f);
        }
    }

    lumped_mass_.assign(nodes_.size(), 0.0);
    for (std::size_t e = 0; e < ne; ++e) {
        const double share = volumes_[e] / static_cast<double>(npe);
        for (int v : element(e)) lumped_mass_[static_cast<std::size_t>(v)] += share;
    }
}

Point SimplexMesh::centroid(std::size_t e) const {
    Point c{0.0, 0.0, 0.0};
    for (int v : element(e)) {
        for (int r = 0; r < 3; ++r) c[static_cast<std::size_t>(r)] += nodes_[static_cast<std::size_t>(v)][static_cast<std::size_t>(r)];
    }
    for (double& x : c) x /= static_cast<double>(dim_ + 1);
    return c;
}

bool SimplexMesh::has_tag(std::string_view name) const {
    return std::find(tag_names_.begin(), tag_names_.end(), name) != tag_names_.end();
}

int SimplexMesh::tag_index(std::string_view name) const {
    auto it = std::find(tag_names_.begin(), tag_names_.end(), name);
    if (it == tag_names_.end()) throw LookupError("unknown boundary tag '" + std::string(name) + "'");
    return static_cast<int>(it - tag_names_.begin());
}

std::vector<int> SimplexMesh::facets_with_tags(std::span<const std::string> tags) const {
    std::vector<bool> wanted(tag_names_.size(), false);
    for (const auto& t : tags) wanted[static_cast<std::size_t>(tag_index(t))] = true;
    std::vector<int> out;
    for (std::size_t i = 0; i < facets_.size(); ++i) {
        if (wanted[static_cast<std::size_t>(facets_[i].tag)]) out.push_back(static_cast<int>(i));
    }
    return out;
}

std::vector<int> SimplexMesh::nodes_with_tags(std::span<const std::string> tags) const {
    std::vector<int> out;
    for (int f : facets_with_tags(tags)) {
        const auto& facet = facets_[static_cast<std::size_t>(f)];
        for (int m = 0; m < dim_; ++m) out.push_back(facet.nodes[static_cast<std::size_t>(m)]);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<bool> SimplexMesh::elements_touching_tags(std::span<const std::string> tags) const {
    std::vector<bool> out(num_elements(), false);
    for (int f : facets_with_tags(tags)) out[static_cast<std::size_t>(facets_[static_cast<std::size_t>(f)].element)] = true;
    return out;
}

SimplexMesh generate_box_mesh(const BoxSpec& spec) {
    spec.validate();
    const int d = spec.dim;
    const int nx = spec.subdivisions[0];
    const int ny = spec.subdivisions[1];
    const int nz = d == 3 ? spec.subdivisions[2] : 1;
    const int px = nx + 1;
    const int py = ny + 1;
    const int pz = d == 3 ? nz + 1 : 1;

    auto coord = [&](int axis, int i, int n) {
        auto a = static_cast<std::size_t>(axis);
        // Exact endpoints avoid round-off on the box faces.
        if (i == n) return spec.upper[a];
        return spec.lower[a] + (spec.upper[a] - spec.lower[a]) * static_cast<double>(i) / static_cast<double>(n);
    };

    std::vector<Point> nodes;
    nodes.reserve(static_cast<std::size_t>(px) * py * pz);
    for (int k = 0; k < pz; ++k) {
        for (int j = 0; j < py; ++j) {
            for (int i = 0; i < px; ++i) {
                nodes.push_back({coord(0, i, nx), coord(1, j, ny), d == 3 ? coord(2, k, nz) : 0.0});
            }
        }
    }
    auto id = [&](int i, int j, int k) { return i + px * (j + py * k); };

    std::vector<int> conn;
    if (d == 2) {
        conn.reserve(static_cast<std::size_t>(nx) * ny * 6);
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                const int n00 = id(i, j, 0), n10 = id(i + 1, j, 0), n01 = id(i, j + 1, 0), n11 = id(i + 1, j + 1, 0);
                if ((i + j) % 2 == 0) {
                    conn.insert(conn.end(), {n00, n10, n11, n00, n11, n01});
                } else {
                    conn.insert(conn.end(), {n00, n10, n01, n10, n11, n01});
                }
            }
        }
    } else {
        // Kuhn split: one tetrahedron per axis permutation, all sharing the
        // main diagonal; face diagonals match across neighbouring cells.
        constexpr std::array<std::array<int, 3>, 6> perms{{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
        conn.reserve(static_cast<std::size_t>(nx) * ny * nz * 24);
        for (int k = 0; k < nz; ++k) {
            for (int j = 0; j < ny; ++j) {
                for (int i = 0; i < nx; ++i) {
                    for (const auto& p : perms) {
                        std::array<int, 3> off{0, 0, 0};
                        conn.push_back(id(i, j, k));
                        for (int s = 0; s < 3; ++s) {
                            off[static_cast<std::size_t>(p[static_cast<std::size_t>(s)])] = 1;
                            conn.push_back(id(i + off[0], j + off[1], k + off[2]));
                        }
                    }
                }
            }
        }
    }

    std::vector<std::string> names;
    std::vector<int> rule_tag; // tag index per rule; 0 is "default"
    for (const auto& r : spec.tag_rules) {
        auto it = std::find(names.begin(), names.end(), r.name);
        if (it == names.end()) {
            names.push_back(r.name);
            it = names.end() - 1;
        }
        rule_tag.push_back(static_cast<int>(it - names.begin()) + 1);
    }
    const double tol = 1e-9 * spec.diagonal();
    auto on_face = [&](const Point& c, BoxFace face) {
        switch (face) {
        case BoxFace::any: return true;
        case BoxFace::xmin: return std::abs(c[0] - spec.lower[0]) <= tol;
        case BoxFace::xmax: return std::abs(c[0] - spec.upper[0]) <= tol;
        case BoxFace::ymin: return std::abs(c[1] - spec.lower[1]) <= tol;
        case BoxFace::ymax: return std::abs(c[1] - spec.upper[1]) <= tol;
        case BoxFace::zmin: return std::abs(c[2] - spec.lower[2]) <= tol;
        case BoxFace::zmax: return std::abs(c[2] - spec.upper[2]) <= tol;
        }
        return false;
    };
    auto tagger = [&](const Point& c) -> std::optional<int> {
        for (std::size_t ri = 0; ri < spec.tag_rules.size(); ++ri) {
            const TagRule& r = spec.tag_rules[ri];
            if (!on_face(c, r.face)) continue;
            bool inside = true;
            for (int a = 0; a < d; ++a) {
                auto ai = static_cast<std::size_t>(a);
                if (c[ai] < r.window_lower[ai] - tol || c[ai] > r.window_upper[ai] + tol) inside = false;
            }
            if (!inside || (r.predicate && !r.predicate(c))) continue;
            return rule_tag[ri];
        }
        return std::nullopt;
    };
    return SimplexMesh(d, std::move(nodes), std::move(conn), std::move(names), tagger);
}

double facet_tag_measure(const SimplexMesh& mesh, std::string_view tag) {
    const std::string name(tag);
    return facet_tag_measure(mesh, std::span<const std::string>(&name, 1));
}

double facet_tag_measure(const SimplexMesh& mesh, std::span<const std::string> tags) {
    double total = 0.0;
    for (int f : mesh.facets_with_tags(tags)) total += mesh.boundary_facets()[static_cast<std::size_t>(f)].measure;
    return total;
}

std::vector<int> elements_in_box(const SimplexMesh& mesh, const Point& lower, const Point& upper) {
    std::vector<int> out;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        Point c = mesh.centroid(e);
        bool inside = true;
        for (int a = 0; a < mesh.dim(); ++a) {
            auto ai = static_cast<std::size_t>(a);
            if (c[ai] < lower[ai] || c[ai] > upper[ai]) inside = false;
        }
        if (inside) out.push_back(static_cast<int>(e));
    }
    return out;
}

} // namespace topopt
