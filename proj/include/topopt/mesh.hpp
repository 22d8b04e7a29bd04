#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace topopt {

/// Coordinates are always stored with three components; z is 0 in 2D.
using Point = std::array<double, 3>;

enum class BoxFace { any, xmin, xmax, ymin, ymax, zmin, zmax };

std::string to_string(BoxFace face);
std::optional<BoxFace> parse_box_face(std::string_view text);

/// Selects boundary facets by the box face they lie on and, optionally, by a
/// window the facet centroid must fall inside.
struct TagRule {
    std::string name;
    BoxFace face = BoxFace::any;
    Point window_lower{-std::numeric_limits<double>::infinity(),
                       -std::numeric_limits<double>::infinity(),
                       -std::numeric_limits<double>::infinity()};
    Point window_upper{std::numeric_limits<double>::infinity(),
                       std::numeric_limits<double>::infinity(),
                       std::numeric_limits<double>::infinity()};
    /// Extra programmatic filter on the facet centroid; not serialized.
    std::function<bool(const Point&)> predicate;

    bool operator==(const TagRule& other) const {
        return name == other.name && face == other.face &&
               window_lower == other.window_lower && window_upper == other.window_upper;
    }
};

struct BoxSpec {
    int dim = 2;
    Point lower{0.0, 0.0, 0.0};
    Point upper{1.0, 1.0, 1.0};
    std::array<int, 3> subdivisions{1, 1, 1};
    std::vector<TagRule> tag_rules;

    /// Throws InvalidArgument when the box is degenerate.
    void validate() const;
    double diagonal() const;

    bool operator==(const BoxSpec& other) const = default;
};

struct BoundaryFacet {
    std::array<int, 3> nodes{-1, -1, -1}; // dim entries used
    int element = -1;
    int local_face = -1; // face opposite this local node of the owner
    int tag = 0;         // index into SimplexMesh::tag_names()
    double measure = 0.0;
    Point centroid{};
};

/// Conforming simplex mesh (triangles or tetrahedra). Immutable after
/// construction; element volumes and P1 shape gradients are precomputed.
class SimplexMesh {
public:
    static constexpr const char* default_tag = "default";

    /// `connectivity` holds (dim+1) node indices per element. Elements with
    /// negative orientation are flipped. Boundary facets get the name returned
    /// by `tagger(centroid)`, or "default" when it returns nullopt.
    SimplexMesh(int dim, std::vector<Point> nodes, std::vector<int> connectivity,
                std::vector<std::string> tag_names,
                const std::function<std::optional<int>(const Point&)>& tagger);

    int dim() const noexcept { return dim_; }
    int nodes_per_element() const noexcept { return dim_ + 1; }
    std::size_t num_nodes() const noexcept { return nodes_.size(); }
    std::size_t num_elements() const noexcept { return volumes_.size(); }

    std::span<const Point> nodes() const noexcept { return nodes_; }
    const Point& node(std::size_t i) const { return nodes_[i]; }
    std::span<const int> element(std::size_t e) const {
        return {connectivity_.data() + e * static_cast<std::size_t>(dim_ + 1),
                static_cast<std::size_t>(dim_ + 1)};
    }
    std::span<const int> connectivity() const noexcept { return connectivity_; }

    double volume(std::size_t e) const { return volumes_[e]; }
    double total_volume() const noexcept { return total_volume_; }
    Point centroid(std::size_t e) const;

    /// Gradient of the P1 shape function of local node `local` on element `e`.
    const Point& gradient(std::size_t e, int local) const {
        return gradients_[e * static_cast<std::size_t>(dim_ + 1) + static_cast<std::size_t>(local)];
    }

    /// Face neighbour across the face opposite local node k, or -1.
    std::span<const int> neighbors(std::size_t e) const {
        return {neighbors_.data() + e * static_cast<std::size_t>(dim_ + 1),
                static_cast<std::size_t>(dim_ + 1)};
    }

    std::span<const BoundaryFacet> boundary_facets() const noexcept { return facets_; }
    std::span<const std::string> tag_names() const noexcept { return tag_names_; }
    bool has_tag(std::string_view name) const;
    /// Throws LookupError for unknown names.
    int tag_index(std::string_view name) const;
    /// Facet indices carrying any of the given tags.
    std::vector<int> facets_with_tags(std::span<const std::string> tags) const;
    /// Sorted, unique node indices on facets carrying any of the given tags.
    std::vector<int> nodes_with_tags(std::span<const std::string> tags) const;
    /// Per-element flag: element owns a facet with one of the tags.
    std::vector<bool> elements_touching_tags(std::span<const std::string> tags) const;

    /// Diagonal of the lumped (row-sum) P1 mass matrix.
    const std::vector<double>& lumped_mass() const noexcept { return lumped_mass_; }

private:
    int dim_;
    std::vector<Point> nodes_;
    std::vector<int> connectivity_;
    std::vector<double> volumes_;
    std::vector<Point> gradients_;
    std::vector<int> neighbors_;
    std::vector<BoundaryFacet> facets_;
    std::vector<std::string> tag_names_;
    std::vector<double> lumped_mass_;
    double total_volume_ = 0.0;
};

/// Structured mesh of a box: each cell becomes 2 triangles (alternating
/// diagonal) or 6 Kuhn tetrahedra. Tags are the rule names in order, preceded
/// by "default".
SimplexMesh generate_box_mesh(const BoxSpec& spec);

/// Total length (2D) or area (3D) of facets carrying `tag`.
double facet_tag_measure(const SimplexMesh& mesh, std::string_view tag);
double facet_tag_measure(const SimplexMesh& mesh, std::span<const std::string> tags);

/// Elements whose centroid lies in the closed box [lower, upper].
std::vector<int> elements_in_box(const SimplexMesh& mesh, const Point& lower, const Point& upper);

} // namespace topopt
