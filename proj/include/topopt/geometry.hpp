#pragma once

#include "topopt/fem.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace topopt {

/// Primitive used to paint fixed material layouts. A "disc" is a sphere in 3D.
struct ShapePrimitive {
    enum class Kind { box, disc };

    Kind kind = Kind::box;
    bool material = true;
    Point lower{0.0, 0.0, 0.0}; // box
    Point upper{0.0, 0.0, 0.0}; // box
    Point center{0.0, 0.0, 0.0}; // disc
    double radius = 0.0;         // disc

    bool contains(const Point& x, int dim) const;
    bool operator==(const ShapePrimitive&) const = default;
};

/// Background fill plus shapes painted in order; later shapes win.
struct GeometryDescription {
    bool base_material = false;
    std::vector<ShapePrimitive> shapes;

    bool operator==(const GeometryDescription&) const = default;
};

/// "box material x0 y0 [z0] x1 y1 [z1]" or "disc void cx cy [cz] r".
ShapePrimitive parse_shape(std::string_view text, int dim);
std::string format_shape(const ShapePrimitive& shape, int dim);

/// Nodal level set: +1 at material nodes, -1 at void nodes.
Vector rasterize(const SimplexMesh& mesh, const GeometryDescription& geometry);

} // namespace topopt
