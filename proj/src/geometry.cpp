#include "topopt/geometry.hpp"

#include "topopt/errors.hpp"

#include <sstream>

namespace topopt {

bool ShapePrimitive::contains(const Point& x, int dim) const {
    if (kind == Kind::box) {
        for (int a = 0; a < dim; ++a) {
            if (x[a] < lower[a] || x[a] > upper[a]) return false;
        }
        return true;
    }
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
    return r2 <= radius * radius;
}

ShapePrimitive parse_shape(std::string_view text, int dim) {
    std::istringstream in{std::string(text)};
    std::string kind, fill;
    in >> kind >> fill;
    ShapePrimitive s;
    if (kind == "box") {
        s.kind = ShapePrimitive::Kind::box;
    } else if (kind == "disc" || kind == "sphere") {
        s.kind = ShapePrimitive::Kind::disc;
    } else {
        throw InvalidArgument("unknown shape kind '" + kind + "' (expected box or disc)");
    }
    if (fill == "material") {
        s.material = true;
    } else if (fill == "void") {
        s.material = false;
    } else {
        throw InvalidArgument("shape fill must be 'material' or 'void', got '" + fill + "'");
    }
    std::vector<double> nums;
    double v = 0.0;
    while (in >> v) nums.push_back(v);
    if (!in.eof()) throw InvalidArgument("malformed number in shape '" + std::string(text) + "'");
    const auto expected = static_cast<std::size_t>(s.kind == ShapePrimitive::Kind::box ? 2 * dim : dim + 1);
    if (nums.size() != expected) {
        throw InvalidArgument("shape '" + std::string(text) + "' needs " + std::to_string(expected) + " numbers");
    }
    if (s.kind == ShapePrimitive::Kind::box) {
        for (int a = 0; a < dim; ++a) {
            s.lower[a] = nums[static_cast<std::size_t>(a)];
            s.upper[a] = nums[static_cast<std::size_t>(dim + a)];
            if (!(s.upper[a] > s.lower[a])) throw InvalidArgument("box shape upper corner must exceed lower corner");
        }
    } else {
        for (int a = 0; a < dim; ++a) s.center[a] = nums[static_cast<std::size_t>(a)];
        s.radius = nums.back();
        if (!(s.radius > 0.0)) throw InvalidArgument("disc radius must be positive");
    }
    return s;
}

std::string format_shape(const ShapePrimitive& s, int dim) {
    std::ostringstream out;
    out.precision(17);
    out << (s.kind == ShapePrimitive::Kind::box ? "box" : "disc") << ' ' << (s.material ? "material" : "void");
    if (s.kind == ShapePrimitive::Kind::box) {
        for (int a = 0; a < dim; ++a) out << ' ' << s.lower[a];
        for (int a = 0; a < dim; ++a) out << ' ' << s.upper[a];
    } else {
        for (int a = 0; a < dim; ++a) out << ' ' << s.center[a];
        out << ' ' << s.radius;
    }
    return out.str();
}

Vector rasterize(const SimplexMesh& mesh, const GeometryDescription& geometry) {
    Vector phi(static_cast<Eigen::Index>(mesh.num_nodes()));
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        bool material = geometry.base_material;
        for (const auto& s : geometry.shapes) {
            if (s.contains(mesh.node(i), mesh.dim())) material = s.material;
        }
        phi[static_cast<Eigen::Index>(i)] = material ? 1.0 : -1.0;
    }
    return phi;
}

} // namespace topopt
