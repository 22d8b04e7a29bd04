#include "topopt/io.hpp"

#include "topopt/errors.hpp"

#include <unistd.h>

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace topopt {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, std::string_view contents) {
    static std::atomic<unsigned> counter{0};
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw Error("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    }
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp, ec);
            throw Error("write to '" + tmp.string() + "' failed");
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        fs::remove(tmp, ignored);
        throw Error("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
    }
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string vtk_unstructured_grid(const SimplexMesh& mesh, const std::vector<VtkField>& point_data,
                                  const std::vector<VtkField>& cell_data, std::string_view title) {
    const int dim = mesh.dim();
    const std::size_t nn = mesh.num_nodes();
    const std::size_t ne = mesh.num_elements();
    const int nv = dim + 1;
    std::ostringstream out;
    out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << nn << " double\n";
    for (std::size_t i = 0; i < nn; ++i) {
        const Point& x = mesh.node(i);
        out << format_double(x[0]) << ' ' << format_double(x[1]) << ' ' << format_double(dim == 3 ? x[2] : 0.0)
            << '\n';
    }
    out << "CELLS " << ne << ' ' << ne * static_cast<std::size_t>(nv + 1) << '\n';
    for (std::size_t e = 0; e < ne; ++e) {
        out << nv;
        for (int v : mesh.element(e)) out << ' ' << v;
        out << '\n';
    }
    out << "CELL_TYPES " << ne << '\n';
    const char* type = dim == 2 ? "5\n" : "10\n";
    for (std::size_t e = 0; e < ne; ++e) out << type;

    auto write_block = [&](const std::vector<VtkField>& fields, std::size_t count, const char* header) {
        if (fields.empty()) return;
        out << header << ' ' << count << '\n';
        for (const auto& f : fields) {
            const auto expected = static_cast<Eigen::Index>(count) * f.components;
            if (f.values.size() != expected)
                throw InvalidArgument("VTK field '" + f.name + "' has " + std::to_string(f.values.size()) +
                                      " values, expected " + std::to_string(expected));
            if (f.components == 1) {
                out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
                for (Eigen::Index i = 0; i < f.values.size(); ++i) out << format_double(f.values[i]) << '\n';
            } else {
                out << "VECTORS " << f.name << " double\n";
                for (std::size_t i = 0; i < count; ++i) {
                    for (int c = 0; c < 3; ++c) {
                        const double v =
                            c < f.components ? f.values[static_cast<Eigen::Index>(i) * f.components + c] : 0.0;
                        out << (c ? " " : "") << format_double(v);
                    }
                    out << '\n';
                }
            }
        }
    };
    write_block(point_data, nn, "POINT_DATA");
    write_block(cell_data, ne, "CELL_DATA");
    return out.str();
}

std::string csv_record(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        const std::string& f = fields[i];
        if (f.find_first_of(",\"\r\n") == std::string::npos) {
            out += f;
            continue;
        }
        out += '"';
        for (char c : f) {
            if (c == '"') out += '"';
            out += c;
        }
        out += '"';
    }
    out += "\r\n";
    return out;
}

std::string history_csv(const std::vector<HistoryRow>& history) {
    std::string out = std::string(history_header) + "\r\n";
    for (const auto& r : history) {
        out += csv_record({std::to_string(r.iteration), format_double(r.objective), format_double(r.volume_fraction),
                           format_double(r.volume_violation), format_double(r.cavity_value),
                           format_double(r.lambda_vol), format_double(r.lambda_h)});
    }
    return out;
}

} // namespace topopt
