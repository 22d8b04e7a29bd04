#pragma once

#include "topopt/fem.hpp"
#include "topopt/optimizer.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace topopt {

/// Writes to a sibling temp file and renames it over `path`, so readers never
/// see a partial file. Creates missing parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

struct VtkField {
    std::string name;
    Vector values;
    int components = 1; // 1 (scalar) or dim (vector, padded to 3 in the file)
};

/// Legacy VTK ASCII unstructured grid (triangles or tetrahedra).
std::string vtk_unstructured_grid(const SimplexMesh& mesh, const std::vector<VtkField>& point_data,
                                  const std::vector<VtkField>& cell_data, std::string_view title = "topopt");

/// One RFC-4180 record terminated by CRLF; fields with commas, quotes or line
/// breaks are quoted.
std::string csv_record(const std::vector<std::string>& fields);

/// Shortest text that reads back to the same double.
std::string format_double(double value);

inline constexpr const char* history_header = "iter,objective,volume_fraction,G_vol,J_h,lambda_vol,lambda_h";

std::string history_csv(const std::vector<HistoryRow>& history);

} // namespace topopt
