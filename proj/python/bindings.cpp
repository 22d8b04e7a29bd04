#include "topopt/config.hpp"
#include "topopt/errors.hpp"
#include "topopt/levelset.hpp"
#include "topopt/oracle.hpp"
#include "topopt/scenario.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace topopt;

namespace {

// Fields of a config's fixed geometry: level set, element chi, fictitious
// field and flood-fill labels.
py::dict geometry_fields(const RunConfig& config) {
    config.validate();
    const SimplexMesh mesh = generate_box_mesh(config.domain);
    const Vector phi = rasterize(mesh, config.geometry);
    const Vector chi = characteristic(mesh, phi);
    const Vector p = solve_fictitious(mesh, chi, config.cavity, config.solver);
    const VoidComponents comps = label_voids(mesh, chi, config.cavity.exit_tags, config.validation.void_threshold);
    Eigen::MatrixXd nodes(static_cast<Eigen::Index>(mesh.num_nodes()), 3);
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i)
        for (int d = 0; d < 3; ++d) nodes(static_cast<Eigen::Index>(i), d) = mesh.node(i)[static_cast<std::size_t>(d)];
    py::dict out;
    out["nodes"] = nodes;
    out["phi"] = phi;
    out["chi"] = chi;
    out["p"] = p;
    out["J_h"] = constraint_value(mesh, p);
    out["labels"] = comps.label;
    out["enclosed"] = comps.enclosed;
    out["touching"] = comps.touching;
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Level-set topology optimization with a no-enclosed-cavity constraint";

    py::register_exception<ConfigurationError>(m, "ConfigurationError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    py::class_<RunConfig>(m, "Config")
        .def_property_readonly("kind", [](const RunConfig& c) { return to_string(c.kind); })
        .def_readwrite("output_dir", &RunConfig::output_dir)
        .def_property_readonly("dim", [](const RunConfig& c) { return c.domain.dim; })
        .def("serialize", &serialize_config)
        .def("override", [](const RunConfig& c, const std::string& key, const std::string& value) {
            return override_parameter(c, key, value);
        })
        .def("__eq__", [](const RunConfig& a, const RunConfig& b) { return a == b; });

    m.def("parse_config", [](const std::string& text) { return parse_config(text); });
    m.def("load_config", &load_config);

    m.def(
        "run",
        [](const RunConfig& config, int max_iterations, int snapshot_every, bool verbose) {
            std::ostringstream log;
            ScenarioOptions o;
            o.max_iterations = max_iterations;
            o.snapshot_every = snapshot_every;
            o.log = verbose ? &log : nullptr;
            ScenarioResult r;
            {
                py::gil_scoped_release release;
                r = run_scenario(config, o);
            }
            py::dict out;
            out["status"] = static_cast<int>(r.status);
            out["summary_json"] = r.summary_json;
            out["error"] = r.error;
            out["output_dir"] = r.output_dir.string();
            out["log"] = log.str();
            return out;
        },
        py::arg("config"), py::arg("max_iterations") = -1, py::arg("snapshot_every") = -1,
        py::arg("verbose") = false);

    m.def("geometry_fields", &geometry_fields, py::arg("config"));
}
