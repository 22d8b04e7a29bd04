#include "topopt/scenario.hpp"

#include "topopt/cavity.hpp"
#include "topopt/errors.hpp"
#include "topopt/io.hpp"
#include "topopt/levelset.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace topopt {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

FieldClassification classify_field(const SimplexMesh& mesh, const Vector& chi, const Vector& p,
                                   const std::vector<std::string>& exit_tags, const ValidationSettings& settings) {
    FieldClassification out;
    out.components = label_voids(mesh, chi, exit_tags, settings.void_threshold);
    const auto& comps = out.components;
    std::vector<double> sum(comps.count(), 0.0);
    std::vector<double> vol(comps.count(), 0.0);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const int c = comps.label[e];
        if (c == VoidComponents::material) continue;
        sum[static_cast<std::size_t>(c)] += element_mean(mesh, p, e) * mesh.volume(e);
        vol[static_cast<std::size_t>(c)] += mesh.volume(e);
    }
    out.mean_p.resize(comps.count());
    for (std::size_t c = 0; c < comps.count(); ++c) {
        out.mean_p[c] = sum[c] / vol[c];
        if (comps.touches_exit[c]) {
            out.max_open_mean = std::max(out.max_open_mean, out.mean_p[c]);
        } else {
            out.min_enclosed_mean = std::min(out.min_enclosed_mean, out.mean_p[c]);
        }
    }
    out.appropriate = out.min_enclosed_mean > settings.enclosed_min && out.max_open_mean < settings.open_max;
    return out;
}

int worker_threads() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("TOPOPT_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) n = static_cast<int>(std::min<long>(v, 1024));
    }
    return std::max(n, 1);
}

ExitStatus combined_status(const std::vector<ScenarioResult>& results) {
    ExitStatus worst = ExitStatus::converged;
    for (const auto& r : results) {
        if (r.status == ExitStatus::error) return ExitStatus::error;
        if (r.status == ExitStatus::not_converged) worst = ExitStatus::not_converged;
    }
    return worst;
}

namespace {

Vector component_labels(const VoidComponents& comps) {
    Vector out(static_cast<Eigen::Index>(comps.label.size()));
    for (std::size_t e = 0; e < comps.label.size(); ++e) out[static_cast<Eigen::Index>(e)] = comps.label[e];
    return out;
}

Json oracle_json(const VoidComponents& comps) {
    return Json{{"components", comps.count()},
                {"enclosed_components", comps.enclosed.size()},
                {"touching_components", comps.touching.size()},
                {"enclosed_volume", comps.enclosed_volume}};
}

void write_summary(const fs::path& dir, const Json& summary, ScenarioResult& result) {
    result.summary_json = summary.dump(2) + "\n";
    write_file_atomic(dir / "summary.json", result.summary_json);
}

Json base_summary(const RunConfig& config) {
    return Json{{"schema", 1}, {"scenario", to_string(config.kind)}};
}

void log_line(const ScenarioOptions& options, const std::string& line) {
    if (options.log) *options.log << line << '\n' << std::flush;
}

Vector design_phi(const SimplexMesh& mesh, const RunConfig& config) {
    return rasterize(mesh, config.geometry);
}

void fictitious_validation(const RunConfig& config, const fs::path& dir, ScenarioResult& result, Json& summary,
                           const ScenarioOptions& options) {
    const SimplexMesh mesh = generate_box_mesh(config.domain);
    const Vector phi = design_phi(mesh, config);
    const Vector chi = characteristic(mesh, phi);
    const FictitiousField field = evaluate_cavity_constraint(mesh, chi, config.cavity, config.solver);
    const FieldClassification cls = classify_field(mesh, chi, field.p, config.cavity.exit_tags, config.validation);

    write_file_atomic(dir / "p_field.vtk",
                      vtk_unstructured_grid(mesh, {{"phi", phi}, {"p", field.p}, {"p_adj", field.p_adjoint}},
                                            {{"chi", chi},
                                             {"td_cavity", field.sensitivity},
                                             {"void_component", component_labels(cls.components)}},
                                            "fictitious field"));

    std::string table = csv_record({"a_p", "epsilon_p", "length", "enclosed_components", "open_components",
                                    "min_enclosed_mean_p", "max_open_mean_p", "verdict"});
    const std::string verdict = cls.appropriate ? "appropriate" : "inappropriate";
    table += csv_record({format_double(config.cavity.void_diffusion), format_double(config.cavity.material_diffusion),
                         format_double(config.cavity.characteristic_length),
                         std::to_string(cls.components.enclosed.size()),
                         std::to_string(cls.components.touching.size()), format_double(cls.min_enclosed_mean),
                         format_double(cls.max_open_mean), verdict});
    write_file_atomic(dir / "verdicts.csv", table);

    Json comps = Json::array();
    for (std::size_t c = 0; c < cls.components.count(); ++c) {
        comps.push_back({{"id", c},
                         {"enclosed", !cls.components.touches_exit[c]},
                         {"volume", cls.components.volumes[c]},
                         {"mean_p", cls.mean_p[c]}});
    }
    summary["a_p"] = config.cavity.void_diffusion;
    summary["epsilon_p"] = config.cavity.material_diffusion;
    summary["J_h"] = field.constraint;
    summary["oracle"] = oracle_json(cls.components);
    summary["min_enclosed_mean_p"] = cls.min_enclosed_mean;
    summary["max_open_mean_p"] = cls.max_open_mean;
    summary["verdict"] = verdict;
    summary["void_components"] = comps;
    log_line(options, "a_p=" + format_double(config.cavity.void_diffusion) +
                          " epsilon_p=" + format_double(config.cavity.material_diffusion) + ": " + verdict);
    result.status = ExitStatus::converged;
}

void oracle_check(const RunConfig& config, const fs::path& dir, ScenarioResult& result, Json& summary,
                  const ScenarioOptions& options) {
    const SimplexMesh mesh = generate_box_mesh(config.domain);
    const Vector phi = design_phi(mesh, config);
    const Vector chi = characteristic(mesh, phi);
    const VoidComponents comps = label_voids(mesh, chi, config.cavity.exit_tags, config.validation.void_threshold);
    write_file_atomic(dir / "voids.vtk", vtk_unstructured_grid(mesh, {{"phi", phi}},
                                                               {{"chi", chi}, {"void_component", component_labels(comps)}},
                                                               "void components"));
    summary.update(oracle_json(comps));
    log_line(options, std::to_string(comps.count()) + " void components, " + std::to_string(comps.enclosed.size()) +
                          " enclosed");
    result.status = ExitStatus::converged;
}

std::vector<VtkField> design_point_fields(const OptimizationState& s, const PhysicsCase& physics, int dim) {
    std::vector<VtkField> f{{"phi", s.level_set.values}};
    if (s.p.size()) f.push_back({"p", s.p});
    if (s.p_adjoint.size()) f.push_back({"p_adj", s.p_adjoint});
    if (s.physics_field.size()) {
        if (std::holds_alternative<ComplianceCase>(physics)) f.push_back({"u", s.physics_field, dim});
        if (std::holds_alternative<ThermalCase>(physics)) f.push_back({"temp", s.physics_field});
    }
    return f;
}

void write_design(const fs::path& path, const SimplexMesh& mesh, const OptimizationState& s,
                  const OptimizationProblem& problem, const VoidComponents* comps) {
    std::vector<VtkField> cells{{"chi", s.chi}};
    if (s.cavity_sensitivity.size()) cells.push_back({"td_cavity", s.cavity_sensitivity});
    if (comps) cells.push_back({"void_component", component_labels(*comps)});
    write_file_atomic(path, vtk_unstructured_grid(mesh, design_point_fields(s, problem.physics, mesh.dim()), cells,
                                                  "design iteration " + std::to_string(s.iteration)));
}

void optimization(const RunConfig& config, const ScenarioOptions& options, const fs::path& dir,
                  ScenarioResult& result, Json& summary) {
    StopCriteria stop = config.stop;
    if (options.max_iterations >= 0) stop.max_iterations = options.max_iterations;
    const int every = options.snapshot_every >= 0 ? options.snapshot_every : config.snapshot_every;

    const OptimizationProblem problem = build_problem(config);
    const SimplexMesh& mesh = *problem.mesh;
    const double domain = mesh.total_volume();

    auto observer = [&](const OptimizationState& s) {
        const HistoryRow& r = s.history.back();
        char line[200];
        std::snprintf(line, sizeof line, "iter %4d  objective %.6e  volume %.4f  J_h %.3e  lambda_h %.3g",
                      r.iteration, r.objective, r.volume_fraction, r.cavity_value / domain, r.lambda_h);
        log_line(options, line);
        if (every > 0 && s.iteration % every == 0) {
            char name[32];
            std::snprintf(name, sizeof name, "design_%04d.vtk", s.iteration);
            write_design(dir / name, mesh, s, problem, nullptr);
        }
    };
    const OptimizationState state = run(problem, stop, observer);

    write_file_atomic(dir / "history.csv", history_csv(state.history));
    const VoidComponents comps = label_voids(mesh, state.chi, config.cavity.exit_tags, config.validation.void_threshold);
    write_design(dir / "design_final.vtk", mesh, state, problem, &comps);

    const HistoryRow& last = state.history.back();
    summary["converged"] = state.converged;
    summary["iterations"] = last.iteration;
    summary["cavity_constraint"] = config.cavity_enabled;
    summary["final_objective"] = last.objective;
    summary["volume_fraction"] = last.volume_fraction;
    summary["volume_limit_fraction"] = config.effective_volume_fraction();
    summary["G_vol"] = last.volume_violation;
    summary["J_h"] = last.cavity_value;
    summary["J_h_normalized"] = last.cavity_value / domain;
    summary["lambda_vol"] = state.lambda_vol;
    summary["lambda_h"] = state.lambda_h;
    summary["oracle"] = oracle_json(comps);
    summary["oracle_verdict"] = comps.enclosed.empty() ? "no enclosed voids" : "enclosed voids present";
    result.status = state.converged ? ExitStatus::converged : ExitStatus::not_converged;
}

std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_' ||
                             c == '+' || c == '=')
                                ? c
                                : '_';
    return out;
}

} // namespace

ScenarioResult run_scenario(const RunConfig& config, const ScenarioOptions& options) {
    ScenarioResult result;
    result.output_dir = config.output_dir;
    const auto t0 = std::chrono::steady_clock::now();
    Json summary = base_summary(config);
    try {
        config.validate();
        fs::create_directories(result.output_dir);
        switch (config.kind) {
        case ScenarioKind::fictitious_validation:
            fictitious_validation(config, result.output_dir, result, summary, options);
            break;
        case ScenarioKind::oracle_check:
            oracle_check(config, result.output_dir, result, summary, options);
            break;
        case ScenarioKind::compliance_opt:
        case ScenarioKind::thermal_opt:
            optimization(config, options, result.output_dir, result, summary);
            break;
        }
        const bool optimizing = config.kind == ScenarioKind::compliance_opt || config.kind == ScenarioKind::thermal_opt;
        summary["status"] = !optimizing ? "ok" : result.status == ExitStatus::converged ? "converged" : "not converged";
    } catch (const std::exception& e) {
        result.status = ExitStatus::error;
        result.error = e.what();
        summary["status"] = "error";
        summary["error"] = result.error;
    }
    summary["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    try {
        write_summary(result.output_dir, summary, result);
    } catch (const std::exception& e) {
        if (result.status != ExitStatus::error) {
            result.status = ExitStatus::error;
            result.error = e.what();
        }
    }
    return result;
}

std::vector<ScenarioResult> run_sweep(const RunConfig& config, const std::string& param,
                                      const std::vector<std::string>& values, int threads,
                                      const ScenarioOptions& options) {
    if (values.empty()) throw ConfigurationError("sweep needs at least one value");
    // Reject bad values before any run starts.
    std::vector<RunConfig> configs;
    for (const auto& v : values) {
        RunConfig c = override_parameter(config, param, v);
        c.output_dir = (fs::path(config.output_dir) / sanitize(param + "=" + v)).string();
        configs.push_back(std::move(c));
    }

    std::vector<ScenarioResult> results(configs.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            std::ostringstream buffer;
            ScenarioOptions local = options;
            local.log = options.log ? &buffer : nullptr;
            results[i] = run_scenario(configs[i], local);
            if (options.log) {
                std::lock_guard lock(log_mutex);
                *options.log << "[" << param << "=" << values[i] << "]\n" << buffer.str();
                if (results[i].status == ExitStatus::error) *options.log << "error: " << results[i].error << '\n';
                options.log->flush();
            }
        }
    };
    const auto n = static_cast<std::size_t>(std::clamp(threads, 1, static_cast<int>(configs.size())));
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
        worker();
    }

    std::string table = csv_record({param, "status", "final_objective", "J_h", "enclosed_components", "verdict",
                                    "output_dir"});
    for (std::size_t i = 0; i < results.size(); ++i) {
        const ScenarioResult& r = results[i];
        Json s = r.summary_json.empty() ? Json::object() : Json::parse(r.summary_json);
        auto num = [&](const char* key) {
            return s.contains(key) && s[key].is_number() ? format_double(s[key].get<double>()) : std::string();
        };
        std::string enclosed;
        if (s.contains("oracle")) enclosed = std::to_string(s["oracle"]["enclosed_components"].get<long>());
        else if (s.contains("enclosed_components")) enclosed = std::to_string(s["enclosed_components"].get<long>());
        table += csv_record({values[i], s.value("status", std::string("error")), num("final_objective"), num("J_h"),
                             enclosed, s.value("verdict", std::string()), r.output_dir.string()});
    }
    write_file_atomic(fs::path(config.output_dir) / "sweep.csv", table);
    return results;
}

} // namespace topopt
