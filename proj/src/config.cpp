#include "topopt/config.hpp"

#include "topopt/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace topopt {

namespace pt = boost::property_tree;

std::string to_string(ScenarioKind kind) {
    switch (kind) {
    case ScenarioKind::fictitious_validation: return "fictitious-validation";
    case ScenarioKind::compliance_opt: return "compliance-opt";
    case ScenarioKind::thermal_opt: return "thermal-opt";
    case ScenarioKind::oracle_check: return "oracle-check";
    }
    return "compliance-opt";
}

std::optional<ScenarioKind> parse_scenario_kind(std::string_view text) {
    for (auto k : {ScenarioKind::fictitious_validation, ScenarioKind::compliance_opt, ScenarioKind::thermal_opt,
                   ScenarioKind::oracle_check}) {
        if (text == to_string(k)) return k;
    }
    return std::nullopt;
}

bool ComplianceSettings::operator==(const ComplianceSettings& o) const {
    if (material.youngs_modulus != o.material.youngs_modulus || material.poisson_ratio != o.material.poisson_ratio ||
        ersatz != o.ersatz || fixed_tags != o.fixed_tags || tractions.size() != o.tractions.size())
        return false;
    for (std::size_t i = 0; i < tractions.size(); ++i) {
        if (tractions[i].tags != o.tractions[i].tags || tractions[i].traction != o.tractions[i].traction) return false;
    }
    return true;
}

bool RunConfig::operator==(const RunConfig& o) const {
    return kind == o.kind && output_dir == o.output_dir && snapshot_every == o.snapshot_every &&
           domain == o.domain && compliance == o.compliance && thermal == o.thermal &&
           cavity_enabled == o.cavity_enabled && cavity == o.cavity && evolution == o.evolution &&
           initial == o.initial && stop == o.stop && multipliers == o.multipliers &&
           volume_fraction == o.volume_fraction && non_design == o.non_design &&
           solver.tolerance == o.solver.tolerance && solver.max_iterations == o.solver.max_iterations &&
           validation == o.validation && geometry == o.geometry && has_geometry == o.has_geometry;
}

double RunConfig::effective_volume_fraction() const {
    if (volume_fraction) return *volume_fraction;
    return kind == ScenarioKind::thermal_opt ? 0.4 : 0.3;
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::string> words(std::string_view s) {
    std::istringstream in{std::string(s)};
    std::vector<std::string> out;
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join(const std::vector<std::string>& items, const char* sep = " ") {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

// Line number of every "key = value" and "[section]" in the source text.
class LineIndex {
public:
    explicit LineIndex(std::string_view text) {
        std::string section;
        int line = 0;
        std::size_t start = 0;
        while (start <= text.size()) {
            const auto end = text.find('\n', start);
            const std::string row = trim(text.substr(start, end == std::string_view::npos ? std::string_view::npos
                                                                                          : end - start));
            ++line;
            if (!row.empty() && row[0] == '[') {
                section = trim(std::string_view(row).substr(1, row.find(']') - 1));
                lines_[{section, ""}] = line;
            } else if (!row.empty() && row[0] != '#' && row[0] != ';') {
                const auto eq = row.find('=');
                if (eq != std::string::npos) lines_[{section, trim(std::string_view(row).substr(0, eq))}] = line;
            }
            if (end == std::string_view::npos) break;
            start = end + 1;
        }
    }

    int line(const std::string& section, const std::string& key = "") const {
        auto it = lines_.find({section, key});
        return it == lines_.end() ? 0 : it->second;
    }

private:
    std::map<std::pair<std::string, std::string>, int> lines_;
};

// Reads one section, remembering which keys were consumed so leftovers can
// be reported.
class Section {
public:
    Section(const pt::ptree* tree, std::string name, const LineIndex& lines)
        : tree_(tree), name_(std::move(name)), lines_(lines) {}

    bool present() const { return tree_ != nullptr; }

    std::optional<std::string> raw(const std::string& key) {
        used_.insert(key);
        if (!tree_) return std::nullopt;
        auto it = tree_->find(key);
        if (it == tree_->not_found()) return std::nullopt;
        return trim(it->second.data());
    }

    [[noreturn]] void fail(const std::string& key, const std::string& message) const {
        const int line = lines_.line(name_, key);
        std::string where = line > 0 ? "line " + std::to_string(line) + ": " : std::string();
        throw ConfigurationError(where + name_ + "." + key + ": " + message);
    }

    double number(const std::string& key, double fallback) {
        auto v = raw(key);
        if (!v) return fallback;
        return to_number(key, *v);
    }

    int integer(const std::string& key, int fallback) {
        auto v = raw(key);
        if (!v) return fallback;
        try {
            std::size_t used = 0;
            const int r = std::stoi(*v, &used);
            if (used != v->size()) throw std::invalid_argument("trailing");
            return r;
        } catch (const std::exception&) {
            fail(key, "expected an integer, got '" + *v + "'");
        }
    }

    bool boolean(const std::string& key, bool fallback) {
        auto v = raw(key);
        if (!v) return fallback;
        if (*v == "true" || *v == "yes" || *v == "on" || *v == "1") return true;
        if (*v == "false" || *v == "no" || *v == "off" || *v == "0") return false;
        fail(key, "expected true or false, got '" + *v + "'");
    }

    std::string text(const std::string& key, const std::string& fallback) {
        auto v = raw(key);
        return v ? *v : fallback;
    }

    std::vector<std::string> list(const std::string& key, const std::vector<std::string>& fallback) {
        auto v = raw(key);
        return v ? words(*v) : fallback;
    }

    std::vector<double> numbers(const std::string& key, std::size_t count) {
        auto v = raw(key);
        if (!v) return {};
        auto w = words(*v);
        if (w.size() != count) fail(key, "expected " + std::to_string(count) + " numbers");
        std::vector<double> out;
        for (const auto& s : w) out.push_back(to_number(key, s));
        return out;
    }

    double to_number(const std::string& key, const std::string& s) const {
        try {
            std::size_t used = 0;
            const double r = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument("trailing");
            return r;
        } catch (const std::exception&) {
            fail(key, "expected a number, got '" + s + "'");
        }
    }

    /// Keys of the section in file order, for sections with free-form keys.
    std::vector<std::string> keys() const {
        std::vector<std::string> out;
        if (tree_) {
            for (const auto& kv : *tree_) out.push_back(kv.first);
        }
        return out;
    }

    void mark_used(const std::string& key) { used_.insert(key); }

    void reject_unknown() const {
        if (!tree_) return;
        for (const auto& kv : *tree_) {
            if (!kv.second.empty()) fail(kv.first, "nested keys are not supported");
            if (!used_.count(kv.first)) fail(kv.first, "unknown key");
        }
    }

    const std::string& name() const { return name_; }

private:
    const pt::ptree* tree_;
    std::string name_;
    const LineIndex& lines_;
    std::set<std::string> used_;
};

int axis_index(char c) {
    switch (c) {
    case 'x': return 0;
    case 'y': return 1;
    case 'z': return 2;
    default: return -1;
    }
}

TagRule parse_tag_rule(Section& sec, const std::string& name, const std::string& text) {
    auto w = words(text);
    if (w.empty()) sec.fail(name, "empty tag rule");
    TagRule rule;
    rule.name = name;
    auto face = parse_box_face(w[0]);
    if (!face) sec.fail(name, "unknown face '" + w[0] + "' (expected any, xmin, xmax, ymin, ymax, zmin, zmax)");
    rule.face = *face;
    for (std::size_t i = 1; i < w.size(); ++i) {
        const auto& item = w[i];
        const auto eq = item.find('=');
        const auto colon = item.find(':');
        if (eq != 1 || colon == std::string::npos || axis_index(item[0]) < 0)
            sec.fail(name, "window '" + item + "' must look like x=lo:hi");
        const auto a = static_cast<std::size_t>(axis_index(item[0]));
        const std::string lo = item.substr(2, colon - 2);
        const std::string hi = item.substr(colon + 1);
        if (!lo.empty()) rule.window_lower[a] = sec.to_number(name, lo);
        if (!hi.empty()) rule.window_upper[a] = sec.to_number(name, hi);
    }
    return rule;
}

std::string format_tag_rule(const TagRule& rule) {
    std::string out = to_string(rule.face);
    const char axes[] = {'x', 'y', 'z'};
    for (std::size_t a = 0; a < 3; ++a) {
        const bool lo = std::isfinite(rule.window_lower[a]);
        const bool hi = std::isfinite(rule.window_upper[a]);
        if (!lo && !hi) continue;
        out += ' ';
        out += axes[a];
        out += '=';
        if (lo) out += fmt(rule.window_lower[a]);
        out += ':';
        if (hi) out += fmt(rule.window_upper[a]);
    }
    return out;
}

std::string format_point(const Point& p, int dim) {
    std::vector<std::string> parts;
    for (int a = 0; a < dim; ++a) parts.push_back(fmt(p[static_cast<std::size_t>(a)]));
    return join(parts);
}

void check_tags(const RunConfig& c, const std::vector<std::string>& tags, const std::string& field) {
    for (const auto& t : tags) {
        if (t == SimplexMesh::default_tag) continue;
        const bool known = std::any_of(c.domain.tag_rules.begin(), c.domain.tag_rules.end(),
                                       [&](const TagRule& r) { return r.name == t; });
        if (!known) throw ConfigurationError(field + ": tag '" + t + "' is not defined in [tags]");
    }
}

const std::set<std::string> known_sections = {"scenario", "domain",    "tags",       "compliance", "thermal",
                                              "cavity",   "evolution", "optimizer",  "solver",     "validation",
                                              "geometry"};

} // namespace

void RunConfig::validate() const {
    try {
        domain.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigurationError(std::string("domain: ") + e.what());
    }
    if (snapshot_every < 0) throw ConfigurationError("scenario.snapshot_every must be >= 0");
    if (output_dir.empty()) throw ConfigurationError("scenario.output must not be empty");

    const double vf = effective_volume_fraction();
    if (!(vf > 0.0 && vf <= 1.0)) throw ConfigurationError("optimizer.volume_fraction must be in (0, 1]");
    auto wrap = [](const std::string& section, auto&& fn) {
        try {
            fn();
        } catch (const InvalidArgument& e) {
            throw ConfigurationError(section + ": " + e.what());
        }
    };
    wrap("evolution", [&] { evolution.validate(); });
    wrap("optimizer", [&] { stop.validate(); });
    if (!(multipliers.volume_step > 0.0 && multipliers.volume_step < 1.0))
        throw ConfigurationError("optimizer.volume_step must be in (0, 1)");
    if (!(multipliers.cavity_rate >= 0.0)) throw ConfigurationError("optimizer.cavity_rate must be nonnegative");
    if (!(multipliers.cavity_cap >= 0.0)) throw ConfigurationError("optimizer.cavity_cap must be nonnegative");
    if (!(solver.tolerance > 0.0)) throw ConfigurationError("solver.tolerance must be positive");
    if (solver.max_iterations < 0) throw ConfigurationError("solver.max_iterations must be >= 0");

    wrap("cavity", [&] { cavity.validate(); });
    check_tags(*this, cavity.exit_tags, "cavity.exit_tags");
    check_tags(*this, evolution.material_tags, "evolution.material_tags");

    if (kind == ScenarioKind::compliance_opt) {
        wrap("compliance", [&] { compliance.material.validate(); });
        if (!(compliance.ersatz > 0.0 && compliance.ersatz < 1.0))
            throw ConfigurationError("compliance.ersatz must be in (0, 1)");
        if (compliance.fixed_tags.empty()) throw ConfigurationError("compliance.fixed: at least one tag required");
        if (compliance.tractions.empty()) throw ConfigurationError("compliance.traction: at least one load required");
        check_tags(*this, compliance.fixed_tags, "compliance.fixed");
        for (const auto& t : compliance.tractions) check_tags(*this, t.tags, "compliance.traction");
    }
    if (kind == ScenarioKind::thermal_opt) {
        if (!(thermal.material_conductivity > thermal.void_conductivity && thermal.void_conductivity > 0.0))
            throw ConfigurationError("thermal: need kappa_material > kappa_void > 0");
        if (thermal.temperature_tags.empty())
            throw ConfigurationError("thermal.temperature_tags: at least one tag required");
        check_tags(*this, thermal.temperature_tags, "thermal.temperature_tags");
    }
    const bool needs_geometry = kind == ScenarioKind::fictitious_validation || kind == ScenarioKind::oracle_check ||
                                initial == InitialDesign::geometry;
    if (needs_geometry && !has_geometry) throw ConfigurationError("geometry: this scenario needs a [geometry] section");
    if (!(validation.enclosed_min > validation.open_max))
        throw ConfigurationError("validation: enclosed_min must exceed open_max");
    if (!(validation.void_threshold > 0.0 && validation.void_threshold < 1.0))
        throw ConfigurationError("validation.void_threshold must be in (0, 1)");
    for (const auto& b : non_design) {
        for (int a = 0; a < domain.dim; ++a) {
            if (!(b.upper[static_cast<std::size_t>(a)] >= b.lower[static_cast<std::size_t>(a)]))
                throw ConfigurationError("optimizer.non_design: box upper corner below lower corner");
        }
    }
}

RunConfig parse_config(std::string_view text) {
    pt::ptree tree;
    {
        std::istringstream in{std::string(text)};
        try {
            pt::read_ini(in, tree);
        } catch (const pt::ini_parser_error& e) {
            throw ConfigurationError("line " + std::to_string(e.line()) + ": " + e.message());
        }
    }
    const LineIndex lines(text);
    for (const auto& kv : tree) {
        if (kv.second.empty() && !kv.second.data().empty())
            throw ConfigurationError("line " + std::to_string(lines.line("", kv.first)) + ": key '" + kv.first +
                                     "' outside of any section");
        if (!known_sections.count(kv.first))
            throw ConfigurationError("line " + std::to_string(lines.line(kv.first)) + ": unknown section [" +
                                     kv.first + "]");
    }
    auto section = [&](const std::string& name) {
        auto it = tree.find(name);
        return Section(it == tree.not_found() ? nullptr : &it->second, name, lines);
    };

    RunConfig c;

    Section scen = section("scenario");
    {
        const std::string kind = scen.text("kind", to_string(c.kind));
        auto k = parse_scenario_kind(kind);
        if (!k) scen.fail("kind", "unknown scenario '" + kind + "'");
        c.kind = *k;
        c.output_dir = scen.text("output", c.output_dir);
        c.snapshot_every = scen.integer("snapshot_every", c.snapshot_every);
        scen.reject_unknown();
    }

    Section dom = section("domain");
    {
        c.domain.dim = dom.integer("dim", 2);
        if (c.domain.dim != 2 && c.domain.dim != 3) dom.fail("dim", "must be 2 or 3");
        const auto d = static_cast<std::size_t>(c.domain.dim);
        c.domain.lower = {0.0, 0.0, 0.0};
        c.domain.upper = {1.0, 1.0, c.domain.dim == 3 ? 1.0 : 0.0};
        c.domain.subdivisions = {1, 1, 1};
        if (auto v = dom.numbers("lower", d); !v.empty()) std::copy(v.begin(), v.end(), c.domain.lower.begin());
        if (auto v = dom.numbers("upper", d); !v.empty()) std::copy(v.begin(), v.end(), c.domain.upper.begin());
        if (auto v = dom.numbers("subdivisions", d); !v.empty()) {
            for (std::size_t a = 0; a < d; ++a) {
                if (v[a] != std::floor(v[a]) || v[a] < 1) dom.fail("subdivisions", "must be positive integers");
                c.domain.subdivisions[a] = static_cast<int>(v[a]);
            }
        }
        dom.reject_unknown();
    }

    Section tags = section("tags");
    for (const auto& name : tags.keys()) {
        tags.mark_used(name);
        if (name == SimplexMesh::default_tag) tags.fail(name, "the name 'default' is reserved");
        for (const auto& alt : split(*tags.raw(name), '|')) c.domain.tag_rules.push_back(parse_tag_rule(tags, name, alt));
    }
    tags.reject_unknown();

    std::vector<std::string> all_tags{SimplexMesh::default_tag};
    for (const auto& r : c.domain.tag_rules) {
        if (std::find(all_tags.begin(), all_tags.end(), r.name) == all_tags.end()) all_tags.push_back(r.name);
    }

    Section comp = section("compliance");
    {
        c.compliance.material.youngs_modulus = comp.number("young", c.compliance.material.youngs_modulus);
        c.compliance.material.poisson_ratio = comp.number("poisson", c.compliance.material.poisson_ratio);
        c.compliance.ersatz = comp.number("ersatz", c.compliance.ersatz);
        c.compliance.fixed_tags = comp.list("fixed", {});
        if (auto v = comp.raw("traction")) {
            for (const auto& item : split(*v, '|')) {
                auto w = words(item);
                if (w.size() != static_cast<std::size_t>(c.domain.dim) + 1)
                    comp.fail("traction", "expected '<tag> <t_x> <t_y>" + std::string(c.domain.dim == 3 ? " <t_z>'" : "'"));
                TractionLoad load;
                load.tags = {w[0]};
                for (std::size_t a = 0; a + 1 < w.size(); ++a) load.traction[a] = comp.to_number("traction", w[a + 1]);
                c.compliance.tractions.push_back(load);
            }
        }
        comp.reject_unknown();
    }

    Section th = section("thermal");
    {
        c.thermal.material_conductivity = th.number("kappa_material", c.thermal.material_conductivity);
        c.thermal.void_conductivity = th.number("kappa_void", c.thermal.void_conductivity);
        c.thermal.heat_source = th.number("heat_source", c.thermal.heat_source);
        c.thermal.temperature_tags = th.list("temperature_tags", {});
        c.thermal.boundary_temperature = th.number("temperature", c.thermal.boundary_temperature);
        th.reject_unknown();
    }

    Section cav = section("cavity");
    {
        c.cavity_enabled = cav.boolean("enabled", c.cavity_enabled);
        c.cavity.void_diffusion = cav.number("a_p", c.cavity.void_diffusion);
        c.cavity.material_diffusion = cav.number("epsilon_p", c.cavity.material_diffusion);
        c.cavity.characteristic_length = cav.number("length", c.cavity.characteristic_length);
        c.cavity.exit_tags = cav.list("exit_tags", all_tags);
        c.cavity.heaviside_threshold = cav.number("heaviside_threshold", c.cavity.heaviside_threshold);
        cav.reject_unknown();
    }

    Section evo = section("evolution");
    {
        c.evolution.regularization = evo.number("tau", c.evolution.regularization);
        c.evolution.proportionality = evo.number("k", c.evolution.proportionality);
        c.evolution.time_step = evo.number("dt", c.evolution.time_step);
        c.evolution.material_tags = evo.list("material_tags", {});
        const std::string init = evo.text("initial", "full");
        if (init == "full") {
            c.initial = InitialDesign::full;
        } else if (init == "geometry") {
            c.initial = InitialDesign::geometry;
        } else {
            evo.fail("initial", "expected 'full' or 'geometry'");
        }
        evo.reject_unknown();
    }

    Section opt = section("optimizer");
    {
        c.stop.max_iterations = opt.integer("max_iterations", c.stop.max_iterations);
        c.stop.window = opt.integer("window", c.stop.window);
        c.stop.objective_tolerance = opt.number("objective_tolerance", c.stop.objective_tolerance);
        c.stop.volume_tolerance = opt.number("volume_tolerance", c.stop.volume_tolerance);
        c.stop.cavity_tolerance = opt.number("cavity_tolerance", c.stop.cavity_tolerance);
        if (auto v = opt.raw("volume_fraction")) c.volume_fraction = opt.to_number("volume_fraction", *v);
        c.multipliers.volume_step = opt.number("volume_step", c.multipliers.volume_step);
        c.multipliers.cavity_rate = opt.number("cavity_rate", c.multipliers.cavity_rate);
        c.multipliers.cavity_cap = opt.number("cavity_cap", c.multipliers.cavity_cap);
        if (auto v = opt.raw("non_design")) {
            for (const auto& item : split(*v, '|')) {
                auto w = words(item);
                const auto d = static_cast<std::size_t>(c.domain.dim);
                if (w.size() != 2 * d + 1 || w[0] != "box")
                    opt.fail("non_design", "expected 'box' followed by " + std::to_string(2 * d) + " numbers");
                NonDesignBox b;
                for (std::size_t a = 0; a < d; ++a) {
                    b.lower[a] = opt.to_number("non_design", w[1 + a]);
                    b.upper[a] = opt.to_number("non_design", w[1 + d + a]);
                }
                c.non_design.push_back(b);
            }
        }
        opt.reject_unknown();
    }

    Section sol = section("solver");
    {
        c.solver.tolerance = sol.number("tolerance", c.solver.tolerance);
        c.solver.max_iterations = sol.integer("max_iterations", c.solver.max_iterations);
        sol.reject_unknown();
    }

    Section val = section("validation");
    {
        c.validation.enclosed_min = val.number("enclosed_min", c.validation.enclosed_min);
        c.validation.open_max = val.number("open_max", c.validation.open_max);
        c.validation.void_threshold = val.number("void_threshold", c.validation.void_threshold);
        val.reject_unknown();
    }

    Section geo = section("geometry");
    if (geo.present()) {
        c.has_geometry = true;
        const std::string base = geo.text("base", "void");
        if (base != "void" && base != "material") geo.fail("base", "expected 'void' or 'material'");
        c.geometry.base_material = base == "material";
        for (const auto& key : geo.keys()) {
            if (key.rfind("shape", 0) != 0) continue;
            geo.mark_used(key);
            try {
                c.geometry.shapes.push_back(parse_shape(*geo.raw(key), c.domain.dim));
            } catch (const InvalidArgument& e) {
                geo.fail(key, e.what());
            }
        }
        geo.reject_unknown();
    }

    c.validate();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigurationError("cannot open config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    try {
        return parse_config(text.str());
    } catch (const ConfigurationError& e) {
        throw ConfigurationError(path + ": " + e.what());
    }
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream out;
    const int d = c.domain.dim;
    out << "[scenario]\n"
        << "kind = " << to_string(c.kind) << "\n"
        << "output = " << c.output_dir << "\n"
        << "snapshot_every = " << c.snapshot_every << "\n\n";

    out << "[domain]\n"
        << "dim = " << d << "\n"
        << "lower = " << format_point(c.domain.lower, d) << "\n"
        << "upper = " << format_point(c.domain.upper, d) << "\n"
        << "subdivisions =";
    for (int a = 0; a < d; ++a) out << ' ' << c.domain.subdivisions[static_cast<std::size_t>(a)];
    out << "\n\n";

    if (!c.domain.tag_rules.empty()) {
        out << "[tags]\n";
        std::vector<std::string> order;
        for (const auto& r : c.domain.tag_rules) {
            if (std::find(order.begin(), order.end(), r.name) == order.end()) order.push_back(r.name);
        }
        for (const auto& name : order) {
            std::vector<std::string> alts;
            for (const auto& r : c.domain.tag_rules) {
                if (r.name == name) alts.push_back(format_tag_rule(r));
            }
            out << name << " = " << join(alts, " | ") << "\n";
        }
        out << "\n";
    }

    out << "[compliance]\n"
        << "young = " << fmt(c.compliance.material.youngs_modulus) << "\n"
        << "poisson = " << fmt(c.compliance.material.poisson_ratio) << "\n"
        << "ersatz = " << fmt(c.compliance.ersatz) << "\n";
    if (!c.compliance.fixed_tags.empty()) out << "fixed = " << join(c.compliance.fixed_tags) << "\n";
    if (!c.compliance.tractions.empty()) {
        std::vector<std::string> items;
        for (const auto& t : c.compliance.tractions) {
            std::string s = t.tags.empty() ? std::string() : t.tags.front();
            for (int a = 0; a < d; ++a) s += " " + fmt(t.traction[static_cast<std::size_t>(a)]);
            items.push_back(s);
        }
        out << "traction = " << join(items, " | ") << "\n";
    }
    out << "\n";

    out << "[thermal]\n"
        << "kappa_material = " << fmt(c.thermal.material_conductivity) << "\n"
        << "kappa_void = " << fmt(c.thermal.void_conductivity) << "\n"
        << "heat_source = " << fmt(c.thermal.heat_source) << "\n";
    if (!c.thermal.temperature_tags.empty()) out << "temperature_tags = " << join(c.thermal.temperature_tags) << "\n";
    out << "temperature = " << fmt(c.thermal.boundary_temperature) << "\n\n";

    out << "[cavity]\n"
        << "enabled = " << (c.cavity_enabled ? "true" : "false") << "\n"
        << "a_p = " << fmt(c.cavity.void_diffusion) << "\n"
        << "epsilon_p = " << fmt(c.cavity.material_diffusion) << "\n"
        << "length = " << fmt(c.cavity.characteristic_length) << "\n"
        << "exit_tags = " << join(c.cavity.exit_tags) << "\n"
        << "heaviside_threshold = " << fmt(c.cavity.heaviside_threshold) << "\n\n";

    out << "[evolution]\n"
        << "tau = " << fmt(c.evolution.regularization) << "\n"
        << "k = " << fmt(c.evolution.proportionality) << "\n"
        << "dt = " << fmt(c.evolution.time_step) << "\n";
    if (!c.evolution.material_tags.empty()) out << "material_tags = " << join(c.evolution.material_tags) << "\n";
    out << "initial = " << (c.initial == InitialDesign::full ? "full" : "geometry") << "\n\n";

    out << "[optimizer]\n"
        << "max_iterations = " << c.stop.max_iterations << "\n"
        << "window = " << c.stop.window << "\n"
        << "objective_tolerance = " << fmt(c.stop.objective_tolerance) << "\n"
        << "volume_tolerance = " << fmt(c.stop.volume_tolerance) << "\n"
        << "cavity_tolerance = " << fmt(c.stop.cavity_tolerance) << "\n";
    if (c.volume_fraction) out << "volume_fraction = " << fmt(*c.volume_fraction) << "\n";
    out << "volume_step = " << fmt(c.multipliers.volume_step) << "\n"
        << "cavity_rate = " << fmt(c.multipliers.cavity_rate) << "\n"
        << "cavity_cap = " << fmt(c.multipliers.cavity_cap) << "\n";
    if (!c.non_design.empty()) {
        std::vector<std::string> items;
        for (const auto& b : c.non_design) items.push_back("box " + format_point(b.lower, d) + " " + format_point(b.upper, d));
        out << "non_design = " << join(items, " | ") << "\n";
    }
    out << "\n";

    out << "[solver]\n"
        << "tolerance = " << fmt(c.solver.tolerance) << "\n"
        << "max_iterations = " << c.solver.max_iterations << "\n\n";

    out << "[validation]\n"
        << "enclosed_min = " << fmt(c.validation.enclosed_min) << "\n"
        << "open_max = " << fmt(c.validation.open_max) << "\n"
        << "void_threshold = " << fmt(c.validation.void_threshold) << "\n";

    if (c.has_geometry) {
        out << "\n[geometry]\n"
            << "base = " << (c.geometry.base_material ? "material" : "void") << "\n";
        for (std::size_t i = 0; i < c.geometry.shapes.size(); ++i)
            out << "shape" << (i + 1) << " = " << format_shape(c.geometry.shapes[i], d) << "\n";
    }
    return out.str();
}

RunConfig override_parameter(const RunConfig& config, std::string_view dotted_key, std::string_view value) {
    const auto dot = dotted_key.find('.');
    if (dot == std::string_view::npos || dot == 0 || dot + 1 == dotted_key.size())
        throw ConfigurationError("parameter '" + std::string(dotted_key) + "' must look like section.key");
    const std::string section(dotted_key.substr(0, dot));
    const std::string key(dotted_key.substr(dot + 1));
    if (!known_sections.count(section)) throw ConfigurationError("unknown section [" + section + "]");

    pt::ptree tree;
    std::istringstream in(serialize_config(config));
    pt::read_ini(in, tree);
    if (tree.find(section) == tree.not_found()) tree.push_back({section, pt::ptree()});
    auto& target = tree.find(section)->second;
    auto it = target.find(key);
    if (it == target.not_found()) {
        target.push_back({key, pt::ptree(std::string(value))});
    } else {
        it->second.put_value(std::string(value));
    }
    std::ostringstream out;
    pt::write_ini(out, tree);
    return parse_config(out.str());
}

OptimizationProblem build_problem(const RunConfig& c) {
    c.validate();
    OptimizationProblem p;
    auto mesh = std::make_shared<const SimplexMesh>(generate_box_mesh(c.domain));
    p.mesh = mesh;

    std::vector<int> fixed;
    for (const auto& b : c.non_design) {
        auto e = elements_in_box(*mesh, b.lower, b.upper);
        fixed.insert(fixed.end(), e.begin(), e.end());
    }
    std::sort(fixed.begin(), fixed.end());
    fixed.erase(std::unique(fixed.begin(), fixed.end()), fixed.end());

    if (c.kind == ScenarioKind::compliance_opt) {
        ComplianceCase cc;
        cc.material = c.compliance.material;
        cc.ersatz = c.compliance.ersatz;
        cc.fixed_tags = c.compliance.fixed_tags;
        cc.tractions = c.compliance.tractions;
        cc.non_design_elements = fixed;
        p.physics = cc;
    } else if (c.kind == ScenarioKind::thermal_opt) {
        ThermalCase tc;
        tc.material_conductivity = c.thermal.material_conductivity;
        tc.void_conductivity = c.thermal.void_conductivity;
        tc.heat_source = c.thermal.heat_source;
        tc.temperature_tags = c.thermal.temperature_tags;
        tc.boundary_temperature = c.thermal.boundary_temperature;
        tc.non_design_elements = fixed;
        p.physics = tc;
    } else {
        p.physics = NoObjective{};
    }
    p.volume_limit = c.effective_volume_fraction() * mesh->total_volume();
    p.cavity_enabled = c.cavity_enabled;
    p.cavity = c.cavity;
    p.evolution = c.evolution;
    p.multipliers = c.multipliers;
    p.solver = c.solver;
    if (c.initial == InitialDesign::geometry) p.initial_phi = rasterize(*mesh, c.geometry);
    return p;
}

} // namespace topopt
