#include "latinflow/config.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "latinflow/error.hpp"
#include "latinflow/mesh.hpp"

namespace latinflow {

namespace {

const std::vector<std::string>& known_keys()
{
    static const std::vector<std::string> keys{
        "case",
        "mesh.kind", "mesh.path", "mesh.length", "mesh.height", "mesh.nx", "mesh.ny",
        "material.mu", "material.lambda", "material.R", "material.M", "material.T0", "material.p0",
        "load.body_force",
        "time.t_end", "time.n_steps",
        "solver.eta_c", "solver.max_iterations", "solver.t_v", "solver.t_rho", "solver.L_c", "solver.kappa",
        "solver.relaxation", "solver.pgd_fixed_point_max", "solver.reference_mode", "solver.full_order",
        "solver.rho_floor",
        "output.directory", "output.vtk_stride", "output.probes",
    };
    return keys;
}

size_t edit_distance(const std::string& a, const std::string& b)
{
    std::vector<size_t> prev(b.size() + 1);
    std::vector<size_t> cur(b.size() + 1);
    for (size_t j = 0; j <= b.size(); ++j) {
        prev[j] = j;
    }
    for (size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (size_t j = 1; j <= b.size(); ++j) {
            const size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::string nearest_key(const std::string& key)
{
    std::string best;
    size_t best_d = SIZE_MAX;
    for (const auto& k : known_keys()) {
        const size_t d = edit_distance(key, k);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v)
{
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) {
            throw std::invalid_argument(v);
        }
        return d;
    }
    catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v)
{
    try {
        size_t pos = 0;
        const long d = std::stol(v, &pos);
        if (pos != v.size()) {
            throw std::invalid_argument(v);
        }
        return static_cast<int>(d);
    }
    catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no") {
        return false;
    }
    throw ConfigError("key '" + key + "': expected true/false, got '" + v + "'");
}

std::vector<std::string> split_ws(const std::string& s)
{
    std::istringstream ss(s);
    std::vector<std::string> out;
    std::string tok;
    while (ss >> tok) {
        out.push_back(tok);
    }
    return out;
}

Vector2 to_vec2(const std::string& key, const std::string& a, const std::string& b)
{
    return Vector2(to_double(key, a), to_double(key, b));
}

BoundaryCondition parse_bc(const std::string& key, const std::string& set, const std::string& value)
{
    const auto tok = split_ws(value);
    if (tok.empty()) {
        throw ConfigError("key '" + key + "': empty boundary condition");
    }
    BoundaryCondition bc;
    bc.set = set;
    if (tok[0] == "no_slip") {
        if (tok.size() != 1) {
            throw ConfigError("key '" + key + "': no_slip takes no value");
        }
        bc.kind = BcKind::no_slip;
        bc.values.push_back(Vector2::Zero());
        return bc;
    }
    if (tok[0] != "pressure" && tok[0] != "velocity") {
        throw ConfigError("key '" + key + "': unknown boundary kind '" + tok[0] +
                          "' (expected pressure, no_slip or velocity)");
    }
    const bool is_pressure = tok[0] == "pressure";
    bc.kind = is_pressure ? BcKind::pressure : BcKind::velocity;
    if (tok.size() >= 2 && tok[1] == "table") {
        if (tok.size() < 3) {
            throw ConfigError("key '" + key + "': empty table");
        }
        for (size_t i = 2; i < tok.size(); ++i) {
            const auto colon = tok[i].find(':');
            if (colon == std::string::npos) {
                throw ConfigError("key '" + key + "': table entries are time:value, got '" + tok[i] + "'");
            }
            const double t = to_double(key, tok[i].substr(0, colon));
            const std::string rest = tok[i].substr(colon + 1);
            if (!bc.times.empty() && !(t > bc.times.back())) {
                throw ConfigError("key '" + key + "': table times must increase");
            }
            bc.times.push_back(t);
            if (is_pressure) {
                bc.values.emplace_back(to_double(key, rest), 0.0);
            }
            else {
                const auto comma = rest.find(',');
                if (comma == std::string::npos) {
                    throw ConfigError("key '" + key + "': velocity table entries are time:vx,vy");
                }
                bc.values.push_back(to_vec2(key, rest.substr(0, comma), rest.substr(comma + 1)));
            }
        }
        return bc;
    }
    if (is_pressure) {
        if (tok.size() != 2) {
            throw ConfigError("key '" + key + "': expected 'pressure <value>'");
        }
        bc.values.emplace_back(to_double(key, tok[1]), 0.0);
    }
    else {
        if (tok.size() != 3) {
            throw ConfigError("key '" + key + "': expected 'velocity <vx> <vy>'");
        }
        bc.values.push_back(to_vec2(key, tok[1], tok[2]));
    }
    return bc;
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

double BoundaryCondition::pressure_at(double t) const { return velocity_at(t).x(); }

Vector2 BoundaryCondition::velocity_at(double t) const
{
    if (times.empty()) {
        return values.front();
    }
    if (t <= times.front()) {
        return values.front();
    }
    if (t >= times.back()) {
        return values.back();
    }
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const size_t i = static_cast<size_t>(it - times.begin());
    const double s = (t - times[i - 1]) / (times[i] - times[i - 1]);
    return (1.0 - s) * values[i - 1] + s * values[i];
}

const BoundaryCondition* CaseConfig::find_bc(const std::string& set) const
{
    for (const auto& bc : bcs) {
        if (bc.set == set) {
            return &bc;
        }
    }
    return nullptr;
}

CaseConfig parse_config(const std::string& text, const std::string& base_dir)
{
    std::map<std::string, std::pair<std::string, int>> entries;
    std::vector<std::string> bc_order;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (auto pos = raw.find('#'); pos != std::string::npos) {
            raw.erase(pos);
        }
        const std::string line = trim(raw);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const bool is_bc = key.rfind("bc.", 0) == 0 && key.size() > 3;
        if (!is_bc && std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end()) {
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "' (did you mean '" +
                              nearest_key(key) + "'?)");
        }
        if (!entries.emplace(key, std::make_pair(value, line_no)).second) {
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
        if (is_bc) {
            bc_order.push_back(key);
        }
    }

    auto get = [&](const std::string& key) -> const std::string* {
        auto it = entries.find(key);
        return it == entries.end() ? nullptr : &it->second.first;
    };
    auto require = [&](const std::string& key) -> const std::string& {
        const std::string* v = get(key);
        if (v == nullptr) {
            throw ConfigError("missing required key '" + key + "'");
        }
        return *v;
    };

    CaseConfig c;
    c.base_dir = base_dir;
    c.name = require("case");
    c.time.t_end = to_double("time.t_end", require("time.t_end"));
    c.time.n_steps = to_int("time.n_steps", require("time.n_steps"));

    if (auto v = get("mesh.kind")) c.mesh.kind = *v;
    if (auto v = get("mesh.path")) c.mesh.path = *v;
    if (auto v = get("mesh.length")) c.mesh.length = to_double("mesh.length", *v);
    if (auto v = get("mesh.height")) c.mesh.height = to_double("mesh.height", *v);
    if (auto v = get("mesh.nx")) c.mesh.nx = to_int("mesh.nx", *v);
    if (auto v = get("mesh.ny")) c.mesh.ny = to_int("mesh.ny", *v);

    if (auto v = get("material.mu")) c.material.mu = to_double("material.mu", *v);
    if (auto v = get("material.lambda")) c.material.lambda = to_double("material.lambda", *v);
    if (auto v = get("material.R")) c.material.R = to_double("material.R", *v);
    if (auto v = get("material.M")) c.material.M = to_double("material.M", *v);
    if (auto v = get("material.T0")) c.material.T0 = to_double("material.T0", *v);
    if (auto v = get("material.p0")) c.material.p0 = to_double("material.p0", *v);

    if (auto v = get("load.body_force")) {
        const auto tok = split_ws(*v);
        if (tok.size() != 2) {
            throw ConfigError("key 'load.body_force': expected two components");
        }
        c.body_force = to_vec2("load.body_force", tok[0], tok[1]);
    }

    if (auto v = get("solver.eta_c")) c.solver.eta_c = to_double("solver.eta_c", *v);
    if (auto v = get("solver.max_iterations")) c.solver.max_iterations = to_int("solver.max_iterations", *v);
    if (auto v = get("solver.t_v")) c.solver.t_v = to_double("solver.t_v", *v);
    if (auto v = get("solver.t_rho")) c.solver.t_rho = to_double("solver.t_rho", *v);
    if (auto v = get("solver.L_c")) c.solver.L_c = to_double("solver.L_c", *v);
    if (auto v = get("solver.kappa")) c.solver.kappa = to_double("solver.kappa", *v);
    if (auto v = get("solver.relaxation")) c.solver.relaxation = to_double("solver.relaxation", *v);
    if (auto v = get("solver.pgd_fixed_point_max")) {
        c.solver.pgd_fixed_point_max = to_int("solver.pgd_fixed_point_max", *v);
    }
    if (auto v = get("solver.reference_mode")) c.solver.reference_mode = to_bool("solver.reference_mode", *v);
    if (auto v = get("solver.full_order")) c.solver.full_order = to_bool("solver.full_order", *v);
    if (auto v = get("solver.rho_floor")) c.solver.rho_floor = to_double("solver.rho_floor", *v);

    if (auto v = get("output.directory")) c.output.directory = *v;
    if (auto v = get("output.vtk_stride")) c.output.vtk_stride = to_int("output.vtk_stride", *v);
    if (auto v = get("output.probes")) {
        std::istringstream ss(*v);
        std::string item;
        while (std::getline(ss, item, ';')) {
            const auto tok = split_ws(item);
            if (tok.empty()) {
                continue;
            }
            if (tok.size() != 2) {
                throw ConfigError("key 'output.probes': expected 'x y; x y; ...'");
            }
            c.output.probes.push_back(to_vec2("output.probes", tok[0], tok[1]));
        }
    }

    for (const auto& key : bc_order) {
        c.bcs.push_back(parse_bc(key, key.substr(3), entries.at(key).first));
    }

    // validation
    if (c.time.n_steps < 1) {
        throw ConfigError("time.n_steps must be at least 1");
    }
    if (!(c.time.t_end > 0.0)) {
        throw ConfigError("time.t_end must be positive");
    }
    c.material.validate();
    if (c.mesh.kind == "rectangle") {
        if (!(c.mesh.length > 0.0) || !(c.mesh.height > 0.0) || c.mesh.nx < 1 || c.mesh.ny < 1) {
            throw ConfigError("mesh: rectangle needs positive length/height and nx, ny >= 1");
        }
    }
    else if (c.mesh.kind == "file") {
        if (c.mesh.path.empty()) {
            throw ConfigError("mesh.kind = file requires mesh.path");
        }
    }
    else {
        throw ConfigError("mesh.kind must be 'rectangle' or 'file'");
    }
    if (!(c.solver.eta_c > 0.0)) {
        throw ConfigError("solver.eta_c must be positive");
    }
    if (c.solver.max_iterations < 1) {
        throw ConfigError("solver.max_iterations must be at least 1");
    }
    for (const auto& opt : {c.solver.t_v, c.solver.t_rho, c.solver.L_c}) {
        if (opt && !(*opt > 0.0)) {
            throw ConfigError("solver.t_v, solver.t_rho and solver.L_c must be positive");
        }
    }
    if (!(c.solver.kappa > 0.0) || c.solver.kappa > 1.0) {
        throw ConfigError("solver.kappa must lie in (0, 1]");
    }
    if (!(c.solver.relaxation > 0.0) || !(c.solver.relaxation < 2.0)) {
        throw ConfigError("solver.relaxation must lie in (0, 2)");
    }
    if (c.solver.pgd_fixed_point_max < 1) {
        throw ConfigError("solver.pgd_fixed_point_max must be at least 1");
    }
    if (!(c.solver.rho_floor > 0.0)) {
        throw ConfigError("solver.rho_floor must be positive");
    }
    if (c.output.vtk_stride < 0) {
        throw ConfigError("output.vtk_stride must be non-negative (0 disables VTK output)");
    }
    return c;
}

CaseConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    const auto parent = std::filesystem::path(path).parent_path();
    return parse_config(ss.str(), parent.empty() ? "." : parent.string());
}

std::string serialize_config(const CaseConfig& c)
{
    std::ostringstream out;
    out << "case = " << c.name << "\n";
    out << "mesh.kind = " << c.mesh.kind << "\n";
    if (!c.mesh.path.empty()) {
        out << "mesh.path = " << c.mesh.path << "\n";
    }
    out << "mesh.length = " << fmt(c.mesh.length) << "\n";
    out << "mesh.height = " << fmt(c.mesh.height) << "\n";
    out << "mesh.nx = " << c.mesh.nx << "\n";
    out << "mesh.ny = " << c.mesh.ny << "\n";
    out << "material.mu = " << fmt(c.material.mu) << "\n";
    out << "material.lambda = " << fmt(c.material.lambda) << "\n";
    out << "material.R = " << fmt(c.material.R) << "\n";
    out << "material.M = " << fmt(c.material.M) << "\n";
    out << "material.T0 = " << fmt(c.material.T0) << "\n";
    out << "material.p0 = " << fmt(c.material.p0) << "\n";
    out << "load.body_force = " << fmt(c.body_force.x()) << " " << fmt(c.body_force.y()) << "\n";
    for (const auto& bc : c.bcs) {
        out << "bc." << bc.set << " = ";
        switch (bc.kind) {
        case BcKind::no_slip: out << "no_slip"; break;
        case BcKind::pressure:
            out << "pressure";
            if (bc.times.empty()) {
                out << " " << fmt(bc.values.front().x());
            }
            else {
                out << " table";
                for (size_t i = 0; i < bc.times.size(); ++i) {
                    out << " " << fmt(bc.times[i]) << ":" << fmt(bc.values[i].x());
                }
            }
            break;
        case BcKind::velocity:
            out << "velocity";
            if (bc.times.empty()) {
                out << " " << fmt(bc.values.front().x()) << " " << fmt(bc.values.front().y());
            }
            else {
                out << " table";
                for (size_t i = 0; i < bc.times.size(); ++i) {
                    out << " " << fmt(bc.times[i]) << ":" << fmt(bc.values[i].x()) << "," << fmt(bc.values[i].y());
                }
            }
            break;
        }
        out << "\n";
    }
    out << "time.t_end = " << fmt(c.time.t_end) << "\n";
    out << "time.n_steps = " << c.time.n_steps << "\n";
    out << "solver.eta_c = " << fmt(c.solver.eta_c) << "\n";
    out << "solver.max_iterations = " << c.solver.max_iterations << "\n";
    if (c.solver.t_v) out << "solver.t_v = " << fmt(*c.solver.t_v) << "\n";
    if (c.solver.t_rho) out << "solver.t_rho = " << fmt(*c.solver.t_rho) << "\n";
    if (c.solver.L_c) out << "solver.L_c = " << fmt(*c.solver.L_c) << "\n";
    out << "solver.kappa = " << fmt(c.solver.kappa) << "\n";
    out << "solver.relaxation = " << fmt(c.solver.relaxation) << "\n";
    out << "solver.pgd_fixed_point_max = " << c.solver.pgd_fixed_point_max << "\n";
    out << "solver.reference_mode = " << (c.solver.reference_mode ? "true" : "false") << "\n";
    out << "solver.full_order = " << (c.solver.full_order ? "true" : "false") << "\n";
    out << "solver.rho_floor = " << fmt(c.solver.rho_floor) << "\n";
    out << "output.directory = " << c.output.directory << "\n";
    out << "output.vtk_stride = " << c.output.vtk_stride << "\n";
    if (!c.output.probes.empty()) {
        out << "output.probes =";
        for (size_t i = 0; i < c.output.probes.size(); ++i) {
            out << (i == 0 ? " " : "; ") << fmt(c.output.probes[i].x()) << " " << fmt(c.output.probes[i].y());
        }
        out << "\n";
    }
    return out.str();
}

void validate_against_mesh(const CaseConfig& config, const Mesh& mesh)
{
    for (const auto& bc : config.bcs) {
        if (!mesh.has_boundary(bc.set)) {
            std::string available;
            for (const auto& n : mesh.boundary_names()) {
                available += (available.empty() ? "" : ", ") + n;
            }
            throw ConfigError("boundary condition on unknown set '" + bc.set + "' (mesh sets: " + available + ")");
        }
    }
}

Mesh build_mesh(const CaseConfig& config)
{
    Mesh mesh = [&] {
        if (config.mesh.kind == "rectangle") {
            return generate_rectangle(config.mesh.length, config.mesh.height, config.mesh.nx, config.mesh.ny);
        }
        std::filesystem::path p(config.mesh.path);
        if (p.is_relative()) {
            p = std::filesystem::path(config.base_dir) / p;
        }
        std::ifstream in(p);
        if (!in) {
            throw IoError("cannot open mesh file '" + p.string() + "'");
        }
        return import_mesh(in);
    }();
    validate_against_mesh(config, mesh);
    return mesh;
}

double characteristic_length(const CaseConfig& config, const Mesh& mesh)
{
    if (config.solver.L_c) {
        return *config.solver.L_c;
    }
    const auto [lo, hi] = mesh.bounding_box();
    return (hi - lo).maxCoeff();
}

} // namespace latinflow
