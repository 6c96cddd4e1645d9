#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>

#include "CLI11.hpp"

#include "latinflow/config.hpp"
#include "latinflow/error.hpp"
#include "latinflow/io.hpp"
#include "latinflow/latin.hpp"
#include "latinflow/mesh.hpp"
#include "latinflow/oracles.hpp"

namespace fs = std::filesystem;
using namespace latinflow;

namespace {

constexpr int kSuccess = 0;
constexpr int kError = 1;
constexpr int kNotConverged = 2;

std::string output_directory(const CaseConfig& config, const std::string& override_dir)
{
    return override_dir.empty() ? config.output.directory : override_dir;
}

void write_outputs(const CaseConfig& config, const Mesh& mesh, const Solution& sol, const std::string& dir)
{
    ensure_directory(dir);
    write_solution_vtk(dir, mesh, sol, config.output.vtk_stride);
    if (!config.output.probes.empty()) {
        write_probes((fs::path(dir) / "probes.csv").string(), mesh, sol, config.output.probes);
    }
}

int cmd_run(const std::string& path, const std::string& out_dir, bool quiet)
{
    const CaseConfig config = load_config(path);
    const Mesh mesh = build_mesh(config);
    const std::string dir = output_directory(config, out_dir);
    ensure_directory(dir);
    HistoryWriter history((fs::path(dir) / "history.csv").string());
    const Solution sol = run_latin(config, mesh, [&](const IterationRecord& r) {
        history.append(r);
        if (!quiet) {
            std::cout << "iteration " << r.iteration << "  eta_v " << std::scientific << std::setprecision(3)
                      << r.eta_v << "  eta_rho " << r.eta_rho << std::defaultfloat << "  modes v/rho " << r.n_modes_v
                      << '/' << r.n_modes_rho << '\n';
        }
    });
    write_outputs(config, mesh, sol, dir);
    if (sol.density_field) {
        export_modes((fs::path(dir) / "modes").string(), "density", mesh, *sol.density_field, sol.times);
        export_modes((fs::path(dir) / "modes").string(), "velocity", mesh, *sol.velocity_field, sol.times);
    }
    std::cout << (sol.converged ? "converged" : "not converged") << " after " << sol.history.size()
              << " iterations; output in " << dir << '\n';
    return sol.converged ? kSuccess : kNotConverged;
}

int cmd_oracle(const std::string& path, const std::string& out_dir)
{
    const CaseConfig config = load_config(path);
    const Mesh mesh = build_mesh(config);
    const Solution sol = monolithic_solve(config, mesh);
    const std::string dir = output_directory(config, out_dir);
    write_outputs(config, mesh, sol, dir);
    std::cout << "monolithic solution written to " << dir << '\n';
    return kSuccess;
}

int cmd_analytic(const std::string& path, const std::string& out_dir)
{
    const CaseConfig config = load_config(path);
    const Mesh mesh = build_mesh(config);
    const ChannelSpec spec = channel_spec(config);
    Vector v = Vector::Zero(2 * mesh.n_q2());
    Vector p(mesh.n_q2());
    Vector rho(mesh.n_q2());
    for (int i = 0; i < mesh.n_q2(); ++i) {
        const Point& x = mesh.q2_nodes()[i];
        const PoiseuilleValue a = poiseuille(spec, x.x(), x.y());
        v[velocity_dof(i, 0)] = a.v_x;
        v[velocity_dof(i, 1)] = a.v_y;
        p[i] = a.p;
        rho[i] = a.p / config.material.rT();
    }
    const std::string dir = output_directory(config, out_dir);
    ensure_directory(dir);
    const std::string file = (fs::path(dir) / "analytic.vtk").string();
    write_vtk(file, mesh, v, p, rho, "steady Poiseuille flow");
    std::cout << "analytic field written to " << file << '\n';
    return kSuccess;
}

int cmd_compare(const std::string& a, const std::string& b, double tolerance)
{
    auto list = [](const std::string& dir) {
        if (!fs::is_directory(dir)) {
            throw IoError("'" + dir + "' is not a directory");
        }
        std::set<std::string> names;
        for (const auto& entry : fs::directory_iterator(dir)) {
            const std::string name = entry.path().filename().string();
            if (name.rfind("step_", 0) == 0 && entry.path().extension() == ".vtk") {
                names.insert(name);
            }
        }
        return names;
    };
    const auto names_a = list(a);
    const auto names_b = list(b);
    if (names_a.empty() || names_a != names_b) {
        throw IoError("directories do not hold the same set of step files");
    }
    std::map<std::string, std::pair<double, double>> sums; // diff^2, ref^2
    for (const auto& name : names_a) {
        const auto fa = read_vtk_point_data((fs::path(a) / name).string());
        const auto fb = read_vtk_point_data((fs::path(b) / name).string());
        for (const auto& [field, va] : fa) {
            const auto it = fb.find(field);
            if (it == fb.end() || it->second.size() != va.size()) {
                throw IoError("field '" + field + "' differs in layout in " + name);
            }
            auto& s = sums[field];
            for (size_t i = 0; i < va.size(); ++i) {
                const double d = va[i] - it->second[i];
                s.first += d * d;
                s.second += it->second[i] * it->second[i];
            }
        }
    }
    bool ok = true;
    for (const auto& [field, s] : sums) {
        const double rel = s.second > 0.0 ? std::sqrt(s.first / s.second) : std::sqrt(s.first);
        std::cout << field << " relative L2 difference " << std::scientific << std::setprecision(6) << rel << '\n';
        ok = ok && rel < tolerance;
    }
    return ok ? kSuccess : kNotConverged;
}

int cmd_meshgen(const std::string& path, std::string out_file)
{
    const CaseConfig config = load_config(path);
    const Mesh mesh = build_mesh(config);
    if (out_file.empty()) {
        out_file = config.name + ".mesh";
    }
    std::ofstream out(out_file);
    if (!out) {
        throw IoError("cannot write '" + out_file + "'");
    }
    export_mesh(mesh, out);
    std::cout << mesh.n_elements() << " elements, " << mesh.n_q2() << " Q2 nodes, " << mesh.n_q1()
              << " Q1 nodes written to " << out_file << '\n';
    return kSuccess;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Space-time LATIN-PGD solver for 2D compressible laminar flow"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    bool quiet = false;

    auto* run = app.add_subcommand("run", "Solve a case with the LATIN-PGD method");
    run->add_option("config", config_path, "Case file")->required();
    run->add_option("-o,--output", out_dir, "Output directory (default: output.directory)");
    run->add_flag("-q,--quiet", quiet, "Do not print per-iteration progress");

    auto* oracle = app.add_subcommand("oracle", "Solve a case with the monolithic incremental solver");
    oracle->add_option("config", config_path, "Case file")->required();
    oracle->add_option("-o,--output", out_dir, "Output directory (default: output.directory)");

    auto* analytic = app.add_subcommand("analytic", "Write the steady Poiseuille field of a channel case");
    analytic->add_option("config", config_path, "Case file")->required();
    analytic->add_option("-o,--output", out_dir, "Output directory (default: output.directory)");

    std::string dir_a, dir_b;
    double tolerance = 0.01;
    auto* compare = app.add_subcommand("compare", "Space-time relative L2 differences of two output directories");
    compare->add_option("dir_a", dir_a, "Output directory")->required();
    compare->add_option("dir_b", dir_b, "Reference output directory")->required();
    compare->add_option("-t,--tolerance", tolerance, "Pass threshold for every field")->capture_default_str();

    std::string mesh_out;
    auto* meshgen = app.add_subcommand("meshgen", "Write the mesh of a case in the latinflow-mesh format");
    meshgen->add_option("config", config_path, "Case file")->required();
    meshgen->add_option("-o,--output", mesh_out, "Mesh file (default: <case>.mesh)");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kSuccess : kError;
    }

    try {
        if (*run) {
            return cmd_run(config_path, out_dir, quiet);
        }
        if (*oracle) {
            return cmd_oracle(config_path, out_dir);
        }
        if (*analytic) {
            return cmd_analytic(config_path, out_dir);
        }
        if (*compare) {
            return cmd_compare(dir_a, dir_b, tolerance);
        }
        if (*meshgen) {
            return cmd_meshgen(config_path, mesh_out);
        }
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kError;
    }
    return kError;
}
