#include "latinflow/io.hpp"

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <sstream>

#include "latinflow/error.hpp"
#include "latinflow/interpolation.hpp"

namespace latinflow {

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write '" + path + "'");
    }
    out << std::setprecision(17);
    return out;
}

std::string step_name(int n)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "step_%04d.vtk", n);
    return buf;
}

} // namespace

void ensure_directory(const std::string& directory)
{
    std::error_code ec;
    fs::create_directories(directory, ec);
    if (ec || !fs::is_directory(directory)) {
        throw IoError("cannot create output directory '" + directory + "'");
    }
    const fs::path probe = fs::path(directory) / ".write_test";
    {
        std::ofstream out(probe);
        if (!out) {
            throw IoError("output directory '" + directory + "' is not writable");
        }
    }
    fs::remove(probe, ec);
}

Vector q1_to_q2_values(const Mesh& mesh, const Vector& q1_values)
{
    Vector out = Vector::Zero(mesh.n_q2());
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const auto& q2 = mesh.element_q2(e);
        const auto& q1 = mesh.element_q1(e);
        for (int a = 0; a < 4; ++a) {
            out[q2[a]] = q1_values[q1[a]];
        }
        for (int k = 0; k < 4; ++k) {
            out[q2[4 + k]] = 0.5 * (q1_values[q1[k]] + q1_values[q1[(k + 1) % 4]]);
        }
        out[q2[8]] = 0.25 * (q1_values[q1[0]] + q1_values[q1[1]] + q1_values[q1[2]] + q1_values[q1[3]]);
    }
    return out;
}

void write_vtk(const std::string& path, const Mesh& mesh, const Vector& velocity, const Vector& pressure_q2,
               const Vector& density_q2, const std::string& title)
{
    std::ofstream out = open_output(path);
    const int np = mesh.n_q2();
    const int ne = mesh.n_elements();
    out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << np << " double\n";
    for (const Point& p : mesh.q2_nodes()) {
        out << p.x() << ' ' << p.y() << " 0\n";
    }
    out << "CELLS " << ne << ' ' << ne * 10 << '\n';
    for (int e = 0; e < ne; ++e) {
        out << 9;
        for (int n : mesh.element_q2(e)) {
            out << ' ' << n;
        }
        out << '\n';
    }
    out << "CELL_TYPES " << ne << '\n';
    for (int e = 0; e < ne; ++e) {
        out << "28\n";
    }
    out << "POINT_DATA " << np << '\n';
    out << "VECTORS velocity double\n";
    for (int i = 0; i < np; ++i) {
        out << velocity[velocity_dof(i, 0)] << ' ' << velocity[velocity_dof(i, 1)] << " 0\n";
    }
    out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < np; ++i) {
        out << pressure_q2[i] << '\n';
    }
    out << "SCALARS density double 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < np; ++i) {
        out << density_q2[i] << '\n';
    }
    if (!out) {
        throw IoError("failed writing '" + path + "'");
    }
}

void write_solution_vtk(const std::string& directory, const Mesh& mesh, const Solution& solution, int stride)
{
    if (stride <= 0) {
        return;
    }
    ensure_directory(directory);
    const int nt = solution.n_steps();
    for (int n = 0; n <= nt; ++n) {
        if (n % stride != 0 && n != nt) {
            continue;
        }
        const Vector rho = q1_to_q2_values(mesh, solution.density.col(n));
        const Vector p = solution.rT * rho;
        std::ostringstream title;
        title << std::setprecision(17) << "t = " << solution.times[n];
        write_vtk((fs::path(directory) / step_name(n)).string(), mesh, solution.velocity.col(n), p, rho, title.str());
    }
}

std::map<std::string, std::vector<double>> read_vtk_point_data(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    std::map<std::string, std::vector<double>> out;
    std::string word;
    long n_points = -1;
    while (in >> word) {
        if (word == "POINT_DATA") {
            in >> n_points;
        }
        else if ((word == "VECTORS" || word == "SCALARS") && n_points >= 0) {
            std::string name, type;
            in >> name >> type;
            int comps = 3;
            if (word == "SCALARS") {
                std::string rest;
                std::getline(in, rest);
                std::istringstream rs(rest);
                comps = 1;
                rs >> comps;
                std::string table;
                in >> table >> table;
            }
            std::vector<double> values(static_cast<size_t>(n_points) * comps);
            for (auto& v : values) {
                if (!(in >> v)) {
                    throw FormatError("truncated array '" + name + "' in '" + path + "'", 0);
                }
            }
            out[name] = std::move(values);
        }
    }
    if (n_points < 0) {
        throw FormatError("no POINT_DATA in '" + path + "'", 0);
    }
    return out;
}

HistoryWriter::HistoryWriter(const std::string& path) : out_(open_output(path))
{
    out_ << "iteration,eta_v,eta_rho,n_modes_v,n_modes_rho,wall_seconds\n" << std::flush;
}

void HistoryWriter::append(const IterationRecord& r)
{
    out_ << r.iteration << ',' << r.eta_v << ',' << r.eta_rho << ',' << r.n_modes_v << ',' << r.n_modes_rho << ','
         << r.wall_seconds << '\n'
         << std::flush;
}

void write_history(const std::string& path, const std::vector<IterationRecord>& history)
{
    HistoryWriter w(path);
    for (const auto& r : history) {
        w.append(r);
    }
}

void write_probes(const std::string& path, const Mesh& mesh, const Solution& solution, const std::vector<Point>& probes)
{
    std::ofstream out = open_output(path);
    out << "time";
    for (size_t i = 0; i < probes.size(); ++i) {
        out << ",vx_" << i << ",vy_" << i << ",p_" << i;
    }
    out << '\n';
    for (int n = 0; n <= solution.n_steps(); ++n) {
        out << solution.times[n];
        for (const Point& p : probes) {
            const PointValue v = evaluate_at(mesh, p, solution.density.col(n), solution.velocity.col(n));
            out << ',' << v.v.x() << ',' << v.v.y() << ',' << solution.rT * v.rho;
        }
        out << '\n';
    }
}

void export_modes(const std::string& directory, const std::string& prefix, const Mesh& mesh, const PGDField& field,
                  const std::vector<double>& times)
{
    ensure_directory(directory);
    const bool density = field.kind == DofKind::density;
    for (int i = 0; i < field.n_modes(); ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "%s_mode_%03d.csv", prefix.c_str(), i);
        std::ofstream out = open_output((fs::path(directory) / name).string());
        if (density) {
            out << "node,x,y,value\n";
            for (int q = 0; q < mesh.n_q1(); ++q) {
                const Point& p = mesh.q1_node(q);
                out << q << ',' << p.x() << ',' << p.y() << ',' << field.spatial_modes(q, i) << '\n';
            }
        }
        else {
            out << "node,x,y,vx,vy\n";
            for (int q = 0; q < mesh.n_q2(); ++q) {
                const Point& p = mesh.q2_nodes()[q];
                out << q << ',' << p.x() << ',' << p.y() << ',' << field.spatial_modes(velocity_dof(q, 0), i) << ','
                    << field.spatial_modes(velocity_dof(q, 1), i) << '\n';
            }
        }
    }
    std::ofstream out = open_output((fs::path(directory) / (prefix + "_temporal.csv")).string());
    out << "time";
    for (int i = 0; i < field.n_modes(); ++i) {
        out << ",mode_" << i;
    }
    out << '\n';
    for (int n = 0; n < field.n_steps(); ++n) {
        out << times[n + 1];
        for (int i = 0; i < field.n_modes(); ++i) {
            out << ',' << field.temporal_modes(i, n);
        }
        out << '\n';
    }
}

} // namespace latinflow
