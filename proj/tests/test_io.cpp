#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "latinflow/config.hpp"
#include "latinflow/error.hpp"
#include "latinflow/io.hpp"
#include "latinflow/latin.hpp"
#include "latinflow/oracles.hpp"

using namespace latinflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("latinflow_io_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int count_lines(const fs::path& p)
{
    std::ifstream in(p);
    int n = 0;
    for (std::string line; std::getline(in, line);) {
        ++n;
    }
    return n;
}

Solution small_run(int iterations)
{
    CaseConfig c = parse_config("case = c\nmesh.nx = 4\nmesh.ny = 2\nbc.inflow = pressure 2\n"
                                "bc.outflow = pressure 1\nbc.walls = no_slip\ntime.t_end = 5e-3\ntime.n_steps = 6\n");
    c.solver.max_iterations = iterations;
    return run_latin(c, build_mesh(c));
}

} // namespace

TEST(Vtk, ZeroFieldsRoundTrip)
{
    const fs::path dir = scratch_dir("zero");
    const Mesh m = generate_rectangle(1, 1, 2, 2);
    const Vector zv = Vector::Zero(2 * m.n_q2());
    const Vector zs = Vector::Zero(m.n_q2());
    write_vtk((dir / "z.vtk").string(), m, zv, zs, zs);
    const auto data = read_vtk_point_data((dir / "z.vtk").string());
    ASSERT_EQ(data.size(), 3u);
    EXPECT_EQ(data.at("velocity").size(), 3u * m.n_q2());
    for (const auto& [name, values] : data) {
        for (double v : values) {
            EXPECT_EQ(v, 0.0) << name;
        }
    }
}

TEST(Vtk, ValuesSurviveAtFullPrecision)
{
    const fs::path dir = scratch_dir("precision");
    const Mesh m = generate_rectangle(1, 1, 1, 1);
    Vector v(2 * m.n_q2());
    Vector p(m.n_q2());
    for (int i = 0; i < m.n_q2(); ++i) {
        v[2 * i] = 1.0 / (i + 3.0);
        v[2 * i + 1] = -std::sqrt(i + 2.0);
        p[i] = 1.0 + 1e-9 * i;
    }
    write_vtk((dir / "a.vtk").string(), m, v, p, p / 84103.0);
    const auto data = read_vtk_point_data((dir / "a.vtk").string());
    for (int i = 0; i < m.n_q2(); ++i) {
        EXPECT_EQ(data.at("velocity")[3 * i], v[2 * i]);
        EXPECT_EQ(data.at("velocity")[3 * i + 1], v[2 * i + 1]);
        EXPECT_EQ(data.at("pressure")[i], p[i]);
    }
}

TEST(Vtk, AnalyticFieldMatchesOracle)
{
    const fs::path dir = scratch_dir("analytic");
    const ChannelSpec spec;
    const Mesh m = generate_rectangle(2.5, 0.4, 8, 4);
    Vector v(2 * m.n_q2()), p(m.n_q2());
    for (int i = 0; i < m.n_q2(); ++i) {
        const PoiseuilleValue a = poiseuille(spec, m.q2_nodes()[i].x(), m.q2_nodes()[i].y());
        v[2 * i] = a.v_x;
        v[2 * i + 1] = a.v_y;
        p[i] = a.p;
    }
    write_vtk((dir / "analytic.vtk").string(), m, v, p, p / spec.material.rT());
    const auto data = read_vtk_point_data((dir / "analytic.vtk").string());
    for (int i = 0; i < m.n_q2(); ++i) {
        const PoiseuilleValue a = poiseuille(spec, m.q2_nodes()[i].x(), m.q2_nodes()[i].y());
        EXPECT_NEAR(data.at("velocity")[3 * i], a.v_x, 1e-14);
        EXPECT_NEAR(data.at("pressure")[i], a.p, 1e-14);
    }
}

TEST(Vtk, Q1ValuesExtendBilinearly)
{
    const Mesh m = generate_rectangle(2, 1, 2, 2);
    Vector q1(m.n_q1());
    for (int i = 0; i < m.n_q1(); ++i) {
        q1[i] = 2.0 * m.q1_node(i).x() + m.q1_node(i).y();
    }
    const Vector q2 = q1_to_q2_values(m, q1);
    for (int i = 0; i < m.n_q2(); ++i) {
        EXPECT_NEAR(q2[i], 2.0 * m.q2_nodes()[i].x() + m.q2_nodes()[i].y(), 1e-14);
    }
}

TEST(Vtk, StrideKeepsLastStep)
{
    const fs::path dir = scratch_dir("stride");
    const Solution s = small_run(2);
    const Mesh m = generate_rectangle(2.5, 0.4, 4, 2);
    write_solution_vtk(dir.string(), m, s, 4);
    EXPECT_TRUE(fs::exists(dir / "step_0000.vtk"));
    EXPECT_TRUE(fs::exists(dir / "step_0004.vtk"));
    EXPECT_TRUE(fs::exists(dir / "step_0006.vtk"));
    EXPECT_FALSE(fs::exists(dir / "step_0005.vtk"));
}

TEST(History, OneRowPerIteration)
{
    const fs::path dir = scratch_dir("history");
    const Solution s = small_run(7);
    write_history((dir / "h.csv").string(), s.history);
    EXPECT_EQ(count_lines(dir / "h.csv"), 1 + static_cast<int>(s.history.size()));
    {
        HistoryWriter w((dir / "w.csv").string());
        w.append(s.history.front());
        EXPECT_EQ(count_lines(dir / "w.csv"), 2);
    }
    std::ifstream in(dir / "h.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "iteration,eta_v,eta_rho,n_modes_v,n_modes_rho,wall_seconds");
}

TEST(Probes, ColumnsAndRows)
{
    const fs::path dir = scratch_dir("probes");
    const Solution s = small_run(2);
    const Mesh m = generate_rectangle(2.5, 0.4, 4, 2);
    write_probes((dir / "p.csv").string(), m, s, {Point(1.25, 0.0), Point(0.5, 0.1)});
    std::ifstream in(dir / "p.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "time,vx_0,vy_0,p_0,vx_1,vy_1,p_1");
    EXPECT_EQ(count_lines(dir / "p.csv"), 1 + 7);
}

TEST(Modes, OneFilePerSpatialMode)
{
    const fs::path dir = scratch_dir("modes");
    const Solution s = small_run(4);
    ASSERT_TRUE(s.velocity_field.has_value());
    const Mesh m = generate_rectangle(2.5, 0.4, 4, 2);
    export_modes(dir.string(), "velocity", m, *s.velocity_field, s.times);
    for (int i = 0; i < s.velocity_field->n_modes(); ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "velocity_mode_%03d.csv", i);
        EXPECT_TRUE(fs::exists(dir / name)) << name;
    }
    EXPECT_TRUE(fs::exists(dir / "velocity_temporal.csv"));
}

TEST(Directories, UnwritableLocationThrows)
{
    const fs::path dir = scratch_dir("blocked");
    std::ofstream(dir / "file") << "x";
    EXPECT_THROW(ensure_directory((dir / "file" / "sub").string()), IoError);
    EXPECT_THROW(write_vtk((dir / "file" / "a.vtk").string(), generate_rectangle(1, 1, 1, 1), Vector::Zero(18),
                           Vector::Zero(9), Vector::Zero(9)),
                 IoError);
    EXPECT_THROW(read_vtk_point_data((dir / "missing.vtk").string()), IoError);
}
