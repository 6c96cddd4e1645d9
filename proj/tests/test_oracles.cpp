#include <cmath>

#include <gtest/gtest.h>

#include "latinflow/config.hpp"
#include "latinflow/error.hpp"
#include "latinflow/mesh.hpp"
#include "latinflow/oracles.hpp"

using namespace latinflow;

namespace {

CaseConfig channel(int nx, int ny, const std::string& t_end, int n_steps, const std::string& extra = "")
{
    return parse_config("case = channel\nmesh.nx = " + std::to_string(nx) + "\nmesh.ny = " + std::to_string(ny) +
                        "\nbc.inflow = pressure 2\nbc.outflow = pressure 1\nbc.walls = no_slip\n"
                        "time.t_end = " +
                        t_end + "\ntime.n_steps = " + std::to_string(n_steps) + "\n" + extra);
}

} // namespace

TEST(Poiseuille, ReferenceValues)
{
    const ChannelSpec spec;
    EXPECT_NEAR(poiseuille_vmax(spec), 8e-3, 1e-15);
    const PoiseuilleValue c = poiseuille(spec, 1.25, 0.0);
    EXPECT_NEAR(c.v_x, 8e-3, 1e-15);
    EXPECT_EQ(c.v_y, 0.0);
    EXPECT_NEAR(c.p, 1.5, 1e-15);
    EXPECT_NEAR(poiseuille(spec, 0.0, 0.0).p, 2.0, 1e-15);
    EXPECT_NEAR(poiseuille(spec, 2.5, 0.1).p, 1.0, 1e-15);
    EXPECT_NEAR(poiseuille(spec, 0.3, 0.2).v_x, 0.0, 1e-18);
    EXPECT_NEAR(poiseuille(spec, 0.3, 0.1).v_x, 6e-3, 1e-15);
}

TEST(Poiseuille, SymmetryAndDomain)
{
    const ChannelSpec spec;
    for (double y : {0.01, 0.07, 0.19}) {
        EXPECT_EQ(poiseuille(spec, 1.0, y).v_x, poiseuille(spec, 1.0, -y).v_x);
    }
    EXPECT_THROW(poiseuille(spec, -0.1, 0.0), DomainError);
    EXPECT_THROW(poiseuille(spec, 1.0, 0.3), DomainError);
}

TEST(Poiseuille, SpecFromConfig)
{
    const ChannelSpec spec = channel_spec(load_config(LATINFLOW_CASES_DIR "/channel.case"));
    EXPECT_DOUBLE_EQ(spec.length, 2.5);
    EXPECT_DOUBLE_EQ(spec.height, 0.4);
    EXPECT_DOUBLE_EQ(spec.p_in, 2.0);
    EXPECT_DOUBLE_EQ(spec.p_out, 1.0);
    EXPECT_THROW(channel_spec(load_config(LATINFLOW_CASES_DIR "/cylinder.case")), ConfigError);
}

TEST(Monolithic, RestStateIsPreserved)
{
    const CaseConfig c = parse_config("case = rest\nmesh.nx = 4\nmesh.ny = 2\nbc.walls = no_slip\n"
                                      "bc.inflow = pressure 1\nbc.outflow = pressure 1\n"
                                      "time.t_end = 1e-3\ntime.n_steps = 5\n");
    const Mesh m = build_mesh(c);
    const Solution s = monolithic_solve(c, m);
    const double rho0 = c.material.rho0();
    EXPECT_LT((s.density.array() - rho0).abs().maxCoeff() / rho0, 1e-12);
    EXPECT_LT(s.velocity.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Monolithic, ChannelFlowIsSymmetricAndPositive)
{
    const CaseConfig c = channel(8, 4, "5e-3", 10);
    const Mesh m = build_mesh(c);
    const Solution s = monolithic_solve(c, m);
    const int N = s.n_steps();
    double vmax = 0.0;
    for (int i = 0; i < m.n_q2(); ++i) {
        const Point& p = m.q2_nodes()[i];
        vmax = std::max(vmax, s.velocity(velocity_dof(i, 0), N));
        // mirror node across y = 0
        for (int j = 0; j < m.n_q2(); ++j) {
            const Point& q = m.q2_nodes()[j];
            if (std::abs(q.x() - p.x()) < 1e-12 && std::abs(q.y() + p.y()) < 1e-12) {
                EXPECT_NEAR(s.velocity(velocity_dof(i, 0), N), s.velocity(velocity_dof(j, 0), N), 1e-12);
                EXPECT_NEAR(s.velocity(velocity_dof(i, 1), N), -s.velocity(velocity_dof(j, 1), N), 1e-12);
            }
        }
    }
    EXPECT_GT(vmax, 0.0);
    EXPECT_LT(vmax, 2.0 * poiseuille_vmax(channel_spec(c)));
}

TEST(Monolithic, BackwardEulerIsFirstOrder)
{
    const std::string T = "1e-6";
    const CaseConfig ref_cfg = channel(8, 2, T, 640);
    const Mesh m = build_mesh(ref_cfg);
    const Solution ref = monolithic_solve(ref_cfg, m);
    const Vector v_ref = ref.velocity.col(ref.n_steps());
    double prev = 0.0;
    for (int N : {10, 20, 40}) {
        const Solution s = monolithic_solve(channel(8, 2, T, N), m);
        const double err = (s.velocity.col(N) - v_ref).norm() / v_ref.norm();
        if (prev > 0.0) {
            EXPECT_NEAR(prev / err, 2.0, 0.35) << "N = " << N;
        }
        prev = err;
    }
}

TEST(Monolithic, NonConvergenceNamesTheStep)
{
    const CaseConfig c = channel(4, 2, "5e-3", 3);
    const Mesh m = build_mesh(c);
    MonolithicOptions opt;
    opt.max_picard = 1;
    opt.tolerance = 1e-300;
    try {
        monolithic_solve(c, m, opt);
        FAIL();
    }
    catch (const SolverError& e) {
        EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
    }
}
