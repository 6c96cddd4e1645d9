#include <gtest/gtest.h>

#include "latinflow/config.hpp"
#include "latinflow/error.hpp"
#include "latinflow/mesh.hpp"

using namespace latinflow;

namespace {

const char* kMinimal = "case = demo\ntime.t_end = 1\ntime.n_steps = 4\n";

std::string message_of(const std::string& text)
{
    try {
        parse_config(text);
    }
    catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(Config, ChannelCaseFile)
{
    const CaseConfig c = load_config(LATINFLOW_CASES_DIR "/channel.case");
    EXPECT_EQ(c.name, "channel");
    EXPECT_DOUBLE_EQ(c.time.t_end, 5e-3);
    EXPECT_EQ(c.time.n_steps, 100);
    EXPECT_DOUBLE_EQ(c.time.dt(), 5e-5);
    EXPECT_EQ(c.mesh.nx, 128);
    EXPECT_EQ(c.mesh.ny, 16);
    ASSERT_NE(c.find_bc("inflow"), nullptr);
    EXPECT_DOUBLE_EQ(c.find_bc("inflow")->pressure_at(0.0), 2.0);
    EXPECT_EQ(c.find_bc("walls")->kind, BcKind::no_slip);
    EXPECT_DOUBLE_EQ(c.t_v(), 5e-3);
    EXPECT_DOUBLE_EQ(c.t_rho(), 5e-4);
}

TEST(Config, CylinderCaseReferencesMeshSets)
{
    const CaseConfig c = load_config(LATINFLOW_CASES_DIR "/cylinder.case");
    const Mesh m = build_mesh(c);
    EXPECT_TRUE(m.has_boundary("cylinder"));
    EXPECT_NO_THROW(validate_against_mesh(c, m));
}

TEST(Config, Defaults)
{
    const CaseConfig c = parse_config(kMinimal);
    EXPECT_DOUBLE_EQ(c.solver.eta_c, 1e-4);
    EXPECT_EQ(c.solver.max_iterations, 100);
    EXPECT_DOUBLE_EQ(c.material.lambda, 1000.0);
    EXPECT_DOUBLE_EQ(c.effective_eta_c(), 1e-4);
}

TEST(Config, MissingRequiredKey)
{
    EXPECT_NE(message_of("").find("missing required key 'case'"), std::string::npos);
    EXPECT_NE(message_of("case = x\ntime.t_end = 1\n").find("time.n_steps"), std::string::npos);
}

TEST(Config, InvalidValues)
{
    EXPECT_NE(message_of("case = x\ntime.t_end = 1\ntime.n_steps = 0\n").find("n_steps"), std::string::npos);
    EXPECT_THROW(parse_config("case = x\ntime.t_end = -1\ntime.n_steps = 3\n"), ConfigError);
    EXPECT_THROW(parse_config(std::string(kMinimal) + "material.mu = 0\n"), ConfigError);
    EXPECT_THROW(parse_config(std::string(kMinimal) + "time.n_steps = 5\n"), ConfigError);
    EXPECT_THROW(parse_config(std::string(kMinimal) + "solver.eta_c = abc\n"), ConfigError);
}

TEST(Config, UnknownKeySuggestsNearest)
{
    const std::string msg = message_of(std::string(kMinimal) + "solver.eta_cc = 1e-3\n");
    EXPECT_NE(msg.find("unknown key 'solver.eta_cc'"), std::string::npos);
    EXPECT_NE(msg.find("did you mean 'solver.eta_c'"), std::string::npos);
    EXPECT_NE(msg.find("line 4"), std::string::npos);
}

TEST(Config, BoundaryConditionSyntax)
{
    const CaseConfig c = parse_config(std::string(kMinimal) +
                                      "bc.inflow = pressure table 0:1 1:3\n"
                                      "bc.walls = no_slip\n"
                                      "bc.lid = velocity table 0:0,0 2:1,0.5\n"
                                      "bc.outflow = pressure 1\n");
    const BoundaryCondition* in = c.find_bc("inflow");
    ASSERT_NE(in, nullptr);
    EXPECT_DOUBLE_EQ(in->pressure_at(0.5), 2.0);
    EXPECT_DOUBLE_EQ(in->pressure_at(-1.0), 1.0);
    EXPECT_DOUBLE_EQ(in->pressure_at(7.0), 3.0);
    const BoundaryCondition* lid = c.find_bc("lid");
    EXPECT_EQ(lid->kind, BcKind::velocity);
    EXPECT_LT((lid->velocity_at(1.0) - Vector2(0.5, 0.25)).norm(), 1e-15);
    EXPECT_EQ(c.find_bc("nothing"), nullptr);
    EXPECT_THROW(parse_config(std::string(kMinimal) + "bc.x = suction 3\n"), ConfigError);
}

TEST(Config, SerializeRoundTrip)
{
    CaseConfig c = load_config(LATINFLOW_CASES_DIR "/channel.case");
    c.solver.t_v = 1.0 / 3.0;
    c.body_force = Vector2(0.1, -9.81);
    c.bcs.push_back({"lid", BcKind::velocity, {0.0, 1.0}, {Vector2(0, 0), Vector2(1.0 / 7.0, 0)}});
    const CaseConfig r = parse_config(serialize_config(c), c.base_dir);
    EXPECT_TRUE(r == c);
}

TEST(Config, UnknownBoundarySetAgainstMesh)
{
    const CaseConfig c = parse_config(std::string(kMinimal) + "mesh.nx = 2\nmesh.ny = 1\nbc.cylinder = no_slip\n");
    try {
        build_mesh(c);
        FAIL();
    }
    catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("cylinder"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("walls"), std::string::npos);
    }
}

TEST(Config, CharacteristicLength)
{
    const CaseConfig c = parse_config(std::string(kMinimal) + "mesh.nx = 2\nmesh.ny = 1\n");
    const Mesh m = build_mesh(c);
    EXPECT_DOUBLE_EQ(characteristic_length(c, m), 2.5);
    const CaseConfig d = parse_config(std::string(kMinimal) + "solver.L_c = 7\n");
    EXPECT_DOUBLE_EQ(characteristic_length(d, m), 7.0);
}
