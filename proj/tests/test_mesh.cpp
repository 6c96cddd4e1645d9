#include <sstream>

#include <gtest/gtest.h>

#include "latinflow/error.hpp"
#include "latinflow/mesh.hpp"

using namespace latinflow;

TEST(Rectangle, ChannelCounts)
{
    const Mesh m = generate_rectangle(2.5, 0.4, 128, 16);
    EXPECT_EQ(m.n_elements(), 2048);
    EXPECT_EQ(m.n_q2(), 8481);
    EXPECT_EQ(2 * m.n_q2(), 16962);
    EXPECT_EQ(m.n_q1(), 2193);
    const auto [lo, hi] = m.bounding_box();
    EXPECT_DOUBLE_EQ(lo.y(), -0.2);
    EXPECT_DOUBLE_EQ(hi.y(), 0.2);
    EXPECT_DOUBLE_EQ(hi.x(), 2.5);
}

TEST(Rectangle, SingleElement)
{
    const Mesh m = generate_rectangle(1, 1, 1, 1);
    EXPECT_EQ(m.n_elements(), 1);
    EXPECT_EQ(m.n_q2(), 9);
    EXPECT_EQ(m.n_q1(), 4);
    EXPECT_EQ(m.boundary_edges("inflow").size(), 1u);
    EXPECT_EQ(m.boundary_edges("outflow").size(), 1u);
    EXPECT_EQ(m.boundary_edges("walls").size(), 2u);
}

TEST(Rectangle, EdgeCountsOnTwoByTwo)
{
    const Mesh m = generate_rectangle(2.5, 0.4, 2, 2);
    EXPECT_EQ(m.boundary_edges("walls").size(), 4u);
    EXPECT_EQ(m.boundary_edges("inflow").size(), 2u);
    EXPECT_EQ(m.boundary_edges("outflow").size(), 2u);
    EXPECT_EQ(m.boundary_q2_nodes("inflow").size(), 5u);
    EXPECT_EQ(m.boundary_q1_nodes("walls").size(), 6u);
}

TEST(Rectangle, InvalidDimensions)
{
    EXPECT_THROW(generate_rectangle(0.0, 1.0, 1, 1), GeometryError);
    EXPECT_THROW(generate_rectangle(1.0, -1.0, 1, 1), GeometryError);
    EXPECT_THROW(generate_rectangle(1.0, 1.0, 0, 1), GeometryError);
}

TEST(Rectangle, Q1IsCornerSubsequence)
{
    const Mesh m = generate_rectangle(1.0, 0.5, 3, 2);
    for (int e = 0; e < m.n_elements(); ++e) {
        for (int a = 0; a < 4; ++a) {
            EXPECT_EQ(m.q1_to_q2()[m.element_q1(e)[a]], m.element_q2(e)[a]);
        }
    }
}

TEST(Rectangle, BoundaryNormalsPointOutward)
{
    const Mesh m = generate_rectangle(2.0, 1.0, 4, 2);
    for (const auto& f : boundary_set(m, "inflow")) {
        EXPECT_LT((f.normal - Point(-1, 0)).norm(), 1e-14);
    }
    double wall_length = 0.0;
    for (const auto& f : boundary_set(m, "walls")) {
        EXPECT_NEAR(std::abs(f.normal.y()), 1.0, 1e-14);
        wall_length += f.length;
    }
    EXPECT_NEAR(wall_length, 4.0, 1e-13);
}

TEST(Rectangle, ClosedBoundaryNormalsSumToZero)
{
    const Mesh m = generate_rectangle(2.5, 0.4, 8, 4);
    Point sum = Point::Zero();
    for (const auto& name : m.boundary_names()) {
        for (const auto& f : boundary_set(m, name)) {
            sum += f.length * f.normal;
        }
    }
    EXPECT_LT(sum.norm(), 1e-12);
}

TEST(Rectangle, MergedSideNames)
{
    RectangleSides s;
    s.left = s.right = s.top = s.bottom = "all";
    const Mesh m = generate_rectangle(1, 1, 2, 3, s);
    EXPECT_EQ(m.boundary_names(), std::vector<std::string>{"all"});
    EXPECT_EQ(m.boundary_edges("all").size(), 10u);
}

TEST(Lookup, UnknownSetListsAvailable)
{
    const Mesh m = generate_rectangle(1, 1, 1, 1);
    try {
        m.boundary_edges("cylinder");
        FAIL();
    }
    catch (const LookupError& e) {
        EXPECT_NE(std::string(e.what()).find("inflow"), std::string::npos);
    }
}

TEST(ImportExport, RoundTrip)
{
    const Mesh m = generate_rectangle(2.0, 0.4, 3, 2);
    std::stringstream ss;
    export_mesh(m, ss);
    const Mesh r = import_mesh(ss);
    ASSERT_EQ(r.n_q2(), m.n_q2());
    ASSERT_EQ(r.n_elements(), m.n_elements());
    for (int i = 0; i < m.n_q2(); ++i) {
        EXPECT_EQ(r.q2_nodes()[i], m.q2_nodes()[i]);
    }
    for (int e = 0; e < m.n_elements(); ++e) {
        EXPECT_EQ(r.element_q2(e), m.element_q2(e));
    }
    EXPECT_EQ(r.boundaries(), m.boundaries());
}

TEST(ImportExport, ErrorsCarryLineNumbers)
{
    std::stringstream bad("latinflow-mesh v1 dim 2\nnodes 2\n0 0\n1 oops\n");
    try {
        import_mesh(bad);
        FAIL();
    }
    catch (const FormatError& e) {
        EXPECT_EQ(e.line(), 4);
    }
    std::stringstream header("mesh v2\n");
    EXPECT_THROW(import_mesh(header), FormatError);
}

TEST(ImportExport, UndefinedNodeAndInvertedElement)
{
    std::stringstream undefined("latinflow-mesh v1 dim 2\nnodes 1\n0 0\nelements 1\n0 0 0 0 0 0 0 0 5\n");
    EXPECT_THROW(import_mesh(undefined), FormatError);

    // clockwise corners give a negative Jacobian
    std::stringstream inverted("latinflow-mesh v1 dim 2\nnodes 9\n"
                               "0 0\n0 1\n1 1\n1 0\n0 0.5\n0.5 1\n1 0.5\n0.5 0\n0.5 0.5\n"
                               "elements 1\n0 1 2 3 4 5 6 7 8\n");
    EXPECT_THROW(import_mesh(inverted), GeometryError);
}

TEST(ImportExport, InteriorEdgeRejected)
{
    const Mesh m = generate_rectangle(2, 1, 2, 1);
    BoundaryMap b = m.boundaries();
    b["bad"] = {{0, 1}}; // shared by both elements
    std::vector<std::array<int, 9>> elems;
    for (int e = 0; e < m.n_elements(); ++e) {
        elems.push_back(m.element_q2(e));
    }
    EXPECT_THROW(Mesh::build(m.q2_nodes(), elems, b), GeometryError);
}

TEST(Locate, FindsElementAndReferenceCoordinates)
{
    const Mesh m = generate_rectangle(2.0, 1.0, 2, 1);
    const auto loc = locate(m, Point(1.5, 0.25));
    ASSERT_TRUE(loc.has_value());
    EXPECT_EQ(loc->element, 1);
    EXPECT_NEAR(loc->xi, 0.0, 1e-12);
    EXPECT_NEAR(loc->eta, 0.5, 1e-12);
    EXPECT_FALSE(locate(m, Point(3.0, 0.0)).has_value());
}
