#include "latinflow/elements.hpp"

#include <cmath>

#include <Eigen/LU>

#include "latinflow/error.hpp"

namespace latinflow {

namespace {

// 1D Lagrange basis on {-1, 0, 1} evaluated at s; index by node coordinate.
struct Quadratic1d {
    std::array<double, 3> value;
    std::array<double, 3> deriv;
};

Quadratic1d quadratic_1d(double s)
{
    return {{0.5 * s * (s - 1.0), 1.0 - s * s, 0.5 * s * (s + 1.0)},
            {s - 0.5, -2.0 * s, s + 0.5}};
}

int slot(double node_coord) { return node_coord < -0.5 ? 0 : (node_coord > 0.5 ? 2 : 1); }

} // namespace

ShapeQ1 shape_q1(double xi, double eta)
{
    ShapeQ1 out;
    for (int a = 0; a < 4; ++a) {
        const double xa = kQ2NodeRef[a][0];
        const double ya = kQ2NodeRef[a][1];
        out.value[a] = 0.25 * (1.0 + xa * xi) * (1.0 + ya * eta);
        out.grad[a] = Point(0.25 * xa * (1.0 + ya * eta), 0.25 * ya * (1.0 + xa * xi));
    }
    return out;
}

ShapeQ2 shape_q2(double xi, double eta)
{
    const auto bx = quadratic_1d(xi);
    const auto by = quadratic_1d(eta);
    ShapeQ2 out;
    for (int a = 0; a < 9; ++a) {
        const int i = slot(kQ2NodeRef[a][0]);
        const int j = slot(kQ2NodeRef[a][1]);
        out.value[a] = bx.value[i] * by.value[j];
        out.grad[a] = Point(bx.deriv[i] * by.value[j], bx.value[i] * by.deriv[j]);
    }
    return out;
}

const std::array<std::array<double, 2>, 3>& gauss_1d_3()
{
    static const std::array<std::array<double, 2>, 3> rule{{
        {-std::sqrt(0.6), 5.0 / 9.0},
        {0.0, 8.0 / 9.0},
        {std::sqrt(0.6), 5.0 / 9.0},
    }};
    return rule;
}

const QuadratureRule& gauss_3x3()
{
    static const QuadratureRule rule = [] {
        QuadratureRule r;
        for (const auto& [eta, weta] : gauss_1d_3()) {
            for (const auto& [xi, wxi] : gauss_1d_3()) {
                r.points.push_back({xi, eta, wxi * weta});
            }
        }
        return r;
    }();
    return rule;
}

MappedPoint map_point(const ElementCoords& coords, double xi, double eta)
{
    MappedPoint mp;
    const ShapeQ2 ref2 = shape_q2(xi, eta);
    const ShapeQ1 ref1 = shape_q1(xi, eta);

    // J(i,j) = d x_i / d xi_j
    Eigen::Matrix2d jac = Eigen::Matrix2d::Zero();
    mp.x.setZero();
    for (int a = 0; a < 9; ++a) {
        mp.x += ref2.value[a] * coords[a];
        jac += coords[a] * ref2.grad[a].transpose();
    }
    mp.det_jacobian = jac.determinant();
    if (!(mp.det_jacobian > 0.0)) {
        throw GeometryError("degenerate element: det J = " + std::to_string(mp.det_jacobian));
    }
    const Eigen::Matrix2d jinv_t = jac.inverse().transpose();

    mp.q2.value = ref2.value;
    for (int a = 0; a < 9; ++a) {
        mp.q2.grad[a] = jinv_t * ref2.grad[a];
    }
    mp.q1.value = ref1.value;
    for (int a = 0; a < 4; ++a) {
        mp.q1.grad[a] = jinv_t * ref1.grad[a];
    }
    return mp;
}

std::array<double, 2> edge_reference_point(int edge, double s)
{
    switch (edge) {
    case 0: return {s, -1.0};
    case 1: return {1.0, s};
    case 2: return {-s, 1.0};
    case 3: return {-1.0, -s};
    default: throw GeometryError("local edge index out of range: " + std::to_string(edge));
    }
}

std::array<int, 3> edge_q2_nodes(int edge)
{
    if (edge < 0 || edge > 3) {
        throw GeometryError("local edge index out of range: " + std::to_string(edge));
    }
    return {edge, 4 + edge, (edge + 1) % 4};
}

std::array<EdgePoint, 3> edge_quadrature(const ElementCoords& coords, int local_edge)
{
    // d(xi,eta)/ds for each edge parametrisation above
    static constexpr std::array<std::array<double, 2>, 4> dref{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};

    std::array<EdgePoint, 3> out;
    const auto& rule = gauss_1d_3();
    for (int q = 0; q < 3; ++q) {
        const auto [xi, eta] = edge_reference_point(local_edge, rule[q][0]);
        const ShapeQ2 ref = shape_q2(xi, eta);
        Point x = Point::Zero();
        Point tangent = Point::Zero();
        for (int a = 0; a < 9; ++a) {
            x += ref.value[a] * coords[a];
            const double dn_ds = ref.grad[a].x() * dref[local_edge][0] + ref.grad[a].y() * dref[local_edge][1];
            tangent += dn_ds * coords[a];
        }
        const double len = tangent.norm();
        if (!(len > 0.0)) {
            throw GeometryError("degenerate boundary edge");
        }
        out[q].x = x;
        out[q].weight = rule[q][1] * len;
        out[q].normal = Point(tangent.y(), -tangent.x()) / len;
        out[q].q2 = ref;
    }
    return out;
}

} // namespace latinflow
