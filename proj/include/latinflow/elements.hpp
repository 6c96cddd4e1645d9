#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace latinflow {

using Point = Eigen::Vector2d;

// Reference square [-1,1]^2. Corner k sits at kCornerRef[k]; the Q2 node
// ordering is corners counter-clockwise, then mid-edge nodes (edge k joins
// corner k and corner k+1), then the center.
inline constexpr std::array<std::array<double, 2>, 9> kQ2NodeRef{{
    {-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0},
    {0.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0},
    {0.0, 0.0},
}};

template <int N>
struct ShapeEval {
    std::array<double, N> value{};
    std::array<Point, N> grad{}; // reference or physical, depending on producer
};

using ShapeQ1 = ShapeEval<4>;
using ShapeQ2 = ShapeEval<9>;

ShapeQ1 shape_q1(double xi, double eta);
ShapeQ2 shape_q2(double xi, double eta);

struct QuadraturePoint {
    double xi;
    double eta;
    double weight;
};

struct QuadratureRule {
    std::vector<QuadraturePoint> points;
};

/// Tensor-product 3-point Gauss-Legendre rule on the reference square.
const QuadratureRule& gauss_3x3();

/// 3-point Gauss-Legendre rule on [-1,1]: abscissae and weights.
const std::array<std::array<double, 2>, 3>& gauss_1d_3();

struct MappedPoint {
    Point x;
    double det_jacobian = 0.0;
    ShapeQ1 q1; // physical gradients
    ShapeQ2 q2; // physical gradients
};

using ElementCoords = std::array<Point, 9>;

/// Isoparametric Q2 map of (xi, eta). Throws GeometryError when det J <= 0.
MappedPoint map_point(const ElementCoords& coords, double xi, double eta);

struct EdgePoint {
    Point x;
    double weight = 0.0; // Gauss weight times arc-length density
    Point normal;        // unit outward normal
    ShapeQ2 q2;          // only values are meaningful
};

/// Gauss points on local edge 0..3 (counter-clockwise from corner 0).
std::array<EdgePoint, 3> edge_quadrature(const ElementCoords& coords, int local_edge);

/// Reference coordinates of the point on local edge `edge` at parameter s in [-1,1].
std::array<double, 2> edge_reference_point(int edge, double s);

/// Local Q2 node indices along an edge: (start corner, mid-edge, end corner).
std::array<int, 3> edge_q2_nodes(int edge);

} // namespace latinflow
