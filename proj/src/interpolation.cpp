#include "latinflow/interpolation.hpp"

#include "latinflow/error.hpp"

namespace latinflow {

namespace {

using Triplets = std::vector<Eigen::Triplet<double, int>>;

SparseMatrix build(int rows, int cols, const Triplets& t)
{
    SparseMatrix m(rows, cols);
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

} // namespace

GaussInterpolator::GaussInterpolator(const Mesh& mesh, const GaussGeometry& geo) : n_points_(geo.n_points())
{
    Triplets tr, tg, tv, te;
    for (int g = 0; g < n_points_; ++g) {
        const int e = g / GaussGeometry::kPerElement;
        const auto& gp = geo[g];
        const auto& q1 = mesh.element_q1(e);
        for (int a = 0; a < 4; ++a) {
            tr.emplace_back(g, q1[a], gp.q1.value[a]);
            tg.emplace_back(2 * g, q1[a], gp.q1.grad[a].x());
            tg.emplace_back(2 * g + 1, q1[a], gp.q1.grad[a].y());
        }
        const auto& q2 = mesh.element_q2(e);
        for (int a = 0; a < 9; ++a) {
            const int dx = velocity_dof(q2[a], 0);
            const int dy = velocity_dof(q2[a], 1);
            const double n = gp.q2.value[a];
            const Point& d = gp.q2.grad[a];
            tv.emplace_back(2 * g, dx, n);
            tv.emplace_back(2 * g + 1, dy, n);
            te.emplace_back(3 * g, dx, d.x());
            te.emplace_back(3 * g + 1, dy, d.y());
            te.emplace_back(3 * g + 2, dx, d.y());
            te.emplace_back(3 * g + 2, dy, d.x());
        }
    }
    rho_ = build(n_points_, mesh.n_q1(), tr);
    grad_ = build(2 * n_points_, mesh.n_q1(), tg);
    vel_ = build(2 * n_points_, 2 * mesh.n_q2(), tv);
    strain_ = build(3 * n_points_, 2 * mesh.n_q2(), te);
}

void GaussInterpolator::density(const Vector& nodal, std::span<double> rho, std::span<Vector2> grad) const
{
    const Vector r = rho_ * nodal;
    const Vector d = grad_ * nodal;
    for (int g = 0; g < n_points_; ++g) {
        rho[g] = r[g];
        grad[g] = Vector2(d[2 * g], d[2 * g + 1]);
    }
}

void GaussInterpolator::velocity(const Vector& nodal, std::span<Vector2> v, std::span<Voigt> eps) const
{
    const Vector a = vel_ * nodal;
    const Vector s = strain_ * nodal;
    for (int g = 0; g < n_points_; ++g) {
        v[g] = Vector2(a[2 * g], a[2 * g + 1]);
        eps[g] = Voigt(s[3 * g], s[3 * g + 1], s[3 * g + 2]);
    }
}

PointValue evaluate_at(const Mesh& mesh, const Point& p, const Vector& rho_nodal, const Vector& v_nodal)
{
    const auto loc = locate(mesh, p, 1e-9);
    if (!loc) {
        throw DomainError("point (" + std::to_string(p.x()) + ", " + std::to_string(p.y()) + ") lies outside the mesh");
    }
    const ShapeQ1 s1 = shape_q1(loc->xi, loc->eta);
    const ShapeQ2 s2 = shape_q2(loc->xi, loc->eta);
    PointValue out;
    const auto& q1 = mesh.element_q1(loc->element);
    for (int a = 0; a < 4; ++a) {
        out.rho += s1.value[a] * rho_nodal[q1[a]];
    }
    const auto& q2 = mesh.element_q2(loc->element);
    for (int a = 0; a < 9; ++a) {
        out.v += s2.value[a] * Vector2(v_nodal[velocity_dof(q2[a], 0)], v_nodal[velocity_dof(q2[a], 1)]);
    }
    return out;
}

} // namespace latinflow
