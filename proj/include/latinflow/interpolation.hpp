#pragma once

#include <span>

#include "latinflow/assembly.hpp"

namespace latinflow {

/// Evaluates nodal fields at the shared Gauss points with the element bases.
class GaussInterpolator {
public:
    GaussInterpolator(const Mesh& mesh, const GaussGeometry& geo);

    int n_points() const { return n_points_; }

    /// Q1 nodal density to values and gradients.
    void density(const Vector& nodal, std::span<double> rho, std::span<Vector2> grad) const;
    /// Q2 nodal velocity (interleaved) to values and Voigt strains.
    void velocity(const Vector& nodal, std::span<Vector2> v, std::span<Voigt> eps) const;

private:
    int n_points_ = 0;
    SparseMatrix rho_;    // n_gp x n_q1
    SparseMatrix grad_;   // 2 n_gp x n_q1
    SparseMatrix vel_;    // 2 n_gp x 2 n_q2
    SparseMatrix strain_; // 3 n_gp x 2 n_q2
};

struct PointValue {
    double rho = 0.0;
    Vector2 v = Vector2::Zero();
};

/// Evaluates both fields at a physical point. Throws DomainError outside the mesh.
PointValue evaluate_at(const Mesh& mesh, const Point& p, const Vector& rho_nodal, const Vector& v_nodal);

} // namespace latinflow
