#pragma once

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "latinflow/constitutive.hpp"
#include "latinflow/elements.hpp"
#include "latinflow/mesh.hpp"

namespace latinflow {

/// CSR storage, columns sorted per row.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Vector = Eigen::VectorXd;

/// Velocity DoFs are interleaved per Q2 node.
inline int velocity_dof(int node, int component) { return 2 * node + component; }

struct GaussPointData {
    double weight = 0.0; // quadrature weight times det J
    Point x;
    ShapeQ1 q1;
    ShapeQ2 q2;
};

/// Mapped 3x3 Gauss points of every element, shared by all volume integrals.
/// Point g belongs to element g / 9.
class GaussGeometry {
public:
    static constexpr int kPerElement = 9;

    explicit GaussGeometry(const Mesh& mesh);

    int n_points() const { return static_cast<int>(points_.size()); }
    const GaussPointData& operator[](int g) const { return points_[g]; }

private:
    std::vector<GaussPointData> points_;
};

SparseMatrix mass_scalar(const Mesh& mesh, const GaussGeometry& geo);
SparseMatrix stiffness_scalar(const Mesh& mesh, const GaussGeometry& geo);
SparseMatrix mass_vector(const Mesh& mesh, const GaussGeometry& geo);
SparseMatrix viscous_stiffness(const Mesh& mesh, const GaussGeometry& geo, const Material& material);

struct GlobalOperators {
    SparseMatrix H_rho; // -H_zw K_rr + H_rho_q C_rr
    SparseMatrix H_v;   // K_vv + H_v_gamma C_vv
};

GlobalOperators global_operators(const Mesh& mesh, const GaussGeometry& geo, const Material& material,
                                 const SearchDirections& sd);

/// F[j] = sum_gp w detJ (delta . grad N_j - gamma N_j) over the Q1 basis.
Vector rhs_scalar_from_gauss(const Mesh& mesh, const GaussGeometry& geo, std::span<const Vector2> delta_hat,
                             std::span<const double> gamma_hat);

/// F = -int A : eps(v*) - int beta . v* over the Q2 basis.
Vector rhs_vector_from_gauss(const Mesh& mesh, const GaussGeometry& geo, std::span<const Voigt> A_hat,
                             std::span<const Vector2> beta_hat);

/// Pressure applied on a named boundary set, giving traction -p n.
struct PressureLoad {
    std::string set;
    double pressure = 0.0;
};

/// int b . v* + int F_d . v* dS.
Vector load_vector(const Mesh& mesh, const GaussGeometry& geo, const Vector2& body_force,
                   std::span<const PressureLoad> pressures);

/// Symmetric elimination of Dirichlet DoFs with a Cholesky factor of the
/// free-free block, computed once and shared read-only between copies.
class ConstrainedSystem {
public:
    ConstrainedSystem(const SparseMatrix& H, std::vector<int> fixed_dofs);

    int n_dofs() const { return n_dofs_; }
    int n_free() const { return static_cast<int>(free_.size()); }
    const std::vector<int>& free_dofs() const { return free_; }
    const std::vector<int>& fixed_dofs() const { return fixed_; }
    const SparseMatrix& free_matrix() const { return H_ff_; }

    Vector restrict_free(const Vector& full) const;
    /// Full vector with free entries from `free` and fixed entries from `fixed_values_full`.
    Vector extend(const Vector& free, const Vector& fixed_values_full) const;
    Vector extend_homogeneous(const Vector& free) const;

    /// H_ff x = b. Throws SolverError when the relative residual exceeds 1e-10.
    Vector solve_free(const Vector& rhs_free) const;
    /// Full solve: free rows of `rhs_full`, fixed entries taken from `values_full`.
    Vector solve(const Vector& rhs_full, const Vector& values_full) const;
    Vector apply_free(const Vector& x_free) const { return H_ff_ * x_free; }

private:
    struct Factor;
    int n_dofs_ = 0;
    std::vector<int> free_;
    std::vector<int> fixed_;
    SparseMatrix H_ff_;
    SparseMatrix H_fd_;
    std::shared_ptr<const Factor> factor_;
};

/// Max |A - A^T| / max |A| over the stored pattern.
double symmetry_defect(const SparseMatrix& A);

} // namespace latinflow
