#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "latinflow/assembly.hpp"

namespace latinflow {

enum class DofKind { density, velocity };

/// Space-time field: origin(t) + sum_i lambda_i(t) Lambda_i.
/// Columns are time steps t_1..t_N.
struct PGDField {
    DofKind kind = DofKind::density;
    Eigen::MatrixXd origin;         // n_dofs x N
    Eigen::MatrixXd spatial_modes;  // n_dofs x m, orthonormal, zero on Dirichlet DoFs
    Eigen::MatrixXd temporal_modes; // m x N

    int n_modes() const { return static_cast<int>(spatial_modes.cols()); }
    int n_steps() const { return static_cast<int>(origin.cols()); }
    Vector reconstruct(int n) const;
};

/// Free-DoF residual r_t = F_loc(t) - H (u(t)), one column per time step.
struct ResidualSeries {
    Eigen::MatrixXd r;        // n_free x N
    double dt = 0.0;          // time weight w_t
    std::vector<double> step_norms;

    /// (sum_t w_t |r_t|^2)^(1/2)
    double norm() const;
};

ResidualSeries make_residual(Eigen::MatrixXd r, double dt);

struct PgdOptions {
    double kappa = 0.1;
    int fixed_point_max = 3;
    double fixed_point_tol = 1e-2;
    double orthogonality_drop = 1e-8;
    double condition_limit = 1e12;
};

/// Solves H u(t) = f(t) with lifted Dirichlet values for every step; steps
/// whose data equal the previous one reuse its solution.
Eigen::MatrixXd initialize_field(const ConstrainedSystem& system, int n_steps,
                                 const std::function<Vector(int)>& rhs, const std::function<Vector(int)>& dirichlet);

/// Exact per-step solve H_ff delta(t) = g(t).
Eigen::MatrixXd full_order_correction(const ConstrainedSystem& system, const Eigen::MatrixXd& g);

/// Galerkin update of all temporal functions for a fixed spatial basis
/// (free-DoF columns). `H_basis` caches H_ff * basis. Returns m x N
/// coefficients; ill-conditioned reduced operators drop their weakest mode,
/// reported through `dropped`.
Eigen::MatrixXd pgd_update(const Eigen::MatrixXd& basis, const Eigen::MatrixXd& H_basis, const Eigen::MatrixXd& F_loc,
                           const PgdOptions& opt = {}, std::optional<int>* dropped = nullptr);

struct NewMode {
    Vector spatial;   // free DoFs, unit norm
    Vector temporal;  // N
    int fixed_point_iterations = 0;
};

/// Greedy rank-one enrichment from the residual (free-DoF space).
std::optional<NewMode> pgd_generate_mode(const ResidualSeries& residual, const ConstrainedSystem& system,
                                         const Eigen::MatrixXd& basis, const PgdOptions& opt = {});

bool needs_new_mode(const ResidualSeries& before, const ResidualSeries& after, double kappa, bool basis_empty);

struct GlobalStageOptions {
    bool full_order = false;
    double relaxation = 1.0;
    PgdOptions pgd;
};

struct GlobalStageReport {
    bool generated = false;
    int dropped_modes = 0;
    double residual_before = 0.0;
    double residual_after = 0.0;
};

/// Global stage of one physical field: holds the operator, its factor and the
/// current space-time approximation.
class FieldSolver {
public:
    FieldSolver(DofKind kind, ConstrainedSystem system, Eigen::MatrixXd origin, double dt, GlobalStageOptions opt);

    /// One global stage from local-stage loads (full-size, one column per step).
    GlobalStageReport advance(const Eigen::MatrixXd& F_loc, bool allow_growth);

    const ConstrainedSystem& system() const { return system_; }
    const PGDField& field() const { return field_; }
    int n_modes() const { return field_.n_modes(); }
    bool full_order() const { return opt_.full_order; }

    /// Full DoF vector at step n (0-based, t_{n+1}).
    Vector nodal(int n) const;

    /// Residual of the current approximation against `F_loc_free`.
    ResidualSeries residual(const Eigen::MatrixXd& F_loc_free) const;

private:
    Eigen::MatrixXd free_basis() const;
    void append_mode(const Vector& spatial_free);
    void drop_mode(int i);

    ConstrainedSystem system_;
    PGDField field_;
    double dt_;
    GlobalStageOptions opt_;
    Eigen::MatrixXd basis_free_;   // n_free x m
    Eigen::MatrixXd H_basis_;      // n_free x m
    Eigen::MatrixXd correction_;   // n_free x N, full-order path only
};

} // namespace latinflow
