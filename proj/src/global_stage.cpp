#include "latinflow/global_stage.hpp"

#include <cmath>
#include <iostream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "latinflow/error.hpp"

namespace latinflow {

Vector PGDField::reconstruct(int n) const
{
    Vector out = origin.col(n);
    if (n_modes() > 0) {
        out += spatial_modes * temporal_modes.col(n);
    }
    return out;
}

double ResidualSeries::norm() const
{
    double s = 0.0;
    for (double v : step_norms) {
        s += dt * v * v;
    }
    return std::sqrt(s);
}

ResidualSeries make_residual(Eigen::MatrixXd r, double dt)
{
    ResidualSeries out;
    out.dt = dt;
    out.step_norms.resize(r.cols());
    for (int t = 0; t < r.cols(); ++t) {
        out.step_norms[t] = r.col(t).norm();
    }
    out.r = std::move(r);
    return out;
}

Eigen::MatrixXd initialize_field(const ConstrainedSystem& system, int n_steps,
                                 const std::function<Vector(int)>& rhs, const std::function<Vector(int)>& dirichlet)
{
    Eigen::MatrixXd out(system.n_dofs(), n_steps);
    Vector prev_rhs;
    Vector prev_bc;
    for (int n = 0; n < n_steps; ++n) {
        Vector f = rhs(n);
        Vector bc = dirichlet(n);
        if (n > 0 && f == prev_rhs && bc == prev_bc) {
            out.col(n) = out.col(n - 1);
            continue;
        }
        out.col(n) = system.solve(f, bc);
        prev_rhs = std::move(f);
        prev_bc = std::move(bc);
    }
    return out;
}

Eigen::MatrixXd full_order_correction(const ConstrainedSystem& system, const Eigen::MatrixXd& g)
{
    Eigen::MatrixXd out(g.rows(), g.cols());
    for (int t = 0; t < g.cols(); ++t) {
        out.col(t) = system.solve_free(g.col(t));
    }
    return out;
}

Eigen::MatrixXd pgd_update(const Eigen::MatrixXd& basis, const Eigen::MatrixXd& H_basis, const Eigen::MatrixXd& F_loc,
                           const PgdOptions& opt, std::optional<int>* dropped)
{
    const int m = static_cast<int>(basis.cols());
    if (dropped != nullptr) {
        dropped->reset();
    }
    if (m == 0) {
        return Eigen::MatrixXd::Zero(0, F_loc.cols());
    }
    Eigen::MatrixXd R = basis.transpose() * H_basis;
    R = 0.5 * (R + R.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(R);
    const double lo = eig.eigenvalues()(0);
    const double hi = eig.eigenvalues()(m - 1);
    if (!(lo > 0.0) || hi / lo > opt.condition_limit) {
        std::cerr << "warning: reduced PGD operator ill-conditioned (cond = " << (lo > 0.0 ? hi / lo : INFINITY)
                  << "), dropping weakest mode\n";
        if (dropped != nullptr) {
            Eigen::Index worst = 0;
            eig.eigenvectors().col(0).cwiseAbs().maxCoeff(&worst);
            *dropped = static_cast<int>(worst);
        }
    }
    const Eigen::MatrixXd rhs = basis.transpose() * F_loc;
    return R.ldlt().solve(rhs);
}

std::optional<NewMode> pgd_generate_mode(const ResidualSeries& residual, const ConstrainedSystem& system,
                                         const Eigen::MatrixXd& basis, const PgdOptions& opt)
{
    const Eigen::MatrixXd& r = residual.r;
    const int nt = static_cast<int>(r.cols());
    if (nt == 0 || residual.norm() == 0.0) {
        return std::nullopt;
    }
    const double w = residual.dt;

    Vector lambda(nt);
    for (int t = 0; t < nt; ++t) {
        lambda[t] = residual.step_norms[t];
    }

    Vector spatial;
    int iterations = 0;
    for (int k = 0; k < opt.fixed_point_max; ++k) {
        ++iterations;
        const double denom = w * lambda.squaredNorm();
        if (!(denom > 0.0)) {
            return std::nullopt;
        }
        const Vector s = w * (r * lambda) / denom;
        spatial = system.solve_free(s);
        const double norm = spatial.norm();
        if (!(norm > 0.0)) {
            return std::nullopt;
        }
        spatial /= norm;

        const Vector Hs = system.apply_free(spatial);
        const double stiffness = spatial.dot(Hs);
        const Vector next = (r.transpose() * spatial) / stiffness;
        const double next_norm = next.norm();
        const double change = next_norm > 0.0 ? (next - lambda).norm() / next_norm : 0.0;
        lambda = next;
        if (change < opt.fixed_point_tol) {
            break;
        }
    }

    // modified Gram-Schmidt, applied twice
    const double before = spatial.norm();
    for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i < basis.cols(); ++i) {
            spatial -= basis.col(i).dot(spatial) * basis.col(i);
        }
    }
    const double after = spatial.norm();
    if (!(after > opt.orthogonality_drop * before)) {
        return std::nullopt;
    }
    spatial /= after;

    Eigen::Index imax = 0;
    spatial.cwiseAbs().maxCoeff(&imax);
    if (spatial[imax] < 0.0) {
        spatial = -spatial;
    }

    const Vector Hs = system.apply_free(spatial);
    NewMode mode;
    mode.temporal = (r.transpose() * spatial) / spatial.dot(Hs);
    mode.spatial = std::move(spatial);
    mode.fixed_point_iterations = iterations;
    return mode;
}

bool needs_new_mode(const ResidualSeries& before, const ResidualSeries& after, double kappa, bool basis_empty)
{
    const double a = after.norm();
    if (basis_empty) {
        return a > 0.0;
    }
    return a > kappa * before.norm();
}

FieldSolver::FieldSolver(DofKind kind, ConstrainedSystem system, Eigen::MatrixXd origin, double dt,
                         GlobalStageOptions opt)
    : system_(std::move(system)), dt_(dt), opt_(opt)
{
    field_.kind = kind;
    field_.origin = std::move(origin);
    const int nt = static_cast<int>(field_.origin.cols());
    field_.spatial_modes.resize(system_.n_dofs(), 0);
    field_.temporal_modes.resize(0, nt);
    basis_free_.resize(system_.n_free(), 0);
    H_basis_.resize(system_.n_free(), 0);
    if (opt_.full_order) {
        correction_ = Eigen::MatrixXd::Zero(system_.n_free(), nt);
    }
}

Vector FieldSolver::nodal(int n) const
{
    if (opt_.full_order) {
        Vector out = field_.origin.col(n);
        const auto& free = system_.free_dofs();
        for (int i = 0; i < system_.n_free(); ++i) {
            out[free[i]] += correction_(i, n);
        }
        return out;
    }
    return field_.reconstruct(n);
}

ResidualSeries FieldSolver::residual(const Eigen::MatrixXd& F_loc_free) const
{
    Eigen::MatrixXd r = F_loc_free;
    if (opt_.full_order) {
        for (int t = 0; t < r.cols(); ++t) {
            r.col(t) -= system_.apply_free(correction_.col(t));
        }
    }
    else if (n_modes() > 0) {
        r.noalias() -= H_basis_ * field_.temporal_modes;
    }
    return make_residual(std::move(r), dt_);
}

void FieldSolver::append_mode(const Vector& spatial_free)
{
    const int m = n_modes();
    basis_free_.conservativeResize(Eigen::NoChange, m + 1);
    basis_free_.col(m) = spatial_free;
    H_basis_.conservativeResize(Eigen::NoChange, m + 1);
    H_basis_.col(m) = system_.apply_free(spatial_free);
    field_.spatial_modes.conservativeResize(Eigen::NoChange, m + 1);
    field_.spatial_modes.col(m) = system_.extend_homogeneous(spatial_free);
    field_.temporal_modes.conservativeResize(m + 1, Eigen::NoChange);
    field_.temporal_modes.row(m).setZero();
}

void FieldSolver::drop_mode(int i)
{
    auto drop_col = [i](Eigen::MatrixXd& a) {
        const int m = static_cast<int>(a.cols());
        for (int k = i; k + 1 < m; ++k) {
            a.col(k) = a.col(k + 1);
        }
        a.conservativeResize(Eigen::NoChange, m - 1);
    };
    drop_col(basis_free_);
    drop_col(H_basis_);
    drop_col(field_.spatial_modes);
    const int m = static_cast<int>(field_.temporal_modes.rows());
    for (int k = i; k + 1 < m; ++k) {
        field_.temporal_modes.row(k) = field_.temporal_modes.row(k + 1);
    }
    field_.temporal_modes.conservativeResize(m - 1, Eigen::NoChange);
}

GlobalStageReport FieldSolver::advance(const Eigen::MatrixXd& F_loc, bool allow_growth)
{
    GlobalStageReport report;
    const int nt = static_cast<int>(F_loc.cols());
    Eigen::MatrixXd F(system_.n_free(), nt);
    for (int t = 0; t < nt; ++t) {
        F.col(t) = system_.restrict_free(F_loc.col(t));
    }
    const double omega = opt_.relaxation;

    if (opt_.full_order) {
        const ResidualSeries g = residual(F);
        report.residual_before = g.norm();
        correction_ += omega * full_order_correction(system_, g.r);
        report.residual_after = residual(F).norm();
        return report;
    }

    const Eigen::MatrixXd previous = field_.temporal_modes;
    auto update = [&] {
        for (;;) {
            std::optional<int> dropped;
            Eigen::MatrixXd a = pgd_update(basis_free_, H_basis_, F, opt_.pgd, &dropped);
            if (dropped && n_modes() > 1) {
                drop_mode(*dropped);
                ++report.dropped_modes;
                continue;
            }
            field_.temporal_modes = std::move(a);
            return;
        }
    };

    const ResidualSeries before = residual(F);
    report.residual_before = before.norm();
    update();
    ResidualSeries after = residual(F);
    report.residual_after = after.norm();

    const double scale = F.norm() * std::sqrt(dt_);
    const bool negligible = !(report.residual_after > 1e-13 * scale);
    if (allow_growth && !negligible && needs_new_mode(before, after, opt_.pgd.kappa, n_modes() == 0)) {
        if (auto mode = pgd_generate_mode(after, system_, basis_free_, opt_.pgd)) {
            append_mode(mode->spatial);
            report.generated = true;
            update();
        }
    }

    if (omega != 1.0 && report.dropped_modes == 0) {
        // blend with the previous iterate; new modes start from zero
        Eigen::MatrixXd old = Eigen::MatrixXd::Zero(field_.temporal_modes.rows(), nt);
        old.topRows(previous.rows()) = previous;
        field_.temporal_modes = old + omega * (field_.temporal_modes - old);
    }
    report.residual_after = residual(F).norm();
    return report;
}

} // namespace latinflow
