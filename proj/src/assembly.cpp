#include "latinflow/assembly.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCholesky>

#include "latinflow/error.hpp"

namespace latinflow {

GaussGeometry::GaussGeometry(const Mesh& mesh)
{
    const auto& rule = gauss_3x3();
    points_.reserve(static_cast<size_t>(mesh.n_elements()) * kPerElement);
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const ElementCoords coords = mesh.element_coords(e);
        for (const auto& qp : rule.points) {
            const MappedPoint mp = map_point(coords, qp.xi, qp.eta);
            points_.push_back({qp.weight * mp.det_jacobian, mp.x, mp.q1, mp.q2});
        }
    }
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double, int>>;

SparseMatrix from_triplets(int n, const Triplets& t)
{
    SparseMatrix m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

template <typename LocalFn>
SparseMatrix assemble_q1(const Mesh& mesh, const GaussGeometry& geo, LocalFn&& local)
{
    Triplets t;
    t.reserve(static_cast<size_t>(mesh.n_elements()) * 16);
    for (int e = 0; e < mesh.n_elements(); ++e) {
        Eigen::Matrix4d ke = Eigen::Matrix4d::Zero();
        for (int q = 0; q < GaussGeometry::kPerElement; ++q) {
            local(geo[e * GaussGeometry::kPerElement + q], ke);
        }
        const auto& dofs = mesh.element_q1(e);
        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) {
                t.emplace_back(dofs[a], dofs[b], ke(a, b));
            }
        }
    }
    return from_triplets(mesh.n_q1(), t);
}

template <typename LocalFn>
SparseMatrix assemble_q2_vector(const Mesh& mesh, const GaussGeometry& geo, LocalFn&& local)
{
    using Local = Eigen::Matrix<double, 18, 18>;
    Triplets t;
    t.reserve(static_cast<size_t>(mesh.n_elements()) * 18 * 18);
    for (int e = 0; e < mesh.n_elements(); ++e) {
        Local ke = Local::Zero();
        for (int q = 0; q < GaussGeometry::kPerElement; ++q) {
            local(geo[e * GaussGeometry::kPerElement + q], ke);
        }
        const auto& nodes = mesh.element_q2(e);
        for (int a = 0; a < 9; ++a) {
            for (int ca = 0; ca < 2; ++ca) {
                for (int b = 0; b < 9; ++b) {
                    for (int cb = 0; cb < 2; ++cb) {
                        const double v = ke(2 * a + ca, 2 * b + cb);
                        if (v != 0.0) {
                            t.emplace_back(velocity_dof(nodes[a], ca), velocity_dof(nodes[b], cb), v);
                        }
                    }
                }
            }
        }
    }
    return from_triplets(2 * mesh.n_q2(), t);
}

// Strain (Voigt) of the unit field in component c of node a.
Voigt strain_of(const Point& grad, int c)
{
    return c == 0 ? Voigt(grad.x(), 0.0, grad.y()) : Voigt(0.0, grad.y(), grad.x());
}

} // namespace

SparseMatrix mass_scalar(const Mesh& mesh, const GaussGeometry& geo)
{
    return assemble_q1(mesh, geo, [](const GaussPointData& gp, Eigen::Matrix4d& ke) {
        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) {
                ke(a, b) += gp.weight * gp.q1.value[a] * gp.q1.value[b];
            }
        }
    });
}

SparseMatrix stiffness_scalar(const Mesh& mesh, const GaussGeometry& geo)
{
    return assemble_q1(mesh, geo, [](const GaussPointData& gp, Eigen::Matrix4d& ke) {
        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) {
                ke(a, b) += gp.weight * gp.q1.grad[a].dot(gp.q1.grad[b]);
            }
        }
    });
}

SparseMatrix mass_vector(const Mesh& mesh, const GaussGeometry& geo)
{
    return assemble_q2_vector(mesh, geo, [](const GaussPointData& gp, auto& ke) {
        for (int a = 0; a < 9; ++a) {
            for (int b = 0; b < 9; ++b) {
                const double m = gp.weight * gp.q2.value[a] * gp.q2.value[b];
                ke(2 * a, 2 * b) += m;
                ke(2 * a + 1, 2 * b + 1) += m;
            }
        }
    });
}

SparseMatrix viscous_stiffness(const Mesh& mesh, const GaussGeometry& geo, const Material& material)
{
    const VoigtMatrix V = voigt_viscosity(material);
    return assemble_q2_vector(mesh, geo, [&V](const GaussPointData& gp, auto& ke) {
        std::array<Voigt, 18> B;
        for (int a = 0; a < 9; ++a) {
            B[2 * a] = strain_of(gp.q2.grad[a], 0);
            B[2 * a + 1] = strain_of(gp.q2.grad[a], 1);
        }
        for (int i = 0; i < 18; ++i) {
            const Voigt VBi = gp.weight * (V * B[i]);
            for (int j = 0; j < 18; ++j) {
                ke(i, j) += VBi.dot(B[j]);
            }
        }
    });
}

GlobalOperators global_operators(const Mesh& mesh, const GaussGeometry& geo, const Material& material,
                                 const SearchDirections& sd)
{
    GlobalOperators ops;
    ops.H_rho = (-sd.H_zw) * stiffness_scalar(mesh, geo) + sd.H_rho_q * mass_scalar(mesh, geo);
    ops.H_v = viscous_stiffness(mesh, geo, material) + sd.H_v_gamma * mass_vector(mesh, geo);
    ops.H_rho.makeCompressed();
    ops.H_v.makeCompressed();
    return ops;
}

Vector rhs_scalar_from_gauss(const Mesh& mesh, const GaussGeometry& geo, std::span<const Vector2> delta_hat,
                             std::span<const double> gamma_hat)
{
    if (static_cast<int>(delta_hat.size()) != geo.n_points() || static_cast<int>(gamma_hat.size()) != geo.n_points()) {
        throw Error("rhs_scalar_from_gauss: Gauss data size mismatch");
    }
    Vector f = Vector::Zero(mesh.n_q1());
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const auto& dofs = mesh.element_q1(e);
        for (int q = 0; q < GaussGeometry::kPerElement; ++q) {
            const int g = e * GaussGeometry::kPerElement + q;
            const auto& gp = geo[g];
            for (int a = 0; a < 4; ++a) {
                f[dofs[a]] += gp.weight * (delta_hat[g].dot(gp.q1.grad[a]) - gamma_hat[g] * gp.q1.value[a]);
            }
        }
    }
    return f;
}

Vector rhs_vector_from_gauss(const Mesh& mesh, const GaussGeometry& geo, std::span<const Voigt> A_hat,
                             std::span<const Vector2> beta_hat)
{
    if (static_cast<int>(A_hat.size()) != geo.n_points() || static_cast<int>(beta_hat.size()) != geo.n_points()) {
        throw Error("rhs_vector_from_gauss: Gauss data size mismatch");
    }
    Vector f = Vector::Zero(2 * mesh.n_q2());
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const auto& nodes = mesh.element_q2(e);
        for (int q = 0; q < GaussGeometry::kPerElement; ++q) {
            const int g = e * GaussGeometry::kPerElement + q;
            const auto& gp = geo[g];
            const Voigt& A = A_hat[g];
            const Vector2& b = beta_hat[g];
            for (int a = 0; a < 9; ++a) {
                const Point& dn = gp.q2.grad[a];
                const double n = gp.q2.value[a];
                // A : eps(N_a e_x) = A_xx dNx + A_xy dNy ; likewise for e_y
                f[velocity_dof(nodes[a], 0)] -= gp.weight * (A[0] * dn.x() + A[2] * dn.y() + b.x() * n);
                f[velocity_dof(nodes[a], 1)] -= gp.weight * (A[1] * dn.y() + A[2] * dn.x() + b.y() * n);
            }
        }
    }
    return f;
}

Vector load_vector(const Mesh& mesh, const GaussGeometry& geo, const Vector2& body_force,
                   std::span<const PressureLoad> pressures)
{
    Vector f = Vector::Zero(2 * mesh.n_q2());
    if (body_force.squaredNorm() > 0.0) {
        for (int e = 0; e < mesh.n_elements(); ++e) {
            const auto& nodes = mesh.element_q2(e);
            for (int q = 0; q < GaussGeometry::kPerElement; ++q) {
                const auto& gp = geo[e * GaussGeometry::kPerElement + q];
                for (int a = 0; a < 9; ++a) {
                    f[velocity_dof(nodes[a], 0)] += gp.weight * gp.q2.value[a] * body_force.x();
                    f[velocity_dof(nodes[a], 1)] += gp.weight * gp.q2.value[a] * body_force.y();
                }
            }
        }
    }
    for (const auto& load : pressures) {
        for (const auto& be : mesh.boundary_edges(load.set)) {
            const auto& nodes = mesh.element_q2(be.element);
            for (const auto& ep : edge_quadrature(mesh.element_coords(be.element), be.local_edge)) {
                const Vector2 traction = -load.pressure * ep.normal;
                for (int a = 0; a < 9; ++a) {
                    const double wn = ep.weight * ep.q2.value[a];
                    f[velocity_dof(nodes[a], 0)] += wn * traction.x();
                    f[velocity_dof(nodes[a], 1)] += wn * traction.y();
                }
            }
        }
    }
    return f;
}

struct ConstrainedSystem::Factor {
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
};

ConstrainedSystem::ConstrainedSystem(const SparseMatrix& H, std::vector<int> fixed_dofs)
    : n_dofs_(static_cast<int>(H.rows()))
{
    if (H.rows() != H.cols()) {
        throw SolverError("constrain: matrix is not square");
    }
    std::sort(fixed_dofs.begin(), fixed_dofs.end());
    fixed_dofs.erase(std::unique(fixed_dofs.begin(), fixed_dofs.end()), fixed_dofs.end());
    std::vector<int> map(n_dofs_, -1); // >= 0: free index, < 0: -(fixed index) - 1
    for (size_t k = 0; k < fixed_dofs.size(); ++k) {
        const int d = fixed_dofs[k];
        if (d < 0 || d >= n_dofs_) {
            throw SolverError("constrain: Dirichlet DoF out of range");
        }
        map[d] = -static_cast<int>(k) - 1;
    }
    fixed_ = std::move(fixed_dofs);
    for (int d = 0; d < n_dofs_; ++d) {
        if (map[d] == -1 && !std::binary_search(fixed_.begin(), fixed_.end(), d)) {
            map[d] = static_cast<int>(free_.size());
            free_.push_back(d);
        }
    }

    std::vector<Eigen::Triplet<double, int>> tff;
    std::vector<Eigen::Triplet<double, int>> tfd;
    for (int row = 0; row < n_dofs_; ++row) {
        const int fr = map[row];
        if (fr < 0) {
            continue;
        }
        for (SparseMatrix::InnerIterator it(H, row); it; ++it) {
            const int c = map[it.col()];
            if (c >= 0) {
                tff.emplace_back(fr, c, it.value());
            }
            else {
                tfd.emplace_back(fr, -c - 1, it.value());
            }
        }
    }
    H_ff_.resize(n_free(), n_free());
    H_ff_.setFromTriplets(tff.begin(), tff.end());
    H_ff_.makeCompressed();
    H_fd_.resize(n_free(), static_cast<int>(fixed_.size()));
    H_fd_.setFromTriplets(tfd.begin(), tfd.end());
    H_fd_.makeCompressed();

    auto factor = std::make_shared<Factor>();
    if (n_free() > 0) {
        const Eigen::SparseMatrix<double> colmajor = H_ff_;
        factor->llt.compute(colmajor);
        if (factor->llt.info() != Eigen::Success) {
            throw SolverError("Cholesky factorization failed: reduced operator is not positive definite");
        }
    }
    factor_ = std::move(factor);
}

Vector ConstrainedSystem::restrict_free(const Vector& full) const
{
    Vector out(n_free());
    for (int i = 0; i < n_free(); ++i) {
        out[i] = full[free_[i]];
    }
    return out;
}

Vector ConstrainedSystem::extend(const Vector& free, const Vector& fixed_values_full) const
{
    Vector out = Vector::Zero(n_dofs_);
    for (int i = 0; i < n_free(); ++i) {
        out[free_[i]] = free[i];
    }
    for (int d : fixed_) {
        out[d] = fixed_values_full[d];
    }
    return out;
}

Vector ConstrainedSystem::extend_homogeneous(const Vector& free) const
{
    Vector out = Vector::Zero(n_dofs_);
    for (int i = 0; i < n_free(); ++i) {
        out[free_[i]] = free[i];
    }
    return out;
}

Vector ConstrainedSystem::solve_free(const Vector& rhs_free) const
{
    if (n_free() == 0) {
        return Vector(0);
    }
    const double bnorm = rhs_free.norm();
    if (bnorm == 0.0) {
        return Vector::Zero(n_free());
    }
    Vector x = factor_->llt.solve(rhs_free);
    const double rel = (H_ff_ * x - rhs_free).norm() / bnorm;
    if (!(rel < 1e-10)) {
        // one step of iterative refinement before giving up
        x += factor_->llt.solve(Vector(rhs_free - H_ff_ * x));
        const double rel2 = (H_ff_ * x - rhs_free).norm() / bnorm;
        if (!(rel2 < 1e-10)) {
            throw SolverError("linear solve residual " + std::to_string(rel2) + " exceeds 1e-10");
        }
    }
    return x;
}

Vector ConstrainedSystem::solve(const Vector& rhs_full, const Vector& values_full) const
{
    Vector fixed_vals(static_cast<int>(fixed_.size()));
    for (size_t k = 0; k < fixed_.size(); ++k) {
        fixed_vals[static_cast<int>(k)] = values_full[fixed_[k]];
    }
    Vector rhs = restrict_free(rhs_full);
    if (fixed_vals.size() > 0) {
        rhs -= H_fd_ * fixed_vals;
    }
    return extend(solve_free(rhs), values_full);
}

double symmetry_defect(const SparseMatrix& A)
{
    const SparseMatrix At = A.transpose();
    const SparseMatrix diff = A - At;
    double max_a = 0.0;
    for (int k = 0; k < A.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
            max_a = std::max(max_a, std::abs(it.value()));
        }
    }
    double max_d = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(diff, k); it; ++it) {
            max_d = std::max(max_d, std::abs(it.value()));
        }
    }
    return max_a > 0.0 ? max_d / max_a : 0.0;
}

} // namespace latinflow
