#include "latinflow/oracles.hpp"

#include <cmath>

#include <Eigen/SparseLU>

#include "latinflow/error.hpp"
#include "latinflow/interpolation.hpp"

namespace latinflow {

ChannelSpec channel_spec(const CaseConfig& config)
{
    const auto* in = config.find_bc("inflow");
    const auto* out = config.find_bc("outflow");
    if (in == nullptr || out == nullptr || in->kind != BcKind::pressure || out->kind != BcKind::pressure) {
        throw ConfigError("channel oracle needs pressure conditions on 'inflow' and 'outflow'");
    }
    if (config.mesh.kind != "rectangle") {
        throw ConfigError("channel oracle needs a rectangle mesh");
    }
    ChannelSpec s;
    s.length = config.mesh.length;
    s.height = config.mesh.height;
    s.p_in = in->pressure_at(config.time.t_end);
    s.p_out = out->pressure_at(config.time.t_end);
    s.material = config.material;
    return s;
}

PoiseuilleValue poiseuille(const ChannelSpec& spec, double x, double y)
{
    const double half = 0.5 * spec.height;
    const double tol = 1e-12 * std::max(spec.length, spec.height);
    if (x < -tol || x > spec.length + tol || std::abs(y) > half + tol) {
        throw DomainError("point (" + std::to_string(x) + ", " + std::to_string(y) + ") lies outside the channel");
    }
    const double dp = spec.p_out - spec.p_in;
    PoiseuilleValue out;
    out.v_x = (half * half - y * y) / (2.0 * spec.material.mu) * std::abs(dp) / spec.length;
    if (dp > 0.0) {
        out.v_x = -out.v_x;
    }
    out.p = spec.p_in + dp / spec.length * x;
    return out;
}

double poiseuille_vmax(const ChannelSpec& spec)
{
    const double half = 0.5 * spec.height;
    return half * half / (2.0 * spec.material.mu) * std::abs(spec.p_out - spec.p_in) / spec.length;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double, int>>;

/// int rho v . v* over the Q2 basis, rho given per Gauss point.
SparseMatrix weighted_vector_mass(const Mesh& mesh, const GaussGeometry& geo, std::span<const double> rho)
{
    Triplets t;
    t.reserve(static_cast<size_t>(mesh.n_elements()) * 162);
    for (int e = 0; e < mesh.n_elements(); ++e) {
        Eigen::Matrix<double, 9, 9> me = Eigen::Matrix<double, 9, 9>::Zero();
        for (int q = 0; q < GaussGeometry::kPerElement; ++q) {
            const int g = e * GaussGeometry::kPerElement + q;
            const auto& gp = geo[g];
            for (int a = 0; a < 9; ++a) {
                for (int b = 0; b < 9; ++b) {
                    me(a, b) += gp.weight * rho[g] * gp.q2.value[a] * gp.q2.value[b];
                }
            }
        }
        const auto& nodes = mesh.element_q2(e);
        for (int a = 0; a < 9; ++a) {
            for (int b = 0; b < 9; ++b) {
                for (int c = 0; c < 2; ++c) {
                    t.emplace_back(velocity_dof(nodes[a], c), velocity_dof(nodes[b], c), me(a, b));
                }
            }
        }
    }
    SparseMatrix m(2 * mesh.n_q2(), 2 * mesh.n_q2());
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

/// int f(rho) tr eps(v*) over the Q2 basis.
Vector pressure_load(const Mesh& mesh, const GaussGeometry& geo, std::span<const double> rho, double rT)
{
    Vector out = Vector::Zero(2 * mesh.n_q2());
    for (int g = 0; g < geo.n_points(); ++g) {
        const auto& gp = geo[g];
        const auto& nodes = mesh.element_q2(g / GaussGeometry::kPerElement);
        const double p = rT * rho[g] * gp.weight;
        for (int a = 0; a < 9; ++a) {
            out[velocity_dof(nodes[a], 0)] += p * gp.q2.grad[a].x();
            out[velocity_dof(nodes[a], 1)] += p * gp.q2.grad[a].y();
        }
    }
    return out;
}

/// C/dt - A(v), A_ij = int N_j v . grad N_i, column-major for SparseLU.
Eigen::SparseMatrix<double> continuity_matrix(const Mesh& mesh, const GaussGeometry& geo, std::span<const Vector2> v,
                                              double dt)
{
    Triplets t;
    t.reserve(static_cast<size_t>(mesh.n_elements()) * 16);
    for (int e = 0; e < mesh.n_elements(); ++e) {
        Eigen::Matrix4d ke = Eigen::Matrix4d::Zero();
        for (int q = 0; q < GaussGeometry::kPerElement; ++q) {
            const int g = e * GaussGeometry::kPerElement + q;
            const auto& gp = geo[g];
            for (int i = 0; i < 4; ++i) {
                for (int j = 0; j < 4; ++j) {
                    ke(i, j) += gp.weight * (gp.q1.value[i] * gp.q1.value[j] / dt -
                                             gp.q1.value[j] * v[g].dot(gp.q1.grad[i]));
                }
            }
        }
        const auto& dofs = mesh.element_q1(e);
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                t.emplace_back(dofs[i], dofs[j], ke(i, j));
            }
        }
    }
    Eigen::SparseMatrix<double> m(mesh.n_q1(), mesh.n_q1());
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

/// Solves A x = b with x fixed on `fixed` (values from `values`).
Vector solve_unsymmetric(const Eigen::SparseMatrix<double>& A, const Vector& b, const std::vector<int>& fixed,
                         const Vector& values)
{
    const int n = static_cast<int>(A.rows());
    std::vector<int> map(n, -1);
    std::vector<char> is_fixed(n, 0);
    for (int d : fixed) {
        is_fixed[d] = 1;
    }
    int nf = 0;
    for (int i = 0; i < n; ++i) {
        if (!is_fixed[i]) {
            map[i] = nf++;
        }
    }
    Triplets t;
    Vector rhs(nf);
    for (int i = 0; i < n; ++i) {
        if (map[i] >= 0) {
            rhs[map[i]] = b[i];
        }
    }
    for (int col = 0; col < A.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, col); it; ++it) {
            const int r = static_cast<int>(it.row());
            if (map[r] < 0) {
                continue;
            }
            if (map[col] >= 0) {
                t.emplace_back(map[r], map[col], it.value());
            }
            else {
                rhs[map[r]] -= it.value() * values[col];
            }
        }
    }
    Eigen::SparseMatrix<double> Aff(nf, nf);
    Aff.setFromTriplets(t.begin(), t.end());
    Aff.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(Aff);
    if (lu.info() != Eigen::Success) {
        throw SolverError("continuity matrix factorization failed");
    }
    const Vector xf = lu.solve(rhs);
    const double res = (Aff * xf - rhs).norm();
    if (res > 1e-10 * std::max(rhs.norm(), 1e-300)) {
        throw SolverError("continuity solve residual " + std::to_string(res / rhs.norm()));
    }
    Vector x = values;
    for (int i = 0; i < n; ++i) {
        if (map[i] >= 0) {
            x[i] = xf[map[i]];
        }
    }
    return x;
}

double relative_change(const Vector& next, const Vector& prev)
{
    const double d = (next - prev).norm();
    const double s = next.norm();
    return s > 0.0 ? d / s : d;
}

} // namespace

Solution monolithic_solve(const CaseConfig& config, const Mesh& mesh, const MonolithicOptions& opt)
{
    const ProblemSetup setup(config, mesh);
    const Material& mat = config.material;
    const auto& geo = setup.geometry();
    const int nt = setup.n_steps();
    const double dt = setup.dt();
    const int np = geo.n_points();
    const SparseMatrix K = viscous_stiffness(mesh, geo, mat);
    const GaussInterpolator interp(mesh, geo);
    const SparseMatrix C = mass_scalar(mesh, geo);

    Solution sol;
    sol.rT = mat.rT();
    sol.converged = true;
    sol.times.resize(nt + 1);
    sol.density.resize(mesh.n_q1(), nt + 1);
    sol.velocity.resize(2 * mesh.n_q2(), nt + 1);
    sol.times[0] = 0.0;
    sol.density.col(0).setConstant(mat.rho0());
    sol.velocity.col(0).setZero();

    std::vector<double> rho_g(np);
    std::vector<Vector2> grad_g(np);
    std::vector<Vector2> v_g(np);
    std::vector<Voigt> eps_g(np);

    for (int n = 0; n < nt; ++n) {
        const Vector rho_prev = sol.density.col(n);
        const Vector v_prev = sol.velocity.col(n);
        const Vector loads = setup.loads(n);
        const Vector v_bc = setup.velocity_dirichlet(n);
        const Vector rho_bc = setup.density_dirichlet(n);
        Vector rho = rho_prev;
        Vector v = v_prev;
        for (int d : setup.density_fixed()) {
            rho[d] = rho_bc[d];
        }
        bool done = false;
        for (int k = 0; k < opt.max_picard && !done; ++k) {
            interp.density(rho, rho_g, grad_g);
            const SparseMatrix M = weighted_vector_mass(mesh, geo, rho_g);
            const SparseMatrix A = SparseMatrix(M / dt) + K;
            const ConstrainedSystem sys(A, setup.velocity_fixed());
            const Vector rhs = M * v_prev / dt + pressure_load(mesh, geo, rho_g, mat.rT()) + loads;
            const Vector v_next = sys.solve(rhs, v_bc);

            interp.velocity(v_next, v_g, eps_g);
            const Eigen::SparseMatrix<double> B = continuity_matrix(mesh, geo, v_g, dt);
            const Vector rho_next = solve_unsymmetric(B, Vector(C * rho_prev / dt), setup.density_fixed(), rho_bc);

            done = relative_change(v_next, v) < opt.tolerance && relative_change(rho_next, rho) < opt.tolerance;
            v = v_next;
            rho = rho_next;
        }
        if (!done) {
            throw SolverError("monolithic Picard iterations did not converge at time step " + std::to_string(n + 1));
        }
        sol.times[n + 1] = setup.time(n);
        sol.density.col(n + 1) = rho;
        sol.velocity.col(n + 1) = v;
    }
    return sol;
}

} // namespace latinflow
