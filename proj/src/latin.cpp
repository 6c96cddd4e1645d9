#include "latinflow/latin.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <set>

#include "latinflow/error.hpp"
#include "latinflow/interpolation.hpp"

namespace latinflow {

ProblemSetup::ProblemSetup(const CaseConfig& config, const Mesh& mesh) : config_(config), mesh_(&mesh), geo_(mesh)
{
    validate_against_mesh(config, mesh);
    std::set<int> rho_fixed;
    std::set<int> v_fixed;
    for (const auto& bc : config.bcs) {
        if (bc.kind == BcKind::pressure) {
            for (int q1 : mesh.boundary_q1_nodes(bc.set)) {
                rho_fixed.insert(q1);
            }
        }
        else {
            for (int q2 : mesh.boundary_q2_nodes(bc.set)) {
                v_fixed.insert(velocity_dof(q2, 0));
                v_fixed.insert(velocity_dof(q2, 1));
            }
        }
    }
    density_fixed_.assign(rho_fixed.begin(), rho_fixed.end());
    velocity_fixed_.assign(v_fixed.begin(), v_fixed.end());
}

Vector ProblemSetup::density_dirichlet(int n) const
{
    Vector out = Vector::Zero(mesh_->n_q1());
    const double t = time(n);
    for (const auto& bc : config_.bcs) {
        if (bc.kind != BcKind::pressure) {
            continue;
        }
        const double rho = gas_density(config_.material, bc.pressure_at(t));
        for (int q1 : mesh_->boundary_q1_nodes(bc.set)) {
            out[q1] = rho;
        }
    }
    return out;
}

Vector ProblemSetup::velocity_dirichlet(int n) const
{
    Vector out = Vector::Zero(2 * mesh_->n_q2());
    const double t = time(n);
    for (const auto& bc : config_.bcs) {
        if (bc.kind == BcKind::pressure) {
            continue;
        }
        const Vector2 v = bc.kind == BcKind::no_slip ? Vector2::Zero() : bc.velocity_at(t);
        for (int q2 : mesh_->boundary_q2_nodes(bc.set)) {
            out[velocity_dof(q2, 0)] = v.x();
            out[velocity_dof(q2, 1)] = v.y();
        }
    }
    return out;
}

Vector ProblemSetup::loads(int n) const
{
    std::vector<PressureLoad> pressures;
    const double t = time(n);
    for (const auto& bc : config_.bcs) {
        if (bc.kind == BcKind::pressure) {
            pressures.push_back({bc.set, bc.pressure_at(t)});
        }
    }
    return load_vector(*mesh_, geo_, config_.body_force, pressures);
}

GaussFields::GaussFields(int n_steps, int n_points)
    : rho(n_steps, n_points, 0.0),
      z(n_steps, n_points, Vector2::Zero()),
      v(n_steps, n_points, Vector2::Zero()),
      eps(n_steps, n_points, Voigt::Zero())
{
}

namespace {

double relative_gap(double diff, double a, double b)
{
    if (diff < 0.0 || a < 0.0 || b < 0.0) {
        throw Error("indicator: negative norm");
    }
    const double mean = 0.5 * (a + b);
    if (mean == 0.0) {
        return diff == 0.0 ? 0.0 : INFINITY;
    }
    return std::sqrt(diff / mean);
}

struct HatCombinations {
    HatCombinations(int n_steps, int n_points)
        : A(n_steps, n_points, Voigt::Zero()),
          beta(n_steps, n_points, Vector2::Zero()),
          delta(n_steps, n_points, Vector2::Zero()),
          gamma(n_steps, n_points, 0.0)
    {
    }
    GaussSeries<Voigt> A;
    GaussSeries<Vector2> beta;
    GaussSeries<Vector2> delta;
    GaussSeries<double> gamma;
};

void evaluate_fields(const FieldSolver& rho, const FieldSolver& v, const GaussInterpolator& interp, GaussFields& out)
{
    for (int n = 0; n < out.rho.n_steps(); ++n) {
        interp.density(rho.nodal(n), out.rho.step(n), out.z.step(n));
        interp.velocity(v.nodal(n), out.v.step(n), out.eps.step(n));
    }
}

template <typename T>
bool finite_series(const GaussSeries<T>& s)
{
    for (const auto& x : s.raw()) {
        if constexpr (std::is_same_v<T, double>) {
            if (!std::isfinite(x)) {
                return false;
            }
        }
        else if (!x.allFinite()) {
            return false;
        }
    }
    return true;
}

} // namespace

Indicators indicators(const GaussHistory& local, const GaussFields& global, const GaussGeometry& geo,
                      const Material& m, const SearchDirections& sd, double dt)
{
    const VoigtMatrix V = voigt_viscosity(m);
    double rho_diff = 0.0, rho_bar = 0.0, rho_hat = 0.0;
    double v_diff = 0.0, v_bar = 0.0, v_hat = 0.0;
    for (int n = 0; n < local.n_steps(); ++n) {
        for (int g = 0; g < local.n_points(); ++g) {
            const double w = dt * geo[g].weight;
            const double rb = global.rho(n, g);
            const double rh = local.rho_hat(n, g);
            rho_diff += w * sd.H_rho_q * (rb - rh) * (rb - rh);
            rho_bar += w * sd.H_rho_q * rb * rb;
            rho_hat += w * sd.H_rho_q * rh * rh;
            const Voigt& eb = global.eps(n, g);
            const Voigt& eh = local.eps_hat(n, g);
            const Voigt d = eb - eh;
            v_diff += w * d.dot(V * d);
            v_bar += w * eb.dot(V * eb);
            v_hat += w * eh.dot(V * eh);
        }
    }
    return {relative_gap(v_diff, v_bar, v_hat), relative_gap(rho_diff, rho_bar, rho_hat)};
}

Solution run_latin(const CaseConfig& config, const Mesh& mesh, const IterationCallback& on_iteration)
{
    const auto start = std::chrono::steady_clock::now();
    const ProblemSetup setup(config, mesh);
    const Material& mat = config.material;
    const int nt = setup.n_steps();
    const double dt = setup.dt();
    const auto& geo = setup.geometry();
    const int np = geo.n_points();

    const SearchDirections sd =
        build_search_directions(mat, characteristic_length(config, mesh), config.time.t_end, config.t_v(), config.t_rho());
    const GlobalOperators ops = global_operators(mesh, geo, mat, sd);
    ConstrainedSystem sys_rho(ops.H_rho, setup.density_fixed());
    ConstrainedSystem sys_v(ops.H_v, setup.velocity_fixed());

    Eigen::MatrixXd origin_rho = initialize_field(
        sys_rho, nt, [&](int) { return Vector::Zero(mesh.n_q1()); }, [&](int n) { return setup.density_dirichlet(n); });
    Eigen::MatrixXd origin_v = initialize_field(
        sys_v, nt, [&](int n) { return setup.loads(n); }, [&](int n) { return setup.velocity_dirichlet(n); });

    GlobalStageOptions gopt;
    gopt.full_order = config.solver.full_order;
    gopt.relaxation = config.solver.relaxation;
    gopt.pgd.kappa = config.solver.kappa;
    gopt.pgd.fixed_point_max = config.solver.pgd_fixed_point_max;
    FieldSolver rho_solver(DofKind::density, std::move(sys_rho), std::move(origin_rho), dt, gopt);
    FieldSolver v_solver(DofKind::velocity, std::move(sys_v), std::move(origin_v), dt, gopt);

    const GaussInterpolator interp(mesh, geo);
    GaussFields bar(nt, np);
    evaluate_fields(rho_solver, v_solver, interp, bar);

    auto history = std::make_shared<GaussHistory>(nt, np);
    HatCombinations hat(nt, np);
    const VoigtMatrix& H = sd.H_eps_sigma;
    const double eta_c = config.effective_eta_c();

    Solution sol;
    sol.rT = mat.rT();
    bool rho_converged = false;
    bool v_converged = false;
    Eigen::MatrixXd F_rho(mesh.n_q1(), nt);
    Eigen::MatrixXd F_v(2 * mesh.n_q2(), nt);

    for (int it = 1; it <= config.solver.max_iterations; ++it) {
        GaussHistory& h = *history;
        for (int n = 0; n < nt; ++n) {
            for (int g = 0; g < np; ++g) {
                h.A_bar(n, g) = hat.A(n, g) + 2.0 * (H * bar.eps(n, g));
                h.beta_bar(n, g) = hat.beta(n, g) + 2.0 * sd.H_v_gamma * bar.v(n, g);
                h.delta_bar(n, g) = hat.delta(n, g) + 2.0 * sd.H_zw * bar.z(n, g);
                h.gamma_bar(n, g) = hat.gamma(n, g) + 2.0 * sd.H_rho_q * bar.rho(n, g);
            }
        }

        const LocalStageReport local = run_local_stage(h, mat, sd, dt, config.solver.rho_floor);
        if (local.nonpositive_density > 0) {
            std::cerr << "warning: iteration " << it << ": " << local.nonpositive_density
                      << " non-positive local densities clamped\n";
        }
        if (!finite_series(h.rho_hat) || !finite_series(h.v_hat) || !finite_series(h.eps_hat) ||
            !finite_series(h.z_hat)) {
            throw DivergenceError("non-finite value at iteration " + std::to_string(it) + ", local stage");
        }

        for (int n = 0; n < nt; ++n) {
            for (int g = 0; g < np; ++g) {
                hat.A(n, g) = h.sigma_hat(n, g) - H * h.eps_hat(n, g);
                hat.beta(n, g) = h.Gamma_hat(n, g) - sd.H_v_gamma * h.v_hat(n, g);
                hat.delta(n, g) = h.W_hat(n, g) - sd.H_zw * h.z_hat(n, g);
                hat.gamma(n, g) = h.q_hat(n, g) - sd.H_rho_q * h.rho_hat(n, g);
            }
            F_rho.col(n) = rhs_scalar_from_gauss(mesh, geo, hat.delta.step(n), hat.gamma.step(n));
            F_v.col(n) = rhs_vector_from_gauss(mesh, geo, hat.A.step(n), hat.beta.step(n));
        }

        rho_solver.advance(F_rho, !rho_converged);
        v_solver.advance(F_v, !v_converged);
        evaluate_fields(rho_solver, v_solver, interp, bar);
        if (!finite_series(bar.rho) || !finite_series(bar.eps)) {
            throw DivergenceError("non-finite value at iteration " + std::to_string(it) + ", global stage");
        }

        const Indicators eta = indicators(h, bar, geo, mat, sd, dt);
        IterationRecord rec;
        rec.iteration = it;
        rec.eta_v = eta.eta_v;
        rec.eta_rho = eta.eta_rho;
        rec.n_modes_v = v_solver.n_modes();
        rec.n_modes_rho = rho_solver.n_modes();
        rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        sol.history.push_back(rec);
        if (on_iteration) {
            on_iteration(rec);
        }
        rho_converged = eta.eta_rho < eta_c;
        v_converged = eta.eta_v < eta_c;
        if (rho_converged && v_converged) {
            sol.converged = true;
            break;
        }
    }

    sol.times.resize(nt + 1);
    sol.density.resize(mesh.n_q1(), nt + 1);
    sol.velocity.resize(2 * mesh.n_q2(), nt + 1);
    sol.times[0] = 0.0;
    sol.density.col(0).setConstant(mat.rho0());
    sol.velocity.col(0).setZero();
    for (int n = 0; n < nt; ++n) {
        sol.times[n + 1] = setup.time(n);
        sol.density.col(n + 1) = rho_solver.nodal(n);
        sol.velocity.col(n + 1) = v_solver.nodal(n);
    }
    if (!config.solver.full_order) {
        sol.density_field = rho_solver.field();
        sol.velocity_field = v_solver.field();
    }
    sol.gauss = history;
    return sol;
}

} // namespace latinflow
