#include "latinflow/local_stage.hpp"

#include <cmath>

#include "latinflow/error.hpp"

namespace latinflow {

LocalInputs compute_local_inputs(const GlobalPointState& s, const SearchDirections& sd)
{
    LocalInputs in;
    in.A_bar = s.sigma + sd.H_eps_sigma * s.eps;
    in.beta_bar = s.Gamma + sd.H_v_gamma * s.v;
    in.delta_bar = s.W + sd.H_zw * s.z;
    in.gamma_bar = s.q + sd.H_rho_q * s.rho;
    return in;
}

std::vector<double> solve_rho_hat(std::span<const double> gamma_bar, double rho0, double dt, double H_rho_q)
{
    if (!(dt > 0.0)) {
        throw DomainError("solve_rho_hat: time step must be positive");
    }
    std::vector<double> rho(gamma_bar.size());
    const double inv_dt = 1.0 / dt;
    const double denom = inv_dt + H_rho_q;
    double prev = rho0;
    for (size_t n = 0; n < gamma_bar.size(); ++n) {
        prev = (gamma_bar[n] + prev * inv_dt) / denom;
        rho[n] = prev;
    }
    return rho;
}

Voigt solve_eps_hat(const Voigt& A_bar, double rho_hat, const Material& m, const VoigtMatrix& local_inverse)
{
    // linear state law, evaluated without the domain check so that a
    // transiently negative iterate still produces a finite strain
    const double f = m.rT() * rho_hat;
    return local_inverse * (A_bar + f * voigt_identity());
}

std::vector<Vector2> solve_v_hat(std::span<const Vector2> beta_bar, std::span<const double> rho_hat, double dt,
                                 double H_v_gamma, double rho_floor, int* clamped)
{
    if (beta_bar.size() != rho_hat.size()) {
        throw Error("solve_v_hat: series length mismatch");
    }
    std::vector<Vector2> v(beta_bar.size());
    const double inv_dt = 1.0 / dt;
    Vector2 prev = Vector2::Zero();
    for (size_t n = 0; n < beta_bar.size(); ++n) {
        double rho = rho_hat[n];
        if (rho <= 0.0) {
            rho = rho_floor;
            if (clamped != nullptr) {
                ++*clamped;
            }
        }
        const double denom = rho * inv_dt + H_v_gamma;
        if (!(denom > 0.0)) {
            throw SolverError("local stage singularity: rho/dt + H_v_gamma <= 0");
        }
        prev = (beta_bar[n] + rho * inv_dt * prev) / denom;
        v[n] = prev;
    }
    return v;
}

Vector2 solve_z_hat(const Vector2& delta_bar, double rho_hat, const Vector2& v_hat, double H_zw)
{
    return (delta_bar - rho_hat * v_hat) / H_zw;
}

LocalDuals dual_update(const LocalInputs& in, const LocalPrimals& p, const SearchDirections& sd)
{
    LocalDuals d;
    d.sigma_hat = in.A_bar - sd.H_eps_sigma * p.eps_hat;
    d.Gamma_hat = in.beta_bar - sd.H_v_gamma * p.v_hat;
    d.W_hat = in.delta_bar - sd.H_zw * p.z_hat;
    d.q_hat = in.gamma_bar - sd.H_rho_q * p.rho_hat;
    return d;
}

GaussHistory::GaussHistory(int n_steps, int n_points)
    : A_bar(n_steps, n_points, Voigt::Zero()),
      beta_bar(n_steps, n_points, Vector2::Zero()),
      delta_bar(n_steps, n_points, Vector2::Zero()),
      gamma_bar(n_steps, n_points, 0.0),
      rho_hat(n_steps, n_points, 0.0),
      v_hat(n_steps, n_points, Vector2::Zero()),
      eps_hat(n_steps, n_points, Voigt::Zero()),
      z_hat(n_steps, n_points, Vector2::Zero()),
      sigma_hat(n_steps, n_points, Voigt::Zero()),
      Gamma_hat(n_steps, n_points, Vector2::Zero()),
      W_hat(n_steps, n_points, Vector2::Zero()),
      q_hat(n_steps, n_points, 0.0)
{
}

LocalStageReport run_local_stage(GaussHistory& h, const Material& m, const SearchDirections& sd, double dt,
                                 double rho_floor)
{
    LocalStageReport report;
    const int nt = h.n_steps();
    const VoigtMatrix inv = invert_local_operator(m, sd);
    const double rho0 = m.rho0();

    std::vector<double> gamma(nt);
    std::vector<Vector2> beta(nt);
    for (int g = 0; g < h.n_points(); ++g) {
        for (int n = 0; n < nt; ++n) {
            gamma[n] = h.gamma_bar(n, g);
            beta[n] = h.beta_bar(n, g);
        }
        const std::vector<double> rho = solve_rho_hat(gamma, rho0, dt, sd.H_rho_q);
        const std::vector<Vector2> v = solve_v_hat(beta, rho, dt, sd.H_v_gamma, rho_floor, &report.nonpositive_density);
        for (int n = 0; n < nt; ++n) {
            LocalInputs in{h.A_bar(n, g), h.beta_bar(n, g), h.delta_bar(n, g), h.gamma_bar(n, g)};
            LocalPrimals p;
            p.rho_hat = rho[n];
            p.eps_hat = solve_eps_hat(in.A_bar, rho[n], m, inv);
            p.v_hat = v[n];
            p.z_hat = solve_z_hat(in.delta_bar, rho[n], v[n], sd.H_zw);
            const LocalDuals d = dual_update(in, p, sd);
            h.rho_hat(n, g) = p.rho_hat;
            h.eps_hat(n, g) = p.eps_hat;
            h.v_hat(n, g) = p.v_hat;
            h.z_hat(n, g) = p.z_hat;
            h.sigma_hat(n, g) = d.sigma_hat;
            h.Gamma_hat(n, g) = d.Gamma_hat;
            h.W_hat(n, g) = d.W_hat;
            h.q_hat(n, g) = d.q_hat;
        }
    }
    return report;
}

} // namespace latinflow
