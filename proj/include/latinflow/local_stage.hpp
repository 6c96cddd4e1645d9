#pragma once

#include <span>
#include <vector>

#include "latinflow/constitutive.hpp"

namespace latinflow {

/// Space-time Gauss-point data, step-major. Step index n = 0 holds t_1;
/// the initial state t_0 is never stored (it is fixed by the initial conditions).
template <typename T>
class GaussSeries {
public:
    GaussSeries() = default;
    GaussSeries(int n_steps, int n_points, const T& init)
        : n_steps_(n_steps), n_points_(n_points), data_(static_cast<size_t>(n_steps) * n_points, init)
    {
    }

    int n_steps() const { return n_steps_; }
    int n_points() const { return n_points_; }

    T& operator()(int n, int g) { return data_[static_cast<size_t>(n) * n_points_ + g]; }
    const T& operator()(int n, int g) const { return data_[static_cast<size_t>(n) * n_points_ + g]; }

    std::span<const T> step(int n) const { return {data_.data() + static_cast<size_t>(n) * n_points_, static_cast<size_t>(n_points_)}; }
    std::span<T> step(int n) { return {data_.data() + static_cast<size_t>(n) * n_points_, static_cast<size_t>(n_points_)}; }

    const std::vector<T>& raw() const { return data_; }

private:
    int n_steps_ = 0;
    int n_points_ = 0;
    std::vector<T> data_;
};

/// Global-stage (admissible) state at one Gauss point and time step.
struct GlobalPointState {
    double rho = 0.0;
    Vector2 z = Vector2::Zero();   // grad rho
    Vector2 v = Vector2::Zero();
    Voigt eps = Voigt::Zero();
    Voigt sigma = Voigt::Zero();
    Vector2 Gamma = Vector2::Zero();
    Vector2 W = Vector2::Zero();
    double q = 0.0;
};

struct LocalInputs {
    Voigt A_bar = Voigt::Zero();
    Vector2 beta_bar = Vector2::Zero();
    Vector2 delta_bar = Vector2::Zero();
    double gamma_bar = 0.0;
};

struct LocalPrimals {
    double rho_hat = 0.0;
    Vector2 v_hat = Vector2::Zero();
    Voigt eps_hat = Voigt::Zero();
    Vector2 z_hat = Vector2::Zero();
};

struct LocalDuals {
    Voigt sigma_hat = Voigt::Zero();
    Vector2 Gamma_hat = Vector2::Zero();
    Vector2 W_hat = Vector2::Zero();
    double q_hat = 0.0;
};

/// Ascending search direction applied to the admissible state.
LocalInputs compute_local_inputs(const GlobalPointState& s, const SearchDirections& sd);

/// Backward Euler for d(rho)/dt + H rho = gamma_bar, rho(t_0) = rho0.
std::vector<double> solve_rho_hat(std::span<const double> gamma_bar, double rho0, double dt, double H_rho_q);

/// (V + H) eps = A_bar + f(rho) I, with the inverse operator supplied.
Voigt solve_eps_hat(const Voigt& A_bar, double rho_hat, const Material& m, const VoigtMatrix& local_inverse);

/// Backward Euler for rho dv/dt + H v = beta_bar, v(t_0) = 0. Densities below
/// `rho_floor` are clamped inside the denominator only; `clamped` counts them.
std::vector<Vector2> solve_v_hat(std::span<const Vector2> beta_bar, std::span<const double> rho_hat, double dt,
                                 double H_v_gamma, double rho_floor = 1e-30, int* clamped = nullptr);

Vector2 solve_z_hat(const Vector2& delta_bar, double rho_hat, const Vector2& v_hat, double H_zw);

LocalDuals dual_update(const LocalInputs& in, const LocalPrimals& p, const SearchDirections& sd);

/// Per Gauss point and time step storage of the local stage.
struct GaussHistory {
    GaussHistory() = default;
    GaussHistory(int n_steps, int n_points);

    int n_steps() const { return rho_hat.n_steps(); }
    int n_points() const { return rho_hat.n_points(); }

    GaussSeries<Voigt> A_bar;
    GaussSeries<Vector2> beta_bar;
    GaussSeries<Vector2> delta_bar;
    GaussSeries<double> gamma_bar;

    GaussSeries<double> rho_hat;
    GaussSeries<Vector2> v_hat;
    GaussSeries<Voigt> eps_hat;
    GaussSeries<Vector2> z_hat;

    GaussSeries<Voigt> sigma_hat;
    GaussSeries<Vector2> Gamma_hat;
    GaussSeries<Vector2> W_hat;
    GaussSeries<double> q_hat;
};

struct LocalStageReport {
    int nonpositive_density = 0; // Gauss point-steps with rho_hat <= 0
};

/// Solves the pointwise constitutive problem for every Gauss point from the
/// bar quantities already stored in `h`: rho first in time, then eps, v, z,
/// then the duals.
LocalStageReport run_local_stage(GaussHistory& h, const Material& m, const SearchDirections& sd, double dt,
                                 double rho_floor = 1e-30);

} // namespace latinflow
