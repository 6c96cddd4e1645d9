#pragma once

#include <Eigen/Core>

namespace latinflow {

/// Voigt vectors: strain (e_xx, e_yy, 2 e_xy), stress (s_xx, s_yy, s_xy),
/// so that the tensor contraction s:e is the plain dot product.
using Voigt = Eigen::Vector3d;
using VoigtMatrix = Eigen::Matrix3d;
using Vector2 = Eigen::Vector2d;

/// Voigt image of the identity tensor.
inline Voigt voigt_identity() { return Voigt(1.0, 1.0, 0.0); }

/// Newtonian compressible fluid with an ideal-gas state law at fixed temperature.
struct Material {
    double mu = 1.0;            // dynamic viscosity [kg/(m s)]
    double lambda = 1.0e3;      // second viscosity [kg/(m s)]
    double R = 8.314;           // gas constant [J/(K mol)]
    double M = 28.9645e-3;      // molar mass [kg/mol]
    double T0 = 293.0;          // temperature [K]
    double p0 = 1.0;            // initial pressure [Pa]

    double r() const { return R / M; }
    double rT() const { return r() * T0; }
    double rho0() const { return p0 / rT(); }

    /// Throws ConfigError when the invariants do not hold.
    void validate() const;
};

/// Ideal gas p = r T0 rho. Negative input throws DomainError.
double gas_pressure(const Material& m, double rho);
double gas_density(const Material& m, double p);

/// [[2mu+lambda, lambda, 0], [lambda, 2mu+lambda, 0], [0, 0, mu]].
VoigtMatrix voigt_viscosity(const Material& m);

struct SearchDirections {
    VoigtMatrix H_eps_sigma;  // = viscosity operator V
    double H_v_gamma = 0.0;   // 1/t_v
    double H_zw = 0.0;        // -L_c^2/T, negative
    double H_rho_q = 0.0;     // 1/t_rho
    double t_v = 0.0;
    double t_rho = 0.0;
    double L_c = 0.0;
    double T = 0.0;
};

SearchDirections build_search_directions(const Material& m, double L_c, double T, double t_v, double t_rho);

/// (V + H_eps_sigma)^-1.
VoigtMatrix invert_local_operator(const Material& m, const SearchDirections& sd);

} // namespace latinflow
