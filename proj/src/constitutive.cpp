#include "latinflow/constitutive.hpp"

#include <cmath>
#include <string>

#include <Eigen/LU>

#include "latinflow/error.hpp"

namespace latinflow {

void Material::validate() const
{
    if (!(mu > 0.0)) {
        throw ConfigError("material: mu must be positive");
    }
    if (!(mu + lambda > 0.0)) {
        throw ConfigError("material: mu + lambda must be positive");
    }
    if (!(R > 0.0) || !(M > 0.0) || !(T0 > 0.0)) {
        throw ConfigError("material: R, M and T0 must be positive");
    }
    if (!(p0 >= 0.0)) {
        throw ConfigError("material: p0 must be non-negative");
    }
}

double gas_pressure(const Material& m, double rho)
{
    if (rho < 0.0) {
        throw DomainError("gas_pressure: negative density " + std::to_string(rho));
    }
    return m.rT() * rho;
}

double gas_density(const Material& m, double p)
{
    if (p < 0.0) {
        throw DomainError("gas_density: negative pressure " + std::to_string(p));
    }
    return p / m.rT();
}

VoigtMatrix voigt_viscosity(const Material& m)
{
    VoigtMatrix v;
    const double d = 2.0 * m.mu + m.lambda;
    v << d, m.lambda, 0.0,
         m.lambda, d, 0.0,
         0.0, 0.0, m.mu;
    return v;
}

SearchDirections build_search_directions(const Material& m, double L_c, double T, double t_v, double t_rho)
{
    if (!(L_c > 0.0) || !(T > 0.0) || !(t_v > 0.0) || !(t_rho > 0.0)) {
        throw ConfigError("search directions: L_c, T, t_v and t_rho must be positive");
    }
    SearchDirections sd;
    sd.H_eps_sigma = voigt_viscosity(m);
    sd.H_v_gamma = 1.0 / t_v;
    sd.H_zw = -L_c * L_c / T;
    sd.H_rho_q = 1.0 / t_rho;
    sd.t_v = t_v;
    sd.t_rho = t_rho;
    sd.L_c = L_c;
    sd.T = T;
    return sd;
}

VoigtMatrix invert_local_operator(const Material& m, const SearchDirections& sd)
{
    const VoigtMatrix op = voigt_viscosity(m) + sd.H_eps_sigma;
    const double det = op.determinant();
    if (!(std::abs(det) > 0.0)) {
        throw SolverError("local constitutive operator is singular");
    }
    const VoigtMatrix inv = op.inverse();
    return inv;
}

} // namespace latinflow
