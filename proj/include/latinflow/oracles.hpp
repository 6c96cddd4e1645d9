#pragma once

#include "latinflow/config.hpp"
#include "latinflow/latin.hpp"

namespace latinflow {

struct ChannelSpec {
    double length = 2.5;
    double height = 0.4;
    double p_in = 2.0;
    double p_out = 1.0;
    Material material;
};

/// Channel data of a rectangle case with `inflow` and `outflow` pressure sets
/// (values at the final time).
ChannelSpec channel_spec(const CaseConfig& config);

struct PoiseuilleValue {
    double v_x = 0.0;
    double v_y = 0.0;
    double p = 0.0;
};

/// Steady Stokes flow between plates at y = +-h/2. Throws DomainError outside the channel.
PoiseuilleValue poiseuille(const ChannelSpec& spec, double x, double y);

/// (h/2)^2 / (2 mu) |dp| / L.
double poiseuille_vmax(const ChannelSpec& spec);

struct MonolithicOptions {
    double tolerance = 1e-10;
    int max_picard = 50;
};

/// Backward Euler with staggered Picard sub-iterations on the coupled
/// laminar system. Throws SolverError naming the step on non-convergence.
Solution monolithic_solve(const CaseConfig& config, const Mesh& mesh, const MonolithicOptions& opt = {});

} // namespace latinflow
