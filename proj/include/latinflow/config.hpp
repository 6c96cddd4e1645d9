#pragma once

#include <optional>
#include <string>
#include <vector>

#include "latinflow/constitutive.hpp"
#include "latinflow/elements.hpp"

namespace latinflow {

class Mesh;

enum class BcKind { pressure, no_slip, velocity };

/// Boundary condition on a named set. Values are constant (one entry) or
/// tabulated in time with linear interpolation and constant extrapolation.
struct BoundaryCondition {
    std::string set;
    BcKind kind = BcKind::no_slip;
    std::vector<double> times;     // empty for a constant value
    std::vector<Vector2> values;   // pressure uses x()

    double pressure_at(double t) const;
    Vector2 velocity_at(double t) const;
    bool operator==(const BoundaryCondition&) const = default;
};

struct MeshSpec {
    std::string kind = "rectangle";  // rectangle | file
    std::string path;                // resolved against the config directory
    double length = 2.5;
    double height = 0.4;
    int nx = 128;
    int ny = 16;
    bool operator==(const MeshSpec&) const = default;
};

struct TimeSpec {
    double t_end = 0.0;
    int n_steps = 0;
    double dt() const { return t_end / n_steps; }
    bool operator==(const TimeSpec&) const = default;
};

struct SolverSpec {
    double eta_c = 1e-4;
    int max_iterations = 100;
    std::optional<double> t_v;       // default t_end
    std::optional<double> t_rho;     // default t_end / 10
    std::optional<double> L_c;       // default: largest bounding-box edge
    double kappa = 0.1;
    double relaxation = 1.0;
    int pgd_fixed_point_max = 3;
    bool reference_mode = false;     // eta_c forced to 1e-8
    bool full_order = false;         // exact per-step global corrections instead of PGD
    double rho_floor = 1e-30;
    bool operator==(const SolverSpec&) const = default;
};

struct OutputSpec {
    std::string directory = "output";
    int vtk_stride = 1;
    std::vector<Point> probes;
    bool operator==(const OutputSpec& o) const
    {
        if (directory != o.directory || vtk_stride != o.vtk_stride || probes.size() != o.probes.size()) {
            return false;
        }
        for (size_t i = 0; i < probes.size(); ++i) {
            if (probes[i] != o.probes[i]) {
                return false;
            }
        }
        return true;
    }
};

struct CaseConfig {
    std::string name;
    std::string base_dir;  // directory of the config file, for relative paths
    MeshSpec mesh;
    Material material;
    std::vector<BoundaryCondition> bcs;
    Vector2 body_force = Vector2::Zero();
    TimeSpec time;
    SolverSpec solver;
    OutputSpec output;

    double effective_eta_c() const { return solver.reference_mode ? 1e-8 : solver.eta_c; }
    double t_v() const { return solver.t_v.value_or(time.t_end); }
    double t_rho() const { return solver.t_rho.value_or(time.t_end / 10.0); }
    const BoundaryCondition* find_bc(const std::string& set) const;

    bool operator==(const CaseConfig& o) const
    {
        return name == o.name && mesh == o.mesh && material.mu == o.material.mu &&
               material.lambda == o.material.lambda && material.R == o.material.R && material.M == o.material.M &&
               material.T0 == o.material.T0 && material.p0 == o.material.p0 && bcs == o.bcs &&
               body_force == o.body_force && time == o.time && solver == o.solver && output == o.output;
    }
};

/// Parses flat `section.key = value` text. Throws ConfigError.
CaseConfig parse_config(const std::string& text, const std::string& base_dir = ".");
CaseConfig load_config(const std::string& path);
std::string serialize_config(const CaseConfig& config);

/// Cross-checks boundary references against the mesh.
void validate_against_mesh(const CaseConfig& config, const Mesh& mesh);

/// Builds the mesh described by the config.
Mesh build_mesh(const CaseConfig& config);

/// Characteristic length: configured, else the largest bounding-box edge.
double characteristic_length(const CaseConfig& config, const Mesh& mesh);

} // namespace latinflow
