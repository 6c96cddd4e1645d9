#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "latinflow/assembly.hpp"
#include "latinflow/config.hpp"
#include "latinflow/global_stage.hpp"
#include "latinflow/local_stage.hpp"

namespace latinflow {

/// Discrete boundary data shared by the LATIN path and the monolithic oracle.
/// Step index n = 0..N-1 stands for t_{n+1}.
class ProblemSetup {
public:
    ProblemSetup(const CaseConfig& config, const Mesh& mesh);

    const Mesh& mesh() const { return *mesh_; }
    const Material& material() const { return config_.material; }
    const GaussGeometry& geometry() const { return geo_; }
    int n_steps() const { return config_.time.n_steps; }
    double dt() const { return config_.time.dt(); }
    double time(int n) const { return (n + 1) * dt(); }

    const std::vector<int>& density_fixed() const { return density_fixed_; }
    const std::vector<int>& velocity_fixed() const { return velocity_fixed_; }

    /// Full-size vectors holding the Dirichlet values (zero elsewhere).
    Vector density_dirichlet(int n) const;
    Vector velocity_dirichlet(int n) const;
    /// Body force and pressure tractions.
    Vector loads(int n) const;

private:
    CaseConfig config_;
    const Mesh* mesh_;
    GaussGeometry geo_;
    std::vector<int> density_fixed_;
    std::vector<int> velocity_fixed_;
};

struct IterationRecord {
    int iteration = 0;
    double eta_v = 0.0;
    double eta_rho = 0.0;
    int n_modes_v = 0;
    int n_modes_rho = 0;
    double wall_seconds = 0.0;
};

/// Nodal trajectories with N+1 columns; column 0 is the initial state.
struct Solution {
    std::vector<double> times;
    Eigen::MatrixXd density;   // n_q1 x (N+1)
    Eigen::MatrixXd velocity;  // 2 n_q2 x (N+1), interleaved
    double rT = 0.0;
    std::vector<IterationRecord> history;
    bool converged = false;
    std::optional<PGDField> density_field;
    std::optional<PGDField> velocity_field;
    std::shared_ptr<const GaussHistory> gauss;

    int n_steps() const { return static_cast<int>(times.size()) - 1; }
    Eigen::MatrixXd pressure() const { return rT * density; }
};

/// Admissible fields evaluated at the Gauss points.
struct GaussFields {
    GaussFields() = default;
    GaussFields(int n_steps, int n_points);

    GaussSeries<double> rho;
    GaussSeries<Vector2> z;
    GaussSeries<Vector2> v;
    GaussSeries<Voigt> eps;
};

struct Indicators {
    double eta_v = 0.0;
    double eta_rho = 0.0;
};

/// Energy-norm relative gaps between the local-stage and global-stage primal fields.
Indicators indicators(const GaussHistory& local, const GaussFields& global, const GaussGeometry& geo,
                      const Material& m, const SearchDirections& sd, double dt);

using IterationCallback = std::function<void(const IterationRecord&)>;

/// Runs the LATIN-PGD iteration to the configured tolerance or iteration cap.
/// Throws DivergenceError when a non-finite value appears.
Solution run_latin(const CaseConfig& config, const Mesh& mesh, const IterationCallback& on_iteration = {});

} // namespace latinflow
