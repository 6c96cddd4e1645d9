#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "latinflow/latin.hpp"
#include "latinflow/mesh.hpp"

namespace latinflow {

/// Q1 nodal values extended to all Q2 nodes by bilinear interpolation.
Vector q1_to_q2_values(const Mesh& mesh, const Vector& q1_values);

/// Legacy ASCII unstructured grid of biquadratic quads with point data
/// `velocity` (z = 0), `pressure` and `density`, all on the Q2 nodes.
void write_vtk(const std::string& path, const Mesh& mesh, const Vector& velocity, const Vector& pressure_q2,
               const Vector& density_q2, const std::string& title = "latinflow");

/// Writes step_NNNN.vtk for every `stride`-th step and the final one.
void write_solution_vtk(const std::string& directory, const Mesh& mesh, const Solution& solution, int stride);

/// Point data arrays of a file written by write_vtk, flattened.
std::map<std::string, std::vector<double>> read_vtk_point_data(const std::string& path);

/// Convergence CSV, flushed per row.
class HistoryWriter {
public:
    explicit HistoryWriter(const std::string& path);
    void append(const IterationRecord& record);

private:
    std::ofstream out_;
};

void write_history(const std::string& path, const std::vector<IterationRecord>& history);

/// time, then v_x, v_y, pressure per probe.
void write_probes(const std::string& path, const Mesh& mesh, const Solution& solution, const std::vector<Point>& probes);

/// One CSV per spatial mode plus one CSV of all temporal functions.
void export_modes(const std::string& directory, const std::string& prefix, const Mesh& mesh, const PGDField& field,
                  const std::vector<double>& times);

/// Creates the directory if needed; throws IoError when it cannot be written.
void ensure_directory(const std::string& directory);

} // namespace latinflow
