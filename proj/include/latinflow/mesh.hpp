#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "latinflow/elements.hpp"

namespace latinflow {

struct BoundaryEdge {
    int element = 0;
    int local_edge = 0;
    bool operator==(const BoundaryEdge&) const = default;
};

/// A boundary edge together with its geometric data.
struct BoundaryFacet {
    int element = 0;
    int local_edge = 0;
    Point normal;  // unit outward normal at the edge midpoint
    double length = 0.0;
};

using BoundaryMap = std::map<std::string, std::vector<BoundaryEdge>>;

/// Taylor-Hood quadrilateral mesh. Q2 nodes carry the velocity, the corner
/// subset carries the Q1 density. Q1 numbering follows increasing Q2 index.
/// Immutable once built.
class Mesh {
public:
    /// Validates connectivity, boundary sets and Jacobian positivity.
    static Mesh build(std::vector<Point> nodes, std::vector<std::array<int, 9>> elements, BoundaryMap boundary);

    int dimension() const { return 2; }
    int n_elements() const { return static_cast<int>(elements_.size()); }
    int n_q2() const { return static_cast<int>(nodes_.size()); }
    int n_q1() const { return static_cast<int>(q1_to_q2_.size()); }

    const std::vector<Point>& q2_nodes() const { return nodes_; }
    const Point& q1_node(int q1) const { return nodes_[q1_to_q2_[q1]]; }
    const std::vector<int>& q1_to_q2() const { return q1_to_q2_; }
    /// -1 for mid-edge and center nodes.
    const std::vector<int>& q2_to_q1() const { return q2_to_q1_; }

    const std::array<int, 9>& element_q2(int e) const { return elements_[e]; }
    const std::array<int, 4>& element_q1(int e) const { return elements_q1_[e]; }
    ElementCoords element_coords(int e) const;

    const BoundaryMap& boundaries() const { return boundary_; }
    std::vector<std::string> boundary_names() const;
    bool has_boundary(const std::string& name) const { return boundary_.count(name) > 0; }
    /// Throws LookupError listing the available sets.
    const std::vector<BoundaryEdge>& boundary_edges(const std::string& name) const;
    /// Sorted, unique Q1 indices on a named set.
    std::vector<int> boundary_q1_nodes(const std::string& name) const;
    /// Sorted, unique Q2 node indices on a named set.
    std::vector<int> boundary_q2_nodes(const std::string& name) const;

    /// Axis-aligned bounding box (min, max).
    std::pair<Point, Point> bounding_box() const;

private:
    std::vector<Point> nodes_;
    std::vector<std::array<int, 9>> elements_;
    std::vector<std::array<int, 4>> elements_q1_;
    std::vector<int> q1_to_q2_;
    std::vector<int> q2_to_q1_;
    BoundaryMap boundary_;
};

/// Set names for the four sides of a generated rectangle; equal names merge.
struct RectangleSides {
    std::string left = "inflow";
    std::string right = "outflow";
    std::string bottom = "walls";
    std::string top = "walls";
};

/// Structured nx x ny mesh of [0,length] x [-height/2, height/2].
Mesh generate_rectangle(double length, double height, int nx, int ny, const RectangleSides& sides = {});

/// Reads the `latinflow-mesh v1` ASCII format.
Mesh import_mesh(std::istream& in);
void export_mesh(const Mesh& mesh, std::ostream& out);

std::vector<BoundaryFacet> boundary_set(const Mesh& mesh, const std::string& name);

struct Location {
    int element = -1;
    double xi = 0.0;
    double eta = 0.0;
};

/// Finds an element containing `p` and its reference coordinates.
std::optional<Location> locate(const Mesh& mesh, const Point& p, double tolerance = 1e-10);

} // namespace latinflow
