#include "latinflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <Eigen/LU>

#include "latinflow/error.hpp"

namespace latinflow {

Mesh Mesh::build(std::vector<Point> nodes, std::vector<std::array<int, 9>> elements, BoundaryMap boundary)
{
    Mesh m;
    m.nodes_ = std::move(nodes);
    m.elements_ = std::move(elements);
    m.boundary_ = std::move(boundary);

    const int n_nodes = m.n_q2();
    for (int e = 0; e < m.n_elements(); ++e) {
        for (int idx : m.elements_[e]) {
            if (idx < 0 || idx >= n_nodes) {
                throw FormatError("element " + std::to_string(e) + " references undefined node " + std::to_string(idx));
            }
        }
    }

    // Q1 numbering: corner nodes in increasing Q2 order.
    m.q2_to_q1_.assign(n_nodes, -1);
    std::vector<char> is_corner(n_nodes, 0);
    for (const auto& el : m.elements_) {
        for (int a = 0; a < 4; ++a) {
            is_corner[el[a]] = 1;
        }
    }
    for (int i = 0; i < n_nodes; ++i) {
        if (is_corner[i]) {
            m.q2_to_q1_[i] = static_cast<int>(m.q1_to_q2_.size());
            m.q1_to_q2_.push_back(i);
        }
    }
    m.elements_q1_.resize(m.elements_.size());
    for (int e = 0; e < m.n_elements(); ++e) {
        for (int a = 0; a < 4; ++a) {
            m.elements_q1_[e][a] = m.q2_to_q1_[m.elements_[e][a]];
        }
    }

    for (int e = 0; e < m.n_elements(); ++e) {
        const ElementCoords coords = m.element_coords(e);
        for (const auto& qp : gauss_3x3().points) {
            try {
                map_point(coords, qp.xi, qp.eta);
            }
            catch (const GeometryError&) {
                throw GeometryError("element " + std::to_string(e) + " is inverted or degenerate");
            }
        }
    }

    // Boundary edges must be exterior edges and belong to a single set.
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& el : m.elements_) {
        for (int k = 0; k < 4; ++k) {
            const int a = el[k];
            const int b = el[(k + 1) % 4];
            ++edge_count[{std::min(a, b), std::max(a, b)}];
        }
    }
    std::set<std::pair<int, int>> seen;
    for (const auto& [name, edges] : m.boundary_) {
        for (const auto& be : edges) {
            if (be.element < 0 || be.element >= m.n_elements()) {
                throw FormatError("boundary '" + name + "' references undefined element " + std::to_string(be.element));
            }
            if (be.local_edge < 0 || be.local_edge > 3) {
                throw FormatError("boundary '" + name + "' has local edge out of range");
            }
            const auto& el = m.elements_[be.element];
            const int a = el[be.local_edge];
            const int b = el[(be.local_edge + 1) % 4];
            if (edge_count[{std::min(a, b), std::max(a, b)}] != 1) {
                throw GeometryError("boundary '" + name + "' contains an interior edge of element " +
                                    std::to_string(be.element));
            }
            if (!seen.insert({be.element, be.local_edge}).second) {
                throw GeometryError("edge (" + std::to_string(be.element) + ", " + std::to_string(be.local_edge) +
                                    ") appears in more than one boundary entry");
            }
        }
    }
    return m;
}

ElementCoords Mesh::element_coords(int e) const
{
    ElementCoords c;
    for (int a = 0; a < 9; ++a) {
        c[a] = nodes_[elements_[e][a]];
    }
    return c;
}

std::vector<std::string> Mesh::boundary_names() const
{
    std::vector<std::string> names;
    for (const auto& [name, _] : boundary_) {
        names.push_back(name);
    }
    return names;
}

const std::vector<BoundaryEdge>& Mesh::boundary_edges(const std::string& name) const
{
    auto it = boundary_.find(name);
    if (it == boundary_.end()) {
        std::string available;
        for (const auto& n : boundary_names()) {
            available += (available.empty() ? "" : ", ") + n;
        }
        throw LookupError("unknown boundary set '" + name + "' (available: " + available + ")");
    }
    return it->second;
}

std::vector<int> Mesh::boundary_q2_nodes(const std::string& name) const
{
    std::set<int> out;
    for (const auto& be : boundary_edges(name)) {
        for (int local : edge_q2_nodes(be.local_edge)) {
            out.insert(elements_[be.element][local]);
        }
    }
    return {out.begin(), out.end()};
}

std::vector<int> Mesh::boundary_q1_nodes(const std::string& name) const
{
    std::set<int> out;
    for (const auto& be : boundary_edges(name)) {
        out.insert(elements_q1_[be.element][be.local_edge]);
        out.insert(elements_q1_[be.element][(be.local_edge + 1) % 4]);
    }
    return {out.begin(), out.end()};
}

std::pair<Point, Point> Mesh::bounding_box() const
{
    Point lo = nodes_.front();
    Point hi = nodes_.front();
    for (const auto& p : nodes_) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return {lo, hi};
}

Mesh generate_rectangle(double length, double height, int nx, int ny, const RectangleSides& sides)
{
    if (!(length > 0.0) || !(height > 0.0) || nx < 1 || ny < 1) {
        throw GeometryError("invalid rectangle: length and height must be positive, nx and ny at least 1");
    }
    const int cols = 2 * nx + 1;
    const int rows = 2 * ny + 1;
    std::vector<Point> nodes;
    nodes.reserve(static_cast<size_t>(cols) * rows);
    for (int j = 0; j < rows; ++j) {
        // exact end points so that boundary coordinates compare equal
        const double y = (j == rows - 1) ? 0.5 * height : -0.5 * height + height * j / (rows - 1);
        for (int i = 0; i < cols; ++i) {
            const double x = (i == cols - 1) ? length : length * i / (cols - 1);
            nodes.emplace_back(x, y);
        }
    }
    auto id = [cols](int i, int j) { return j * cols + i; };

    std::vector<std::array<int, 9>> elements;
    elements.reserve(static_cast<size_t>(nx) * ny);
    for (int ey = 0; ey < ny; ++ey) {
        for (int ex = 0; ex < nx; ++ex) {
            const int i = 2 * ex;
            const int j = 2 * ey;
            elements.push_back({id(i, j), id(i + 2, j), id(i + 2, j + 2), id(i, j + 2),
                                id(i + 1, j), id(i + 2, j + 1), id(i + 1, j + 2), id(i, j + 1),
                                id(i + 1, j + 1)});
        }
    }

    BoundaryMap boundary;
    auto elem = [nx](int ex, int ey) { return ey * nx + ex; };
    for (int ex = 0; ex < nx; ++ex) {
        boundary[sides.bottom].push_back({elem(ex, 0), 0});
    }
    for (int ey = 0; ey < ny; ++ey) {
        boundary[sides.right].push_back({elem(nx - 1, ey), 1});
    }
    for (int ex = 0; ex < nx; ++ex) {
        boundary[sides.top].push_back({elem(ex, ny - 1), 2});
    }
    for (int ey = 0; ey < ny; ++ey) {
        boundary[sides.left].push_back({elem(0, ey), 3});
    }
    return Mesh::build(std::move(nodes), std::move(elements), std::move(boundary));
}

namespace {

struct LineReader {
    std::istream& in;
    int line_no = 0;

    // Next non-empty line with comments stripped; false on EOF.
    bool next(std::string& out)
    {
        std::string raw;
        while (std::getline(in, raw)) {
            ++line_no;
            if (auto pos = raw.find('#'); pos != std::string::npos) {
                raw.erase(pos);
            }
            if (raw.find_first_not_of(" \t\r") != std::string::npos) {
                out = raw;
                return true;
            }
        }
        return false;
    }
};

template <typename... Ts>
void parse_fields(const std::string& text, int line, Ts&... fields)
{
    std::istringstream ss(text);
    ((ss >> fields), ...);
    std::string extra;
    if (ss.fail() || (ss >> extra)) {
        throw FormatError("syntax error: '" + text + "'", line);
    }
}

} // namespace

Mesh import_mesh(std::istream& in)
{
    LineReader reader{in};
    std::string line;
    if (!reader.next(line)) {
        throw FormatError("empty mesh file");
    }
    {
        std::istringstream ss(line);
        std::string magic, version, dim_kw;
        int dim = 0;
        ss >> magic >> version >> dim_kw >> dim;
        if (magic != "latinflow-mesh" || version != "v1" || dim_kw != "dim") {
            throw FormatError("expected header 'latinflow-mesh v1 dim 2'", reader.line_no);
        }
        if (dim != 2) {
            throw FormatError("only dim 2 is supported", reader.line_no);
        }
    }

    auto block_header = [&](const std::string& keyword, std::string* name) -> long {
        std::istringstream ss(line);
        std::string kw;
        long count = -1;
        ss >> kw;
        if (kw != keyword) {
            throw FormatError("expected block '" + keyword + "', got '" + kw + "'", reader.line_no);
        }
        if (name != nullptr) {
            ss >> *name;
        }
        ss >> count;
        std::string extra;
        if (ss.fail() || count < 0 || (ss >> extra)) {
            throw FormatError("malformed '" + keyword + "' block header", reader.line_no);
        }
        return count;
    };

    if (!reader.next(line)) {
        throw FormatError("missing 'nodes' block", reader.line_no);
    }
    const long n_nodes = block_header("nodes", nullptr);
    std::vector<Point> nodes(n_nodes);
    for (long i = 0; i < n_nodes; ++i) {
        if (!reader.next(line)) {
            throw FormatError("unexpected end of file in 'nodes' block", reader.line_no);
        }
        double x = 0, y = 0;
        parse_fields(line, reader.line_no, x, y);
        nodes[i] = Point(x, y);
    }

    if (!reader.next(line)) {
        throw FormatError("missing 'elements' block", reader.line_no);
    }
    const long n_elem = block_header("elements", nullptr);
    std::vector<std::array<int, 9>> elements(n_elem);
    for (long e = 0; e < n_elem; ++e) {
        if (!reader.next(line)) {
            throw FormatError("unexpected end of file in 'elements' block", reader.line_no);
        }
        auto& el = elements[e];
        parse_fields(line, reader.line_no, el[0], el[1], el[2], el[3], el[4], el[5], el[6], el[7], el[8]);
        for (int idx : el) {
            if (idx < 0 || idx >= n_nodes) {
                throw FormatError("element " + std::to_string(e) + " references undefined node " +
                                      std::to_string(idx),
                                  reader.line_no);
            }
        }
    }

    BoundaryMap boundary;
    while (reader.next(line)) {
        std::string name;
        const long k = block_header("boundary", &name);
        auto& edges = boundary[name];
        for (long i = 0; i < k; ++i) {
            if (!reader.next(line)) {
                throw FormatError("unexpected end of file in boundary '" + name + "'", reader.line_no);
            }
            BoundaryEdge be;
            parse_fields(line, reader.line_no, be.element, be.local_edge);
            if (be.element < 0 || be.element >= n_elem || be.local_edge < 0 || be.local_edge > 3) {
                throw FormatError("boundary '" + name + "' entry out of range", reader.line_no);
            }
            edges.push_back(be);
        }
    }
    return Mesh::build(std::move(nodes), std::move(elements), std::move(boundary));
}

void export_mesh(const Mesh& mesh, std::ostream& out)
{
    out << "latinflow-mesh v1 dim 2\n";
    out << "# Q2 element node order: 4 corners counter-clockwise, 4 mid-edge nodes, center\n";
    out.precision(17);
    out << "nodes " << mesh.n_q2() << "\n";
    for (const auto& p : mesh.q2_nodes()) {
        out << p.x() << " " << p.y() << "\n";
    }
    out << "elements " << mesh.n_elements() << "\n";
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const auto& el = mesh.element_q2(e);
        for (int a = 0; a < 9; ++a) {
            out << el[a] << (a == 8 ? "\n" : " ");
        }
    }
    for (const auto& [name, edges] : mesh.boundaries()) {
        out << "boundary " << name << " " << edges.size() << "\n";
        for (const auto& be : edges) {
            out << be.element << " " << be.local_edge << "\n";
        }
    }
}

std::vector<BoundaryFacet> boundary_set(const Mesh& mesh, const std::string& name)
{
    std::vector<BoundaryFacet> out;
    for (const auto& be : mesh.boundary_edges(name)) {
        const auto pts = edge_quadrature(mesh.element_coords(be.element), be.local_edge);
        BoundaryFacet f;
        f.element = be.element;
        f.local_edge = be.local_edge;
        for (const auto& p : pts) {
            f.length += p.weight;
        }
        f.normal = pts[1].normal;
        out.push_back(f);
    }
    return out;
}

std::optional<Location> locate(const Mesh& mesh, const Point& p, double tolerance)
{
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const ElementCoords c = mesh.element_coords(e);
        Point lo = c[0];
        Point hi = c[0];
        for (const auto& q : c) {
            lo = lo.cwiseMin(q);
            hi = hi.cwiseMax(q);
        }
        const double pad = tolerance + 1e-9 * (hi - lo).norm();
        if ((p.array() < lo.array() - pad).any() || (p.array() > hi.array() + pad).any()) {
            continue;
        }
        double xi = 0.0;
        double eta = 0.0;
        bool ok = false;
        for (int it = 0; it < 50; ++it) {
            const ShapeQ2 s = shape_q2(xi, eta);
            Point x = Point::Zero();
            Eigen::Matrix2d jac = Eigen::Matrix2d::Zero();
            for (int a = 0; a < 9; ++a) {
                x += s.value[a] * c[a];
                jac += c[a] * s.grad[a].transpose();
            }
            const Point r = p - x;
            if (r.norm() <= tolerance) {
                ok = true;
                break;
            }
            const Point d = jac.inverse() * r;
            xi += d.x();
            eta += d.y();
            if (!std::isfinite(xi) || !std::isfinite(eta) || std::abs(xi) > 3.0 || std::abs(eta) > 3.0) {
                break;
            }
        }
        if (ok && std::abs(xi) <= 1.0 + 1e-8 && std::abs(eta) <= 1.0 + 1e-8) {
            return Location{e, std::clamp(xi, -1.0, 1.0), std::clamp(eta, -1.0, 1.0)};
        }
    }
    return std::nullopt;
}

} // namespace latinflow
