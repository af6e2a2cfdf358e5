#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gaugeqm/error.hpp"
#include "gaugeqm/linalg.hpp"

namespace gaugeqm {

/// Ordered polyline of chart points with a parameter value per node.
///
/// Parameter increments must be finite and nonzero. Paths built from data
/// run forward (increasing parameter); `inverted()` walks the nodes backwards
/// with negated increments, so unions of a path with its inverse carry a mix
/// of signs.
class Path {
public:
    Path(std::vector<Point> nodes, std::vector<double> params)
        : nodes_(std::move(nodes)), params_(std::move(params)) {
        require(nodes_.size() >= 2, ErrorKind::invalid_path, "a path needs at least two nodes");
        require(nodes_.size() == params_.size(), ErrorKind::invalid_path,
                "node and parameter counts differ");
        const auto n = nodes_.front().size();
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            require(nodes_[i].size() == n, ErrorKind::invalid_path,
                    "node " + std::to_string(i) + " has inconsistent dimension");
            require(nodes_[i].allFinite() && std::isfinite(params_[i]), ErrorKind::invalid_path,
                    "node " + std::to_string(i) + " is not finite");
        }
        for (std::size_t i = 0; i + 1 < params_.size(); ++i)
            require(params_[i + 1] != params_[i], ErrorKind::invalid_path,
                    "parameter increment " + std::to_string(i) + " is zero");
    }

    /// Validates that parameters strictly increase, as required for data input.
    static Path forward(std::vector<Point> nodes, std::vector<double> params) {
        for (std::size_t i = 0; i + 1 < params.size(); ++i)
            require(params[i + 1] > params[i], ErrorKind::invalid_path,
                    "parameters must be strictly increasing (index " + std::to_string(i + 1) +
                        ")");
        return Path(std::move(nodes), std::move(params));
    }

    /// M equal segments from x to y over [tau0, tau1].
    static Path straight(const Point& x, const Point& y, double tau0, double tau1, int segments) {
        require(segments >= 1, ErrorKind::invalid_path, "need at least one segment");
        require(x.size() == y.size(), ErrorKind::invalid_path, "endpoint dimensions differ");
        std::vector<Point> nodes;
        std::vector<double> params;
        for (int i = 0; i <= segments; ++i) {
            const double s = static_cast<double>(i) / segments;
            nodes.push_back(x + s * (y - x));
            params.push_back(tau0 + s * (tau1 - tau0));
        }
        nodes.back() = y;
        params.back() = tau1;
        return forward(std::move(nodes), std::move(params));
    }

    /// Closed polygon through the given vertices, each edge split into `per_edge` pieces.
    static Path polygon(const std::vector<Point>& vertices, int per_edge, double tau_span = 1.0) {
        require(vertices.size() >= 2 && per_edge >= 1, ErrorKind::invalid_path,
                "polygon needs two vertices and at least one piece per edge");
        std::vector<Point> nodes;
        const std::size_t nv = vertices.size();
        for (std::size_t v = 0; v < nv; ++v) {
            const Point& a = vertices[v];
            const Point& b = vertices[(v + 1) % nv];
            for (int k = 0; k < per_edge; ++k)
                nodes.push_back(a + (static_cast<double>(k) / per_edge) * (b - a));
        }
        nodes.push_back(vertices.front());
        std::vector<double> params(nodes.size());
        for (std::size_t i = 0; i < params.size(); ++i)
            params[i] = tau_span * static_cast<double>(i) / (params.size() - 1);
        return forward(std::move(nodes), std::move(params));
    }

    int dim() const { return static_cast<int>(nodes_.front().size()); }
    int segments() const { return static_cast<int>(nodes_.size()) - 1; }
    std::size_t size() const { return nodes_.size(); }
    const Point& node(std::size_t i) const { return nodes_[i]; }
    double param(std::size_t i) const { return params_[i]; }
    const std::vector<Point>& nodes() const { return nodes_; }
    const std::vector<double>& params() const { return params_; }
    const Point& front() const { return nodes_.front(); }
    const Point& back() const { return nodes_.back(); }

    Point midpoint(std::size_t seg) const { return 0.5 * (nodes_[seg] + nodes_[seg + 1]); }
    Vec displacement(std::size_t seg) const { return nodes_[seg + 1] - nodes_[seg]; }
    double increment(std::size_t seg) const { return params_[seg + 1] - params_[seg]; }
    double span() const { return params_.back() - params_.front(); }

    bool is_closed(double tol = 1e-12) const {
        return (nodes_.front() - nodes_.back()).cwiseAbs().maxCoeff() <= tol;
    }

    /// Nodes reversed, increments negated: segment i of the inverse is
    /// segment M-1-i traversed backwards over -dtau.
    Path inverted() const {
        std::vector<Point> nodes(nodes_.rbegin(), nodes_.rend());
        std::vector<double> params(params_.rbegin(), params_.rend());
        return Path(std::move(nodes), std::move(params));
    }

    /// Same nodes with a new parameter origin.
    Path shifted(double dtau) const {
        std::vector<double> params = params_;
        for (double& t : params) t += dtau;
        return Path(nodes_, std::move(params));
    }

    /// Copy with interior nodes replaced (endpoints kept).
    Path with_interior(const std::vector<Point>& interior) const {
        require(interior.size() + 2 == nodes_.size(), ErrorKind::invalid_path,
                "interior node count mismatch");
        std::vector<Point> nodes = nodes_;
        for (std::size_t i = 0; i < interior.size(); ++i) nodes[i + 1] = interior[i];
        return Path(std::move(nodes), params_);
    }

private:
    std::vector<Point> nodes_;
    std::vector<double> params_;
};

/// CSV with header "tau,x1,...,xN"; one node per row, LF line endings.
inline void write_path_csv(std::ostream& os, const Path& p) {
    os << "tau";
    for (int i = 0; i < p.dim(); ++i) os << ",x" << (i + 1);
    os << "\n";
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (std::size_t k = 0; k < p.size(); ++k) {
        os << p.param(k);
        for (int i = 0; i < p.dim(); ++i) os << "," << p.node(k)(i);
        os << "\n";
    }
}

inline Path read_path_csv(std::istream& is) {
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), ErrorKind::invalid_path,
            "path CSV is empty");
    require(line.rfind("tau", 0) == 0, ErrorKind::invalid_path,
            "path CSV header must start with 'tau'");
    const auto cols = std::count(line.begin(), line.end(), ',') + 1;
    require(cols >= 2, ErrorKind::invalid_path, "path CSV needs at least one coordinate column");
    std::vector<Point> nodes;
    std::vector<double> params;
    int row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) {
            try {
                vals.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw Error(ErrorKind::invalid_path,
                            "row " + std::to_string(row) + ": cannot parse '" + cell + "'");
            }
        }
        require(static_cast<long>(vals.size()) == cols, ErrorKind::invalid_path,
                "row " + std::to_string(row) + " has wrong column count");
        params.push_back(vals[0]);
        nodes.push_back(Eigen::Map<Vec>(vals.data() + 1, cols - 1));
    }
    return Path(std::move(nodes), std::move(params));
}

} // namespace gaugeqm
