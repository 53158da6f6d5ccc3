#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "nilap/error.hpp"

namespace nilap {

/// A point in the ambient space. In 1D only the first coordinate is used and the
/// second stays at zero.
using Point = std::array<double, 2>;
using NodeId = std::size_t;

enum class NodeClass : std::uint8_t { Interior, Exterior };

inline double distance(const Point& a, const Point& b) {
    return std::hypot(a[0] - b[0], a[1] - b[1]);
}

/// The discrete ambient space: a uniform Cartesian grid over
/// [-box_halfwidth, box_halfwidth]^dim with each node labelled Interior (inside
/// the open set Omega) or Exterior. Node ids run lexicographically, first axis
/// slowest. The unbounded remainder of the complement is represented by the
/// tail, which lives in Field rather than here.
///
/// Immutable after construction.
class GridDomain {
public:
    GridDomain(int dim, double box_halfwidth, std::size_t nodes_per_axis,
               std::vector<NodeClass> classification)
        : dim_(dim),
          box_halfwidth_(box_halfwidth),
          n_(nodes_per_axis),
          classes_(std::move(classification)) {
        if (dim_ != 1 && dim_ != 2)
            throw Error(Errc::InvalidArgument, "dim must be 1 or 2");
        if (n_ < 3 || n_ % 2 == 0)
            throw Error(Errc::InvalidArgument, "nodes_per_axis must be odd and >= 3");
        if (!(box_halfwidth_ > 0.0) || !std::isfinite(box_halfwidth_))
            throw Error(Errc::InvalidArgument, "box_halfwidth must be positive and finite");
        if (classes_.size() != size())
            throw Error(Errc::InvalidArgument, "classification size does not match the grid");
        h_ = 2.0 * box_halfwidth_ / static_cast<double>(n_ - 1);
        rebuild_index();
    }

    int dim() const { return dim_; }
    double box_halfwidth() const { return box_halfwidth_; }
    std::size_t nodes_per_axis() const { return n_; }
    double spacing() const { return h_; }
    std::size_t size() const { return dim_ == 1 ? n_ : n_ * n_; }

    /// Euclidean diameter of the box, the largest possible node distance.
    double box_diameter() const {
        return 2.0 * box_halfwidth_ * std::sqrt(static_cast<double>(dim_));
    }

    /// Axis index of `node` along `axis` (0 or 1).
    std::size_t axis_index(NodeId node, int axis) const {
        if (dim_ == 1) return axis == 0 ? node : 0;
        return axis == 0 ? node / n_ : node % n_;
    }

    NodeId node_at(std::size_t i, std::size_t j = 0) const {
        return dim_ == 1 ? i : i * n_ + j;
    }

    double axis_coord(std::size_t index) const {
        // Symmetric formula keeps the origin exact and mirrored nodes exact negatives.
        const double half = static_cast<double>(n_ - 1) / 2.0;
        return (static_cast<double>(index) - half) * h_;
    }

    Point coord(NodeId node) const {
        Point p{axis_coord(axis_index(node, 0)), 0.0};
        if (dim_ == 2) p[1] = axis_coord(axis_index(node, 1));
        return p;
    }

    NodeClass classification(NodeId node) const { return classes_[node]; }
    bool is_interior(NodeId node) const { return classes_[node] == NodeClass::Interior; }
    bool is_exterior(NodeId node) const { return classes_[node] == NodeClass::Exterior; }

    const std::vector<NodeId>& interior_nodes() const { return interior_; }
    const std::vector<NodeId>& exterior_nodes() const { return exterior_; }

    /// Interior nodes plus Exterior nodes within one grid step (Chebyshev) of an
    /// Interior node: the discrete closure of Omega.
    bool in_closure(NodeId node) const { return closure_[node] != 0; }

    /// Node distance computed from integer offsets, so it is exactly symmetric
    /// and translation invariant on the lattice.
    double node_distance(NodeId a, NodeId b) const {
        const double di = offset(a, b, 0);
        const double dj = dim_ == 2 ? offset(a, b, 1) : 0.0;
        return h_ * std::sqrt(di * di + dj * dj);
    }

    bool on_box_boundary(NodeId node) const {
        for (int ax = 0; ax < dim_; ++ax) {
            const auto k = axis_index(node, ax);
            if (k == 0 || k == n_ - 1) return true;
        }
        return false;
    }

    /// Distance from each node to the nearest Exterior node (0 on Exterior).
    std::vector<double> distance_to_exterior() const {
        std::vector<double> d(size(), 0.0);
        for (NodeId x : interior_) {
            double best = std::numeric_limits<double>::infinity();
            for (NodeId y : exterior_) best = std::min(best, node_distance(x, y));
            d[x] = best;
        }
        return d;
    }

    std::vector<NodeClass> classification() const { return classes_; }

private:
    double offset(NodeId a, NodeId b, int axis) const {
        const auto ia = static_cast<double>(axis_index(a, axis));
        const auto ib = static_cast<double>(axis_index(b, axis));
        return std::abs(ia - ib);
    }

    void rebuild_index() {
        interior_.clear();
        exterior_.clear();
        for (NodeId i = 0; i < size(); ++i)
            (classes_[i] == NodeClass::Interior ? interior_ : exterior_).push_back(i);
        closure_.assign(size(), 0);
        for (NodeId x : interior_) {
            const auto xi = static_cast<long>(axis_index(x, 0));
            const auto xj = static_cast<long>(axis_index(x, 1));
            const long n = static_cast<long>(n_);
            for (long di = -1; di <= 1; ++di) {
                for (long dj = (dim_ == 2 ? -1 : 0); dj <= (dim_ == 2 ? 1 : 0); ++dj) {
                    const long i = xi + di, j = xj + dj;
                    if (i < 0 || i >= n || j < 0 || j >= (dim_ == 2 ? n : 1)) continue;
                    closure_[node_at(static_cast<std::size_t>(i), static_cast<std::size_t>(j))] = 1;
                }
            }
        }
    }

    int dim_;
    double box_halfwidth_;
    std::size_t n_;
    double h_ = 0.0;
    std::vector<NodeClass> classes_;
    std::vector<NodeId> interior_;
    std::vector<NodeId> exterior_;
    std::vector<std::uint8_t> closure_;
};

using Mask = std::function<bool(const Point&)>;
using ScalarFunction = std::function<double(const Point&)>;

/// Continuous problem data: exponent, the open set Omega as a predicate, the
/// right-hand side f on Omega, exterior data g, and the limit C1 of the data at
/// infinity.
struct ProblemSpec {
    int dim = 1;
    double alpha = 0.5;
    Mask omega;
    ScalarFunction rhs;
    ScalarFunction exterior;
    double tail_value = 0.0;
    /// When false, f may take positive values (non-uniqueness probes).
    bool strict_sign_check = true;

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw Error(Errc::ValidationError, "alpha must satisfy 0 < alpha < 1");
        if (dim != 1 && dim != 2) throw Error(Errc::ValidationError, "dim must be 1 or 2");
        if (!omega || !rhs || !exterior)
            throw Error(Errc::ValidationError, "omega, rhs and exterior data must be set");
        if (!std::isfinite(tail_value))
            throw Error(Errc::ValidationError, "tail_value must be finite");
    }
};

/// One value per grid node plus the value "at infinity".
struct Field {
    std::vector<double> values;
    double tail = 0.0;

    Field() = default;
    Field(std::size_t n, double fill, double tail_value = 0.0) : values(n, fill), tail(tail_value) {}
    Field(std::vector<double> v, double tail_value) : values(std::move(v)), tail(tail_value) {}

    std::size_t size() const { return values.size(); }
    double& operator[](NodeId i) { return values[i]; }
    double operator[](NodeId i) const { return values[i]; }

    bool all_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return std::isfinite(tail);
    }
};

inline GridDomain build_grid(const Mask& omega, int dim, double box_halfwidth,
                             std::size_t nodes_per_axis) {
    if (nodes_per_axis < 3 || nodes_per_axis % 2 == 0)
        throw Error(Errc::InvalidArgument, "nodes_per_axis must be odd and >= 3");
    const std::size_t total = dim == 1 ? nodes_per_axis : nodes_per_axis * nodes_per_axis;
    GridDomain probe(dim, box_halfwidth, nodes_per_axis,
                     std::vector<NodeClass>(total, NodeClass::Exterior));
    std::vector<NodeClass> classes(total, NodeClass::Exterior);
    bool any_interior = false;
    for (NodeId i = 0; i < total; ++i) {
        if (!omega(probe.coord(i))) continue;
        if (probe.on_box_boundary(i))
            throw Error(Errc::MaskTouchesBox,
                        "Omega contains a node on the box boundary; enlarge the box");
        classes[i] = NodeClass::Interior;
        any_interior = true;
    }
    if (!any_interior) throw Error(Errc::EmptyInterior, "no grid node lies inside Omega");
    return GridDomain(dim, box_halfwidth, nodes_per_axis, std::move(classes));
}

inline GridDomain build_grid(const ProblemSpec& spec, double box_halfwidth,
                             std::size_t nodes_per_axis) {
    return build_grid(spec.omega, spec.dim, box_halfwidth, nodes_per_axis);
}

/// Copy of `domain` keeping only Interior nodes farther than `margin` from
/// every Exterior node. An empty result is legal.
inline GridDomain erode(const GridDomain& domain, double margin) {
    if (!(margin >= 0.0)) throw Error(Errc::InvalidArgument, "erosion margin must be >= 0");
    auto classes = domain.classification();
    if (margin > 0.0) {
        const auto dist = domain.distance_to_exterior();
        for (NodeId x : domain.interior_nodes())
            if (!(dist[x] > margin)) classes[x] = NodeClass::Exterior;
    }
    return GridDomain(domain.dim(), domain.box_halfwidth(), domain.nodes_per_axis(),
                      std::move(classes));
}

/// f sampled at Interior nodes (zero elsewhere). Enforces f <= 0 unless the
/// spec disables the sign check.
inline std::vector<double> sample_rhs(const ProblemSpec& spec, const GridDomain& domain) {
    std::vector<double> f(domain.size(), 0.0);
    for (NodeId x : domain.interior_nodes()) {
        f[x] = spec.rhs(domain.coord(x));
        if (!std::isfinite(f[x]))
            throw Error(Errc::UnboundedData, "f is not finite at node " + std::to_string(x));
        if (spec.strict_sign_check && f[x] > 0.0)
            throw Error(Errc::SignHypothesis,
                        "f must satisfy f <= 0 (f <= 0 is bounded and continuous); "
                        "positive at node " + std::to_string(x));
    }
    return f;
}

/// Field holding g on Exterior nodes, `interior_fill` on Interior nodes and the
/// spec's tail value.
inline Field exterior_field(const ProblemSpec& spec, const GridDomain& domain,
                            double interior_fill = 0.0) {
    Field u(domain.size(), interior_fill, spec.tail_value);
    for (NodeId y : domain.exterior_nodes()) {
        u[y] = spec.exterior(domain.coord(y));
        if (!std::isfinite(u[y]))
            throw Error(Errc::UnboundedData, "g is not finite at node " + std::to_string(y));
    }
    return u;
}

}  // namespace nilap
