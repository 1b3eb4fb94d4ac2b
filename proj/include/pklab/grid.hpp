#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "pklab/error.hpp"

namespace pklab {

/// Where the unknowns sit inside each axis.
///
/// `vertex_interior` is the finite-difference layout used by the PDE: nodes at
/// x_i = i h, i = 1..n, h = L/(n+1), boundary values are implied zeros.
/// `cell_centered` is a pure quadrature layout (midpoint rule): nodes at
/// (i - 1/2) h, h = L/n, so the weights add up to |Omega| exactly.
enum class Centering { vertex_interior, cell_centered };

/// Structured grid on an interval (dim 1) or a rectangle (dim 2).
struct Grid {
    int dim = 1;
    std::array<double, 2> extent{1.0, 1.0};
    std::array<int, 2> n{1, 1};
    std::array<double, 2> h{0.5, 1.0};
    Centering centering = Centering::vertex_interior;

    static Grid line(double length, int nodes) { return make(1, {length, 1.0}, {nodes, 1}, Centering::vertex_interior); }
    static Grid rect(double lx, double ly, int nx, int ny) {
        return make(2, {lx, ly}, {nx, ny}, Centering::vertex_interior);
    }
    static Grid cells(double length, int count) { return make(1, {length, 1.0}, {count, 1}, Centering::cell_centered); }
    static Grid cells(double lx, double ly, int nx, int ny) {
        return make(2, {lx, ly}, {nx, ny}, Centering::cell_centered);
    }

    static Grid make(int dim, std::array<double, 2> extent, std::array<int, 2> n, Centering c) {
        if (dim != 1 && dim != 2) throw InvalidInput("grid dimension must be 1 or 2");
        Grid g;
        g.dim = dim;
        g.centering = c;
        for (int a = 0; a < 2; ++a) {
            if (a >= dim) {
                g.extent[a] = 1.0;
                g.n[a] = 1;
                g.h[a] = 1.0;
                continue;
            }
            if (!(extent[a] > 0.0) || !std::isfinite(extent[a]))
                throw InvalidInput("grid extent must be positive and finite");
            if (n[a] < 1) throw InvalidInput("grid needs at least one node per axis");
            g.extent[a] = extent[a];
            g.n[a] = n[a];
            g.h[a] = c == Centering::vertex_interior ? extent[a] / (n[a] + 1) : extent[a] / n[a];
        }
        return g;
    }

    std::size_t size() const noexcept { return static_cast<std::size_t>(n[0]) * static_cast<std::size_t>(n[1]); }

    /// Quadrature weight attached to each node, h^N.
    double cell_volume() const noexcept { return dim == 1 ? h[0] : h[0] * h[1]; }

    double measure() const noexcept { return dim == 1 ? extent[0] : extent[0] * extent[1]; }

    std::size_t index(int i, int j = 0) const noexcept {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(n[0]) * static_cast<std::size_t>(j);
    }

    double coordinate(int axis, int i) const noexcept {
        return centering == Centering::vertex_interior ? (i + 1) * h[axis] : (i + 0.5) * h[axis];
    }

    std::array<double, 2> position(std::size_t idx) const noexcept {
        const int i = static_cast<int>(idx % static_cast<std::size_t>(n[0]));
        const int j = static_cast<int>(idx / static_cast<std::size_t>(n[0]));
        return {coordinate(0, i), dim == 2 ? coordinate(1, j) : 0.0};
    }

    bool operator==(const Grid&) const = default;

    std::string describe() const {
        std::string s = dim == 1 ? "1d " : "2d ";
        s += std::to_string(n[0]);
        if (dim == 2) s += "x" + std::to_string(n[1]);
        s += centering == Centering::vertex_interior ? " interior nodes" : " cells";
        return s;
    }
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) throw InvalidInput(std::string(what) + ": grid mismatch");
}

inline void require_pde_grid(const Grid& g, const char* what) {
    if (g.centering != Centering::vertex_interior)
        throw InvalidInput(std::string(what) + ": finite-difference operators need a vertex-interior grid");
}

/// Real values on the nodes of a grid. Boundary values are not stored.
struct GridFunction {
    Grid grid;
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(const Grid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
    GridFunction(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.size()) throw InvalidInput("grid function size does not match grid");
    }

    template <class F>
    static GridFunction sample(const Grid& g, F&& f) {
        GridFunction out(g);
        for (std::size_t k = 0; k < g.size(); ++k) {
            const auto x = g.position(k);
            if constexpr (std::is_invocable_v<F&, double, double>) {
                out.values[k] = f(x[0], x[1]);
            } else {
                if (g.dim != 1) throw InvalidInput("sample: 2D grid needs a function of (x, y)");
                out.values[k] = f(x[0]);
            }
        }
        return out;
    }

    std::size_t size() const noexcept { return values.size(); }
    double& operator[](std::size_t i) noexcept { return values[i]; }
    double operator[](std::size_t i) const noexcept { return values[i]; }
    std::span<const double> span() const noexcept { return values; }
    std::span<double> span() noexcept { return values; }

    bool all_finite() const noexcept {
        for (double x : values)
            if (!std::isfinite(x)) return false;
        return true;
    }

    bool is_zero() const noexcept {
        for (double x : values)
            if (x != 0.0) return false;
        return true;
    }

    GridFunction& operator*=(double c) noexcept {
        for (double& x : values) x *= c;
        return *this;
    }
    friend GridFunction operator*(double c, GridFunction f) { return f *= c; }
};

inline double max_abs(std::span<const double> v) noexcept {
    double m = 0.0;
    for (double x : v) m = std::fmax(m, std::fabs(x));
    return m;
}

}  // namespace pklab
