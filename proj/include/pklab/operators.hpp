#pragma once

// Finite-difference operators on vertex-interior grids with the clamped
// boundary u = du/dn = 0. Zero extension realizes u = 0; the normal
// derivative condition enters the biharmonic through the ghost reflection
// u_{-1} = u_{1}, which adds 2/h^4 on the diagonal of every node adjacent to
// a boundary side.

#include <cstddef>
#include <span>
#include <vector>

#include "pklab/error.hpp"
#include "pklab/grid.hpp"

namespace pklab {

namespace stencil {

inline void laplacian(const Grid& g, std::span<const double> u, std::span<double> out) noexcept {
    const int nx = g.n[0];
    const int ny = g.n[1];
    const double cx = 1.0 / (g.h[0] * g.h[0]);
    if (g.dim == 1) {
        for (int i = 0; i < nx; ++i) {
            const double l = i > 0 ? u[i - 1] : 0.0;
            const double r = i + 1 < nx ? u[i + 1] : 0.0;
            out[i] = (l - 2.0 * u[i] + r) * cx;
        }
        return;
    }
    const double cy = 1.0 / (g.h[1] * g.h[1]);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const std::size_t k = g.index(i, j);
            const double l = i > 0 ? u[k - 1] : 0.0;
            const double r = i + 1 < nx ? u[k + 1] : 0.0;
            const double d = j > 0 ? u[k - nx] : 0.0;
            const double t = j + 1 < ny ? u[k + nx] : 0.0;
            out[k] = (l - 2.0 * u[k] + r) * cx + (d - 2.0 * u[k] + t) * cy;
        }
    }
}

/// Diagonal entry of the ghost-reflection correction at node k.
inline double clamped_penalty(const Grid& g, std::size_t k) noexcept {
    const int i = static_cast<int>(k % static_cast<std::size_t>(g.n[0]));
    const int j = static_cast<int>(k / static_cast<std::size_t>(g.n[0]));
    const double hx4 = g.h[0] * g.h[0] * g.h[0] * g.h[0];
    double p = 2.0 / hx4 * ((i == 0) + (i == g.n[0] - 1));
    if (g.dim == 2) {
        const double hy4 = g.h[1] * g.h[1] * g.h[1] * g.h[1];
        p += 2.0 / hy4 * ((j == 0) + (j == g.n[1] - 1));
    }
    return p;
}

/// out = Delta_h(Delta_h u) + P u; `scratch` holds Delta_h u on exit.
inline void biharmonic(const Grid& g, std::span<const double> u, std::span<double> out,
                       std::span<double> scratch) noexcept {
    laplacian(g, u, scratch);
    laplacian(g, scratch, out);
    for (std::size_t k = 0; k < u.size(); ++k) out[k] += clamped_penalty(g, k) * u[k];
}

/// Diagonal of -Delta_h.
inline double neg_laplacian_diag(const Grid& g) noexcept {
    double d = 2.0 / (g.h[0] * g.h[0]);
    if (g.dim == 2) d += 2.0 / (g.h[1] * g.h[1]);
    return d;
}

/// Diagonal of the clamped biharmonic at node k.
inline double biharmonic_diag(const Grid& g, std::size_t k) noexcept {
    const int i = static_cast<int>(k % static_cast<std::size_t>(g.n[0]));
    const int j = static_cast<int>(k / static_cast<std::size_t>(g.n[0]));
    const double cx = 1.0 / (g.h[0] * g.h[0]);
    const double c = neg_laplacian_diag(g);
    double d = c * c;
    d += cx * cx * ((i > 0) + (i + 1 < g.n[0]));
    if (g.dim == 2) {
        const double cy = 1.0 / (g.h[1] * g.h[1]);
        d += cy * cy * ((j > 0) + (j + 1 < g.n[1]));
    }
    return d + clamped_penalty(g, k);
}

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Forward-difference Dirichlet energy sum |grad u|^2 h^N including the
/// boundary links (zero extension).
inline double grad_norm_sq(const Grid& g, std::span<const double> u) noexcept {
    const int nx = g.n[0];
    const int ny = g.n[1];
    const double w = g.cell_volume();
    double sx = 0.0;
    double sy = 0.0;
    for (int j = 0; j < ny; ++j) {
        double prev = 0.0;
        for (int i = 0; i < nx; ++i) {
            const double cur = u[g.index(i, j)];
            sx += (cur - prev) * (cur - prev);
            prev = cur;
        }
        sx += prev * prev;
    }
    double s = sx / (g.h[0] * g.h[0]);
    if (g.dim == 2) {
        for (int i = 0; i < nx; ++i) {
            double prev = 0.0;
            for (int j = 0; j < ny; ++j) {
                const double cur = u[g.index(i, j)];
                sy += (cur - prev) * (cur - prev);
                prev = cur;
            }
            sy += prev * prev;
        }
        s += sy / (g.h[1] * g.h[1]);
    }
    return s * w;
}

/// ||Delta u||^2 with the ghost-reflected boundary values Delta u = 2 u_1 / h^2
/// counted at half weight. Equals <biharmonic(u), u> exactly.
inline double lap_norm_sq(const Grid& g, std::span<const double> u, std::span<double> scratch) noexcept {
    laplacian(g, u, scratch);
    const double w = g.cell_volume();
    double s = dot(scratch, scratch);
    const int nx = g.n[0];
    const int ny = g.n[1];
    const double cx = 2.0 / (g.h[0] * g.h[0]);
    double edge = 0.0;
    for (int j = 0; j < ny; ++j) {
        const double l = cx * u[g.index(0, j)];
        const double r = cx * u[g.index(nx - 1, j)];
        edge += l * l + r * r;
    }
    if (g.dim == 2) {
        const double cy = 2.0 / (g.h[1] * g.h[1]);
        for (int i = 0; i < nx; ++i) {
            const double b = cy * u[g.index(i, 0)];
            const double t = cy * u[g.index(i, ny - 1)];
            edge += b * b + t * t;
        }
    }
    return (s + 0.5 * edge) * w;
}

}  // namespace stencil

inline GridFunction laplacian(const GridFunction& u) {
    require_pde_grid(u.grid, "laplacian");
    GridFunction out(u.grid);
    stencil::laplacian(u.grid, u.values, out.values);
    return out;
}

inline GridFunction biharmonic(const GridFunction& u) {
    require_pde_grid(u.grid, "biharmonic");
    GridFunction out(u.grid);
    std::vector<double> scratch(u.size());
    stencil::biharmonic(u.grid, u.values, out.values, scratch);
    return out;
}

inline double grad_norm_sq(const GridFunction& u) {
    require_pde_grid(u.grid, "grad_norm_sq");
    return stencil::grad_norm_sq(u.grid, u.values);
}

inline double lap_norm_sq(const GridFunction& u) {
    require_pde_grid(u.grid, "lap_norm_sq");
    std::vector<double> scratch(u.size());
    return stencil::lap_norm_sq(u.grid, u.values, scratch);
}

inline double l2_inner(const GridFunction& u, const GridFunction& v) {
    require_same_grid(u.grid, v.grid, "l2_inner");
    return stencil::dot(u.values, v.values) * u.grid.cell_volume();
}

inline double l2_norm_sq(const GridFunction& u) { return l2_inner(u, u); }

}  // namespace pklab
