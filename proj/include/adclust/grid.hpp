#pragma once

#include <boost/functional/hash.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>
#include <vector>

#include "dataset.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "parallel.hpp"

namespace adclust {

using CellKey = std::vector<int>;

struct CellKeyHash {
    std::size_t operator()(const CellKey& k) const { return boost::hash_range(k.begin(), k.end()); }
};

/// Equal-width partition of the bounding box. Occupied cells are stored in
/// lexicographic key order; empty cells are implicit.
struct Grid {
    std::vector<int> sections;
    std::vector<double> lo, hi;
    std::vector<bool> degenerate;
    std::vector<CellKey> cells;
    std::vector<std::vector<std::size_t>> members;
    std::vector<std::size_t> cell_of;
    std::unordered_map<CellKey, std::size_t, CellKeyHash> index;

    std::size_t dims() const { return sections.size(); }
    std::size_t occupied() const { return cells.size(); }

    /// Smallest section width over nondegenerate dimensions (infinity if none).
    double min_side() const {
        double s = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < dims(); ++i)
            if (!degenerate[i]) s = std::min(s, (hi[i] - lo[i]) / sections[i]);
        return s;
    }
};

inline int sections_for(double target_fraction, std::size_t n) {
    const double raw = std::floor(1.0 / target_fraction + 1e-9);
    return static_cast<int>(std::clamp(raw, 1.0, static_cast<double>(n)));
}

/// Section index along one dimension, with the top edge closed.
inline int section_of(double x, double lo, double hi, int m) {
    if (m <= 1 || !(hi > lo)) return 0;
    const int s = static_cast<int>(std::floor((x - lo) / (hi - lo) * m));
    return std::clamp(s, 0, m - 1);
}

inline Grid build_grid(const Dataset& ds, double target_fraction) {
    if (ds.size() == 0) throw validation_error("build_grid: empty dataset");
    if (!(target_fraction > 0.0 && target_fraction <= 1.0))
        throw validation_error("build_grid: target_fraction must lie in (0, 1]");
    const std::size_t n = ds.size(), q = ds.dims();
    Grid g;
    const int m = sections_for(target_fraction, n);
    for (std::size_t j = 0; j < q; ++j) {
        const auto col = ds.points.col(static_cast<Eigen::Index>(j));
        const double lo = col.minCoeff(), hi = col.maxCoeff();
        g.lo.push_back(lo);
        g.hi.push_back(hi);
        g.degenerate.push_back(!(hi > lo));
        g.sections.push_back(hi > lo ? m : 1);
    }
    std::map<CellKey, std::vector<std::size_t>> by_key;
    std::vector<CellKey> keys(n, CellKey(q));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < q; ++j)
            keys[i][j] = section_of(ds.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), g.lo[j],
                                    g.hi[j], g.sections[j]);
        by_key[keys[i]].push_back(i);
    }
    for (auto& [key, ids] : by_key) {
        g.index.emplace(key, g.cells.size());
        g.cells.push_back(key);
        g.members.push_back(std::move(ids));
    }
    g.cell_of.resize(n);
    for (std::size_t c = 0; c < g.cells.size(); ++c)
        for (std::size_t i : g.members[c]) g.cell_of[i] = c;
    return g;
}

/// All cell keys within Chebyshev distance 1 of `cell`, clipped to the grid, including `cell`.
inline std::vector<CellKey> neighbor_cells(const Grid& g, const CellKey& cell) {
    std::vector<CellKey> out{CellKey{}};
    for (std::size_t j = 0; j < g.dims(); ++j) {
        std::vector<CellKey> next;
        for (const auto& prefix : out)
            for (int d = -1; d <= 1; ++d) {
                const int s = cell[j] + d;
                if (s < 0 || s >= g.sections[j]) continue;
                auto k = prefix;
                k.push_back(s);
                next.push_back(std::move(k));
            }
        out = std::move(next);
    }
    return out;
}

inline bool cells_adjacent(const CellKey& a, const CellKey& b) {
    for (std::size_t j = 0; j < a.size(); ++j)
        if (std::abs(a[j] - b[j]) > 1) return false;
    return true;
}

/// For each occupied cell, the sorted ids of every point in its neighbor cells.
inline std::vector<std::vector<std::size_t>> neighborhood_members(const Grid& g) {
    const std::size_t nc = g.occupied();
    double offsets = 1.0;
    for (std::size_t j = 0; j < g.dims(); ++j) offsets *= 3.0;
    const bool enumerate = offsets <= static_cast<double>(nc);
    std::vector<std::vector<std::size_t>> out(nc);
    parallel_for_index(nc, [&](std::size_t c) {
        std::vector<std::size_t> ids;
        if (enumerate) {
            for (const auto& k : neighbor_cells(g, g.cells[c])) {
                auto it = g.index.find(k);
                if (it != g.index.end()) ids.insert(ids.end(), g.members[it->second].begin(), g.members[it->second].end());
            }
        } else {
            for (std::size_t o = 0; o < nc; ++o)
                if (cells_adjacent(g.cells[c], g.cells[o]))
                    ids.insert(ids.end(), g.members[o].begin(), g.members[o].end());
        }
        std::sort(ids.begin(), ids.end());
        out[c] = std::move(ids);
    });
    return out;
}

struct DensityProfile {
    std::vector<double> point_avg_dist;  // a(p); NaN when p has no neighbors
    std::vector<double> cell_avg_dist;   // d(c); NaN for isolated singleton cells
    std::vector<double> point_density;   // n(p)
    std::vector<double> cell_density;    // n(c)
};

struct Thresholds {
    double rt = 0.0;
    double dt = 0.0;
    double coef_rt = 20.0;
    double coef_dt = 0.95;
};

enum class LogBase { natural, two, ten };

inline double log_in_base(double x, LogBase b) {
    switch (b) {
        case LogBase::two: return std::log2(x);
        case LogBase::ten: return std::log10(x);
        default: return std::log(x);
    }
}

/// RT and the a(p), d(c) half of the profile. Means are reduced in index order.
inline double compute_rt(const Grid& g, const RowMatrix& x, double coef_rt, DensityProfile& profile) {
    if (!(coef_rt > 0.0)) throw validation_error("compute_rt: coef_rt must be positive");
    const std::size_t n = static_cast<std::size_t>(x.rows());
    const auto hood = neighborhood_members(g);
    profile.point_avg_dist.assign(n, std::numeric_limits<double>::quiet_NaN());
    parallel_for_index(n, [&](std::size_t p) {
        const auto& ids = hood[g.cell_of[p]];
        if (ids.size() < 2) return;
        double s = 0.0;
        for (std::size_t o : ids)
            if (o != p) s += row_distance(x, p, o);
        profile.point_avg_dist[p] = s / static_cast<double>(ids.size() - 1);
    });
    profile.cell_avg_dist.assign(g.occupied(), std::numeric_limits<double>::quiet_NaN());
    double total = 0.0;
    std::size_t defined = 0;
    for (std::size_t c = 0; c < g.occupied(); ++c) {
        double s = 0.0;
        std::size_t k = 0;
        for (std::size_t p : g.members[c])
            if (!std::isnan(profile.point_avg_dist[p])) {
                s += profile.point_avg_dist[p];
                ++k;
            }
        if (k == 0) continue;
        profile.cell_avg_dist[c] = s / static_cast<double>(k);
        total += profile.cell_avg_dist[c];
        ++defined;
    }
    if (defined == 0) throw degenerate_error("degenerate density geometry");
    if (total == 0.0) throw degenerate_error("degenerate density geometry: all neighbour distances are zero");
    return total / static_cast<double>(defined) / (static_cast<double>(g.dims()) * coef_rt);
}

inline double compute_rt(const Grid& g, const Dataset& ds, double coef_rt) {
    DensityProfile p;
    return compute_rt(g, RowMatrix(ds.points), coef_rt, p);
}

/// n(p) over neighbor cells (or all points when `exact`), including p itself; then n(c).
inline void compute_density(const Grid& g, const RowMatrix& x, double rt, DensityProfile& profile,
                            bool exact = false) {
    if (!(rt > 0.0)) throw validation_error("compute_density: rt must be positive");
    const std::size_t n = static_cast<std::size_t>(x.rows());
    profile.point_density.assign(n, 0.0);
    if (exact) {
        parallel_for_index(n, [&](std::size_t p) {
            std::size_t cnt = 0;
            for (std::size_t o = 0; o < n; ++o) cnt += (row_distance(x, p, o) <= rt);
            profile.point_density[p] = static_cast<double>(cnt);
        });
    } else {
        const auto hood = neighborhood_members(g);
        parallel_for_index(n, [&](std::size_t p) {
            std::size_t cnt = 0;
            for (std::size_t o : hood[g.cell_of[p]]) cnt += (row_distance(x, p, o) <= rt);
            profile.point_density[p] = static_cast<double>(cnt);
        });
    }
    profile.cell_density.assign(g.occupied(), 0.0);
    for (std::size_t c = 0; c < g.occupied(); ++c) {
        double s = 0.0;
        for (std::size_t p : g.members[c]) s += profile.point_density[p];
        profile.cell_density[c] = s / static_cast<double>(g.members[c].size());
    }
}

inline DensityProfile compute_density(const Grid& g, const Dataset& ds, double rt, bool exact = false) {
    DensityProfile p;
    compute_density(g, RowMatrix(ds.points), rt, p, exact);
    return p;
}

inline double compute_dt(const DensityProfile& profile, std::size_t n_points, double coef_dt,
                         LogBase base = LogBase::natural) {
    if (n_points < 3) throw degenerate_error("dataset too small for density threshold");
    if (!(coef_dt > 0.0)) throw validation_error("compute_dt: coef_dt must be positive");
    if (profile.cell_density.empty()) throw degenerate_error("compute_dt: empty density profile");
    double s = 0.0;
    for (double v : profile.cell_density) s += v;
    return s / static_cast<double>(profile.cell_density.size()) / log_in_base(static_cast<double>(n_points), base) *
           coef_dt;
}

}  // namespace adclust
