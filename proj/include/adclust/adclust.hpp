#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "dataset.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "kernel.hpp"
#include "merge.hpp"
#include "walls.hpp"

namespace adclust {

struct AdclustParams {
    double k = 10.0;
    double coef_rt = 20.0;
    double coef_dt = 0.95;
    double alpha = 0.6;
    WallKind wall_kind = WallKind::euclidean;
    double target_fraction = 0.075;
    std::uint64_t seed = 1;

    LogBase log_base = LogBase::natural;
    BandwidthRule bandwidth_rule = BandwidthRule::nearest_labeled_median;
    double bandwidth = 0.0;  // > 0 overrides the rule
    bool exact_density = false;
    bool recompute_residual_density = false;
    bool anchor_labels = true;
    double min_wall_fraction = 0.01;
    std::size_t eta_samples = 100000;

    /// Thresholds calibrated for the two-dimensional simulation layouts, where the
    /// defaults above leave RT below the typical nearest-neighbour spacing.
    static AdclustParams simulation_profile() {
        AdclustParams p;
        p.target_fraction = 0.05;
        p.coef_rt = 0.4;
        p.coef_dt = 4.0;
        return p;
    }

    void validate() const {
        if (!(k > 0.0)) throw validation_error("k must be positive");
        if (!(coef_rt > 0.0) || !(coef_dt > 0.0)) throw validation_error("coef_rt and coef_dt must be positive");
        if (!(alpha > 0.0 && alpha < 1.0)) throw validation_error("alpha must lie in (0, 1)");
        if (!(target_fraction > 0.0 && target_fraction <= 1.0))
            throw validation_error("target_fraction must lie in (0, 1]");
        if (!(min_wall_fraction >= 0.0 && min_wall_fraction <= 1.0))
            throw validation_error("min_wall_fraction must lie in [0, 1]");
        if (wall_kind == WallKind::manhattan && eta_samples < 1000)
            throw validation_error("eta_samples must be >= 1000");
    }
};

enum class ClassTag { normal, abnormal, unlabeled };

inline std::string_view to_string(ClassTag t) {
    switch (t) {
        case ClassTag::normal: return "normal";
        case ClassTag::abnormal: return "abnormal";
        default: return "unlabeled";
    }
}

struct SubCluster {
    std::vector<std::size_t> members;
    ClassTag tag = ClassTag::unlabeled;
    int pass = 1;
};

enum class Region { normal_core, abnormal_region, mixed_overlap, unknown_cluster, outlier };

inline constexpr Region kRegions[] = {Region::normal_core, Region::abnormal_region, Region::mixed_overlap,
                                      Region::unknown_cluster, Region::outlier};

inline std::string_view to_string(Region r) {
    switch (r) {
        case Region::normal_core: return "normal_core";
        case Region::abnormal_region: return "abnormal_region";
        case Region::mixed_overlap: return "mixed_overlap";
        case Region::unknown_cluster: return "unknown_cluster";
        default: return "outlier";
    }
}

struct Pass1Result {
    std::vector<SubCluster> subs;  // normal first, then abnormal
    std::vector<std::size_t> remaining;
    std::vector<std::size_t> conflicted;
    std::size_t dropped_unanchored = 0;
};

/// Sign-separated labeled merge. The normal merge sees points with w >= 0 and the
/// abnormal merge points with w <= 0; a point claimed by both is conflicted.
/// With `anchor`, a sub-cluster without a labeled point of its own class is dropped.
inline Pass1Result pass1_labeled(const RowMatrix& x, const std::vector<Label>& labels, const Weights& wts,
                                 const Thresholds& thr, bool anchor = true) {
    const std::size_t n = labels.size();
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < n; ++i) {
        if (wts.w[i] >= 0.0) pos.push_back(i);
        if (wts.w[i] <= 0.0) neg.push_back(i);
    }
    std::vector<double> neg_rho(n);
    for (std::size_t i = 0; i < n; ++i) neg_rho[i] = -wts.rho[i];
    const MergeResult mn = merge(x, pos, wts.rho, thr.dt, thr.rt);
    const MergeResult ma = merge(x, neg, neg_rho, thr.dt, thr.rt);

    std::vector<unsigned char> claim(n, 0);
    for (const auto& c : mn.clusters)
        for (std::size_t i : c) claim[i] |= 1;
    for (const auto& c : ma.clusters)
        for (std::size_t i : c) claim[i] |= 2;

    Pass1Result out;
    for (std::size_t i = 0; i < n; ++i)
        if (claim[i] == 3) out.conflicted.push_back(i);

    std::vector<unsigned char> kept(n, 0);
    auto take = [&](const std::vector<std::vector<std::size_t>>& clusters, ClassTag tag, Label own) {
        for (const auto& c : clusters) {
            SubCluster s;
            s.tag = tag;
            bool anchored = false;
            for (std::size_t i : c) {
                if (claim[i] == 3) continue;
                s.members.push_back(i);
                anchored = anchored || labels[i] == own;
            }
            if (s.members.empty()) continue;
            if (anchor && !anchored) {
                ++out.dropped_unanchored;
                continue;
            }
            for (std::size_t i : s.members) kept[i] = 1;
            out.subs.push_back(std::move(s));
        }
    };
    take(mn.clusters, ClassTag::normal, Label::normal);
    take(ma.clusters, ClassTag::abnormal, Label::abnormal);
    for (std::size_t i = 0; i < n; ++i)
        if (!kept[i]) out.remaining.push_back(i);
    return out;
}

struct Pass2Result {
    std::vector<SubCluster> subs;
    std::vector<std::size_t> outlier_candidates;
};

inline Pass2Result pass2_residual(const RowMatrix& x, const std::vector<std::size_t>& remaining,
                                  const std::vector<double>& density, const Thresholds& thr) {
    const MergeResult m = merge(x, remaining, density, thr.dt, thr.rt);
    Pass2Result out;
    for (const auto& c : m.clusters) out.subs.push_back({c, ClassTag::unlabeled, 2});
    out.outlier_candidates = m.unassigned;
    return out;
}

inline MergeResult pass3_global(const RowMatrix& x, const std::vector<double>& density, const Thresholds& thr) {
    std::vector<std::size_t> all(static_cast<std::size_t>(x.rows()));
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return merge(x, std::move(all), density, thr.dt, thr.rt);
}

struct ClusterComposition {
    std::vector<std::vector<std::size_t>> global_clusters;
    std::vector<SubCluster> subs;  // pass-1 subs followed by pass-2 subs
    std::vector<int> sub_to_global;
    std::vector<int> global_of;  // per point, -1 outside every pass-3 cluster
    std::vector<int> sub_of;     // per point, -1 outside every sub-cluster
    std::vector<Region> region;

    std::size_t count(Region r) const { return static_cast<std::size_t>(std::count(region.begin(), region.end(), r)); }
};

/// Each sub-cluster joins the pass-3 cluster holding most of its members (ties: larger
/// cluster, then lower id). Labeled sub members in their matched cluster are cores;
/// other points of a cluster that received a labeled sub are mixed; clusters with no
/// labeled sub are unknown.
inline ClusterComposition match(std::size_t n, std::vector<SubCluster> subs,
                                std::vector<std::vector<std::size_t>> global_clusters) {
    ClusterComposition c;
    c.global_clusters = std::move(global_clusters);
    c.subs = std::move(subs);
    c.global_of.assign(n, -1);
    c.sub_of.assign(n, -1);
    for (std::size_t g = 0; g < c.global_clusters.size(); ++g)
        for (std::size_t i : c.global_clusters[g]) c.global_of[i] = static_cast<int>(g);
    for (std::size_t s = 0; s < c.subs.size(); ++s)
        for (std::size_t i : c.subs[s].members) c.sub_of[i] = static_cast<int>(s);

    std::vector<bool> has_labeled(c.global_clusters.size(), false);
    for (const auto& s : c.subs) {
        std::map<int, std::size_t> votes;
        for (std::size_t i : s.members)
            if (c.global_of[i] >= 0) ++votes[c.global_of[i]];
        int best = -1;
        std::size_t best_votes = 0;
        for (const auto& [g, v] : votes) {
            const bool better = v > best_votes ||
                                (v == best_votes && c.global_clusters[static_cast<std::size_t>(g)].size() >
                                                        c.global_clusters[static_cast<std::size_t>(best)].size());
            if (better) {
                best = g;
                best_votes = v;
            }
        }
        c.sub_to_global.push_back(best);
        if (best >= 0 && s.tag != ClassTag::unlabeled) has_labeled[static_cast<std::size_t>(best)] = true;
    }

    c.region.assign(n, Region::outlier);
    for (std::size_t i = 0; i < n; ++i) {
        const int g = c.global_of[i];
        if (g < 0) continue;
        const int s = c.sub_of[i];
        if (s >= 0 && c.subs[static_cast<std::size_t>(s)].tag != ClassTag::unlabeled &&
            c.sub_to_global[static_cast<std::size_t>(s)] == g) {
            c.region[i] = c.subs[static_cast<std::size_t>(s)].tag == ClassTag::normal ? Region::normal_core
                                                                                     : Region::abnormal_region;
        } else {
            c.region[i] = has_labeled[static_cast<std::size_t>(g)] ? Region::mixed_overlap : Region::unknown_cluster;
        }
    }
    return c;
}

struct RegionMetrics {
    std::size_t count = 0;
    std::size_t truth_known = 0;
    std::size_t truth_abnormal = 0;
    double abnormal_fraction() const {
        return truth_known ? static_cast<double>(truth_abnormal) / static_cast<double>(truth_known)
                           : std::numeric_limits<double>::quiet_NaN();
    }
};

struct ClusteringMetrics {
    std::map<Region, RegionMetrics> regions;
    std::size_t inside_walls = 0;
    std::size_t inside_walls_truth_known = 0;
    std::size_t inside_walls_truth_normal = 0;
    std::size_t protected_count = 0;
    std::size_t protected_truth_known = 0;
    std::size_t protected_truth_normal = 0;

    static double ratio(std::size_t a, std::size_t b) {
        return b ? static_cast<double>(a) / static_cast<double>(b) : std::numeric_limits<double>::quiet_NaN();
    }
    double wall_purity() const { return ratio(inside_walls_truth_normal, inside_walls_truth_known); }
    double protected_purity() const { return ratio(protected_truth_normal, protected_truth_known); }
};

struct ClusteringResult {
    std::vector<int> sections;
    Thresholds thresholds;
    DensityProfile profile;
    double bandwidth = 0.0;
    Weights weights;
    std::size_t pass1_subs = 0;
    std::size_t dropped_unanchored = 0;
    std::vector<std::size_t> conflicted;
    std::vector<std::size_t> outlier_candidates;
    ClusterComposition composition;
    std::vector<Wall> walls;
    std::vector<int> wall_source;     // sub-cluster index of each wall
    std::vector<unsigned char> in_wall;
    std::vector<unsigned char> protected_set;
    std::size_t min_wall_members = 0;
};

inline std::size_t min_wall_members(std::size_t n, std::size_t q, double fraction) {
    return std::max<std::size_t>(q + 1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
}

inline ClusteringMetrics compute_metrics(const Dataset& ds, const ClusteringResult& r) {
    ClusteringMetrics m;
    for (Region g : kRegions) m.regions[g];
    const bool truth = ds.has_truth();
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const Truth t = truth ? ds.truth[i] : Truth::none;
        const bool known = t != Truth::none;
        auto& rm = m.regions[r.composition.region[i]];
        ++rm.count;
        rm.truth_known += known;
        rm.truth_abnormal += (t == Truth::abnormal);
        if (r.in_wall[i]) {
            ++m.inside_walls;
            m.inside_walls_truth_known += known;
            m.inside_walls_truth_normal += (t == Truth::normal);
        }
        if (r.protected_set[i]) {
            ++m.protected_count;
            m.protected_truth_known += known;
            m.protected_truth_normal += (t == Truth::normal);
        }
    }
    return m;
}

namespace detail {
template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const validation_error& e) {
        throw validation_error(stage_message(stage, e.what()));
    } catch (const degenerate_error& e) {
        throw degenerate_error(stage_message(stage, e.what()));
    } catch (const std::domain_error& e) {
        throw validation_error(stage_message(stage, e.what()));
    }
}
}  // namespace detail

/// Grid, thresholds, kernel weights, the three merge passes, match, and walls.
inline ClusteringResult run_adclust(const Dataset& ds, const AdclustParams& params) {
    detail::staged("params", [&] { params.validate(); });
    detail::staged("dataset", [&] { ds.validate(); });
    ClusteringResult r;
    const std::size_t n = ds.size(), q = ds.dims();
    const RowMatrix x = ds.points;

    const KernelClassifier kc =
        detail::staged("kernel", [&] { return fit_kernel(ds, params.bandwidth_rule, params.bandwidth); });
    r.bandwidth = kc.bandwidth;

    const Grid grid = detail::staged("grid", [&] { return build_grid(ds, params.target_fraction); });
    r.sections = grid.sections;
    r.thresholds.coef_rt = params.coef_rt;
    r.thresholds.coef_dt = params.coef_dt;
    detail::staged("thresholds", [&] {
        r.thresholds.rt = compute_rt(grid, x, params.coef_rt, r.profile);
        compute_density(grid, x, r.thresholds.rt, r.profile, params.exact_density);
        r.thresholds.dt = compute_dt(r.profile, n, params.coef_dt, params.log_base);
    });
    r.weights = compute_weights(ds, kc, r.profile.point_density, params.k);

    Pass1Result p1 = pass1_labeled(x, ds.labels, r.weights, r.thresholds, params.anchor_labels);
    r.pass1_subs = p1.subs.size();
    r.dropped_unanchored = p1.dropped_unanchored;
    r.conflicted = p1.conflicted;

    std::vector<double> residual_density = r.profile.point_density;
    if (params.recompute_residual_density && !p1.remaining.empty()) {
        RadiusIndex idx(x, p1.remaining, r.thresholds.rt);
        for (std::size_t i : p1.remaining) {
            std::size_t cnt = 0;
            idx.for_each_within(i, [&](std::size_t) { ++cnt; });
            residual_density[i] = static_cast<double>(cnt);
        }
    }
    Pass2Result p2 = pass2_residual(x, p1.remaining, residual_density, r.thresholds);
    r.outlier_candidates = p2.outlier_candidates;
    MergeResult p3 = pass3_global(x, r.profile.point_density, r.thresholds);

    std::vector<SubCluster> subs = std::move(p1.subs);
    for (auto& s : p2.subs) subs.push_back(std::move(s));
    r.composition = match(n, std::move(subs), std::move(p3.clusters));

    r.min_wall_members = min_wall_members(n, q, params.min_wall_fraction);
    r.in_wall.assign(n, 0);
    r.protected_set.assign(n, 0);
    detail::staged("walls", [&] {
        for (std::size_t s = 0; s < r.pass1_subs; ++s) {
            const auto& sub = r.composition.subs[s];
            if (sub.tag != ClassTag::normal || sub.members.size() < r.min_wall_members) continue;
            Eigen::MatrixXd pts(static_cast<Eigen::Index>(sub.members.size()), static_cast<Eigen::Index>(q));
            for (std::size_t i = 0; i < sub.members.size(); ++i)
                pts.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(sub.members[i]));
            const RegionStats st = fit_region_stats(pts);
            r.walls.push_back(fit_wall(params.wall_kind, st, params.alpha, params.eta_samples,
                                       splitmix64(params.seed ^ (0x5bd1e995ULL + s))));
            r.wall_source.push_back(static_cast<int>(s));
        }
    });
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = x.data() + i * q;
        for (const auto& w : r.walls)
            if (w.contains(row)) {
                r.in_wall[i] = 1;
                break;
            }
        r.protected_set[i] = r.in_wall[i] && r.composition.region[i] == Region::normal_core;
    }
    return r;
}

}  // namespace adclust
