#pragma once

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "../adclust.hpp"
#include "../game.hpp"
#include "csv.hpp"

namespace adclust::io {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "1.0.0";

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline json to_json(const Eigen::MatrixXd& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Eigen::VectorXd(m.row(i).transpose())));
    return a;
}

inline std::string_view to_string(LogBase b) {
    return b == LogBase::two ? "2" : b == LogBase::ten ? "10" : "e";
}

inline std::string_view to_string(BandwidthRule r) {
    return r == BandwidthRule::median_pairwise ? "median_pairwise" : "nearest_labeled_median";
}

inline json params_json(const AdclustParams& p) {
    return json{{"k", p.k},
                {"coef_rt", p.coef_rt},
                {"coef_dt", p.coef_dt},
                {"alpha", p.alpha},
                {"wall_kind", to_string(p.wall_kind)},
                {"target_fraction", p.target_fraction},
                {"seed", p.seed},
                {"log_base", to_string(p.log_base)},
                {"bandwidth_rule", to_string(p.bandwidth_rule)},
                {"bandwidth_override", p.bandwidth},
                {"exact_density", p.exact_density},
                {"recompute_residual_density", p.recompute_residual_density},
                {"anchor_labels", p.anchor_labels},
                {"min_wall_fraction", p.min_wall_fraction},
                {"eta_samples", p.eta_samples}};
}

inline json wall_json(const Wall& w) {
    return json{{"kind", to_string(w.kind)},   {"level", w.level},
                {"radius", w.radius},          {"mean", to_json(w.stats.mean)},
                {"covariance", to_json(w.stats.cov)}, {"sd", to_json(w.stats.sd)},
                {"member_count", w.stats.count}, {"ridged", w.stats.ridged},
                {"eta_samples", w.eta_samples}, {"eta_seed", w.eta_seed}};
}

inline json metrics_json(const ClusteringMetrics& m) {
    json regions = json::object();
    for (const auto& [r, rm] : m.regions)
        regions[std::string(to_string(r))] = {{"count", rm.count}, {"abnormal_fraction", number_or_null(rm.abnormal_fraction())}};
    return json{{"regions", regions},
                {"inside_walls", m.inside_walls},
                {"wall_purity", number_or_null(m.wall_purity())},
                {"protected", m.protected_count},
                {"protected_purity", number_or_null(m.protected_purity())}};
}

inline json cluster_report(const Dataset& ds, const AdclustParams& p, const ClusteringResult& r,
                           const std::string& input) {
    const auto& c = r.composition;
    json subs = json::array();
    std::size_t pass2 = 0;
    for (std::size_t s = 0; s < c.subs.size(); ++s) {
        pass2 += c.subs[s].pass == 2;
        subs.push_back({{"id", s},
                        {"pass", c.subs[s].pass},
                        {"tag", to_string(c.subs[s].tag)},
                        {"size", c.subs[s].members.size()},
                        {"global_cluster", c.sub_to_global[s]}});
    }
    json global_sizes = json::array();
    for (const auto& g : c.global_clusters) global_sizes.push_back(g.size());
    json walls = json::array();
    for (std::size_t w = 0; w < r.walls.size(); ++w) {
        json j = wall_json(r.walls[w]);
        j["source_subcluster"] = r.wall_source[w];
        walls.push_back(std::move(j));
    }
    std::size_t underflow = 0;
    for (auto u : r.weights.underflow) underflow += u;

    json points{{"region", json::array()}, {"global_cluster", json::array()}, {"subcluster", json::array()},
                {"in_wall", json::array()}, {"protected", json::array()}, {"label", json::array()},
                {"score", json::array()}};
    if (ds.has_truth()) points["truth"] = json::array();
    for (std::size_t i = 0; i < ds.size(); ++i) {
        points["region"].push_back(to_string(c.region[i]));
        points["global_cluster"].push_back(c.global_of[i]);
        points["subcluster"].push_back(c.sub_of[i]);
        points["in_wall"].push_back(static_cast<int>(r.in_wall[i]));
        points["protected"].push_back(static_cast<int>(r.protected_set[i]));
        points["label"].push_back(to_string(ds.labels[i]));
        points["score"].push_back(r.weights.b[i]);
        if (ds.has_truth()) points["truth"].push_back(to_string(ds.truth[i]));
    }
    return json{{"schema_version", kSchemaVersion},
                {"command", "cluster"},
                {"run", {{"version", kVersion}, {"input", input}, {"seed", p.seed}, {"n_points", ds.size()},
                         {"dims", ds.dims()}, {"feature_names", ds.feature_names},
                         {"labeled_normal", ds.count(Label::normal)}, {"labeled_abnormal", ds.count(Label::abnormal)}}},
                {"params", params_json(p)},
                {"thresholds", {{"rt", r.thresholds.rt}, {"dt", r.thresholds.dt}, {"coef_rt", r.thresholds.coef_rt},
                                {"coef_dt", r.thresholds.coef_dt}, {"sections", r.sections}}},
                {"kernel", {{"bandwidth", r.bandwidth}, {"underflow_points", underflow}}},
                {"passes", {{"pass1_subclusters", r.pass1_subs}, {"pass1_dropped_unanchored", r.dropped_unanchored},
                            {"pass1_conflicted", r.conflicted.size()}, {"pass2_subclusters", pass2},
                            {"pass2_outlier_candidates", r.outlier_candidates.size()},
                            {"global_cluster_sizes", global_sizes}}},
                {"subclusters", subs},
                {"min_wall_members", r.min_wall_members},
                {"walls", walls},
                {"metrics", metrics_json(compute_metrics(ds, r))},
                {"points", points}};
}

inline json game_config_json(const game::GameConfig& g) {
    json adv = json::array();
    for (const auto& a : g.adversaries)
        adv.push_back({{"mean", to_json(a.population.mean)},
                       {"covariance", to_json(a.population.cov)},
                       {"family", game::to_string(a.utility.family)},
                       {"a", a.utility.a},
                       {"k_max", a.utility.k_max}});
    return json{{"preset", g.name},
                {"wall_kind", to_string(g.wall_kind)},
                {"c", g.c},
                {"normal", {{"mean", to_json(g.normal.mean)}, {"covariance", to_json(g.normal.cov)}}},
                {"adversaries", adv},
                {"alpha_step", g.alpha_step},
                {"t_step", g.t_step},
                {"joint_t_step", g.joint_t_step},
                {"sample_size", g.sample_size},
                {"eta_samples", g.eta_samples},
                {"seed", g.seed},
                {"grid_budget", g.grid_budget}};
}

inline json equilibrium_json(const game::Equilibrium& e, const game::DirectEval& direct) {
    return json{{"orientation", game::to_string(e.orientation)},
                {"alpha", e.alpha},
                {"h", e.h},
                {"t", e.t},
                {"defender_utility", e.defender_utility},
                {"attacker_utilities", e.attacker_utilities},
                {"pass_rates", e.pass_rates},
                {"normal_error", e.normal_error},
                {"direct", {{"defender_utility", direct.defender_utility},
                            {"attacker_utilities", direct.attacker_utilities}}}};
}

/// One row per (adversary, h, t) cell. The defender column holds the other
/// adversaries at their equilibrium t.
inline void write_landscape(std::ostream& out, const game::ErrorTables& tb, const game::Equilibrium& e) {
    out << "adversary,alpha,h,t,pass_rate,attacker_utility,defender_utility\n";
    std::vector<std::size_t> t = e.t_index;
    for (std::size_t i = 0; i < tb.m(); ++i)
        for (std::size_t h = 0; h < tb.nh(); ++h)
            for (std::size_t k = 0; k < tb.nt(); ++k) {
                t[i] = k;
                out << i << ',' << format_double(tb.alphas[h]) << ',' << format_double(tb.radii[h]) << ','
                    << format_double(tb.ts[k]) << ','
                    << format_double(static_cast<double>(tb.pass[i][tb.at(h, k)]) /
                                     static_cast<double>(tb.n_adversary[i]))
                    << ',' << format_double(tb.attacker(i, h, k)) << ',' << format_double(tb.defender(h, t)) << '\n';
                t[i] = e.t_index[i];
            }
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("cannot write '" + path + "'");
    out << text;
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace adclust::io
