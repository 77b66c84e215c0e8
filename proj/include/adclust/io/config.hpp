#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../adclust.hpp"
#include "../error.hpp"
#include "../game.hpp"
#include "csv.hpp"

namespace adclust::io {

using boost::property_tree::ptree;

struct SweepConfig {
    std::vector<double> k_values{1, 5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
    std::vector<double> alpha_values{0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95};
    std::vector<double> wall_k_values{1, 30, 50};
    std::size_t runs = 1;
    std::optional<double> label_fraction;  // re-sample labels from truth on each run
};

/// INI text with [adclust], [ingest], [game] and [sweep] sections.
struct Config {
    ptree tree;

    static Config parse(std::istream& in) {
        Config c;
        try {
            boost::property_tree::ini_parser::read_ini(in, c.tree);
        } catch (const boost::property_tree::ini_parser_error& e) {
            throw validation_error(std::string("config: ") + e.what());
        }
        c.check_keys();
        return c;
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw validation_error("cannot open config file '" + path + "'");
        return parse(in);
    }

    const ptree* section(const std::string& name) const {
        auto it = tree.find(name);
        return it == tree.not_found() ? nullptr : &it->second;
    }

    template <class T>
    std::optional<T> get(const std::string& sec, const std::string& key) const {
        const ptree* s = section(sec);
        if (!s) return std::nullopt;
        auto v = s->get_optional<std::string>(key);
        if (!v) return std::nullopt;
        if constexpr (std::is_same_v<T, std::string>) {
            return *v;
        } else if constexpr (std::is_same_v<T, bool>) {
            if (*v == "true" || *v == "1" || *v == "yes") return true;
            if (*v == "false" || *v == "0" || *v == "no") return false;
            throw validation_error("config: [" + sec + "] " + key + " must be a boolean");
        } else if constexpr (std::is_floating_point_v<T>) {
            const auto d = parse_double(*v);
            if (!d) throw validation_error("config: [" + sec + "] " + key + " must be a number");
            return static_cast<T>(*d);
        } else {
            const auto d = parse_double(*v);
            if (!d || *d < 0 || *d != std::floor(*d))
                throw validation_error("config: [" + sec + "] " + key + " must be a nonnegative integer");
            return static_cast<T>(*d);
        }
    }

    std::optional<std::vector<double>> list(const std::string& sec, const std::string& key) const {
        auto s = get<std::string>(sec, key);
        if (!s) return std::nullopt;
        std::vector<double> out;
        std::stringstream ss(*s);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto d = parse_double(item);
            if (!d) throw validation_error("config: [" + sec + "] " + key + " has a non-numeric entry");
            out.push_back(*d);
        }
        return out;
    }

private:
    void check_keys() const {
        static const std::set<std::string> adclust{
            "profile",        "k",          "coef_rt",   "coef_dt",       "alpha",
            "wall",           "target_fraction", "seed", "log_base",      "bandwidth_rule",
            "bandwidth",      "exact_density", "recompute_residual_density", "anchor_labels",
            "min_wall_fraction", "eta_samples"};
        static const std::set<std::string> ingest{"label_column", "truth_column", "label_fraction"};
        static const std::set<std::string> sweep{"k_values", "alpha_values", "wall_k_values", "runs", "label_fraction"};
        static const std::set<std::string> game_fixed{"preset",      "wall",        "c",          "alpha_step",
                                                      "t_step",      "joint_t_step", "sample_size", "eta_samples",
                                                      "seed",        "grid_budget", "k_max",      "normal_mean",
                                                      "normal_cov"};
        for (const auto& [name, sec] : tree) {
            if (sec.empty() && !sec.data().empty())
                throw validation_error("config: key '" + name + "' must sit inside a section");
            for (const auto& [key, value] : sec) {
                bool ok = false;
                if (name == "adclust") ok = adclust.count(key);
                else if (name == "ingest") ok = ingest.count(key);
                else if (name == "sweep") ok = sweep.count(key);
                else if (name == "game")
                    ok = game_fixed.count(key) ||
                         (key.rfind("adversary", 0) == 0 && key.find('_') != std::string::npos);
                else throw validation_error("config: unknown section [" + name + "]");
                if (!ok) throw validation_error("config: unknown key '" + key + "' in [" + name + "]");
            }
        }
    }
};

inline BandwidthRule parse_bandwidth_rule(const std::string& s) {
    if (s == "nearest_labeled_median") return BandwidthRule::nearest_labeled_median;
    if (s == "median_pairwise") return BandwidthRule::median_pairwise;
    throw validation_error("unknown bandwidth rule '" + s + "'");
}

inline LogBase parse_log_base(const std::string& s) {
    if (s == "e" || s == "natural") return LogBase::natural;
    if (s == "2") return LogBase::two;
    if (s == "10") return LogBase::ten;
    throw validation_error("unknown log base '" + s + "'");
}

inline AdclustParams profile_params(const std::string& name) {
    if (name == "paper") return AdclustParams{};
    if (name == "simulation") return AdclustParams::simulation_profile();
    throw validation_error("unknown profile '" + name + "'");
}

/// Profile first, then individual keys on top of it.
inline AdclustParams adclust_params(const Config& c, AdclustParams p) {
    if (auto v = c.get<std::string>("adclust", "profile")) p = profile_params(*v);
    if (auto v = c.get<double>("adclust", "k")) p.k = *v;
    if (auto v = c.get<double>("adclust", "coef_rt")) p.coef_rt = *v;
    if (auto v = c.get<double>("adclust", "coef_dt")) p.coef_dt = *v;
    if (auto v = c.get<double>("adclust", "alpha")) p.alpha = *v;
    if (auto v = c.get<std::string>("adclust", "wall")) p.wall_kind = parse_wall_kind(*v);
    if (auto v = c.get<double>("adclust", "target_fraction")) p.target_fraction = *v;
    if (auto v = c.get<std::uint64_t>("adclust", "seed")) p.seed = *v;
    if (auto v = c.get<std::string>("adclust", "log_base")) p.log_base = parse_log_base(*v);
    if (auto v = c.get<std::string>("adclust", "bandwidth_rule")) p.bandwidth_rule = parse_bandwidth_rule(*v);
    if (auto v = c.get<double>("adclust", "bandwidth")) p.bandwidth = *v;
    if (auto v = c.get<bool>("adclust", "exact_density")) p.exact_density = *v;
    if (auto v = c.get<bool>("adclust", "recompute_residual_density")) p.recompute_residual_density = *v;
    if (auto v = c.get<bool>("adclust", "anchor_labels")) p.anchor_labels = *v;
    if (auto v = c.get<double>("adclust", "min_wall_fraction")) p.min_wall_fraction = *v;
    if (auto v = c.get<std::size_t>("adclust", "eta_samples")) p.eta_samples = *v;
    return p;
}

inline IngestOptions ingest_options(const Config& c, IngestOptions o) {
    if (auto v = c.get<std::string>("ingest", "label_column")) o.label_column = *v;
    if (auto v = c.get<std::string>("ingest", "truth_column")) o.truth_column = *v;
    if (auto v = c.get<double>("ingest", "label_fraction")) o.label_fraction = *v;
    return o;
}

inline SweepConfig sweep_config(const Config& c, SweepConfig s) {
    if (auto v = c.list("sweep", "k_values")) s.k_values = *v;
    if (auto v = c.list("sweep", "alpha_values")) s.alpha_values = *v;
    if (auto v = c.list("sweep", "wall_k_values")) s.wall_k_values = *v;
    if (auto v = c.get<std::size_t>("sweep", "runs")) s.runs = *v;
    if (auto v = c.get<double>("sweep", "label_fraction")) s.label_fraction = *v;
    if (s.runs < 1) throw validation_error("sweep: runs must be >= 1");
    return s;
}

inline Eigen::VectorXd parse_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Row-major square matrix from a flat list.
inline Eigen::MatrixXd parse_square(const std::vector<double>& v, const std::string& what) {
    const auto q = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
    if (q * q != static_cast<Eigen::Index>(v.size())) throw validation_error("config: " + what + " must be square");
    Eigen::MatrixXd m(q, q);
    for (Eigen::Index i = 0; i < q; ++i)
        for (Eigen::Index j = 0; j < q; ++j) m(i, j) = v[static_cast<std::size_t>(i * q + j)];
    return m;
}

/// Preset (if named) with [game] overrides; adversaryN_{mean,cov,family,a,k_max} edit or append adversary N (1-based).
inline game::GameConfig game_config(const Config& c, game::GameConfig g) {
    if (auto v = c.get<std::string>("game", "preset")) g = game::game_preset(*v, g.wall_kind);
    if (auto v = c.get<std::string>("game", "wall")) g.wall_kind = parse_wall_kind(*v);
    if (auto v = c.get<double>("game", "c")) g.c = *v;
    if (auto v = c.get<double>("game", "alpha_step")) g.alpha_step = *v;
    if (auto v = c.get<double>("game", "t_step")) g.t_step = *v;
    if (auto v = c.get<double>("game", "joint_t_step")) g.joint_t_step = *v;
    if (auto v = c.get<std::size_t>("game", "sample_size")) g.sample_size = *v;
    if (auto v = c.get<std::size_t>("game", "eta_samples")) g.eta_samples = *v;
    if (auto v = c.get<std::uint64_t>("game", "seed")) g.seed = *v;
    if (auto v = c.get<double>("game", "grid_budget")) g.grid_budget = *v;
    if (auto v = c.list("game", "normal_mean")) g.normal.mean = parse_vector(*v);
    if (auto v = c.list("game", "normal_cov")) g.normal.cov = parse_square(*v, "normal_cov");
    if (auto v = c.get<double>("game", "k_max"))
        for (auto& a : g.adversaries) a.utility.k_max = *v;
    for (std::size_t n = 1; n <= 16; ++n) {
        const std::string p = "adversary" + std::to_string(n) + "_";
        auto mean = c.list("game", p + "mean");
        auto cov = c.list("game", p + "cov");
        auto fam = c.get<std::string>("game", p + "family");
        auto a = c.get<double>("game", p + "a");
        auto k = c.get<double>("game", p + "k_max");
        if (!mean && !cov && !fam && !a && !k) continue;
        if (g.adversaries.size() < n) {
            if (g.adversaries.size() != n - 1 || !mean || !cov || !fam || !a)
                throw validation_error("config: " + p + "* must fully define a new adversary");
            g.adversaries.push_back({});
            g.adversaries.back().utility.k_max = 7.0;
        }
        auto& adv = g.adversaries[n - 1];
        if (mean) adv.population.mean = parse_vector(*mean);
        if (cov) adv.population.cov = parse_square(*cov, p + "cov");
        if (fam) adv.utility.family = game::parse_family(*fam);
        if (a) adv.utility.a = *a;
        if (k) adv.utility.k_max = *k;
    }
    return g;
}

}  // namespace adclust::io
