#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "walls.hpp"

namespace adclust::game {

enum class Family { log, linear, exponential };

inline std::string_view to_string(Family f) {
    switch (f) {
        case Family::log: return "log";
        case Family::linear: return "linear";
        default: return "exponential";
    }
}

inline Family parse_family(std::string_view s) {
    if (s == "log") return Family::log;
    if (s == "linear") return Family::linear;
    if (s == "exponential" || s == "exp") return Family::exponential;
    throw validation_error("unknown utility family '" + std::string(s) + "'");
}

struct UtilitySpec {
    Family family = Family::log;
    double a = 1.0;
    double k_max = 7.0;
};

/// Per-object payoff of an unblocked object moved by `cost`.
inline double payoff(const UtilitySpec& u, double cost) {
    double v = 0.0;
    switch (u.family) {
        case Family::log: v = u.k_max - u.a * std::log(cost + 1.0); break;
        case Family::linear: v = u.k_max - u.a * cost; break;
        case Family::exponential: v = u.k_max - std::exp(u.a * cost); break;
    }
    return std::max(v, 0.0);
}

struct Population {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

struct Adversary {
    Population population;
    UtilitySpec utility;
};

enum class Orientation { leader, follower };

inline std::string_view to_string(Orientation o) { return o == Orientation::leader ? "leader" : "follower"; }

inline Orientation parse_orientation(std::string_view s) {
    if (s == "leader") return Orientation::leader;
    if (s == "follower") return Orientation::follower;
    throw validation_error("unknown orientation '" + std::string(s) + "'");
}

struct GameConfig {
    std::string name;
    WallKind wall_kind = WallKind::euclidean;
    double c = 20.0;
    Population normal;
    std::vector<Adversary> adversaries;
    double alpha_step = 0.01;
    double t_step = 0.01;
    double joint_t_step = 0.05;  // follower enumeration step when there are 3 or more adversaries
    std::size_t sample_size = 10000;
    std::size_t eta_samples = 100000;
    std::uint64_t seed = 1;
    double grid_budget = 2e8;  // max (joint T) x h evaluations in the follower search

    void validate() const {
        if (!(c > 0.0)) throw validation_error("game: c must be positive");
        if (adversaries.empty()) throw validation_error("game: need at least one adversary");
        const auto q = normal.mean.size();
        if (q < 1 || normal.cov.rows() != q || normal.cov.cols() != q)
            throw validation_error("game: normal population dimension mismatch");
        for (const auto& a : adversaries) {
            if (a.population.mean.size() != q || a.population.cov.rows() != q || a.population.cov.cols() != q)
                throw validation_error("game: adversary dimension mismatch");
            if (!(a.utility.a > 0.0) || !(a.utility.k_max > 0.0))
                throw validation_error("game: utility a and k_max must be positive");
        }
        auto divides = [](double step) {
            if (!(step > 0.0 && step <= 1.0)) return false;
            const double r = 1.0 / step;
            return std::abs(r - std::round(r)) < 1e-9;
        };
        if (!divides(alpha_step) || !divides(t_step) || !divides(joint_t_step))
            throw validation_error("game: grid steps must divide [0, 1] evenly");
        const double ratio = joint_t_step / t_step;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1.0 - 1e-9)
            throw validation_error("game: joint_t_step must be a multiple of t_step");
        if (sample_size < 1) throw validation_error("game: sample_size must be positive");
    }
};

/// Defender levels alpha = step, 2 step, ... strictly inside (0, 1).
inline std::vector<double> alpha_grid(double step) {
    const auto n = static_cast<int>(std::llround(1.0 / step));
    std::vector<double> g;
    for (int i = 1; i < n; ++i) g.push_back(i * step);
    return g;
}

/// Attack levels t = 0, step, ..., 1.
inline std::vector<double> t_grid(double step) {
    const auto n = static_cast<int>(std::llround(1.0 / step));
    std::vector<double> g;
    for (int i = 0; i <= n; ++i) g.push_back(i * step);
    return g;
}

/// X^t = mu_g + (1 - t)(X - mu_g), row by row.
inline RowMatrix apply_attack(const RowMatrix& sample, const Eigen::VectorXd& mu_g, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw validation_error("attack t must lie in [0, 1]");
    RowMatrix out(sample.rows(), sample.cols());
    for (Eigen::Index i = 0; i < sample.rows(); ++i)
        for (Eigen::Index j = 0; j < sample.cols(); ++j) out(i, j) = mu_g(j) + (1.0 - t) * (sample(i, j) - mu_g(j));
    return out;
}

inline double movement_cost(const Eigen::VectorXd& original, const Eigen::VectorXd& moved) {
    if (original.size() != moved.size()) throw validation_error("movement_cost: dimension mismatch");
    return (moved - original).norm();
}

struct AttackEval {
    std::size_t passed = 0;
    double utility = 0.0;
};

/// Mean payoff over the sample with blocked objects scoring 0. Objects are visited in
/// sample order, so table builds and direct calls agree bit for bit.
inline AttackEval attacker_utility(const UtilitySpec& u, const RowMatrix& sample, const Eigen::VectorXd& mu_g,
                                   double t, const Wall& wall) {
    const auto q = sample.cols();
    std::vector<double> moved(static_cast<std::size_t>(q));
    AttackEval e;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < sample.rows(); ++i) {
        double c2 = 0.0;
        for (Eigen::Index j = 0; j < q; ++j) {
            const double x = sample(i, j);
            moved[static_cast<std::size_t>(j)] = mu_g(j) + (1.0 - t) * (x - mu_g(j));
            const double d = moved[static_cast<std::size_t>(j)] - x;
            c2 += d * d;
        }
        if (!wall.contains(moved.data())) continue;
        ++e.passed;
        sum += payoff(u, std::sqrt(c2));
    }
    e.utility = sum / static_cast<double>(sample.rows());
    return e;
}

inline std::size_t count_outside(const Wall& wall, const RowMatrix& sample) {
    std::size_t out = 0;
    for (Eigen::Index i = 0; i < sample.rows(); ++i) out += !wall.contains(sample.data() + i * sample.cols());
    return out;
}

inline std::size_t count_inside(const Wall& wall, const RowMatrix& sample) {
    return static_cast<std::size_t>(sample.rows()) - count_outside(wall, sample);
}

/// -100 (err_n + c err_a) from raw counts; adversary error pools all adversary objects.
inline double defender_value(std::size_t normal_out, std::size_t n_normal, std::size_t adversary_in,
                             std::size_t n_adversary, double c) {
    const double err_n = static_cast<double>(normal_out) / static_cast<double>(n_normal);
    const double err_a = static_cast<double>(adversary_in) / static_cast<double>(n_adversary);
    return -100.0 * (err_n + c * err_a);
}

inline double defender_utility(const Wall& wall, const RowMatrix& normal, const std::vector<RowMatrix>& moved,
                               double c) {
    std::size_t in = 0, total = 0;
    for (const auto& m : moved) {
        in += count_inside(wall, m);
        total += static_cast<std::size_t>(m.rows());
    }
    return defender_value(count_outside(wall, normal), static_cast<std::size_t>(normal.rows()), in, total, c);
}

/// Common random numbers: one sample per population, drawn once per game.
struct GameSamples {
    RowMatrix normal;
    std::vector<RowMatrix> adversaries;
    RegionStats normal_stats;  // true population moments; the defender wall is built on them
    EtaCurve eta;
};

inline GameSamples draw_samples(const GameConfig& cfg) {
    cfg.validate();
    GameSamples s;
    auto rng = stream_rng(cfg.seed, 0);
    s.normal = sample_gaussian(cfg.normal.mean, cholesky_factor(cfg.normal.cov), cfg.sample_size, rng);
    for (std::size_t i = 0; i < cfg.adversaries.size(); ++i) {
        auto r = stream_rng(cfg.seed, i + 1);
        const auto& p = cfg.adversaries[i].population;
        s.adversaries.push_back(sample_gaussian(p.mean, cholesky_factor(p.cov), cfg.sample_size, r));
    }
    s.normal_stats = stats_from_moments(cfg.normal.mean, cfg.normal.cov, cfg.sample_size);
    if (cfg.wall_kind == WallKind::manhattan)
        s.eta = EtaCurve(s.normal_stats, cfg.eta_samples, splitmix64(cfg.seed ^ 0x2545f4914f6cdd1dULL));
    return s;
}

inline Wall game_wall(const GameConfig& cfg, const GameSamples& s, double alpha) {
    if (cfg.wall_kind == WallKind::euclidean) return euclidean_wall(s.normal_stats, alpha);
    Wall w = manhattan_wall(s.normal_stats, alpha, s.eta.at(alpha));
    w.eta_samples = cfg.eta_samples;
    return w;
}

/// Per (h, t) pass counts and utilities for every adversary, and per-h normal errors.
struct ErrorTables {
    std::vector<double> alphas;
    std::vector<double> radii;
    std::vector<double> ts;
    std::vector<std::size_t> normal_out;                    // [h]
    std::vector<std::vector<std::size_t>> pass;             // [i][h * |t| + t]
    std::vector<std::vector<double>> utility;               // [i][h * |t| + t]
    std::size_t n_normal = 0;
    std::vector<std::size_t> n_adversary;
    double c = 0.0;

    std::size_t nh() const { return alphas.size(); }
    std::size_t nt() const { return ts.size(); }
    std::size_t m() const { return pass.size(); }
    std::size_t at(std::size_t h, std::size_t t) const { return h * nt() + t; }

    double attacker(std::size_t i, std::size_t h, std::size_t t) const { return utility[i][at(h, t)]; }

    /// Defender utility at level h with adversary i playing t_index[i].
    double defender(std::size_t h, const std::vector<std::size_t>& t_index) const {
        std::size_t in = 0, total = 0;
        for (std::size_t i = 0; i < m(); ++i) {
            in += pass[i][at(h, t_index[i])];
            total += n_adversary[i];
        }
        return defender_value(normal_out[h], n_normal, in, total, c);
    }
};

inline ErrorTables build_error_tables(const GameConfig& cfg, const GameSamples& s) {
    cfg.validate();
    ErrorTables tb;
    tb.alphas = alpha_grid(cfg.alpha_step);
    tb.ts = t_grid(cfg.t_step);
    tb.c = cfg.c;
    tb.n_normal = static_cast<std::size_t>(s.normal.rows());
    const std::size_t m = cfg.adversaries.size(), nh = tb.nh(), nt = tb.nt();
    for (const auto& a : s.adversaries) tb.n_adversary.push_back(static_cast<std::size_t>(a.rows()));
    tb.radii.assign(nh, 0.0);
    tb.normal_out.assign(nh, 0);
    tb.pass.assign(m, std::vector<std::size_t>(nh * nt));
    tb.utility.assign(m, std::vector<double>(nh * nt));
    std::vector<Wall> walls(nh);
    for (std::size_t h = 0; h < nh; ++h) {
        walls[h] = game_wall(cfg, s, tb.alphas[h]);
        tb.radii[h] = walls[h].radius;
    }
    parallel_for_index(nh * (1 + m * nt), [&](std::size_t job) {
        const std::size_t h = job / (1 + m * nt), rest = job % (1 + m * nt);
        if (rest == 0) {
            tb.normal_out[h] = count_outside(walls[h], s.normal);
            return;
        }
        const std::size_t i = (rest - 1) / nt, t = (rest - 1) % nt;
        const AttackEval e =
            attacker_utility(cfg.adversaries[i].utility, s.adversaries[i], cfg.normal.mean, tb.ts[t], walls[h]);
        tb.pass[i][tb.at(h, t)] = e.passed;
        tb.utility[i][tb.at(h, t)] = e.utility;
    });
    return tb;
}

struct Equilibrium {
    Orientation orientation = Orientation::leader;
    std::size_t h_index = 0;
    double alpha = 0.0;
    double h = 0.0;  // chi2 radius or eta
    std::vector<std::size_t> t_index;
    std::vector<double> t;
    double defender_utility = 0.0;
    std::vector<double> attacker_utilities;
    std::vector<double> pass_rates;
    double normal_error = 0.0;
};

inline Equilibrium make_equilibrium(const ErrorTables& tb, Orientation o, std::size_t h,
                                    std::vector<std::size_t> t_index) {
    Equilibrium e;
    e.orientation = o;
    e.h_index = h;
    e.alpha = tb.alphas[h];
    e.h = tb.radii[h];
    e.defender_utility = tb.defender(h, t_index);
    e.normal_error = static_cast<double>(tb.normal_out[h]) / static_cast<double>(tb.n_normal);
    for (std::size_t i = 0; i < tb.m(); ++i) {
        e.t.push_back(tb.ts[t_index[i]]);
        e.attacker_utilities.push_back(tb.attacker(i, h, t_index[i]));
        e.pass_rates.push_back(static_cast<double>(tb.pass[i][tb.at(h, t_index[i])]) /
                               static_cast<double>(tb.n_adversary[i]));
    }
    e.t_index = std::move(t_index);
    return e;
}

/// Adversary i's best response to level h; ties go to the smaller t.
inline std::size_t best_response(const ErrorTables& tb, std::size_t i, std::size_t h) {
    std::size_t best = 0;
    for (std::size_t t = 1; t < tb.nt(); ++t)
        if (tb.attacker(i, h, t) > tb.attacker(i, h, best)) best = t;
    return best;
}

/// Defender commits to h; adversaries best-respond independently; defender takes the
/// best h (ties to the smaller h).
inline Equilibrium solve_leader(const ErrorTables& tb) {
    std::size_t best_h = 0;
    std::vector<std::size_t> best_t;
    double best_d = -std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < tb.nh(); ++h) {
        std::vector<std::size_t> t(tb.m());
        for (std::size_t i = 0; i < tb.m(); ++i) t[i] = best_response(tb, i, h);
        const double d = tb.defender(h, t);
        if (d > best_d) {
            best_d = d;
            best_h = h;
            best_t = std::move(t);
        }
    }
    return make_equilibrium(tb, Orientation::leader, best_h, std::move(best_t));
}

/// Defender's best level against a fixed joint attack; ties to the smaller h.
inline std::size_t defender_response(const ErrorTables& tb, const std::vector<std::size_t>& t) {
    std::size_t best = 0;
    double best_d = tb.defender(0, t);
    for (std::size_t h = 1; h < tb.nh(); ++h) {
        const double d = tb.defender(h, t);
        if (d > best_d) {
            best_d = d;
            best = h;
        }
    }
    return best;
}

/// Adversaries commit to a joint T, defender best-responds; T maximizes the summed
/// attacker utility. Ties go to smaller sum of t, then smaller h, then the
/// lexicographically first T.
inline Equilibrium solve_follower(const ErrorTables& tb, double joint_step, double grid_budget) {
    const std::size_t m = tb.m();
    const double t_step = tb.ts.size() > 1 ? tb.ts[1] - tb.ts[0] : 1.0;
    const std::size_t stride = m >= 3 ? static_cast<std::size_t>(std::llround(joint_step / t_step)) : 1;
    std::vector<std::size_t> levels;
    for (std::size_t t = 0; t < tb.nt(); t += stride) levels.push_back(t);
    double joint = 1.0;
    for (std::size_t i = 0; i < m; ++i) joint *= static_cast<double>(levels.size());
    if (joint * static_cast<double>(tb.nh()) > grid_budget) throw validation_error("grid budget exceeded; increase step");

    std::vector<std::size_t> odo(m, 0), t(m), best_t;
    std::size_t best_h = 0, best_sum_t = 0;
    double best_a = -std::numeric_limits<double>::infinity();
    while (true) {
        std::size_t sum_t = 0;
        for (std::size_t i = 0; i < m; ++i) {
            t[i] = levels[odo[i]];
            sum_t += t[i];
        }
        const std::size_t h = defender_response(tb, t);
        double a = 0.0;
        for (std::size_t i = 0; i < m; ++i) a += tb.attacker(i, h, t[i]);
        const bool better = a > best_a || (a == best_a && (sum_t < best_sum_t || (sum_t == best_sum_t && h < best_h)));
        if (better) {
            best_a = a;
            best_t = t;
            best_h = h;
            best_sum_t = sum_t;
        }
        std::size_t d = m;
        while (d > 0) {
            --d;
            if (++odo[d] < levels.size()) break;
            odo[d] = 0;
            if (d == 0) return make_equilibrium(tb, Orientation::follower, best_h, std::move(best_t));
        }
        if (m == 0) break;
    }
    return make_equilibrium(tb, Orientation::follower, best_h, std::move(best_t));
}

inline Equilibrium solve(const GameConfig& cfg, const ErrorTables& tb, Orientation o) {
    return o == Orientation::leader ? solve_leader(tb) : solve_follower(tb, cfg.joint_t_step, cfg.grid_budget);
}

/// Direct (table-free) evaluation of every utility at a strategy profile.
struct DirectEval {
    double defender_utility = 0.0;
    std::vector<double> attacker_utilities;
};

inline DirectEval evaluate_direct(const GameConfig& cfg, const GameSamples& s, double alpha,
                                  const std::vector<double>& t) {
    const Wall wall = game_wall(cfg, s, alpha);
    DirectEval out;
    std::vector<RowMatrix> moved;
    for (std::size_t i = 0; i < cfg.adversaries.size(); ++i) {
        out.attacker_utilities.push_back(
            attacker_utility(cfg.adversaries[i].utility, s.adversaries[i], cfg.normal.mean, t[i], wall).utility);
        moved.push_back(apply_attack(s.adversaries[i], cfg.normal.mean, t[i]));
    }
    out.defender_utility = defender_utility(wall, s.normal, moved, cfg.c);
    return out;
}

inline Eigen::MatrixXd mat2(double a, double b, double c, double d) {
    Eigen::MatrixXd m(2, 2);
    m << a, b, c, d;
    return m;
}

inline Eigen::VectorXd vec2(double a, double b) { return Eigen::Vector2d(a, b); }

/// Populations and utility coefficients of the one- and three-adversary experiments.
inline GameConfig game_preset(const std::string& name, WallKind kind = WallKind::euclidean) {
    GameConfig g;
    g.name = name;
    g.wall_kind = kind;
    g.normal = {vec2(0, 0), mat2(1, 0, 0, 2)};
    const auto us = [](Family f, double a) { return UtilitySpec{f, a, 7.0}; };
    if (name.rfind("one_adv_", 0) == 0) {
        g.c = 20.0;
        const std::string fam = name.substr(8);
        UtilitySpec u;
        if (fam == "log") u = us(Family::log, 4.0);
        else if (fam == "linear") u = us(Family::linear, 1.5);
        else if (fam == "exp") u = us(Family::exponential, 0.75);
        else throw validation_error("unknown game preset '" + name + "'");
        g.adversaries = {{{vec2(6, 6), mat2(1, 1, 1, 2)}, u}};
    } else if (name.rfind("three_adv_", 0) == 0) {
        g.c = 10.0;
        const std::string fam = name.substr(10);
        Family f;
        double a[3];
        if (fam == "log") f = Family::log, a[0] = 1.75, a[1] = 1.25, a[2] = 1.25;
        else if (fam == "linear") f = Family::linear, a[0] = 0.5, a[1] = 0.25, a[2] = 0.5;
        else if (fam == "exp") f = Family::exponential, a[0] = 4.5, a[1] = 4.0, a[2] = 4.5;
        else throw validation_error("unknown game preset '" + name + "'");
        g.adversaries = {{{vec2(6, 6), mat2(1, 1, 1, 2)}, us(f, a[0])},
                         {{vec2(-7, -7), mat2(1, -0.5, -0.5, 1)}, us(f, a[1])},
                         {{vec2(-6, 6), mat2(1, 0, 0, 2)}, us(f, a[2])}};
    } else {
        throw validation_error("unknown game preset '" + name + "'");
    }
    return g;
}

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"one_adv_log",   "one_adv_linear",   "one_adv_exp",
                                                "three_adv_log", "three_adv_linear", "three_adv_exp"};
    return names;
}

}  // namespace adclust::game
