#include <gtest/gtest.h>

#include <adclust/game.hpp>

#include <random>

using namespace adclust;
using namespace adclust::game;

namespace {

RowMatrix rows(std::initializer_list<std::initializer_list<double>> r) {
    RowMatrix m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& row : r) {
        Eigen::Index j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

GameConfig small(const std::string& preset, WallKind kind = WallKind::euclidean, std::size_t n = 2000) {
    auto cfg = game_preset(preset, kind);
    cfg.sample_size = n;
    cfg.eta_samples = 20000;
    return cfg;
}

Wall unit_wall(double alpha) {
    return euclidean_wall(stats_from_moments(Eigen::Vector2d(0, 0), Eigen::Matrix2d::Identity()), alpha);
}

}  // namespace

TEST(Attack, Examples) {
    const RowMatrix x = rows({{6, 6}, {-1, 2}, {0.3, 0.7}});
    const Eigen::VectorXd mu = Eigen::Vector2d(0, 0);
    EXPECT_EQ(apply_attack(x, mu, 0.0), x);
    const RowMatrix one = apply_attack(x, Eigen::Vector2d(1, -2), 1.0);
    for (Eigen::Index i = 0; i < one.rows(); ++i) {
        EXPECT_EQ(one(i, 0), 1.0);
        EXPECT_EQ(one(i, 1), -2.0);
    }
    const RowMatrix half = apply_attack(rows({{6, 6}}), mu, 0.5);
    EXPECT_EQ(half(0, 0), 3.0);
    EXPECT_EQ(half(0, 1), 3.0);
    EXPECT_THROW(apply_attack(x, mu, 1.5), validation_error);
}

TEST(Attack, ContractionSemigroup) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-10, 10), t(0, 1);
    RowMatrix x(50, 3);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < 3; ++j) x(i, j) = u(rng);
    const Eigen::VectorXd mu = Eigen::Vector3d(u(rng), u(rng), u(rng));
    for (int k = 0; k < 20; ++k) {
        const double t1 = t(rng), t2 = t(rng);
        const RowMatrix two = apply_attack(apply_attack(x, mu, t1), mu, t2);
        const RowMatrix one = apply_attack(x, mu, 1.0 - (1.0 - t1) * (1.0 - t2));
        EXPECT_LT((two - one).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Attack, MovementCost) {
    EXPECT_EQ(movement_cost(Eigen::Vector2d(1, 2), Eigen::Vector2d(1, 2)), 0.0);
    EXPECT_EQ(movement_cost(Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 4)), 5.0);
    const Eigen::VectorXd mu = Eigen::Vector2d(0.5, -1), x = Eigen::Vector2d(4, 3);
    for (double t : {0.1, 0.37, 0.9}) {
        RowMatrix r(1, 2);
        r.row(0) = x.transpose();
        const Eigen::VectorXd moved = apply_attack(r, mu, t).row(0).transpose();
        EXPECT_NEAR(movement_cost(x, moved), t * (x - mu).norm(), 1e-12);
    }
}

TEST(Utility, PayoffFamilies) {
    EXPECT_NEAR(payoff({Family::log, 4, 7}, 3.0), 7 - 4 * std::log(4.0), 1e-15);
    EXPECT_NEAR(payoff({Family::log, 4, 7}, 3.0), 1.455, 1e-3);
    EXPECT_EQ(payoff({Family::linear, 1.5, 7}, 2.0), 4.0);
    EXPECT_EQ(payoff({Family::linear, 1.5, 7}, 10.0), 0.0);
    EXPECT_NEAR(payoff({Family::exponential, 0.75, 7}, 1.0), 7 - std::exp(0.75), 1e-15);
    EXPECT_EQ(payoff({Family::exponential, 0.75, 7}, 5.0), 0.0);
}

TEST(Utility, HandInstance) {
    const auto e = attacker_utility({Family::log, 4, 7}, rows({{6, 0}}), Eigen::Vector2d(0, 0), 0.5, unit_wall(0.99));
    EXPECT_EQ(e.passed, 1u);
    EXPECT_NEAR(e.utility, 7 - 4 * std::log(4.0), 1e-12);
}

TEST(Utility, BlockedSampleScoresZero) {
    const auto e = attacker_utility({Family::log, 4, 7}, rows({{6, 6}, {7, 5}, {-8, 1}}), Eigen::Vector2d(0, 0), 0.0,
                                    unit_wall(0.6));
    EXPECT_EQ(e.passed, 0u);
    EXPECT_EQ(e.utility, 0.0);
}

TEST(Utility, FullAttackPaysMeanPayoffAtDistance) {
    const RowMatrix x = rows({{3, 4}, {0, 1}, {-6, 8}});
    const UtilitySpec u{Family::linear, 0.5, 7};
    const auto e = attacker_utility(u, x, Eigen::Vector2d(0, 0), 1.0, unit_wall(0.01));
    EXPECT_EQ(e.passed, 3u);
    EXPECT_NEAR(e.utility, (payoff(u, 5) + payoff(u, 1) + payoff(u, 10)) / 3.0, 1e-12);
}

TEST(Defender, Arithmetic) {
    EXPECT_NEAR(defender_value(10, 100, 5, 100, 20.0), -110.0, 1e-12);
    EXPECT_EQ(defender_value(0, 100, 0, 50, 20.0), 0.0);
    const Wall w = unit_wall(0.9);
    EXPECT_EQ(defender_utility(w, rows({{0, 0}, {0.1, 0}}), {rows({{9, 9}})}, 20.0), 0.0);
}

TEST(Defender, HugeWallIsDominatedByAdversaryError) {
    const auto cfg = small("one_adv_log");
    const auto s = draw_samples(cfg);
    const Wall w = euclidean_wall(s.normal_stats, 1.0 - 1e-12);
    const double d = defender_utility(w, s.normal, {apply_attack(s.adversaries[0], cfg.normal.mean, 0.0)}, cfg.c);
    const auto inside = count_inside(w, s.adversaries[0]);
    EXPECT_EQ(count_outside(w, s.normal), 0u);
    EXPECT_GT(inside, 0u);
    EXPECT_DOUBLE_EQ(d, -100.0 * cfg.c * static_cast<double>(inside) / static_cast<double>(cfg.sample_size));
}

TEST(Tables, LookupMatchesDirectEvaluationBitExactly) {
    for (const auto& name : preset_names())
        for (auto kind : {WallKind::euclidean, WallKind::manhattan}) {
            const auto cfg = small(name, kind, 1000);
            const auto s = draw_samples(cfg);
            const auto tb = build_error_tables(cfg, s);
            std::mt19937_64 rng(31);
            for (int probe = 0; probe < 20; ++probe) {
                const std::size_t h = rng() % tb.nh(), i = rng() % tb.m(), t = rng() % tb.nt();
                const Wall w = game_wall(cfg, s, tb.alphas[h]);
                const auto e = attacker_utility(cfg.adversaries[i].utility, s.adversaries[i], cfg.normal.mean, tb.ts[t], w);
                EXPECT_EQ(tb.attacker(i, h, t), e.utility) << name;
                EXPECT_EQ(tb.pass[i][tb.at(h, t)], e.passed) << name;

                std::vector<std::size_t> ti(tb.m());
                std::vector<double> tv(tb.m());
                for (std::size_t j = 0; j < tb.m(); ++j) tv[j] = tb.ts[ti[j] = rng() % tb.nt()];
                const auto direct = evaluate_direct(cfg, s, tb.alphas[h], tv);
                EXPECT_EQ(tb.defender(h, ti), direct.defender_utility) << name;
                for (std::size_t j = 0; j < tb.m(); ++j)
                    EXPECT_EQ(tb.attacker(j, h, ti[j]), direct.attacker_utilities[j]) << name;
            }
        }
}

TEST(Tables, ZeroAttackColumnMatchesUnmovedSamples) {
    const auto cfg = small("three_adv_linear");
    const auto s = draw_samples(cfg);
    const auto tb = build_error_tables(cfg, s);
    for (std::size_t h = 0; h < tb.nh(); h += 7) {
        const Wall w = game_wall(cfg, s, tb.alphas[h]);
        EXPECT_EQ(tb.defender(h, {0, 0, 0}), defender_utility(w, s.normal, s.adversaries, cfg.c));
    }
}

TEST(Tables, ShapeForThreeAdversaries) {
    const auto cfg = small("three_adv_exp", WallKind::euclidean, 500);
    const auto tb = build_error_tables(cfg, draw_samples(cfg));
    EXPECT_EQ(tb.m(), 3u);
    EXPECT_EQ(tb.nt(), 101u);
    EXPECT_EQ(tb.nh(), 99u);
    EXPECT_DOUBLE_EQ(tb.alphas.front(), 0.01);
    EXPECT_DOUBLE_EQ(tb.alphas.back(), 0.99);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(tb.pass[i].size(), 99u * 101u);
        EXPECT_EQ(tb.utility[i].size(), 99u * 101u);
    }
}

TEST(Tables, PassRateNondecreasingInAttack) {
    for (auto kind : {WallKind::euclidean, WallKind::manhattan}) {
        const auto cfg = small("three_adv_log", kind);
        const auto tb = build_error_tables(cfg, draw_samples(cfg));
        for (std::size_t i = 0; i < tb.m(); ++i)
            for (std::size_t h = 0; h < tb.nh(); ++h)
                for (std::size_t t = 1; t < tb.nt(); ++t)
                    ASSERT_GE(tb.pass[i][tb.at(h, t)], tb.pass[i][tb.at(h, t - 1)]) << i << " " << h << " " << t;
        for (std::size_t h = 1; h < tb.nh(); ++h) EXPECT_LE(tb.normal_out[h], tb.normal_out[h - 1]);
    }
}

TEST(Solvers, LeaderMatchesBruteForce) {
    const auto cfg = small("one_adv_linear");
    const auto tb = build_error_tables(cfg, draw_samples(cfg));
    const auto eq = solve_leader(tb);
    double best = -1e300;
    std::size_t bh = 0;
    for (std::size_t h = 0; h < tb.nh(); ++h) {
        std::size_t bt = 0;
        for (std::size_t t = 0; t < tb.nt(); ++t)
            if (tb.attacker(0, h, t) > tb.attacker(0, h, bt)) bt = t;
        const double d = tb.defender(h, {bt});
        if (d > best) best = d, bh = h;
    }
    EXPECT_EQ(eq.h_index, bh);
    EXPECT_EQ(eq.defender_utility, best);
    EXPECT_EQ(eq.t_index[0], best_response(tb, 0, bh));
}

TEST(Solvers, HarmlessAttackerStaysHome) {
    auto cfg = small("one_adv_log");
    cfg.adversaries[0].utility.k_max = 1e-12;
    const auto tb = build_error_tables(cfg, draw_samples(cfg));
    const auto eq = solve_leader(tb);
    EXPECT_EQ(eq.t_index[0], 0u);
    EXPECT_EQ(eq.h_index, defender_response(tb, {0}));
}

TEST(Solvers, CheapAdversaryErrorPicksLargestWall) {
    auto cfg = small("one_adv_log", WallKind::euclidean, 10000);
    cfg.c = 1e-12;
    const auto tb = build_error_tables(cfg, draw_samples(cfg));
    EXPECT_EQ(solve_leader(tb).h_index, tb.nh() - 1);
    EXPECT_EQ(solve_follower(tb, cfg.joint_t_step, cfg.grid_budget).h_index, tb.nh() - 1);
}

TEST(Solvers, SingleAttackLevelReducesToDefenderArgmax) {
    const auto cfg = small("one_adv_exp");
    auto tb = build_error_tables(cfg, draw_samples(cfg));
    const std::size_t nt = tb.nt();
    ErrorTables one = tb;
    one.ts = {tb.ts[10]};
    one.pass[0].clear();
    one.utility[0].clear();
    for (std::size_t h = 0; h < tb.nh(); ++h) {
        one.pass[0].push_back(tb.pass[0][h * nt + 10]);
        one.utility[0].push_back(tb.utility[0][h * nt + 10]);
    }
    std::size_t best = 0;
    for (std::size_t h = 1; h < one.nh(); ++h)
        if (one.defender(h, {0}) > one.defender(best, {0})) best = h;
    const auto eq = solve_follower(one, cfg.joint_t_step, cfg.grid_budget);
    EXPECT_EQ(eq.h_index, best);
    EXPECT_EQ(eq.t[0], tb.ts[10]);
}

TEST(Solvers, FollowerMaximizesAttackerSumAgainstBestResponse) {
    const auto cfg = small("one_adv_log");
    const auto tb = build_error_tables(cfg, draw_samples(cfg));
    const auto eq = solve_follower(tb, cfg.joint_t_step, cfg.grid_budget);
    for (std::size_t t = 0; t < tb.nt(); ++t) {
        const std::size_t h = defender_response(tb, {t});
        EXPECT_LE(tb.attacker(0, h, t), eq.attacker_utilities[0]);
    }
    EXPECT_EQ(eq.h_index, defender_response(tb, eq.t_index));
}

TEST(Solvers, GridBudgetIsEnforced) {
    auto cfg = small("three_adv_linear", WallKind::euclidean, 200);
    const auto tb = build_error_tables(cfg, draw_samples(cfg));
    EXPECT_THROW(solve_follower(tb, 0.01, 1e6), validation_error);
    EXPECT_NO_THROW(solve_follower(tb, 0.05, 2e8));
}

TEST(Solvers, ThreeAdversaryManhattanExpDiscouragesSomeone) {
    const auto cfg = game_preset("three_adv_exp", WallKind::manhattan);
    const auto s = draw_samples(cfg);
    const auto tb = build_error_tables(cfg, s);
    const auto eq = solve_follower(tb, cfg.joint_t_step, cfg.grid_budget);
    EXPECT_EQ(*std::min_element(eq.t.begin(), eq.t.end()), 0.0);
}

TEST(Solvers, DeterministicAcrossRuns) {
    const auto cfg = small("three_adv_exp", WallKind::manhattan, 800);
    const auto a = solve_follower(build_error_tables(cfg, draw_samples(cfg)), 0.05, 2e8);
    const auto b = solve_follower(build_error_tables(cfg, draw_samples(cfg)), 0.05, 2e8);
    EXPECT_EQ(a.t_index, b.t_index);
    EXPECT_EQ(a.h_index, b.h_index);
    EXPECT_EQ(a.defender_utility, b.defender_utility);
}

TEST(Presets, Coefficients) {
    const auto one = game_preset("one_adv_log");
    EXPECT_EQ(one.c, 20.0);
    EXPECT_EQ(one.adversaries.size(), 1u);
    EXPECT_EQ(one.adversaries[0].utility.a, 4.0);
    EXPECT_EQ(one.adversaries[0].population.mean, Eigen::VectorXd(Eigen::Vector2d(6, 6)));
    EXPECT_EQ(one.adversaries[0].population.cov, mat2(1, 1, 1, 2));
    const auto ex = game_preset("three_adv_exp");
    EXPECT_EQ(ex.c, 10.0);
    EXPECT_EQ(ex.adversaries[0].utility.a, 4.5);
    EXPECT_EQ(ex.adversaries[1].utility.a, 4.0);
    EXPECT_EQ(ex.adversaries[2].utility.a, 4.5);
    const auto lg = game_preset("three_adv_log");
    EXPECT_EQ(lg.adversaries[0].utility.a, 1.75);
    EXPECT_EQ(lg.adversaries[1].utility.a, 1.25);
    EXPECT_EQ(lg.adversaries[2].utility.a, 1.25);
    EXPECT_EQ(lg.adversaries[2].population.mean, Eigen::VectorXd(Eigen::Vector2d(-6, 6)));
    for (const auto& a : lg.adversaries) EXPECT_EQ(a.utility.k_max, 7.0);
    EXPECT_THROW(game_preset("four_adv_log"), validation_error);
}
