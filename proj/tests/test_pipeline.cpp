#include <gtest/gtest.h>

#include <adclust/adclust.hpp>
#include <adclust/synthetic.hpp>

#include <numeric>
#include <random>

using namespace adclust;

namespace {

AdclustParams sim_params(double k = 10.0) {
    auto p = AdclustParams::simulation_profile();
    p.k = k;
    return p;
}

Dataset two_blobs(std::uint64_t seed, double gap = 12.0) {
    MixtureSpec spec;
    spec.seed = seed;
    spec.label_fraction = 0.05;
    spec.components = {{Eigen::Vector2d(0, 0), 0.2 * Eigen::Matrix2d::Identity(), 200, Truth::normal},
                       {Eigen::Vector2d(gap, 0), 0.2 * Eigen::Matrix2d::Identity(), 200, Truth::abnormal}};
    return generate(spec);
}

std::size_t labeled_region_points(const ClusteringResult& r) {
    return r.composition.count(Region::normal_core) + r.composition.count(Region::abnormal_region);
}

std::vector<std::size_t> range(std::size_t a, std::size_t b) {
    std::vector<std::size_t> v(b - a);
    std::iota(v.begin(), v.end(), a);
    return v;
}

}  // namespace

TEST(Pass1, SeparatedBlobsGiveOneSubPerClass) {
    const auto ds = two_blobs(3);
    const auto r = run_adclust(ds, sim_params(50));
    ASSERT_EQ(r.pass1_subs, 2u);
    for (std::size_t s = 0; s < 2; ++s) {
        const auto& sub = r.composition.subs[s];
        const Truth want = sub.tag == ClassTag::normal ? Truth::normal : Truth::abnormal;
        for (std::size_t i : sub.members) EXPECT_EQ(ds.truth[i], want);
    }
    EXPECT_NE(r.composition.subs[0].tag, r.composition.subs[1].tag);
    EXPECT_GT(r.composition.subs[0].members.size() + r.composition.subs[1].members.size(), 360u);
}

TEST(Pass1, VanishingWeightGivesNoSubs) {
    const auto ds = two_blobs(4);
    const auto r = run_adclust(ds, sim_params(1e-12));
    EXPECT_EQ(r.pass1_subs, 0u);
    EXPECT_EQ(r.composition.count(Region::normal_core), 0u);
    EXPECT_EQ(r.composition.count(Region::abnormal_region), 0u);
    EXPECT_TRUE(r.walls.empty());
}

TEST(Pass1, LargerWeightGrowsLabeledRegions) {
    // Labeled regions saturate by k = 10 under the simulation profile, so k = 20 can only
    // tie or grow; growth from a small weight is strict.
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto ds = generate(simulation_preset("sim1", seed));
        const auto a = labeled_region_points(run_adclust(ds, sim_params(10)));
        const auto b = labeled_region_points(run_adclust(ds, sim_params(20)));
        const auto low = labeled_region_points(run_adclust(ds, sim_params(0.5)));
        EXPECT_GE(b, a) << "seed " << seed;
        EXPECT_GT(b, low) << "seed " << seed;
    }
}

TEST(Pass1, SignSeparationAndConflicts) {
    // 1-D line: normal seeds on the left, abnormal on the right, one point in between
    // with zero weight that both merges can reach.
    RowMatrix x(5, 1);
    x << 0.0, 0.1, 0.2, 0.3, 0.4;
    Weights w;
    w.w = {1, 1, 0, -1, -1};
    w.rho = {5, 5, 0, -5, -5};
    const std::vector<Label> labels{Label::normal, Label::unlabeled, Label::unlabeled, Label::unlabeled,
                                    Label::abnormal};
    Thresholds thr;
    thr.rt = 0.1 + 1e-12;
    thr.dt = 3;
    const auto p = pass1_labeled(x, labels, w, thr);
    ASSERT_EQ(p.subs.size(), 2u);
    EXPECT_EQ(p.subs[0].tag, ClassTag::normal);
    EXPECT_EQ(p.subs[0].members, (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(p.subs[1].tag, ClassTag::abnormal);
    EXPECT_EQ(p.subs[1].members, (std::vector<std::size_t>{3, 4}));
    EXPECT_EQ(p.conflicted, (std::vector<std::size_t>{2}));
    EXPECT_EQ(p.remaining, (std::vector<std::size_t>{2}));
}

TEST(Pass1, UnanchoredSubsAreDropped) {
    RowMatrix x(4, 1);
    x << 0.0, 0.1, 5.0, 5.1;
    Weights w;
    w.w = {1, 1, 1, 1};
    w.rho = {5, 5, 5, 5};
    const std::vector<Label> labels{Label::normal, Label::unlabeled, Label::unlabeled, Label::unlabeled};
    Thresholds thr;
    thr.rt = 0.2;
    thr.dt = 3;
    const auto anchored = pass1_labeled(x, labels, w, thr, true);
    ASSERT_EQ(anchored.subs.size(), 1u);
    EXPECT_EQ(anchored.dropped_unanchored, 1u);
    EXPECT_EQ(anchored.remaining, (std::vector<std::size_t>{2, 3}));
    EXPECT_EQ(pass1_labeled(x, labels, w, thr, false).subs.size(), 2u);
}

TEST(Pass2, Examples) {
    RowMatrix x(8, 1);
    x << 0.0, 0.05, 0.1, 0.15, 10, 20, 30, 40;
    const std::vector<double> density{4, 4, 4, 4, 1, 1, 1, 1};
    Thresholds thr;
    thr.rt = 0.2;
    thr.dt = 3;
    const auto none = pass2_residual(x, {}, density, thr);
    EXPECT_TRUE(none.subs.empty());
    EXPECT_TRUE(none.outlier_candidates.empty());

    const auto blob = pass2_residual(x, range(0, 8), density, thr);
    ASSERT_EQ(blob.subs.size(), 1u);
    EXPECT_EQ(blob.subs[0].members, range(0, 4));
    EXPECT_EQ(blob.subs[0].tag, ClassTag::unlabeled);
    EXPECT_EQ(blob.subs[0].pass, 2);
    EXPECT_EQ(blob.outlier_candidates, range(4, 8));

    const auto scattered = pass2_residual(x, range(4, 8), density, thr);
    EXPECT_TRUE(scattered.subs.empty());
    EXPECT_EQ(scattered.outlier_candidates, range(4, 8));
}

TEST(Pass2, UnlabeledBlobBecomesUnlabeledSub) {
    MixtureSpec spec;
    spec.seed = 2;
    spec.label_fraction = 0.05;
    spec.components = {{Eigen::Vector2d(0, 0), 0.2 * Eigen::Matrix2d::Identity(), 200, Truth::normal},
                       {Eigen::Vector2d(3, 0), 0.2 * Eigen::Matrix2d::Identity(), 200, Truth::abnormal},
                       {Eigen::Vector2d(0, 30), 0.2 * Eigen::Matrix2d::Identity(), 200, Truth::unknown}};
    const auto ds = generate(spec);
    const auto r = run_adclust(ds, sim_params());
    std::size_t best = 0;
    for (std::size_t s = r.pass1_subs; s < r.composition.subs.size(); ++s) {
        std::size_t unknown = 0;
        for (std::size_t i : r.composition.subs[s].members) unknown += ds.truth[i] == Truth::unknown;
        EXPECT_EQ(unknown, r.composition.subs[s].members.size());
        best = std::max(best, unknown);
    }
    EXPECT_GE(best, 180u);
    for (std::size_t i = 400; i < 600; ++i) EXPECT_NE(r.composition.region[i], Region::normal_core);
}

TEST(Pass3, Examples) {
    const auto ds = two_blobs(5, 40.0);
    Dataset far = ds;
    far.points.conservativeResize(ds.points.rows() + 1, 2);
    far.points.row(ds.points.rows()) = Eigen::RowVector2d(100, 100);
    far.labels.push_back(Label::unlabeled);
    far.truth.push_back(Truth::unknown);
    far.component.push_back(2);
    const auto r = run_adclust(far, sim_params());
    EXPECT_EQ(r.composition.global_clusters.size(), 2u);
    EXPECT_EQ(r.composition.region.back(), Region::outlier);
    EXPECT_EQ(r.composition.global_of.back(), -1);
}

TEST(Pass3, Sim2BridgesIntoOneCluster) {
    const auto ds = generate(simulation_preset("sim2", 1));
    const auto r = run_adclust(ds, sim_params());
    ASSERT_FALSE(r.composition.global_clusters.empty());
    std::size_t biggest = 0;
    for (const auto& g : r.composition.global_clusters) biggest = std::max(biggest, g.size());
    EXPECT_GE(static_cast<double>(biggest), 0.95 * 900);
}

TEST(Pass3, IgnoresLabels) {
    const auto ds = generate(simulation_preset("sim1", 6));
    Dataset other = ds;
    std::mt19937_64 rng(1);
    std::shuffle(other.labels.begin(), other.labels.end(), rng);
    const auto a = run_adclust(ds, sim_params());
    const auto b = run_adclust(other, sim_params());
    EXPECT_EQ(a.composition.global_clusters, b.composition.global_clusters);
    EXPECT_EQ(a.thresholds.rt, b.thresholds.rt);
    EXPECT_EQ(a.thresholds.dt, b.thresholds.dt);
}

TEST(Match, HandInstance) {
    // globals: G0 = {0..5}, G1 = {6..9}; points 10 and 11 sit in no global cluster
    std::vector<std::vector<std::size_t>> globals{range(0, 6), range(6, 10)};
    std::vector<SubCluster> subs{{{0, 1, 2, 6}, ClassTag::normal, 1},
                                 {{3, 4, 7, 8}, ClassTag::abnormal, 1},
                                 {{9, 10}, ClassTag::unlabeled, 2},
                                 {{11}, ClassTag::abnormal, 1}};
    const auto c = match(12, subs, globals);
    // S0: 3 votes G0, 1 vote G1; S1: 2-2 tie, G0 is larger; S2: only G1 votes; S3: none
    EXPECT_EQ(c.sub_to_global, (std::vector<int>{0, 0, 1, -1}));
    using R = Region;
    const std::vector<Region> want{R::normal_core,     R::normal_core,     R::normal_core,     R::abnormal_region,
                                   R::abnormal_region, R::mixed_overlap,   R::unknown_cluster, R::unknown_cluster,
                                   R::unknown_cluster, R::unknown_cluster, R::outlier,         R::outlier};
    EXPECT_EQ(c.region, want);
}

TEST(Match, EqualSizeTieGoesToLowerId) {
    const auto c = match(4, {{{1, 2}, ClassTag::normal, 1}}, {{0, 1}, {2, 3}});
    EXPECT_EQ(c.sub_to_global, (std::vector<int>{0}));
    EXPECT_EQ(c.region, (std::vector<Region>{Region::mixed_overlap, Region::normal_core, Region::unknown_cluster,
                                             Region::unknown_cluster}));
}

TEST(Match, CleanSeparationHasNoMixedOverlap) {
    const auto ds = two_blobs(7, 40.0);
    const auto r = run_adclust(ds, sim_params(50));
    EXPECT_LE(r.composition.count(Region::mixed_overlap), 8u);
}

TEST(Adclust, Sim1Structure) {
    int centred = 0, mixed = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto ds = generate(simulation_preset("sim1", seed));
        const auto r = run_adclust(ds, sim_params());
        EXPECT_EQ(r.composition.global_clusters.size(), 1u);
        EXPECT_GT(r.composition.count(Region::normal_core), 0u);
        EXPECT_GT(r.composition.count(Region::abnormal_region), 0u);
        EXPECT_GE(r.walls.size(), 1u);
        bool any = false;
        for (const auto& w : r.walls) any = any || w.contains(Eigen::VectorXd(Eigen::Vector2d(0, -1)));
        centred += any;
        mixed += r.composition.count(Region::mixed_overlap) > 0;
    }
    // frozen from the current implementation; the kernel is sharp at k = 10, so the
    // overlap band is often empty and some normal regions split in two
    EXPECT_GE(centred, 6);
    EXPECT_GE(mixed, 3);
}

TEST(Adclust, Sim3UnknownBlob) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto ds = generate(simulation_preset("sim3", seed));
        const auto r = run_adclust(ds, sim_params());
        std::size_t unknown = 0, labeled = 0;
        for (std::size_t i = 900; i < 1000; ++i) {
            unknown += r.composition.region[i] == Region::unknown_cluster;
            labeled += r.composition.region[i] == Region::normal_core || r.composition.region[i] == Region::abnormal_region;
        }
        EXPECT_LE(labeled, 5u) << "seed " << seed;
        EXPECT_GE(unknown, 50u) << "seed " << seed;
    }
}

TEST(Adclust, RegionsPartitionAndProtectedSetIsConsistent) {
    for (const char* name : {"sim1", "sim2", "sim3"}) {
        const auto ds = generate(simulation_preset(name, 9));
        const auto r = run_adclust(ds, sim_params());
        std::size_t total = 0;
        for (Region g : kRegions) total += r.composition.count(g);
        EXPECT_EQ(total, ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const Region g = r.composition.region[i];
            if (g == Region::normal_core || g == Region::abnormal_region) EXPECT_GE(r.composition.global_of[i], 0);
            if (g == Region::outlier) EXPECT_EQ(r.composition.global_of[i], -1);
            EXPECT_EQ(r.protected_set[i] != 0, r.in_wall[i] && g == Region::normal_core);
        }
        for (std::size_t w = 0; w < r.walls.size(); ++w) {
            const auto& sub = r.composition.subs[static_cast<std::size_t>(r.wall_source[w])];
            EXPECT_EQ(sub.tag, ClassTag::normal);
            EXPECT_GE(sub.members.size(), r.min_wall_members);
        }
    }
}

TEST(Adclust, InsufficientLabels) {
    auto ds = generate(simulation_preset("sim1", 1));
    for (auto& l : ds.labels)
        if (l == Label::abnormal) l = Label::normal;
    try {
        run_adclust(ds, sim_params());
        FAIL() << "expected an error";
    } catch (const validation_error& e) {
        EXPECT_NE(std::string(e.what()).find("insufficient labels"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("kernel"), std::string::npos) << e.what();
    }
}

TEST(Adclust, InvalidParams) {
    const auto ds = generate(simulation_preset("sim1", 1));
    auto p = sim_params();
    p.alpha = 1.0;
    EXPECT_THROW(run_adclust(ds, p), validation_error);
    p = sim_params(0.0);
    EXPECT_THROW(run_adclust(ds, p), validation_error);
}

TEST(Adclust, DeterministicAndManhattanWalls) {
    const auto ds = generate(simulation_preset("sim2", 3));
    auto p = sim_params();
    p.wall_kind = WallKind::manhattan;
    p.eta_samples = 5000;
    const auto a = run_adclust(ds, p);
    const auto b = run_adclust(ds, p);
    EXPECT_EQ(a.composition.region, b.composition.region);
    ASSERT_EQ(a.walls.size(), b.walls.size());
    for (std::size_t w = 0; w < a.walls.size(); ++w) {
        EXPECT_EQ(a.walls[w].kind, WallKind::manhattan);
        EXPECT_EQ(a.walls[w].radius, b.walls[w].radius);
    }
    EXPECT_EQ(a.in_wall, b.in_wall);
}
