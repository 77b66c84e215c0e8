#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "error.hpp"
#include "rng.hpp"

namespace adclust {

struct MixtureComponent {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    std::size_t count = 0;
    Truth tag = Truth::normal;
};

struct MixtureSpec {
    std::vector<MixtureComponent> components;
    double label_fraction = 0.02;
    std::uint64_t seed = 1;
};

/// Labels kept per eligible component: round(fraction * count), at least one when fraction > 0.
inline std::size_t labels_to_keep(std::size_t count, double fraction) {
    if (fraction <= 0.0) return 0;
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(count)));
    return std::clamp<std::size_t>(k, 1, count);
}

/// Uniformly chosen `k` distinct values of [0, n), sorted.
inline std::vector<std::size_t> choose_indices(std::size_t n, std::size_t k, std::mt19937_64& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

/// Components are drawn in order, each from its own RNG stream.
inline Dataset generate(const MixtureSpec& spec) {
    if (spec.components.empty()) throw validation_error("mixture has no components");
    if (!(spec.label_fraction >= 0.0 && spec.label_fraction <= 1.0))
        throw validation_error("label_fraction must lie in [0, 1]");
    const auto q = spec.components.front().mean.size();
    std::size_t total = 0;
    for (const auto& c : spec.components) {
        if (c.count < 1) throw validation_error("component count must be >= 1");
        if (c.mean.size() != q) throw validation_error("component dimensions differ");
        total += c.count;
    }
    Dataset ds;
    ds.points.resize(static_cast<Eigen::Index>(total), q);
    ds.labels.assign(total, Label::unlabeled);
    for (Eigen::Index j = 0; j < q; ++j) ds.feature_names.push_back("x" + std::to_string(j + 1));
    std::size_t row = 0;
    for (std::size_t ci = 0; ci < spec.components.size(); ++ci) {
        const auto& c = spec.components[ci];
        auto rng = stream_rng(spec.seed, ci);
        const Eigen::MatrixXd draws = sample_gaussian(c.mean, cholesky_factor(c.cov), c.count, rng);
        ds.points.middleRows(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(c.count)) = draws;
        for (std::size_t i = 0; i < c.count; ++i) {
            ds.truth.push_back(c.tag);
            ds.component.push_back(static_cast<int>(ci));
        }
        if (c.tag == Truth::normal || c.tag == Truth::abnormal) {
            const Label l = c.tag == Truth::normal ? Label::normal : Label::abnormal;
            for (std::size_t i : choose_indices(c.count, labels_to_keep(c.count, spec.label_fraction), rng))
                ds.labels[row + i] = l;
        }
        row += c.count;
    }
    return ds;
}

inline MixtureComponent blob(double x, double y, std::size_t count, Truth tag) {
    return {Eigen::Vector2d(x, y), 0.4 * Eigen::Matrix2d::Identity(), count, tag};
}

/// Two-dimensional simulation layouts sim1, sim2, sim3 (shared covariance 0.4 I, 2% labels).
inline MixtureSpec simulation_preset(const std::string& name, std::uint64_t seed) {
    MixtureSpec s;
    s.seed = seed;
    s.label_fraction = 0.02;
    if (name == "sim1") {
        s.components = {blob(0, -1, 300, Truth::normal), blob(1, -1, 300, Truth::abnormal)};
    } else if (name == "sim2") {
        s.components = {blob(-1, -1, 300, Truth::normal), blob(0, 0, 300, Truth::abnormal),
                        blob(1, 1, 300, Truth::normal)};
    } else if (name == "sim3") {
        s.components = {blob(0.5, -1, 300, Truth::normal), blob(1, -1, 300, Truth::abnormal),
                        blob(1, 1, 300, Truth::normal), blob(3, 3, 100, Truth::unknown)};
    } else {
        throw validation_error("unknown simulation preset '" + name + "'");
    }
    return s;
}

}  // namespace adclust
