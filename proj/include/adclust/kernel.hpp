#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "dataset.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "parallel.hpp"

namespace adclust {

enum class BandwidthRule {
    nearest_labeled_median,  // median distance from each labeled point to its nearest labeled neighbor
    median_pairwise,         // median of all pairwise distances among labeled points
};

inline constexpr double kBandwidthFloor = 1e-12;

/// Nadaraya-Watson classifier over the labeled subset: normal = 1, abnormal = 0.
struct KernelClassifier {
    RowMatrix points;
    std::vector<double> y;
    double bandwidth = 1.0;
};

inline double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

inline double select_bandwidth(const RowMatrix& x, BandwidthRule rule) {
    const std::size_t n = static_cast<std::size_t>(x.rows());
    std::vector<double> d;
    if (rule == BandwidthRule::median_pairwise) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) d.push_back(row_distance(x, i, j));
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) best = std::min(best, row_distance(x, i, j));
            d.push_back(best);
        }
    }
    return std::max(median_of(std::move(d)), kBandwidthFloor);
}

/// `bandwidth` > 0 overrides the rule.
inline KernelClassifier fit_kernel(const Dataset& ds, BandwidthRule rule = BandwidthRule::nearest_labeled_median,
                                   double bandwidth = 0.0) {
    if (ds.count(Label::normal) == 0 || ds.count(Label::abnormal) == 0) throw validation_error("insufficient labels");
    KernelClassifier k;
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (ds.labels[i] != Label::unlabeled) ids.push_back(i);
    k.points.resize(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(ds.dims()));
    for (std::size_t r = 0; r < ids.size(); ++r) {
        k.points.row(static_cast<Eigen::Index>(r)) = ds.points.row(static_cast<Eigen::Index>(ids[r]));
        k.y.push_back(ds.labels[ids[r]] == Label::normal ? 1.0 : 0.0);
    }
    k.bandwidth = bandwidth > 0.0 ? bandwidth : select_bandwidth(k.points, rule);
    return k;
}

struct Score {
    double b = 0.5;
    bool underflow = false;
};

template <class Vec>
Score score(const KernelClassifier& k, const Vec& x) {
    const double inv = 1.0 / (2.0 * k.bandwidth * k.bandwidth);
    double num = 0.0, den = 0.0;
    for (Eigen::Index i = 0; i < k.points.rows(); ++i) {
        double s = 0.0;
        for (Eigen::Index d = 0; d < k.points.cols(); ++d) {
            const double t = k.points(i, d) - x(d);
            s += t * t;
        }
        const double w = std::exp(-s * inv);
        num += k.y[static_cast<std::size_t>(i)] * w;
        den += w;
    }
    if (!(den > 0.0)) return {0.5, true};
    return {std::clamp(num / den, 0.0, 1.0), false};
}

inline double weight(double b, double k) { return k * (2.0 * b - 1.0); }

struct Weights {
    std::vector<double> b;
    std::vector<double> w;
    std::vector<double> rho;
    std::vector<unsigned char> underflow;  // not vector<bool>: written from parallel workers
};

/// Scores every point; labeled points keep their own label as the score.
inline Weights compute_weights(const Dataset& ds, const KernelClassifier& kc, const std::vector<double>& density,
                               double k) {
    if (!(k > 0.0)) throw validation_error("weight k must be positive");
    const std::size_t n = ds.size();
    Weights out;
    out.b.assign(n, 0.5);
    out.w.assign(n, 0.0);
    out.rho.assign(n, 0.0);
    out.underflow.assign(n, 0);
    parallel_for_index(n, [&](std::size_t i) {
        Score s;
        if (ds.labels[i] == Label::normal)
            s.b = 1.0;
        else if (ds.labels[i] == Label::abnormal)
            s.b = 0.0;
        else
            s = score(kc, ds.points.row(static_cast<Eigen::Index>(i)));
        out.b[i] = s.b;
        out.underflow[i] = s.underflow ? 1 : 0;
        out.w[i] = weight(s.b, k);
        out.rho[i] = density[i] * out.w[i];
    });
    return out;
}

}  // namespace adclust
