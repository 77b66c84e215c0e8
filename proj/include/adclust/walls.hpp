#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace adclust {

struct RegionStats {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    Eigen::VectorXd sd;
    std::size_t count = 0;
    bool ridged = false;
};

inline constexpr double kRidgeFactor = 1e-9;

/// Adds kRidgeFactor * trace/q to the diagonal when the smallest eigenvalue falls below
/// that level (an absolute kRidgeFactor when the trace is zero).
inline bool apply_ridge(Eigen::MatrixXd& cov) {
    const auto q = static_cast<double>(cov.rows());
    const double tr = cov.trace();
    const double eps = tr > 0.0 ? kRidgeFactor * tr / q : kRidgeFactor;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() >= eps) return false;
    cov.diagonal().array() += eps;
    return true;
}

inline RegionStats stats_from_moments(Eigen::VectorXd mean, Eigen::MatrixXd cov, std::size_t count = 0) {
    if (cov.rows() != mean.size() || cov.cols() != mean.size()) throw validation_error("stats: dimension mismatch");
    RegionStats s;
    s.mean = std::move(mean);
    s.cov = std::move(cov);
    s.ridged = apply_ridge(s.cov);
    s.sd = s.cov.diagonal().array().sqrt();
    s.count = count;
    return s;
}

/// Sample mean and (n-1) covariance of the rows of `pts`.
template <class Mat>
RegionStats fit_region_stats(const Mat& pts) {
    const auto n = pts.rows();
    if (n < 2) throw degenerate_error("degenerate region");
    Eigen::VectorXd mean = pts.colwise().mean().transpose();
    Eigen::MatrixXd centered = pts.rowwise() - mean.transpose();
    Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
    cov = 0.5 * (cov + cov.transpose());
    return stats_from_moments(std::move(mean), std::move(cov), static_cast<std::size_t>(n));
}

enum class WallKind { euclidean, manhattan };

inline std::string_view to_string(WallKind k) { return k == WallKind::euclidean ? "euclidean" : "manhattan"; }

inline WallKind parse_wall_kind(std::string_view s) {
    if (s == "euclidean") return WallKind::euclidean;
    if (s == "manhattan") return WallKind::manhattan;
    throw validation_error("unknown wall kind '" + std::string(s) + "'");
}

/// Sorted Manhattan scores s(x) = sum_i |x_i - mu_i| / sd_i of a Gaussian sample drawn
/// from the region's own fit; quantiles of it give eta(alpha).
class EtaCurve {
public:
    EtaCurve() = default;
    EtaCurve(const RegionStats& st, std::size_t sample_size, std::uint64_t seed) {
        if (sample_size < 1) throw validation_error("eta: sample_size must be positive");
        auto rng = stream_rng(seed, 0);
        const Eigen::MatrixXd draws = sample_gaussian(st.mean, cholesky_factor(st.cov), sample_size, rng);
        s_.resize(sample_size);
        for (Eigen::Index i = 0; i < draws.rows(); ++i)
            s_[static_cast<std::size_t>(i)] =
                ((draws.row(i).transpose() - st.mean).array().abs() / st.sd.array()).sum();
        std::sort(s_.begin(), s_.end());
    }

    /// Empirical quantile: the ceil(alpha * n)-th order statistic.
    double at(double alpha) const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("eta: alpha must lie in (0, 1)");
        const auto n = static_cast<double>(s_.size());
        auto idx = static_cast<std::size_t>(std::ceil(alpha * n - 1e-9));
        idx = std::clamp<std::size_t>(idx, 1, s_.size());
        return s_[idx - 1];
    }

    std::size_t size() const { return s_.size(); }
    double max() const { return s_.back(); }

private:
    std::vector<double> s_;
};

inline double eta_of_alpha(const RegionStats& st, double alpha, std::size_t sample_size = 100000,
                           std::uint64_t seed = 1) {
    if (sample_size < 1000) throw validation_error("eta: sample_size must be >= 1000");
    return EtaCurve(st, sample_size, seed).at(alpha);
}

/// Closed ellipsoid (Mahalanobis^2 <= chi2_q(alpha)) or diamond (scaled L1 <= eta(alpha)).
struct Wall {
    WallKind kind = WallKind::euclidean;
    RegionStats stats;
    double level = 0.6;
    double radius = 0.0;
    std::size_t eta_samples = 0;
    std::uint64_t eta_seed = 0;
    Eigen::MatrixXd chol;  // lower Cholesky factor of stats.cov

    /// Squared Mahalanobis distance by forward substitution with the Cholesky factor.
    double mahalanobis2(const double* x) const {
        const auto q = stats.mean.size();
        double small[16];
        std::vector<double> big;
        double* z = small;
        if (q > 16) {
            big.resize(static_cast<std::size_t>(q));
            z = big.data();
        }
        double s = 0.0;
        for (Eigen::Index i = 0; i < q; ++i) {
            double v = x[i] - stats.mean(i);
            for (Eigen::Index j = 0; j < i; ++j) v -= chol(i, j) * z[j];
            z[i] = v / chol(i, i);
            s += z[i] * z[i];
        }
        return s;
    }

    double manhattan_score(const double* x) const {
        double s = 0.0;
        for (Eigen::Index i = 0; i < stats.mean.size(); ++i) s += std::abs(x[i] - stats.mean(i)) / stats.sd(i);
        return s;
    }

    double statistic(const double* x) const {
        return kind == WallKind::euclidean ? mahalanobis2(x) : manhattan_score(x);
    }

    bool contains(const double* x) const { return statistic(x) <= radius; }

    double mahalanobis2(const Eigen::VectorXd& x) const { return mahalanobis2(x.data()); }
    double manhattan_score(const Eigen::VectorXd& x) const { return manhattan_score(x.data()); }
    double statistic(const Eigen::VectorXd& x) const { return statistic(x.data()); }
    bool contains(const Eigen::VectorXd& x) const { return statistic(x) <= radius; }
};

inline void attach_factor(Wall& w) {
    Eigen::LLT<Eigen::MatrixXd> llt(w.stats.cov);
    if (llt.info() != Eigen::Success) throw degenerate_error("wall covariance is singular after ridge");
    w.chol = llt.matrixL();
}

inline Wall euclidean_wall(const RegionStats& st, double alpha) {
    Wall w;
    w.kind = WallKind::euclidean;
    w.stats = st;
    w.level = alpha;
    w.radius = chi2_quantile(static_cast<int>(st.mean.size()), alpha);
    attach_factor(w);
    return w;
}

inline Wall manhattan_wall(const RegionStats& st, double alpha, double eta) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("wall level must lie in (0, 1)");
    Wall w;
    w.kind = WallKind::manhattan;
    w.stats = st;
    w.level = alpha;
    w.radius = eta;
    attach_factor(w);
    return w;
}

inline Wall fit_wall(WallKind kind, const RegionStats& st, double alpha, std::size_t eta_samples = 100000,
                     std::uint64_t seed = 1) {
    if (kind == WallKind::euclidean) return euclidean_wall(st, alpha);
    Wall w = manhattan_wall(st, alpha, eta_of_alpha(st, alpha, eta_samples, seed));
    w.eta_samples = eta_samples;
    w.eta_seed = seed;
    return w;
}

inline bool euclidean_contains(const Wall& w, const Eigen::VectorXd& x) { return w.mahalanobis2(x) <= w.radius; }
inline bool manhattan_contains(const Wall& w, const Eigen::VectorXd& x) { return w.manhattan_score(x) <= w.radius; }

}  // namespace adclust
