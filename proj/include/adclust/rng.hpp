#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

#include "error.hpp"

namespace adclust {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent stream for (seed, stream) so parallel consumers never share state.
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

/// Lower Cholesky factor of an SPD matrix; throws when the matrix is not SPD.
inline Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& cov) {
    if (cov.rows() != cov.cols()) throw validation_error("covariance must be square");
    if (!cov.isApprox(cov.transpose(), 1e-12)) throw validation_error("covariance must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw validation_error("covariance is not positive definite");
    return llt.matrixL();
}

/// n draws from N(mean, L L^T), one row per draw.
inline Eigen::MatrixXd sample_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& chol_lower,
                                       std::size_t n, std::mt19937_64& rng) {
    const auto q = mean.size();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), q);
    std::normal_distribution<double> z;
    Eigen::VectorXd u(q);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
        for (Eigen::Index j = 0; j < q; ++j) u(j) = z(rng);
        out.row(i) = (mean + chol_lower * u).transpose();
    }
    return out;
}

}  // namespace adclust
