#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>

namespace adclust {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Euclidean distance between rows i and j. Summation runs over dimensions in
/// order so independent implementations can reproduce it bit for bit.
inline double row_distance(const RowMatrix& x, std::size_t i, std::size_t j) {
    const double* a = x.data() + i * static_cast<std::size_t>(x.cols());
    const double* b = x.data() + j * static_cast<std::size_t>(x.cols());
    double s = 0.0;
    for (Eigen::Index d = 0; d < x.cols(); ++d) {
        const double t = a[d] - b[d];
        s += t * t;
    }
    return std::sqrt(s);
}

}  // namespace adclust
