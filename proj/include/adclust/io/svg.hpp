#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "../adclust.hpp"
#include "csv.hpp"

namespace adclust::io {

inline const char* region_color(Region r) {
    switch (r) {
        case Region::normal_core: return "#1f4fd1";
        case Region::abnormal_region: return "#f28e1c";
        case Region::mixed_overlap: return "#8e44ad";
        case Region::unknown_cluster: return "#e6c619";
        default: return "#000000";
    }
}

/// Boundary polygon of a two-dimensional wall in data coordinates.
inline std::vector<Eigen::Vector2d> wall_outline(const Wall& w, int steps = 180) {
    std::vector<Eigen::Vector2d> pts;
    const Eigen::Vector2d mu = w.stats.mean.head<2>();
    if (w.kind == WallKind::euclidean) {
        const Eigen::Matrix2d l = w.chol.topLeftCorner<2, 2>();
        const double r = std::sqrt(w.radius);
        for (int i = 0; i < steps; ++i) {
            const double a = 2.0 * std::numbers::pi * i / steps;
            pts.push_back(mu + r * l * Eigen::Vector2d(std::cos(a), std::sin(a)));
        }
    } else {
        const double ex = w.radius * w.stats.sd(0), ey = w.radius * w.stats.sd(1);
        pts = {mu + Eigen::Vector2d(ex, 0), mu + Eigen::Vector2d(0, ey), mu - Eigen::Vector2d(ex, 0),
               mu - Eigen::Vector2d(0, ey)};
    }
    return pts;
}

/// Scatter of a two-dimensional result: regions by color, walls in red.
inline std::string scatter_svg(const Dataset& ds, const ClusteringResult& r, int size = 640) {
    const double pad = 20.0;
    double x0 = ds.points.col(0).minCoeff(), x1 = ds.points.col(0).maxCoeff();
    double y0 = ds.points.col(1).minCoeff(), y1 = ds.points.col(1).maxCoeff();
    for (const auto& w : r.walls)
        for (const auto& p : wall_outline(w)) {
            x0 = std::min(x0, p.x()), x1 = std::max(x1, p.x());
            y0 = std::min(y0, p.y()), y1 = std::max(y1, p.y());
        }
    const double span = std::max({x1 - x0, y1 - y0, 1e-12});
    const double scale = (size - 2 * pad) / span;
    auto px = [&](double x) { return format_double(std::round((pad + (x - x0) * scale) * 100.0) / 100.0); };
    auto py = [&](double y) { return format_double(std::round((size - pad - (y - y0) * scale) * 100.0) / 100.0); };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\" viewBox=\"0 0 "
      << size << ' ' << size << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        s << "<circle cx=\"" << px(ds.points(ii, 0)) << "\" cy=\"" << py(ds.points(ii, 1)) << "\" r=\""
          << (ds.labels[i] == Label::unlabeled ? "2.5" : "4.5") << "\" fill=\"" << region_color(r.composition.region[i])
          << "\"" << (ds.labels[i] == Label::unlabeled ? "" : " stroke=\"black\"") << "/>\n";
    }
    for (const auto& w : r.walls) {
        s << "<polygon fill=\"none\" stroke=\"red\" stroke-width=\"2\" points=\"";
        bool first = true;
        for (const auto& p : wall_outline(w)) {
            s << (first ? "" : " ") << px(p.x()) << ',' << py(p.y());
            first = false;
        }
        s << "\"/>\n";
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace adclust::io
