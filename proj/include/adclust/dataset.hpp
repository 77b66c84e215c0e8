#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace adclust {

enum class Label : unsigned char { unlabeled = 0, normal = 1, abnormal = 2 };

inline std::string_view to_string(Label l) {
    switch (l) {
        case Label::normal: return "normal";
        case Label::abnormal: return "abnormal";
        default: return "";
    }
}

inline Label parse_label(std::string_view s) {
    if (s.empty()) return Label::unlabeled;
    if (s == "normal") return Label::normal;
    if (s == "abnormal") return Label::abnormal;
    throw validation_error("unknown label token '" + std::string(s) + "'");
}

/// Ground-truth class of a generated point; `unknown` marks a component with no labels.
enum class Truth : unsigned char { none = 0, normal = 1, abnormal = 2, unknown = 3 };

inline std::string_view to_string(Truth t) {
    switch (t) {
        case Truth::normal: return "normal";
        case Truth::abnormal: return "abnormal";
        case Truth::unknown: return "unknown";
        default: return "";
    }
}

inline Truth parse_truth(std::string_view s) {
    if (s.empty()) return Truth::none;
    if (s == "normal") return Truth::normal;
    if (s == "abnormal") return Truth::abnormal;
    if (s == "unknown") return Truth::unknown;
    throw validation_error("unknown truth token '" + std::string(s) + "'");
}

/// Row-per-point feature matrix with sparse labels.
///
/// `truth` and `component` are optional ground truth carried by generated data;
/// they are empty for ingested data without a truth column.
struct Dataset {
    Eigen::MatrixXd points;
    std::vector<Label> labels;
    std::vector<std::string> feature_names;
    std::vector<Truth> truth;
    std::vector<int> component;

    std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
    std::size_t dims() const { return static_cast<std::size_t>(points.cols()); }
    bool has_truth() const { return !truth.empty(); }

    std::size_t count(Label l) const {
        std::size_t n = 0;
        for (Label x : labels) n += (x == l);
        return n;
    }

    void validate() const {
        if (points.rows() < 1) throw validation_error("dataset has no points");
        if (points.cols() < 1) throw validation_error("dataset has no features");
        if (labels.size() != size()) throw validation_error("label count does not match point count");
        if (!feature_names.empty() && feature_names.size() != dims())
            throw validation_error("feature name count does not match dimension");
        if (!truth.empty() && truth.size() != size())
            throw validation_error("truth count does not match point count");
        for (Eigen::Index i = 0; i < points.rows(); ++i)
            for (Eigen::Index j = 0; j < points.cols(); ++j)
                if (!std::isfinite(points(i, j)))
                    throw validation_error("non-finite value at row " + std::to_string(i + 1) +
                                           ", column " + std::to_string(j + 1));
    }
};

inline Dataset make_dataset(Eigen::MatrixXd pts, std::vector<Label> labels = {}) {
    Dataset d;
    d.points = std::move(pts);
    d.labels = labels.empty() ? std::vector<Label>(d.size(), Label::unlabeled) : std::move(labels);
    for (std::size_t j = 0; j < d.dims(); ++j) d.feature_names.push_back("x" + std::to_string(j + 1));
    return d;
}

}  // namespace adclust
