#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "../dataset.hpp"
#include "../error.hpp"
#include "../synthetic.hpp"

namespace adclust::io {

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\"");
    const auto e = s.find_last_not_of(" \t\"");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

struct IngestOptions {
    std::string label_column = "label";
    std::string truth_column = "truth";
    std::optional<double> label_fraction;  // keep labels on round(fraction * N) rows
    std::uint64_t seed = 1;
};

/// Header row, numeric feature columns, optional label and truth columns.
/// With a label fraction the full labels become truth and only a random subset stays labeled.
inline Dataset read_csv(std::istream& in, const IngestOptions& opt = {}) {
    std::string line;
    if (!std::getline(in, line)) throw validation_error("csv: missing header row");
    const auto header = split_csv_line(line);
    int label_col = -1, truth_col = -1;
    std::vector<std::size_t> feature_cols;
    Dataset ds;
    for (std::size_t j = 0; j < header.size(); ++j) {
        const std::string h = trim(header[j]);
        if (h == opt.label_column) label_col = static_cast<int>(j);
        else if (h == opt.truth_column) truth_col = static_cast<int>(j);
        else {
            feature_cols.push_back(j);
            ds.feature_names.push_back(h);
        }
    }
    if (feature_cols.empty()) throw validation_error("csv: no feature columns");
    std::vector<std::vector<double>> rows;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw validation_error("csv: row " + std::to_string(row_no) + " has " + std::to_string(cells.size()) +
                                   " cells, expected " + std::to_string(header.size()));
        std::vector<double> v;
        for (std::size_t j : feature_cols) {
            const auto d = parse_double(cells[j]);
            if (!d)
                throw validation_error("csv: non-numeric value '" + cells[j] + "' at row " + std::to_string(row_no) +
                                       ", column '" + ds.feature_names[v.size()] + "'");
            if (!std::isfinite(*d))
                throw validation_error("csv: non-finite value at row " + std::to_string(row_no) + ", column '" +
                                       ds.feature_names[v.size()] + "'");
            v.push_back(*d);
        }
        rows.push_back(std::move(v));
        try {
            ds.labels.push_back(label_col >= 0 ? parse_label(trim(cells[static_cast<std::size_t>(label_col)]))
                                               : Label::unlabeled);
            if (truth_col >= 0) ds.truth.push_back(parse_truth(trim(cells[static_cast<std::size_t>(truth_col)])));
        } catch (const validation_error& e) {
            throw validation_error("csv: row " + std::to_string(row_no) + ": " + e.what());
        }
    }
    if (rows.empty()) throw validation_error("csv: no data rows");
    ds.points.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(feature_cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < feature_cols.size(); ++j)
            ds.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];

    if (opt.label_fraction) {
        const double f = *opt.label_fraction;
        if (!(f >= 0.0 && f <= 1.0)) throw validation_error("label_fraction must lie in [0, 1]");
        if (ds.truth.empty())
            for (Label l : ds.labels)
                ds.truth.push_back(l == Label::normal ? Truth::normal : l == Label::abnormal ? Truth::abnormal : Truth::none);
        std::vector<std::size_t> labeled;
        for (std::size_t i = 0; i < ds.size(); ++i)
            if (ds.labels[i] != Label::unlabeled) labeled.push_back(i);
        const auto want = static_cast<std::size_t>(std::llround(f * static_cast<double>(ds.size())));
        auto rng = stream_rng(opt.seed, 0x1abe1);
        const auto keep = choose_indices(labeled.size(), std::min(want, labeled.size()), rng);
        std::vector<Label> kept(ds.size(), Label::unlabeled);
        for (std::size_t k : keep) kept[labeled[k]] = ds.labels[labeled[k]];
        ds.labels = std::move(kept);
    }
    ds.validate();
    return ds;
}

inline Dataset read_csv_file(const std::string& path, const IngestOptions& opt = {}) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open input file '" + path + "'");
    return read_csv(in, opt);
}

inline void write_csv(std::ostream& out, const Dataset& ds) {
    for (std::size_t j = 0; j < ds.dims(); ++j) out << ds.feature_names[j] << ',';
    out << "label";
    if (ds.has_truth()) out << ",truth";
    out << '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = 0; j < ds.dims(); ++j)
            out << format_double(ds.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) << ',';
        out << to_string(ds.labels[i]);
        if (ds.has_truth()) out << ',' << to_string(ds.truth[i]);
        out << '\n';
    }
}

inline void write_csv_file(const std::string& path, const Dataset& ds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("cannot write '" + path + "'");
    write_csv(out, ds);
}

}  // namespace adclust::io
