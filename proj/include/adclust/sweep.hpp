#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "adclust.hpp"
#include "io/config.hpp"
#include "io/csv.hpp"
#include "io/report.hpp"
#include "parallel.hpp"
#include "synthetic.hpp"

namespace adclust {

enum class SweepKind { weight, wall };

inline SweepKind parse_sweep_kind(std::string_view s) {
    if (s == "weight") return SweepKind::weight;
    if (s == "wall") return SweepKind::wall;
    throw validation_error("unknown sweep kind '" + std::string(s) + "'");
}

/// Labels on round(fraction * N) points drawn from those with a normal/abnormal truth.
inline Dataset resample_labels(Dataset ds, double fraction, std::uint64_t seed) {
    if (!ds.has_truth()) throw validation_error("label re-sampling needs a truth column");
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (ds.truth[i] == Truth::normal || ds.truth[i] == Truth::abnormal) pool.push_back(i);
    const auto want = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ds.size())));
    auto rng = stream_rng(seed, 0x5eed);
    ds.labels.assign(ds.size(), Label::unlabeled);
    for (std::size_t k : choose_indices(pool.size(), std::min(want, pool.size()), rng))
        ds.labels[pool[k]] = ds.truth[pool[k]] == Truth::normal ? Label::normal : Label::abnormal;
    return ds;
}

struct SweepRow {
    std::string name;
    std::size_t run = 0;
    double k = 0.0;
    double alpha = 0.0;
    std::size_t mixed = 0;
    std::size_t outlier = 0;
    double abnormal_fraction_mixed = 0.0;
    double wall_purity = 0.0;
    std::size_t walls = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<io::json> reports;
};

inline SweepResult run_sweep(const Dataset& base, const AdclustParams& params, const io::SweepConfig& cfg,
                             SweepKind kind, const std::string& input) {
    struct Point {
        std::size_t run;
        double k, alpha;
    };
    std::vector<Point> grid;
    for (std::size_t run = 0; run < cfg.runs; ++run) {
        if (kind == SweepKind::weight)
            for (double k : cfg.k_values) grid.push_back({run, k, params.alpha});
        else
            for (double a : cfg.alpha_values)
                for (double k : cfg.wall_k_values) grid.push_back({run, k, a});
    }
    SweepResult out;
    out.rows.resize(grid.size());
    out.reports.resize(grid.size());
    parallel_for_index(grid.size(), [&](std::size_t g) {
        const Point& pt = grid[g];
        AdclustParams p = params;
        p.k = pt.k;
        p.alpha = pt.alpha;
        p.seed = params.seed + pt.run;
        const Dataset ds = cfg.label_fraction ? resample_labels(base, *cfg.label_fraction, p.seed) : base;
        const ClusteringResult r = run_adclust(ds, p);
        const ClusteringMetrics m = compute_metrics(ds, r);
        SweepRow& row = out.rows[g];
        row.name = "run" + std::to_string(pt.run) + "_k" + io::format_double(pt.k) + "_alpha" + io::format_double(pt.alpha);
        row.run = pt.run;
        row.k = pt.k;
        row.alpha = pt.alpha;
        row.mixed = m.regions.at(Region::mixed_overlap).count;
        row.outlier = m.regions.at(Region::outlier).count;
        row.abnormal_fraction_mixed = m.regions.at(Region::mixed_overlap).abnormal_fraction();
        row.wall_purity = m.wall_purity();
        row.walls = r.walls.size();
        out.reports[g] = io::cluster_report(ds, p, r, input);
    });
    return out;
}

inline void write_sweep_csv(std::ostream& out, const SweepResult& s) {
    out << "run,k,alpha,mixed,outlier,abnormal_fraction_mixed,wall_purity,walls\n";
    auto num = [](double v) { return std::isfinite(v) ? io::format_double(v) : std::string(); };
    for (const auto& r : s.rows)
        out << r.run << ',' << io::format_double(r.k) << ',' << io::format_double(r.alpha) << ',' << r.mixed << ','
            << r.outlier << ',' << num(r.abnormal_fraction_mixed) << ',' << num(r.wall_purity) << ',' << r.walls << '\n';
}

}  // namespace adclust
