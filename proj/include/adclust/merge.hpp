#pragma once

#include <boost/pending/disjoint_sets.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <unordered_map>
#include <vector>

#include "geometry.hpp"
#include "grid.hpp"
#include "parallel.hpp"

namespace adclust {

/// Fixed-radius neighbor lookup over a subset of rows, bucketed in cells of side `r`.
class RadiusIndex {
public:
    using Key = std::vector<long long>;
    struct KeyHash {
        std::size_t operator()(const Key& k) const { return boost::hash_range(k.begin(), k.end()); }
    };

    RadiusIndex(const RowMatrix& x, const std::vector<std::size_t>& ids, double r) : x_(x), r_(r) {
        const std::size_t q = static_cast<std::size_t>(x.cols());
        double offsets = 1.0;
        for (std::size_t j = 0; j < q; ++j) offsets *= 3.0;
        for (std::size_t id : ids) {
            Key k(q);
            for (std::size_t j = 0; j < q; ++j)
                k[j] = static_cast<long long>(std::floor(x(static_cast<Eigen::Index>(id), static_cast<Eigen::Index>(j)) / r_));
            auto [it, fresh] = index_.try_emplace(k, keys_.size());
            if (fresh) {
                keys_.push_back(k);
                buckets_.emplace_back();
            }
            buckets_[it->second].push_back(id);
        }
        enumerate_ = offsets <= static_cast<double>(keys_.size());
    }

    /// Calls f(o) for every indexed row o with distance(p, o) <= r, p included if indexed.
    template <class F>
    void for_each_within(std::size_t p, F&& f) const {
        const std::size_t q = static_cast<std::size_t>(x_.cols());
        Key home(q);
        for (std::size_t j = 0; j < q; ++j)
            home[j] = static_cast<long long>(std::floor(x_(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j)) / r_));
        auto visit = [&](std::size_t b) {
            for (std::size_t o : buckets_[b])
                if (row_distance(x_, p, o) <= r_) f(o);
        };
        if (enumerate_) {
            Key k(q);
            visit_offsets(home, k, 0, visit);
        } else {
            for (std::size_t b = 0; b < keys_.size(); ++b)
                if (adjacent(home, keys_[b])) visit(b);
        }
    }

private:
    static bool adjacent(const Key& a, const Key& b) {
        for (std::size_t j = 0; j < a.size(); ++j)
            if (a[j] - b[j] > 1 || b[j] - a[j] > 1) return false;
        return true;
    }

    template <class V>
    void visit_offsets(const Key& home, Key& k, std::size_t j, V& visit) const {
        if (j == home.size()) {
            auto it = index_.find(k);
            if (it != index_.end()) visit(it->second);
            return;
        }
        for (int d = -1; d <= 1; ++d) {
            k[j] = home[j] + d;
            visit_offsets(home, k, j + 1, visit);
        }
    }

    const RowMatrix& x_;
    double r_;
    bool enumerate_ = true;
    std::vector<Key> keys_;
    std::vector<std::vector<std::size_t>> buckets_;
    std::unordered_map<Key, std::size_t, KeyHash> index_;
};

struct MergeResult {
    std::vector<std::vector<std::size_t>> clusters;  // sorted members, clusters ordered by first member
    std::vector<std::size_t> unassigned;             // sorted
};

/// Density merge over `ids`. Points with stat >= dt are seeds. A seed links to every
/// point of `ids` within rt; non-seeds never link to each other, but one non-seed near
/// two seeds joins them. Components holding a seed are the clusters.
///
/// `stat` is indexed by global row id.
inline MergeResult merge(const RowMatrix& x, std::vector<std::size_t> ids, const std::vector<double>& stat, double dt,
                         double rt) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    MergeResult out;
    if (ids.empty()) return out;
    const std::size_t m = ids.size();
    std::unordered_map<std::size_t, std::size_t> local;
    for (std::size_t i = 0; i < m; ++i) local.emplace(ids[i], i);
    std::vector<std::size_t> seeds;
    for (std::size_t i = 0; i < m; ++i)
        if (stat[ids[i]] >= dt) seeds.push_back(i);

    std::vector<std::vector<std::size_t>> links(seeds.size());
    if (rt > 0.0 && !seeds.empty()) {
        const RadiusIndex index(x, ids, rt);
        parallel_for_index(seeds.size(), [&](std::size_t s) {
            index.for_each_within(ids[seeds[s]], [&](std::size_t o) { links[s].push_back(local.at(o)); });
        });
    }

    std::vector<std::size_t> rank(m), parent(m);
    boost::disjoint_sets<std::size_t*, std::size_t*> sets(rank.data(), parent.data());
    for (std::size_t i = 0; i < m; ++i) sets.make_set(i);
    for (std::size_t s = 0; s < seeds.size(); ++s)
        for (std::size_t o : links[s]) sets.union_set(seeds[s], o);

    std::vector<bool> seeded(m, false);
    for (std::size_t s : seeds) seeded[sets.find_set(s)] = true;
    std::map<std::size_t, std::size_t> slot;  // root -> cluster index, in first-member order
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t r = sets.find_set(i);
        if (!seeded[r]) {
            out.unassigned.push_back(ids[i]);
            continue;
        }
        auto [it, fresh] = slot.try_emplace(r, out.clusters.size());
        if (fresh) out.clusters.emplace_back();
        out.clusters[it->second].push_back(ids[i]);
    }
    return out;
}

}  // namespace adclust
