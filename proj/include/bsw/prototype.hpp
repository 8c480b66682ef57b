#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bsw/beats.hpp"
#include "bsw/error.hpp"
#include "bsw/matching.hpp"
#include "bsw/numeric.hpp"
#include "bsw/record.hpp"
#include "bsw/warp.hpp"

namespace bsw {

// A merged representative beat. occurrence counts how many input mean beats
// (one per record) it absorbed; lineage lists their record ids.
struct Prototype {
    Beat samples;
    std::size_t occurrence = 1;
    std::vector<std::string> lineage;
};

struct PrototypeConfig {
    double r_threshold_scale = 0.015;  // times the pair's amplitude range
    double s_threshold = 20.0;         // samples
    int max_rounds = 20;
};

// Gradient-based weights for the weighted std of r: the QRS carries the
// steepest slopes, so a 25-sample moving average of |f'| + |g'| concentrates
// the weight there. Normalized to sum 1.
inline std::vector<double> affinity_weights(const Beat& f, const Beat& g) {
    const std::size_t n = f.size();
    if (g.size() != n || n < 2)
        fail(ErrorCode::LengthMismatch, "affinity weights need equal-length beats");
    std::vector<double> grad(n, 0.0);
    for (std::size_t t = 0; t + 1 < n; ++t)
        grad[t] = std::abs(f[t + 1] - f[t]) + std::abs(g[t + 1] - g[t]);
    grad[n - 1] = grad[n - 2];
    std::vector<double> w = moving_average(grad, 25);
    double total = 0.0;
    for (double v : w) total += v;
    if (total <= 0.0) {
        // two flat beats: fall back to uniform weights
        for (double& v : w) v = 1.0 / static_cast<double>(n);
        return w;
    }
    for (double& v : w) v /= total;
    return w;
}

// Scalar distance of one warp: weighted std of the amplitude ratio plus the
// (unweighted) std of the shift in samples.
inline double warp_distance(const WarpResult& result, const std::vector<double>& weights) {
    return weighted_stddev(result.r, weights) + stddev(result.s);
}

// Affinity distance between two beats: warp in both directions and average
// the two scalar distances, which makes it exactly symmetric.
inline double affinity(const Beat& f, const Beat& g, const WarpConfig& cfg = {}) {
    const std::vector<double> w = affinity_weights(f, g);
    const double fwd = warp_distance(warp(f, g, cfg), w);
    const double bwd = warp_distance(warp(g, f, cfg), w);
    return 0.5 * (fwd + bwd);
}

// Per-round accounting, mostly for tests and progress logs.
struct LibraryRound {
    std::size_t items_before = 0;
    std::size_t merges = 0;
    std::size_t items_after = 0;
};

namespace detail {

struct LibraryItem {
    Prototype proto;
    std::size_t id = 0;  // stable across rounds, keys the affinity cache
};

inline bool merge_allowed(const Beat& f, const Beat& g, const WarpResult& wr,
                          const std::vector<double>& weights,
                          const PrototypeConfig& cfg) {
    double lo = f[0], hi = f[0];
    for (double v : f) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double v : g) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double amplitude_range = hi - lo;
    const double r_spread = weighted_stddev(wr.r, weights);
    const double s_spread = stddev(wr.s);
    return r_spread <= cfg.r_threshold_scale * amplitude_range &&
           s_spread <= cfg.s_threshold;
}

}  // namespace detail

// Iterated pairing and merging: each round computes pairwise affinities,
// pairs items up by maximum-weight matching, and merges every matched pair
// that passes both spread thresholds. Items that fail the gate or stay
// unmatched pass through unchanged. Stops on a round with zero merges, when
// a single item remains, or after cfg.max_rounds. Output is sorted by
// descending occurrence.
inline std::vector<Prototype> build_library(const std::vector<MeanBeat>& candidates,
                                            const WarpConfig& warp_cfg = {},
                                            const PrototypeConfig& cfg = {},
                                            std::vector<LibraryRound>* rounds = nullptr) {
    if (candidates.empty())
        fail(ErrorCode::EmptyInput, "library construction needs at least 1 candidate");
    std::vector<detail::LibraryItem> items;
    items.reserve(candidates.size());
    std::size_t next_id = 0;
    for (const MeanBeat& mb : candidates) {
        detail::LibraryItem item;
        item.proto.samples = mb.samples;
        item.proto.occurrence = 1;
        item.proto.lineage = {mb.record_id};
        item.id = next_id++;
        items.push_back(std::move(item));
    }

    // distances between surviving items don't change across rounds
    std::map<std::pair<std::size_t, std::size_t>, double> cache;

    for (int round = 0; round < cfg.max_rounds && items.size() >= 2; ++round) {
        const std::size_t n = items.size();
        AffinityMatrix dist(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const auto key = std::minmax(items[i].id, items[j].id);
                auto it = cache.find(key);
                if (it == cache.end())
                    it = cache
                             .emplace(key, affinity(items[i].proto.samples,
                                                    items[j].proto.samples, warp_cfg))
                             .first;
                dist.set(i, j, it->second);
            }
        }
        const MatchingResult matching = max_weight_matching(dist);

        std::vector<detail::LibraryItem> next;
        next.reserve(n);
        std::vector<char> consumed(n, 0);
        std::size_t merges = 0;
        for (const auto& [i, j] : matching.pairs) {
            const Beat& f = items[i].proto.samples;
            const Beat& g = items[j].proto.samples;
            const std::vector<double> weights = affinity_weights(f, g);
            const WarpResult wr = warp(f, g, warp_cfg);
            if (!detail::merge_allowed(f, g, wr, weights, cfg)) continue;
            detail::LibraryItem merged;
            merged.proto.samples = merge_pair(f, g, wr);
            merged.proto.occurrence =
                items[i].proto.occurrence + items[j].proto.occurrence;
            merged.proto.lineage = items[i].proto.lineage;
            merged.proto.lineage.insert(merged.proto.lineage.end(),
                                        items[j].proto.lineage.begin(),
                                        items[j].proto.lineage.end());
            merged.id = next_id++;
            next.push_back(std::move(merged));
            consumed[i] = consumed[j] = 1;
            ++merges;
        }
        for (std::size_t v = 0; v < n; ++v)
            if (!consumed[v]) next.push_back(std::move(items[v]));
        items.swap(next);
        if (rounds) rounds->push_back({n, merges, items.size()});
        if (merges == 0) break;
    }

    std::vector<Prototype> out;
    out.reserve(items.size());
    for (auto& item : items) out.push_back(std::move(item.proto));
    std::stable_sort(out.begin(), out.end(),
                     [](const Prototype& a, const Prototype& b) {
                         return a.occurrence > b.occurrence;
                     });
    return out;
}

// All 24 libraries: one per (class, lead). Indexed by class first.
struct PrototypeLibrarySet {
    std::array<std::array<std::vector<Prototype>, kLeadCount>, 2> libraries;

    static std::size_t class_index(ClassLabel label) {
        switch (label) {
            case ClassLabel::Normal: return 0;
            case ClassLabel::LVH: return 1;
            default:
                fail(ErrorCode::InvalidRecord, "library classes are Normal and LVH");
        }
    }

    std::vector<Prototype>& at(ClassLabel label, LeadId lead) {
        return libraries[class_index(label)][lead_index(lead)];
    }
    const std::vector<Prototype>& at(ClassLabel label, LeadId lead) const {
        return libraries[class_index(label)][lead_index(lead)];
    }
};

// Mean beats of one eligible record, all 12 leads, plus its class label.
struct RecordMeanBeats {
    std::string record_id;
    ClassLabel label = ClassLabel::Unknown;
    std::array<Beat, kLeadCount> leads;
};

// Runs build_library independently for each of the 24 (class, lead) pools.
// Both classes must be represented among the inputs.
inline PrototypeLibrarySet build_all_libraries(
    const std::vector<RecordMeanBeats>& records, const WarpConfig& warp_cfg = {},
    const PrototypeConfig& cfg = {}) {
    for (ClassLabel label : {ClassLabel::Normal, ClassLabel::LVH}) {
        const bool present =
            std::any_of(records.begin(), records.end(),
                        [&](const RecordMeanBeats& r) { return r.label == label; });
        if (!present)
            fail(ErrorCode::EmptyInput,
                 std::string("no eligible records for class ") + class_name(label));
    }
    PrototypeLibrarySet set;
    for (ClassLabel label : {ClassLabel::Normal, ClassLabel::LVH}) {
        for (LeadId lead : kAllLeads) {
            std::vector<MeanBeat> pool;
            for (const RecordMeanBeats& r : records) {
                if (r.label != label) continue;
                MeanBeat mb;
                mb.record_id = r.record_id;
                mb.lead = lead;
                mb.samples = r.leads[lead_index(lead)];
                pool.push_back(std::move(mb));
            }
            set.at(label, lead) = build_library(pool, warp_cfg, cfg);
        }
    }
    return set;
}

}  // namespace bsw
