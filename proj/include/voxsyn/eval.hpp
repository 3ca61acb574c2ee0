#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "voxsyn/assignment.hpp"
#include "voxsyn/error.hpp"
#include "voxsyn/points.hpp"

namespace voxsyn {

// Costs at or above the match threshold are replaced by this sentinel before
// solving, so the solver maximises the number of valid matches first and only
// then minimises their total distance. Must dwarf any real distance sum.
inline constexpr double kInvalidMatchCost = 1e12;

enum class MatchingMode {
    clamped, // clamp invalid costs to the sentinel before solving (default)
    posthoc, // solve on raw costs; threshold applied only as the TP test
};

inline std::string to_string(MatchingMode m) {
    return m == MatchingMode::clamped ? "clamped" : "posthoc";
}

inline MatchingMode matching_mode_from_string(const std::string& s) {
    if (s == "clamped") return MatchingMode::clamped;
    if (s == "posthoc") return MatchingMode::posthoc;
    throw validation_error("unknown matching mode: " + s);
}

struct SiteMatch {
    std::int64_t detected_id = 0;
    std::int64_t truth_id = 0;
    double distance_voxels = 0.0;
};

struct MatchResult {
    std::vector<SiteMatch> matches; // every entry counted by tp has distance < threshold
    std::vector<std::int64_t> unmatched_detected;
    std::vector<std::int64_t> unmatched_truth;
    std::int64_t tp = 0, fp = 0, fn = 0;
    double threshold_voxels = 0.0;
};

inline double f1(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
    if (tp < 0 || fp < 0 || fn < 0) throw validation_error("f1: counts must be >= 0");
    const std::int64_t denom = 2 * tp + fp + fn;
    if (denom == 0) return 0.0;
    return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

namespace detail {

// Shared by solver and tests: the canonical order for summing matched costs,
// so totals compare exactly across independent implementations.
inline double total_matched_cost(std::vector<SiteMatch> matches) {
    std::sort(matches.begin(), matches.end(), [](const SiteMatch& a, const SiteMatch& b) {
        if (a.detected_id != b.detected_id) return a.detected_id < b.detected_id;
        return a.truth_id < b.truth_id;
    });
    double total = 0.0;
    for (const auto& m : matches) total += m.distance_voxels;
    return total;
}

// Generic matcher over an explicit cost matrix. valid(r, c) marks pairs whose
// cost passed the threshold test; raw_cost is the reported distance.
template <typename CostFn, typename ValidFn, typename DetIdFn, typename TruthIdFn>
MatchResult match_with_costs(std::int64_t nd, std::int64_t ng, double threshold,
                             MatchingMode mode, CostFn&& raw_cost, ValidFn&& valid,
                             DetIdFn&& det_id, TruthIdFn&& truth_id) {
    MatchResult result;
    result.threshold_voxels = threshold;
    std::vector<char> det_used(static_cast<std::size_t>(nd), 0);
    std::vector<char> truth_used(static_cast<std::size_t>(ng), 0);
    if (nd > 0 && ng > 0) {
        std::vector<double> cost(static_cast<std::size_t>(nd * ng));
        for (std::int64_t r = 0; r < nd; ++r)
            for (std::int64_t c = 0; c < ng; ++c) {
                const double raw = raw_cost(r, c);
                const bool ok = valid(r, c);
                cost[static_cast<std::size_t>(r * ng + c)] =
                    (mode == MatchingMode::clamped && !ok) ? kInvalidMatchCost : raw;
            }
        const AssignmentResult sol = solve_assignment(nd, ng, cost);
        for (std::int64_t r = 0; r < nd; ++r) {
            const std::int64_t c = sol.col4row[static_cast<std::size_t>(r)];
            if (c < 0) continue;
            const bool ok = valid(r, c);
            if (ok) {
                result.matches.push_back({det_id(r), truth_id(c), raw_cost(r, c)});
                det_used[static_cast<std::size_t>(r)] = 1;
                truth_used[static_cast<std::size_t>(c)] = 1;
                ++result.tp;
            } else if (mode == MatchingMode::posthoc) {
                // assignment itself is reported even when it fails the test
                result.matches.push_back({det_id(r), truth_id(c), raw_cost(r, c)});
                det_used[static_cast<std::size_t>(r)] = 1;
                truth_used[static_cast<std::size_t>(c)] = 1;
            }
        }
    }
    for (std::int64_t r = 0; r < nd; ++r)
        if (!det_used[static_cast<std::size_t>(r)])
            result.unmatched_detected.push_back(det_id(r));
    for (std::int64_t c = 0; c < ng; ++c)
        if (!truth_used[static_cast<std::size_t>(c)])
            result.unmatched_truth.push_back(truth_id(c));
    result.fp = nd - result.tp;
    result.fn = ng - result.tp;
    return result;
}

} // namespace detail

// Minimum-cost one-to-one matching of detected sites against ground truth on
// the Euclidean cost matrix. A matched pair counts as a true positive iff its
// distance is strictly below threshold_voxels; fp = |detected| - tp and
// fn = |truth| - tp.
inline MatchResult match_sites(const PointSet& detected, const PointSet& truth,
                               double threshold_voxels = 120.0,
                               MatchingMode mode = MatchingMode::clamped) {
    if (!(threshold_voxels > 0.0))
        throw validation_error("match_sites: threshold must be > 0");
    const auto nd = static_cast<std::int64_t>(detected.points.size());
    const auto ng = static_cast<std::int64_t>(truth.points.size());
    auto raw = [&](std::int64_t r, std::int64_t c) {
        return distance(detected.points[static_cast<std::size_t>(r)],
                        truth.points[static_cast<std::size_t>(c)]);
    };
    auto valid = [&](std::int64_t r, std::int64_t c) { return raw(r, c) < threshold_voxels; };
    auto det_id = [&](std::int64_t r) { return detected.points[static_cast<std::size_t>(r)].id; };
    auto truth_id = [&](std::int64_t c) { return truth.points[static_cast<std::size_t>(c)].id; };
    return detail::match_with_costs(nd, ng, threshold_voxels, mode, raw, valid, det_id,
                                    truth_id);
}

// A pair set together with the point sets its ids refer to.
struct PairedVolume {
    const SynapsePairSet* pairs = nullptr;
    const PointSet* pre = nullptr;
    const PointSet* post = nullptr;
};

// One-to-one matching of detected synapse pairs against truth pairs. The cost
// of matching two pairs is the pre-pre distance plus the post-post distance;
// a match is a true positive only when both legs are individually below the
// threshold. Match ids are indices into the respective pair lists.
inline MatchResult match_pairs(const PairedVolume& detected, const PairedVolume& truth,
                               double threshold_voxels = 120.0,
                               MatchingMode mode = MatchingMode::clamped) {
    if (!(threshold_voxels > 0.0))
        throw validation_error("match_pairs: threshold must be > 0");
    if (!detected.pairs || !detected.pre || !detected.post || !truth.pairs || !truth.pre ||
        !truth.post)
        throw validation_error("match_pairs: missing pair or point sets");

    auto index_points = [](const PointSet& ps) {
        std::unordered_map<std::int64_t, const Point*> m;
        for (const auto& p : ps.points) m[p.id] = &p;
        return m;
    };
    const auto det_pre = index_points(*detected.pre);
    const auto det_post = index_points(*detected.post);
    const auto tru_pre = index_points(*truth.pre);
    const auto tru_post = index_points(*truth.post);
    auto lookup = [](const std::unordered_map<std::int64_t, const Point*>& m, std::int64_t id,
                     const char* what) -> const Point& {
        const auto it = m.find(id);
        if (it == m.end())
            throw validation_error(std::string("match_pairs: pair references unknown ") +
                                   what + " id " + std::to_string(id));
        return *it->second;
    };

    const auto nd = static_cast<std::int64_t>(detected.pairs->pairs.size());
    const auto ng = static_cast<std::int64_t>(truth.pairs->pairs.size());
    auto legs = [&](std::int64_t r, std::int64_t c) {
        const SynapsePair& dp = detected.pairs->pairs[static_cast<std::size_t>(r)];
        const SynapsePair& tp_ = truth.pairs->pairs[static_cast<std::size_t>(c)];
        const double dpre = distance(lookup(det_pre, dp.pre_id, "pre"),
                                     lookup(tru_pre, tp_.pre_id, "pre"));
        const double dpost = distance(lookup(det_post, dp.post_id, "post"),
                                      lookup(tru_post, tp_.post_id, "post"));
        return std::pair<double, double>(dpre, dpost);
    };
    auto raw = [&](std::int64_t r, std::int64_t c) {
        const auto [dpre, dpost] = legs(r, c);
        return dpre + dpost;
    };
    auto valid = [&](std::int64_t r, std::int64_t c) {
        const auto [dpre, dpost] = legs(r, c);
        return dpre < threshold_voxels && dpost < threshold_voxels;
    };
    auto det_id = [](std::int64_t r) { return r; };
    auto truth_id = [](std::int64_t c) { return c; };
    return detail::match_with_costs(nd, ng, threshold_voxels, mode, raw, valid, det_id,
                                    truth_id);
}

struct DegreeHistogram {
    std::map<std::int64_t, std::int64_t> exact;      // fan-out -> number of pre sites
    std::map<std::string, std::int64_t> bucketed;    // "1".."4", "5+"
    std::int64_t distinct_pre = 0;
};

// Polyadic fan-out statistics: how many pre sites drive k post sites each.
inline DegreeHistogram degree_histogram(const SynapsePairSet& pairs) {
    DegreeHistogram out;
    std::map<std::int64_t, std::int64_t> fanout;
    for (const auto& p : pairs.pairs) ++fanout[p.pre_id];
    out.distinct_pre = static_cast<std::int64_t>(fanout.size());
    for (const auto& [pre_id, k] : fanout) {
        (void)pre_id;
        ++out.exact[k];
        const std::string key = k >= 5 ? "5+" : std::to_string(k);
        ++out.bucketed[key];
    }
    return out;
}

} // namespace voxsyn
