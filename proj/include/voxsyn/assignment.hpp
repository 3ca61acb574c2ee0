#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "voxsyn/error.hpp"

namespace voxsyn {

// Solution of a rectangular linear sum assignment problem. col4row[r] is the
// column assigned to row r (every row is assigned when nr <= nc); row4col[c]
// is the inverse, -1 for unassigned columns.
struct AssignmentResult {
    std::vector<std::int64_t> col4row;
    std::vector<std::int64_t> row4col;
};

namespace detail {

// One Dijkstra-style shortest augmenting path from free row `start` over the
// reduced-cost graph. Returns the sink column; `min_val` receives the path
// cost used for the dual update. On ties the scan prefers an unassigned
// column so augmentation terminates as early as possible.
inline std::int64_t augmenting_path(std::int64_t nc, const std::vector<double>& cost,
                                    std::vector<double>& u, std::vector<double>& v,
                                    std::vector<std::int64_t>& path,
                                    std::vector<std::int64_t>& row4col,
                                    std::vector<double>& shortest_path_costs,
                                    std::int64_t start, std::vector<char>& SR,
                                    std::vector<char>& SC,
                                    std::vector<std::int64_t>& remaining, double& min_val) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    min_val = 0.0;
    std::int64_t num_remaining = nc;
    for (std::int64_t it = 0; it < nc; ++it)
        remaining[static_cast<std::size_t>(it)] = nc - it - 1;
    std::fill(SR.begin(), SR.end(), char{0});
    std::fill(SC.begin(), SC.end(), char{0});
    std::fill(shortest_path_costs.begin(), shortest_path_costs.end(), inf);

    std::int64_t sink = -1;
    std::int64_t i = start;
    while (sink == -1) {
        std::int64_t index = -1;
        double lowest = inf;
        SR[static_cast<std::size_t>(i)] = 1;
        for (std::int64_t it = 0; it < num_remaining; ++it) {
            const std::int64_t j = remaining[static_cast<std::size_t>(it)];
            const double r = min_val +
                             cost[static_cast<std::size_t>(i * nc + j)] -
                             u[static_cast<std::size_t>(i)] - v[static_cast<std::size_t>(j)];
            if (r < shortest_path_costs[static_cast<std::size_t>(j)]) {
                path[static_cast<std::size_t>(j)] = i;
                shortest_path_costs[static_cast<std::size_t>(j)] = r;
            }
            const double spc = shortest_path_costs[static_cast<std::size_t>(j)];
            if (spc < lowest ||
                (spc == lowest && row4col[static_cast<std::size_t>(j)] == -1)) {
                lowest = spc;
                index = it;
            }
        }
        min_val = lowest;
        if (min_val == inf) return -1; // infeasible
        const std::int64_t j = remaining[static_cast<std::size_t>(index)];
        if (row4col[static_cast<std::size_t>(j)] == -1)
            sink = j;
        else
            i = row4col[static_cast<std::size_t>(j)];
        SC[static_cast<std::size_t>(j)] = 1;
        remaining[static_cast<std::size_t>(index)] =
            remaining[static_cast<std::size_t>(--num_remaining)];
    }
    return sink;
}

inline AssignmentResult solve_rows_le_cols(std::int64_t nr, std::int64_t nc,
                                           const std::vector<double>& cost) {
    std::vector<double> u(static_cast<std::size_t>(nr), 0.0);
    std::vector<double> v(static_cast<std::size_t>(nc), 0.0);
    std::vector<double> shortest_path_costs(static_cast<std::size_t>(nc));
    std::vector<std::int64_t> path(static_cast<std::size_t>(nc), -1);
    std::vector<std::int64_t> col4row(static_cast<std::size_t>(nr), -1);
    std::vector<std::int64_t> row4col(static_cast<std::size_t>(nc), -1);
    std::vector<char> SR(static_cast<std::size_t>(nr));
    std::vector<char> SC(static_cast<std::size_t>(nc));
    std::vector<std::int64_t> remaining(static_cast<std::size_t>(nc));

    for (std::int64_t cur_row = 0; cur_row < nr; ++cur_row) {
        double min_val = 0.0;
        const std::int64_t sink =
            augmenting_path(nc, cost, u, v, path, row4col, shortest_path_costs, cur_row, SR,
                            SC, remaining, min_val);
        if (sink < 0) throw validation_error("assignment: infeasible cost matrix");

        u[static_cast<std::size_t>(cur_row)] += min_val;
        for (std::int64_t i = 0; i < nr; ++i)
            if (SR[static_cast<std::size_t>(i)] && i != cur_row)
                u[static_cast<std::size_t>(i)] +=
                    min_val - shortest_path_costs[static_cast<std::size_t>(
                                  col4row[static_cast<std::size_t>(i)])];
        for (std::int64_t j = 0; j < nc; ++j)
            if (SC[static_cast<std::size_t>(j)])
                v[static_cast<std::size_t>(j)] -=
                    min_val - shortest_path_costs[static_cast<std::size_t>(j)];

        std::int64_t j = sink;
        while (true) {
            const std::int64_t i = path[static_cast<std::size_t>(j)];
            row4col[static_cast<std::size_t>(j)] = i;
            std::swap(col4row[static_cast<std::size_t>(i)], j);
            if (i == cur_row) break;
        }
    }
    AssignmentResult out;
    out.col4row = std::move(col4row);
    out.row4col = std::move(row4col);
    return out;
}

} // namespace detail

// Minimum-cost assignment on a dense nr x nc matrix (row-major). All finite
// costs are required. The assignment covers min(nr, nc) pairs.
inline AssignmentResult solve_assignment(std::int64_t nr, std::int64_t nc,
                                         const std::vector<double>& cost) {
    if (nr < 0 || nc < 0 || static_cast<std::int64_t>(cost.size()) != nr * nc)
        throw validation_error("assignment: cost matrix size mismatch");
    if (nr == 0 || nc == 0) {
        AssignmentResult out;
        out.col4row.assign(static_cast<std::size_t>(nr), -1);
        out.row4col.assign(static_cast<std::size_t>(nc), -1);
        return out;
    }
    if (nr <= nc) return detail::solve_rows_le_cols(nr, nc, cost);

    // transpose, solve, swap the two maps back
    std::vector<double> t(static_cast<std::size_t>(nr * nc));
    for (std::int64_t r = 0; r < nr; ++r)
        for (std::int64_t c = 0; c < nc; ++c)
            t[static_cast<std::size_t>(c * nr + r)] = cost[static_cast<std::size_t>(r * nc + c)];
    AssignmentResult inner = detail::solve_rows_le_cols(nc, nr, t);
    AssignmentResult out;
    out.col4row = std::move(inner.row4col);
    out.row4col = std::move(inner.col4row);
    return out;
}

} // namespace voxsyn
