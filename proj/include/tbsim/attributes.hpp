#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "tbsim/platform.hpp"
#include "tbsim/taskgraph.hpp"

namespace tbsim {

// All vectors here are indexed by task position (graph.tasks order).

// Number of distinct transitive descendants (the task itself excluded).
// The default entry point runs the layer-parallel OpenMP kernel; the _serial
// variant is the reference implementation and must produce identical output.
std::vector<std::int64_t> compute_inspiring_ability(const TaskGraph& g);
std::vector<std::int64_t> compute_inspiring_ability_serial(const TaskGraph& g);

// Number of descendants whose worst-case completion offset after this task
// finishes is <= unit_time_ms. The offset of d is the maximum over dependency
// paths t -> ... -> d of the sum of GPU execution times of the path's tasks,
// excluding t itself (unbounded parallelism assumption). Parallel across
// source tasks; serial reference kept for testing.
std::vector<std::int64_t> compute_inspiring_efficiency(const TaskGraph& g,
                                                       const CostTable& costs,
                                                       double unit_time_ms);
std::vector<std::int64_t> compute_inspiring_efficiency_serial(const TaskGraph& g,
                                                              const CostTable& costs,
                                                              double unit_time_ms);

struct CalibrationResult {
    double unit_time_ms = 0.0;
    double w0_ms = 0.0;           // search start, 2x median GPU time
    std::int64_t best_score = 0;
    std::int64_t w0_score = 0;
    int evaluations = 0;
};

// Deterministic unit-time search: candidates w0*2^k for k in [-4, +6], scored
// by how many distinct per-(topological layer, task type) mean efficiencies
// they produce (exact rational comparison). Highest score wins, ties to the
// smaller candidate. At most 11 efficiency evaluations.
CalibrationResult calibrate_unit_time(const TaskGraph& g, const CostTable& costs);

// HEFT-style upward rank: mean exec time over available devices plus the max
// successor rank, scaled by 1000 and truncated to an integer priority.
// Strictly decreasing along dependency edges.
std::vector<std::int64_t> upward_rank_priority(const TaskGraph& g,
                                               const CostTable& costs);

// Longest path (in task count) to any exit task; exits get 0.
std::vector<std::int64_t> depth_priority(const TaskGraph& g);

enum class PriorityKind { UpwardRank, Depth, Zero };

struct TaskAttributes {
    std::vector<std::int64_t> ability;
    std::vector<std::int64_t> efficiency;
    std::vector<std::int64_t> static_priority;
    double unit_time_ms = 0.0;
};

TaskAttributes compute_attributes(const TaskGraph& g, const CostTable& costs,
                                  PriorityKind priority);

// Header: task_id,type,layer,ability,efficiency,static_priority
void write_attributes_csv(std::ostream& out, const TaskGraph& g,
                          const TaskAttributes& attrs);

}  // namespace tbsim
