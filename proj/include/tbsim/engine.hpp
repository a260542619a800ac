#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "tbsim/platform.hpp"
#include "tbsim/policies.hpp"
#include "tbsim/taskgraph.hpp"

namespace tbsim {

struct SimOptions {
    bool record_trace = true;  // when off, only per-task intervals and makespan
};

struct PushRec {
    double time_ms;
    TaskId task;
};

struct PopRec {
    double time_ms;
    TaskId task;
    int worker;
};

// Execution interval; input transfers occupy [pop time, start_ms) on the same
// worker.
struct TaskExec {
    int worker = -1;
    double start_ms = 0.0;
    double end_ms = 0.0;
};

struct SimTrace {
    double makespan_ms = 0.0;
    std::vector<TaskExec> per_task;  // by task position
    std::vector<std::pair<double, std::int64_t>> nready_samples;
    std::vector<PushRec> pushes;
    std::vector<PopRec> pops;
};

// Deterministic single-threaded event simulation. Throws on capability
// mismatches and reports the stuck task ids if the graph cannot drain.
SimTrace simulate(const TaskGraph& g, const Platform& platform, Policy& policy,
                  const SimOptions& opts = {});

// Ready-queue population at time t (right-continuous step function).
// Throws std::out_of_range outside [0, makespan].
std::int64_t nready_at(const SimTrace& trace, double t_ms);

struct WindowRow {
    double window_start_ms;
    std::int64_t pushes;
    std::int64_t pops;
};

// Push/pop counts per half-open window [k*w, (k+1)*w), from 0 through the
// window containing the last event. Empty trace gives an empty list.
std::vector<WindowRow> window_histogram(const SimTrace& trace, double window_ms);

// headers: time_ms,nready | window_start_ms,pushes,pops |
// task_id,type,worker,start_ms,end_ms
void write_nready_csv(std::ostream& out, const SimTrace& trace);
void write_push_pop_csv(std::ostream& out, const SimTrace& trace, double window_ms);
void write_gantt_csv(std::ostream& out, const TaskGraph& g, const SimTrace& trace);

}  // namespace tbsim
