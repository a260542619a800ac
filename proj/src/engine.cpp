#include "tbsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "tbsim/text.hpp"

namespace tbsim {

namespace {

enum class EventKind { TaskReady, PushDone, TransferDone, TaskDone };

struct Event {
    double time;
    std::uint64_t seq;
    EventKind kind;
    std::size_t task;
    int worker;
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        return a.seq > b.seq;
    }
};

class Simulation final : public EngineView {
public:
    Simulation(const TaskGraph& g, const Platform& platform, Policy& policy,
               const SimOptions& opts)
        : graph_(g),
          platform_(platform),
          policy_(policy),
          opts_(opts),
          idx_(build_index(g)) {}

    SimTrace run();

    // EngineView
    double now() const override { return now_; }
    const TaskGraph& graph() const override { return graph_; }
    const Platform& platform() const override { return platform_; }
    std::size_t queue_length(int worker) const override {
        return queues_[worker].size();
    }
    bool worker_busy(int worker) const override { return busy_[worker]; }
    double worker_free_at(int worker) const override {
        double t = busy_[worker] ? busy_until_[worker] : now_;
        const Worker& w = platform_.workers[worker];
        for (const QueueEntry& e : queues_[worker])
            t += platform_.exec_time_ms(graph_.tasks[e.task_pos].type, w);
        return t;
    }
    double estimated_transfer_ms(std::size_t task_pos, int worker) const override {
        return transfer_total_ms(task_pos, platform_.workers[worker].memory_node);
    }
    double resident_fraction(std::size_t task_pos, int node) const override {
        const auto& inputs = graph_.tasks[task_pos].inputs;
        if (inputs.empty()) return 1.0;
        std::int64_t total = 0, local = 0;
        for (HandleId h : inputs) {
            std::size_t hp = idx_.handle_pos.at(h);
            std::int64_t bytes = graph_.handles[hp].bytes;
            total += bytes;
            if (resident(hp, node)) local += bytes;
        }
        return static_cast<double>(local) / static_cast<double>(total);
    }

private:
    bool resident(std::size_t handle_pos, int node) const {
        return residency_[handle_pos * platform_.num_nodes + node] != 0;
    }
    void make_resident(std::size_t handle_pos, int node) {
        residency_[handle_pos * platform_.num_nodes + node] = 1;
    }

    // Fetch source for a copy: the resident node with the highest bandwidth
    // into `to`, ties to the lowest node id.
    double transfer_one_ms(std::size_t handle_pos, int to) const {
        if (resident(handle_pos, to)) return 0.0;
        int best = -1;
        double best_bw = -1.0;
        for (int node = 0; node < platform_.num_nodes; ++node) {
            if (!resident(handle_pos, node)) continue;
            double bw = platform_.bandwidth[node][to];
            if (bw > best_bw) {
                best_bw = bw;
                best = node;
            }
        }
        if (best < 0)
            throw std::runtime_error("handle " +
                                     std::to_string(graph_.handles[handle_pos].id) +
                                     " resident nowhere");
        return platform_.transfer_time_ms(graph_.handles[handle_pos].bytes, best, to);
    }

    double transfer_total_ms(std::size_t task_pos, int node) const {
        double total = 0.0;
        for (HandleId h : graph_.tasks[task_pos].inputs)
            total += transfer_one_ms(idx_.handle_pos.at(h), node);
        return total;
    }

    void enqueue(double time, EventKind kind, std::size_t task, int worker) {
        events_.push({time, next_seq_++, kind, task, worker});
    }

    void record_nready() {
        if (opts_.record_trace) trace_.nready_samples.emplace_back(now_, nready_);
    }

    void on_task_ready(std::size_t task) {
        enqueue(now_, EventKind::PushDone, task, -1);
    }

    void on_push(std::size_t task) {
        int w = policy_.select_worker(task, *this);
        if (w < 0 || w >= static_cast<int>(platform_.workers.size()))
            throw std::runtime_error("policy pushed task " +
                                     std::to_string(graph_.tasks[task].id) +
                                     " to unknown worker " + std::to_string(w));
        if (!platform_.can_run(graph_.tasks[task].type, platform_.workers[w]))
            throw std::runtime_error(
                "policy pushed task " + std::to_string(graph_.tasks[task].id) +
                " (type " + graph_.tasks[task].type + ") to incapable worker " +
                std::to_string(w));
        queues_[w].push_back({task, next_queue_seq_++});
        nready_ += 1;
        if (opts_.record_trace) trace_.pushes.push_back({now_, graph_.tasks[task].id});
        record_nready();
        policy_.on_queue_event(now_, nready_);
        maybe_dispatch(w);
    }

    void maybe_dispatch(int w) {
        if (busy_[w] || queues_[w].empty()) return;
        std::size_t pick = policy_.select_entry(w, queues_[w], *this);
        if (pick >= queues_[w].size())
            throw std::runtime_error("policy popped out-of-range queue index");
        std::size_t task = queues_[w][pick].task_pos;
        queues_[w].erase(queues_[w].begin() + static_cast<std::ptrdiff_t>(pick));
        nready_ -= 1;
        if (opts_.record_trace)
            trace_.pops.push_back({now_, graph_.tasks[task].id, w});
        record_nready();
        policy_.on_queue_event(now_, nready_);

        const Worker& worker = platform_.workers[w];
        double transfer = transfer_total_ms(task, worker.memory_node);
        double exec = platform_.exec_time_ms(graph_.tasks[task].type, worker);
        double start = now_ + transfer;
        double end = start + exec;
        trace_.per_task[task] = {w, start, end};
        busy_[w] = true;
        busy_until_[w] = end;
        if (transfer > 0.0) enqueue(start, EventKind::TransferDone, task, w);
        enqueue(end, EventKind::TaskDone, task, w);
    }

    void on_transfer_done(std::size_t task, int w) {
        int node = platform_.workers[w].memory_node;
        for (HandleId h : graph_.tasks[task].inputs)
            make_resident(idx_.handle_pos.at(h), node);
    }

    void on_task_done(std::size_t task, int w) {
        int node = platform_.workers[w].memory_node;
        // Inputs become resident at TransferDone; outputs when the task ends.
        for (HandleId h : graph_.tasks[task].outputs)
            make_resident(idx_.handle_pos.at(h), node);
        busy_[w] = false;
        completed_ += 1;
        trace_.makespan_ms = std::max(trace_.makespan_ms, now_);
        for (std::size_t s : idx_.succ[task])
            if (--unmet_[s] == 0) enqueue(now_, EventKind::TaskReady, s, -1);
        maybe_dispatch(w);
    }

    const TaskGraph& graph_;
    const Platform& platform_;
    Policy& policy_;
    SimOptions opts_;
    GraphIndex idx_;

    std::priority_queue<Event, std::vector<Event>, EventAfter> events_;
    std::uint64_t next_seq_ = 0;
    std::uint64_t next_queue_seq_ = 0;
    double now_ = 0.0;
    std::int64_t nready_ = 0;
    std::size_t completed_ = 0;
    std::vector<int> unmet_;
    std::vector<std::vector<QueueEntry>> queues_;
    std::vector<char> busy_;
    std::vector<double> busy_until_;
    std::vector<char> residency_;
    SimTrace trace_;
};

SimTrace Simulation::run() {
    const std::size_t n = graph_.tasks.size();
    trace_.per_task.assign(n, {});
    unmet_.assign(n, 0);
    queues_.assign(platform_.workers.size(), {});
    busy_.assign(platform_.workers.size(), 0);
    busy_until_.assign(platform_.workers.size(), 0.0);
    residency_.assign(graph_.handles.size() * platform_.num_nodes, 0);
    for (std::size_t h = 0; h < graph_.handles.size(); ++h)
        make_resident(h, 0);  // everything starts in host memory

    for (std::size_t i = 0; i < n; ++i) {
        unmet_[i] = static_cast<int>(idx_.pred[i].size());
        if (unmet_[i] == 0) enqueue(0.0, EventKind::TaskReady, i, -1);
    }

    while (!events_.empty()) {
        Event ev = events_.top();
        events_.pop();
        now_ = ev.time;
        switch (ev.kind) {
            case EventKind::TaskReady: on_task_ready(ev.task); break;
            case EventKind::PushDone: on_push(ev.task); break;
            case EventKind::TransferDone: on_transfer_done(ev.task, ev.worker); break;
            case EventKind::TaskDone: on_task_done(ev.task, ev.worker); break;
        }
    }

    if (completed_ != n) {
        std::ostringstream msg;
        msg << "simulation stuck with " << (n - completed_) << " tasks unfinished:";
        int listed = 0;
        for (std::size_t i = 0; i < n && listed < 20; ++i)
            if (trace_.per_task[i].worker < 0) {
                msg << ' ' << graph_.tasks[i].id;
                listed += 1;
            }
        if (static_cast<std::size_t>(listed) < n - completed_) msg << " ...";
        throw std::runtime_error(msg.str());
    }
    return std::move(trace_);
}

}  // namespace

SimTrace simulate(const TaskGraph& g, const Platform& platform, Policy& policy,
                  const SimOptions& opts) {
    Simulation sim(g, platform, policy, opts);
    return sim.run();
}

std::int64_t nready_at(const SimTrace& trace, double t_ms) {
    if (t_ms < 0.0 || t_ms > trace.makespan_ms)
        throw std::out_of_range("time outside [0, makespan]");
    // Last sample at or before t; the count is a right-continuous step.
    std::int64_t value = 0;
    for (const auto& [time, n] : trace.nready_samples) {
        if (time > t_ms) break;
        value = n;
    }
    return value;
}

std::vector<WindowRow> window_histogram(const SimTrace& trace, double window_ms) {
    if (!(window_ms > 0.0))
        throw std::invalid_argument("window must be positive");
    if (trace.pushes.empty() && trace.pops.empty()) return {};
    double last = 0.0;
    for (const auto& p : trace.pushes) last = std::max(last, p.time_ms);
    for (const auto& p : trace.pops) last = std::max(last, p.time_ms);
    auto win_of = [window_ms](double t) {
        return static_cast<std::size_t>(std::floor(t / window_ms));
    };
    std::vector<WindowRow> rows(win_of(last) + 1);
    for (std::size_t i = 0; i < rows.size(); ++i)
        rows[i] = {static_cast<double>(i) * window_ms, 0, 0};
    for (const auto& p : trace.pushes) rows[win_of(p.time_ms)].pushes += 1;
    for (const auto& p : trace.pops) rows[win_of(p.time_ms)].pops += 1;
    return rows;
}

void write_nready_csv(std::ostream& out, const SimTrace& trace) {
    out << "time_ms,nready\n";
    for (const auto& [time, n] : trace.nready_samples)
        out << fmt_ms(time) << ',' << n << '\n';
}

void write_push_pop_csv(std::ostream& out, const SimTrace& trace, double window_ms) {
    out << "window_start_ms,pushes,pops\n";
    for (const auto& row : window_histogram(trace, window_ms))
        out << fmt_ms(row.window_start_ms) << ',' << row.pushes << ',' << row.pops
            << '\n';
}

void write_gantt_csv(std::ostream& out, const TaskGraph& g, const SimTrace& trace) {
    out << "task_id,type,worker,start_ms,end_ms\n";
    for (std::size_t i = 0; i < g.tasks.size(); ++i) {
        const auto& t = trace.per_task[i];
        out << g.tasks[i].id << ',' << g.tasks[i].type << ',' << t.worker << ','
            << fmt_ms(t.start_ms) << ',' << fmt_ms(t.end_ms) << '\n';
    }
}

}  // namespace tbsim
