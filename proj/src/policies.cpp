#include "tbsim/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tbsim {

namespace {

// Workers able to run the task's type; deterministic order (ascending id).
std::vector<int> capable_workers(std::size_t task_pos, const EngineView& view) {
    const auto& type = view.graph().tasks[task_pos].type;
    std::vector<int> out;
    for (const Worker& w : view.platform().workers)
        if (view.platform().can_run(type, w)) out.push_back(w.id);
    if (out.empty())
        throw std::runtime_error("no worker can run task type " + type);
    return out;
}

int argmin_worker(const std::vector<int>& workers,
                  const std::vector<double>& key) {
    int best = workers.front();
    double best_key = key.front();
    for (std::size_t i = 1; i < workers.size(); ++i)
        if (key[i] < best_key) {  // strict: ties keep the lowest id
            best_key = key[i];
            best = workers[i];
        }
    return best;
}

}  // namespace

int push_fifo(std::size_t task_pos, const EngineView& view) {
    auto workers = capable_workers(task_pos, view);
    std::vector<double> load;
    load.reserve(workers.size());
    for (int w : workers)
        load.push_back(static_cast<double>(view.queue_length(w)) +
                       (view.worker_busy(w) ? 1.0 : 0.0));
    return argmin_worker(workers, load);
}

int push_dm(std::size_t task_pos, const EngineView& view) {
    const auto& task = view.graph().tasks[task_pos];
    auto workers = capable_workers(task_pos, view);
    std::vector<double> eft;
    eft.reserve(workers.size());
    for (int w : workers) {
        const Worker& worker = view.platform().workers[w];
        double start = std::max(view.now(), view.worker_free_at(w));
        eft.push_back(start + view.platform().exec_time_ms(task.type, worker));
    }
    return argmin_worker(workers, eft);
}

int push_dmda(std::size_t task_pos, const EngineView& view) {
    const auto& task = view.graph().tasks[task_pos];
    auto workers = capable_workers(task_pos, view);
    std::vector<double> eft;
    eft.reserve(workers.size());
    for (int w : workers) {
        const Worker& worker = view.platform().workers[w];
        double start = std::max(view.now(), view.worker_free_at(w));
        eft.push_back(start + view.estimated_transfer_ms(task_pos, w) +
                      view.platform().exec_time_ms(task.type, worker));
    }
    return argmin_worker(workers, eft);
}

std::size_t pop_fifo(const std::vector<QueueEntry>& queue) {
    if (queue.empty()) throw std::logic_error("pop from empty queue");
    std::size_t best = 0;
    for (std::size_t i = 1; i < queue.size(); ++i)
        if (queue[i].seq < queue[best].seq) best = i;
    return best;
}

std::size_t pop_priority(const std::vector<QueueEntry>& queue,
                         const TaskAttributes& attrs) {
    if (queue.empty()) throw std::logic_error("pop from empty queue");
    std::size_t best = 0;
    for (std::size_t i = 1; i < queue.size(); ++i) {
        auto p = attrs.static_priority[queue[i].task_pos];
        auto bp = attrs.static_priority[queue[best].task_pos];
        if (p > bp || (p == bp && queue[i].seq < queue[best].seq)) best = i;
    }
    return best;
}

const char* to_string(PopMode m) {
    switch (m) {
        case PopMode::HighAbility: return "high_ability";
        case PopMode::HighEfficiency: return "high_efficiency";
        case PopMode::HighEfficiencyLocality: return "high_efficiency_locality";
    }
    return "?";
}

std::size_t pop_adaptive(PopMode mode, int worker, const std::vector<QueueEntry>& queue,
                         const TaskAttributes& attrs, const EngineView& view) {
    if (queue.empty()) throw std::logic_error("pop from empty queue");
    const int node = view.platform().workers[worker].memory_node;

    // Selection key: (primary, secondary) maximized, then static priority
    // desc, then entry age.
    auto key_of = [&](const QueueEntry& e) -> std::pair<double, double> {
        switch (mode) {
            case PopMode::HighAbility:
                return {static_cast<double>(attrs.ability[e.task_pos]), 0.0};
            case PopMode::HighEfficiency:
                return {static_cast<double>(attrs.efficiency[e.task_pos]), 0.0};
            case PopMode::HighEfficiencyLocality:
                return {view.resident_fraction(e.task_pos, node),
                        static_cast<double>(attrs.efficiency[e.task_pos])};
        }
        return {0.0, 0.0};
    };

    std::size_t best = 0;
    auto best_key = key_of(queue[0]);
    for (std::size_t i = 1; i < queue.size(); ++i) {
        auto key = key_of(queue[i]);
        if (key > best_key) {
            best = i;
            best_key = key;
        } else if (key == best_key) {
            auto p = attrs.static_priority[queue[i].task_pos];
            auto bp = attrs.static_priority[queue[best].task_pos];
            if (p > bp || (p == bp && queue[i].seq < queue[best].seq)) best = i;
        }
    }
    return best;
}

RegulatorConfig default_regulator_config(const Platform& platform,
                                         const TaskGraph& g) {
    const auto n = static_cast<std::int64_t>(platform.workers.size());
    RegulatorConfig cfg;
    cfg.task_window = std::max<std::int64_t>(2, (n + 3) / 4);
    cfg.s_inc = n;
    cfg.k_inc = static_cast<double>(n) / median_gpu_time_ms(g, platform.costs);
    cfg.s_dec = std::max<std::int64_t>(2, (n + 3) / 4);
    cfg.c = (cfg.s_dec + 1) / 2;
    cfg.dec_step = cfg.s_dec;
    cfg.slope_samples = 8;
    return cfg;
}

double calculate_k(const std::deque<std::pair<double, std::int64_t>>& samples) {
    if (samples.size() < 2) return 0.0;
    double sx = 0.0, sy = 0.0;
    for (const auto& [x, y] : samples) {
        sx += x;
        sy += static_cast<double>(y);
    }
    const double n = static_cast<double>(samples.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : samples) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (static_cast<double>(y) - my);
    }
    if (sxx == 0.0) return 0.0;  // all samples at the same instant
    return sxy / sxx;
}

void regulator_step(RegulatorState& st, const RegulatorConfig& cfg,
                    std::int64_t cur_nready, double now_ms) {
    st.samples.emplace_back(now_ms, cur_nready);
    while (st.samples.size() > static_cast<std::size_t>(cfg.slope_samples))
        st.samples.pop_front();

    if (std::llabs(cur_nready - st.last_trigger_nready) < cfg.task_window) return;
    st.last_trigger_nready = cur_nready;

    st.peak = std::max(st.peak, cur_nready);
    st.state = cur_nready >= st.peak - cfg.dec_step ? RegulatorPhase::Inc
                                                    : RegulatorPhase::Dec;
    if (st.state == RegulatorPhase::Inc) {
        if (cur_nready - st.prev_nready >= cfg.s_inc) {
            st.cur_k = calculate_k(st.samples);
            if (st.cur_k < cfg.k_inc)
                st.mode = PopMode::HighEfficiency;
            else if (st.cur_k > cfg.k_inc)
                st.mode = PopMode::HighAbility;
            // equal: mode persists
        }
    } else {
        if (cur_nready > st.peak - cfg.s_dec * st.s_dec_count) {
            st.mode = PopMode::HighAbility;
        } else if (cur_nready <= st.peak - cfg.s_dec * (st.s_dec_count + 1) + cfg.c) {
            st.mode = PopMode::HighEfficiencyLocality;
            if (cur_nready <= st.peak - cfg.s_dec * (st.s_dec_count + 1))
                st.s_dec_count += 1;
        }
        // between the two boundaries: mode persists
    }
    st.prev_nready = cur_nready;
}

void Policy::on_queue_event(double, std::int64_t) {}

namespace {

class NamedPolicy : public Policy {
public:
    explicit NamedPolicy(std::string name) : name_(std::move(name)) {}
    const std::string& name() const override { return name_; }

private:
    std::string name_;
};

class FifoPolicy final : public NamedPolicy {
public:
    FifoPolicy() : NamedPolicy("fifo") {}
    int select_worker(std::size_t t, const EngineView& v) override {
        return push_fifo(t, v);
    }
    std::size_t select_entry(int, const std::vector<QueueEntry>& q,
                             const EngineView&) override {
        return pop_fifo(q);
    }
};

class DmPolicy final : public NamedPolicy {
public:
    DmPolicy() : NamedPolicy("dm") {}
    int select_worker(std::size_t t, const EngineView& v) override {
        return push_dm(t, v);
    }
    std::size_t select_entry(int, const std::vector<QueueEntry>& q,
                             const EngineView&) override {
        return pop_fifo(q);
    }
};

class DmdaPolicy final : public NamedPolicy {
public:
    DmdaPolicy() : NamedPolicy("dmda") {}
    int select_worker(std::size_t t, const EngineView& v) override {
        return push_dmda(t, v);
    }
    std::size_t select_entry(int, const std::vector<QueueEntry>& q,
                             const EngineView&) override {
        return pop_fifo(q);
    }
};

class DmdapPolicy final : public NamedPolicy {
public:
    explicit DmdapPolicy(const TaskAttributes& attrs)
        : NamedPolicy("dmdap"), attrs_(attrs) {}
    int select_worker(std::size_t t, const EngineView& v) override {
        return push_dmda(t, v);
    }
    std::size_t select_entry(int, const std::vector<QueueEntry>& q,
                             const EngineView&) override {
        return pop_priority(q, attrs_);
    }

private:
    const TaskAttributes& attrs_;
};

class InspiritPolicy final : public NamedPolicy {
public:
    InspiritPolicy(const TaskAttributes& attrs, const RegulatorConfig& cfg)
        : NamedPolicy("inspirit"), attrs_(attrs), cfg_(cfg) {}
    int select_worker(std::size_t t, const EngineView& v) override {
        return push_dmda(t, v);
    }
    std::size_t select_entry(int worker, const std::vector<QueueEntry>& q,
                             const EngineView& v) override {
        pop_counts_[static_cast<std::size_t>(state_.mode)] += 1;
        return pop_adaptive(state_.mode, worker, q, attrs_, v);
    }
    void on_queue_event(double now_ms, std::int64_t nready) override {
        regulator_step(state_, cfg_, nready, now_ms);
    }
    const RegulatorState& state() const { return state_; }
    const std::array<std::int64_t, 3>& pop_counts() const { return pop_counts_; }

private:
    const TaskAttributes& attrs_;
    RegulatorConfig cfg_;
    RegulatorState state_;
    std::array<std::int64_t, 3> pop_counts_{};  // indexed by PopMode
};

}  // namespace

std::unique_ptr<Policy> make_policy(const std::string& name,
                                    const TaskAttributes& attrs,
                                    const RegulatorConfig& reg) {
    if (name == "fifo") return std::make_unique<FifoPolicy>();
    if (name == "dm") return std::make_unique<DmPolicy>();
    if (name == "dmda") return std::make_unique<DmdaPolicy>();
    if (name == "dmdap") return std::make_unique<DmdapPolicy>(attrs);
    if (name == "inspirit") return std::make_unique<InspiritPolicy>(attrs, reg);
    throw std::runtime_error("unknown policy \"" + name + "\"");
}

std::vector<std::string> policy_names() {
    return {"fifo", "dm", "dmda", "dmdap", "inspirit"};
}

const RegulatorState* regulator_state(const Policy& p) {
    auto* ins = dynamic_cast<const InspiritPolicy*>(&p);
    return ins ? &ins->state() : nullptr;
}

const std::array<std::int64_t, 3>* pop_mode_counts(const Policy& p) {
    auto* ins = dynamic_cast<const InspiritPolicy*>(&p);
    return ins ? &ins->pop_counts() : nullptr;
}

}  // namespace tbsim
