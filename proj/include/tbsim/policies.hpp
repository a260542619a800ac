#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "tbsim/attributes.hpp"
#include "tbsim/platform.hpp"
#include "tbsim/taskgraph.hpp"

namespace tbsim {

// Read-only window into the running simulation, implemented by the engine.
// worker_free_at covers the executing task (transfers included) plus an
// exec-time estimate for everything already queued on that worker.
class EngineView {
public:
    virtual ~EngineView() = default;
    virtual double now() const = 0;
    virtual const TaskGraph& graph() const = 0;
    virtual const Platform& platform() const = 0;
    virtual std::size_t queue_length(int worker) const = 0;
    virtual bool worker_busy(int worker) const = 0;
    virtual double worker_free_at(int worker) const = 0;
    // Sum of transfer times for the task's inputs not resident on the worker's
    // node, each fetched from the highest-bandwidth node holding a copy.
    virtual double estimated_transfer_ms(std::size_t task_pos, int worker) const = 0;
    // Resident input bytes / total input bytes on the given node (1.0 when the
    // task has no inputs).
    virtual double resident_fraction(std::size_t task_pos, int node) const = 0;
};

struct QueueEntry {
    std::size_t task_pos = 0;
    std::uint64_t seq = 0;  // queue entry sequence number, global, increasing
};

// --- push rules -----------------------------------------------------------

// Least-loaded capable worker; load counts queued entries plus the one
// executing. Ties go to the lowest worker id.
int push_fifo(std::size_t task_pos, const EngineView& view);

// Earliest finish time by execution cost alone.
int push_dm(std::size_t task_pos, const EngineView& view);

// Earliest finish time including the transfer estimate for non-resident inputs.
int push_dmda(std::size_t task_pos, const EngineView& view);

// --- pop rules ------------------------------------------------------------

std::size_t pop_fifo(const std::vector<QueueEntry>& queue);

// Highest static priority, ties to the oldest entry.
std::size_t pop_priority(const std::vector<QueueEntry>& queue,
                         const TaskAttributes& attrs);

enum class PopMode { HighAbility, HighEfficiency, HighEfficiencyLocality };

const char* to_string(PopMode m);

// Mode-directed selection: HighAbility and HighEfficiency take the argmax of
// the corresponding attribute; HighEfficiencyLocality orders by (resident
// fraction on the worker's node, then efficiency). All modes break remaining
// ties by static priority (descending) then entry age.
std::size_t pop_adaptive(PopMode mode, int worker, const std::vector<QueueEntry>& queue,
                         const TaskAttributes& attrs, const EngineView& view);

// --- ready-count regulator ------------------------------------------------

struct RegulatorConfig {
    std::int64_t task_window = 2;   // min |nready delta| that re-evaluates the mode
    std::int64_t s_inc = 1;         // rise threshold for slope checks
    double k_inc = 1.0;             // slope threshold splitting efficiency/ability
    std::int64_t s_dec = 2;         // drop quantum while draining
    std::int64_t c = 1;             // tolerance band on the drain boundary
    std::int64_t dec_step = 2;      // hysteresis between INC and DEC
    int slope_samples = 8;          // ring buffer capacity for calculate_k
};

RegulatorConfig default_regulator_config(const Platform& platform,
                                         const TaskGraph& g);

enum class RegulatorPhase { Inc, Dec };

struct RegulatorState {
    PopMode mode = PopMode::HighEfficiency;
    RegulatorPhase state = RegulatorPhase::Inc;
    std::int64_t peak = 0;
    std::int64_t prev_nready = 0;
    std::int64_t last_trigger_nready = 0;
    std::int64_t s_dec_count = 1;
    std::deque<std::pair<double, std::int64_t>> samples;  // (time_ms, nready)
    double cur_k = 0.0;
};

// Least-squares slope of nready over time; 0 when all timestamps coincide or
// fewer than two samples exist.
double calculate_k(const std::deque<std::pair<double, std::int64_t>>& samples);

// One transition of the mode state machine. Samples are recorded on every
// call; the mode logic only runs when nready moved at least task_window away
// from its value at the previous trigger.
void regulator_step(RegulatorState& st, const RegulatorConfig& cfg,
                    std::int64_t cur_nready, double now_ms);

// --- policy objects -------------------------------------------------------

class Policy {
public:
    virtual ~Policy() = default;
    virtual const std::string& name() const = 0;
    virtual int select_worker(std::size_t task_pos, const EngineView& view) = 0;
    virtual std::size_t select_entry(int worker, const std::vector<QueueEntry>& queue,
                                     const EngineView& view) = 0;
    // Called by the engine after every push and pop with the updated count.
    virtual void on_queue_event(double now_ms, std::int64_t nready);
};

// name in {fifo, dm, dmda, dmdap, inspirit}. dmdap and inspirit read
// attrs.static_priority; inspirit additionally runs the regulator and needs
// ability/efficiency filled in.
std::unique_ptr<Policy> make_policy(const std::string& name,
                                    const TaskAttributes& attrs,
                                    const RegulatorConfig& reg = {});

std::vector<std::string> policy_names();

// Exposed for inspection (run summaries, tests): the regulator attached to an
// inspirit policy, null for the others.
const RegulatorState* regulator_state(const Policy& p);

// Pops taken in each mode (indexed by PopMode), null for non-inspirit.
const std::array<std::int64_t, 3>* pop_mode_counts(const Policy& p);

}  // namespace tbsim
