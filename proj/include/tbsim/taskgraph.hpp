#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace tbsim {

using TaskId = std::int64_t;
using HandleId = std::int64_t;

struct DataHandle {
    HandleId id = 0;
    std::int64_t bytes = 0;

    bool operator==(const DataHandle&) const = default;
};

// One node of the task graph. `deps` are predecessor task ids; `inputs` and
// `outputs` reference DataHandle ids. Dependencies are stored explicitly and are
// never inferred from handle access.
struct TaskNode {
    TaskId id = 0;
    std::string type;
    std::vector<TaskId> deps;
    std::vector<HandleId> inputs;
    std::vector<HandleId> outputs;

    bool operator==(const TaskNode&) const = default;
};

// Tasks are kept in submission order; that order is meaningful to the engine
// (initial ready order, tie-breaks) and is preserved by save/load.
struct TaskGraph {
    std::string name;
    std::vector<TaskNode> tasks;
    std::vector<DataHandle> handles;

    bool operator==(const TaskGraph&) const = default;
};

// Position-indexed adjacency for a graph, built once and shared by the engine
// and the attribute kernels. Positions are indices into graph.tasks.
struct GraphIndex {
    std::unordered_map<TaskId, std::size_t> task_pos;
    std::unordered_map<HandleId, std::size_t> handle_pos;
    std::vector<std::vector<std::size_t>> succ;  // by task position
    std::vector<std::vector<std::size_t>> pred;
};

// Requires unique ids and resolvable references (run validate() first on
// untrusted input); throws std::invalid_argument otherwise.
GraphIndex build_index(const TaskGraph& g);

struct Violation {
    std::string message;
};

// Structural checks: duplicate task/handle ids, non-positive handle bytes,
// self-dependencies, dangling dep/handle references, cycles. Returns every
// violation found; never throws on bad graphs.
std::vector<Violation> validate(const TaskGraph& g);

// Extra check used by the generator tests: all writers of a handle must form a
// chain under direct dependency edges (writes are serialized). Not part of
// validate() because hand-assembled graphs may order writers transitively.
std::vector<Violation> check_writer_chains(const TaskGraph& g);

// layer(t) = 0 for tasks with no deps, else 1 + max layer over deps.
// Throws std::runtime_error on cyclic graphs.
std::vector<int> topological_layers(const TaskGraph& g);

// One topological order of task positions (Kahn, submission order among ties).
std::vector<std::size_t> topological_order(const TaskGraph& g);

std::size_t edge_count(const TaskGraph& g);

// --- generators -----------------------------------------------------------

// Right-looking tiled Cholesky on an nblocks x nblocks lower-triangular tile
// grid. Task types POTRF/TRSM/SYRK/GEMM, one handle per tile of block_bytes.
TaskGraph build_cholesky_dag(int nblocks, std::int64_t block_bytes);

// Tiled LU without pivoting on a full tile grid: GETRF diagonal, TRSM row and
// column panels, GEMM trailing updates.
TaskGraph build_lu_dag(int nblocks, std::int64_t block_bytes);

// 2D 5-point stencil over an nblocks x nblocks grid for `timesteps` sweeps.
// Task (t,i,j) depends on the step t-1 neighborhood clipped at the borders.
TaskGraph build_stencil_dag(int nblocks, int timesteps, std::int64_t block_bytes);

// Seeded layered random DAG: tasks round-robin over n_layers layers, each task
// in layer l>0 draws predecessors from layer l-1 with probability edge_prob
// (plus one forced predecessor if it would otherwise have none). Bitwise
// reproducible for fixed arguments. Task types LAYERK0..LAYERK3 are assigned
// from total-degree quartiles.
TaskGraph generate_layered_dag(int n_tasks, int n_layers, double edge_prob,
                               std::uint64_t seed);

// --- file format ----------------------------------------------------------

// NDJSON, one record per line:
//   {"kind":"meta","name":<string>,"version":1}
//   {"kind":"handle","id":<int>,"bytes":<int>}
//   {"kind":"task","id":<int>,"type":<string>,"deps":[...],"inputs":[...],"outputs":[...]}
// Meta first, then handles, then tasks in submission order.
void save_dag(const TaskGraph& g, std::ostream& out);
void save_dag_file(const TaskGraph& g, const std::string& path);

// Throws std::runtime_error naming the offending line on malformed input, and
// reports validate() violations on structurally broken graphs.
TaskGraph load_dag(std::istream& in);
TaskGraph load_dag_file(const std::string& path);

}  // namespace tbsim
