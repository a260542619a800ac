#include "tbsim/taskgraph.hpp"

#include <algorithm>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace tbsim {

GraphIndex build_index(const TaskGraph& g) {
    GraphIndex idx;
    idx.task_pos.reserve(g.tasks.size());
    for (std::size_t i = 0; i < g.tasks.size(); ++i) {
        if (!idx.task_pos.emplace(g.tasks[i].id, i).second)
            throw std::invalid_argument("duplicate task id " +
                                        std::to_string(g.tasks[i].id));
    }
    idx.handle_pos.reserve(g.handles.size());
    for (std::size_t i = 0; i < g.handles.size(); ++i) {
        if (!idx.handle_pos.emplace(g.handles[i].id, i).second)
            throw std::invalid_argument("duplicate handle id " +
                                        std::to_string(g.handles[i].id));
    }
    idx.succ.resize(g.tasks.size());
    idx.pred.resize(g.tasks.size());
    for (std::size_t i = 0; i < g.tasks.size(); ++i) {
        for (TaskId d : g.tasks[i].deps) {
            auto it = idx.task_pos.find(d);
            if (it == idx.task_pos.end())
                throw std::invalid_argument("task " + std::to_string(g.tasks[i].id) +
                                            " depends on unknown task " +
                                            std::to_string(d));
            idx.pred[i].push_back(it->second);
            idx.succ[it->second].push_back(i);
        }
    }
    // Successor lists come out ordered by dependent position already (we walk
    // tasks in order), but predecessor lists follow deps order; normalize both.
    for (auto& v : idx.succ) std::sort(v.begin(), v.end());
    for (auto& v : idx.pred) std::sort(v.begin(), v.end());
    return idx;
}

namespace {

void check_ids(const TaskGraph& g, std::vector<Violation>& out) {
    std::unordered_set<TaskId> task_ids;
    for (const auto& t : g.tasks)
        if (!task_ids.insert(t.id).second)
            out.push_back({"duplicate task id " + std::to_string(t.id)});
    std::unordered_set<HandleId> handle_ids;
    for (const auto& h : g.handles) {
        if (!handle_ids.insert(h.id).second)
            out.push_back({"duplicate handle id " + std::to_string(h.id)});
        if (h.bytes <= 0)
            out.push_back({"handle " + std::to_string(h.id) +
                           " has non-positive bytes"});
    }
    for (const auto& t : g.tasks) {
        for (TaskId d : t.deps) {
            if (d == t.id)
                out.push_back({"task " + std::to_string(t.id) + " depends on itself"});
            else if (!task_ids.count(d))
                out.push_back({"task " + std::to_string(t.id) +
                               " depends on unknown task " + std::to_string(d)});
        }
        for (HandleId h : t.inputs)
            if (!handle_ids.count(h))
                out.push_back({"task " + std::to_string(t.id) +
                               " reads unknown handle " + std::to_string(h)});
        for (HandleId h : t.outputs)
            if (!handle_ids.count(h))
                out.push_back({"task " + std::to_string(t.id) +
                               " writes unknown handle " + std::to_string(h)});
    }
}

// Kahn pass over whatever subset of the graph is well-formed enough to walk.
// Reports one representative cycle (all ids on it) when tasks remain.
void check_cycles(const TaskGraph& g, std::vector<Violation>& out) {
    std::unordered_map<TaskId, std::size_t> pos;
    for (std::size_t i = 0; i < g.tasks.size(); ++i) pos.emplace(g.tasks[i].id, i);

    std::vector<std::vector<std::size_t>> succ(g.tasks.size());
    std::vector<int> unmet(g.tasks.size(), 0);
    for (std::size_t i = 0; i < g.tasks.size(); ++i) {
        for (TaskId d : g.tasks[i].deps) {
            auto it = pos.find(d);
            if (it == pos.end() || it->second == i) continue;
            succ[it->second].push_back(i);
            unmet[i] += 1;
        }
    }
    std::queue<std::size_t> q;
    std::size_t done = 0;
    for (std::size_t i = 0; i < g.tasks.size(); ++i)
        if (unmet[i] == 0) q.push(i);
    while (!q.empty()) {
        std::size_t u = q.front();
        q.pop();
        done += 1;
        for (std::size_t v : succ[u])
            if (--unmet[v] == 0) q.push(v);
    }
    if (done == g.tasks.size()) return;

    // Walk predecessors among the leftover nodes until one repeats.
    std::vector<char> stuck(g.tasks.size(), 0);
    std::size_t start = g.tasks.size();
    for (std::size_t i = 0; i < g.tasks.size(); ++i)
        if (unmet[i] > 0) {
            stuck[i] = 1;
            if (start == g.tasks.size()) start = i;
        }
    std::vector<std::size_t> path;
    std::vector<char> seen(g.tasks.size(), 0);
    std::size_t cur = start;
    while (!seen[cur]) {
        seen[cur] = 1;
        path.push_back(cur);
        for (TaskId d : g.tasks[cur].deps) {
            auto it = pos.find(d);
            if (it != pos.end() && stuck[it->second]) {
                cur = it->second;
                break;
            }
        }
    }
    auto loop_start = std::find(path.begin(), path.end(), cur);
    std::ostringstream msg;
    msg << "dependency cycle:";
    for (auto it = loop_start; it != path.end(); ++it)
        msg << " " << g.tasks[*it].id;
    out.push_back({msg.str()});
}

}  // namespace

std::vector<Violation> validate(const TaskGraph& g) {
    std::vector<Violation> out;
    check_ids(g, out);
    check_cycles(g, out);
    return out;
}

std::vector<Violation> check_writer_chains(const TaskGraph& g) {
    std::vector<Violation> out;
    std::unordered_map<HandleId, std::vector<std::size_t>> writers;
    for (std::size_t i = 0; i < g.tasks.size(); ++i)
        for (HandleId h : g.tasks[i].outputs) writers[h].push_back(i);

    std::unordered_map<TaskId, std::size_t> pos;
    for (std::size_t i = 0; i < g.tasks.size(); ++i) pos.emplace(g.tasks[i].id, i);

    for (const auto& h : g.handles) {
        auto it = writers.find(h.id);
        if (it == writers.end() || it->second.size() < 2) continue;
        const auto& w = it->second;
        std::unordered_set<std::size_t> wset(w.begin(), w.end());
        // Direct dep edges inside the writer set must form one path covering
        // all writers: unique head, every other writer reached exactly once.
        std::unordered_map<std::size_t, std::size_t> next;  // writer -> writer succ
        std::unordered_set<std::size_t> has_pred;
        bool broken = false;
        for (std::size_t wi : w) {
            for (TaskId d : g.tasks[wi].deps) {
                auto p = pos.find(d);
                if (p == pos.end() || !wset.count(p->second)) continue;
                if (!next.emplace(p->second, wi).second) broken = true;  // fan-out
                if (!has_pred.insert(wi).second) broken = true;         // fan-in
            }
        }
        std::size_t head = g.tasks.size();
        for (std::size_t wi : w)
            if (!has_pred.count(wi)) {
                if (head != g.tasks.size()) broken = true;
                head = wi;
            }
        if (!broken && head != g.tasks.size()) {
            std::size_t n = 1, cur = head;
            while (next.count(cur)) {
                cur = next[cur];
                n += 1;
            }
            if (n != w.size()) broken = true;
        } else {
            broken = true;
        }
        if (broken)
            out.push_back({"handle " + std::to_string(h.id) +
                           " writers are not serialized by direct dependencies"});
    }
    return out;
}

std::vector<int> topological_layers(const TaskGraph& g) {
    GraphIndex idx = build_index(g);
    std::vector<int> layer(g.tasks.size(), 0);
    std::vector<int> unmet(g.tasks.size(), 0);
    std::queue<std::size_t> q;
    for (std::size_t i = 0; i < g.tasks.size(); ++i) {
        unmet[i] = static_cast<int>(idx.pred[i].size());
        if (unmet[i] == 0) q.push(i);
    }
    std::size_t done = 0;
    while (!q.empty()) {
        std::size_t u = q.front();
        q.pop();
        done += 1;
        for (std::size_t v : idx.succ[u]) {
            layer[v] = std::max(layer[v], layer[u] + 1);
            if (--unmet[v] == 0) q.push(v);
        }
    }
    if (done != g.tasks.size())
        throw std::runtime_error("graph has a dependency cycle");
    return layer;
}

std::vector<std::size_t> topological_order(const TaskGraph& g) {
    GraphIndex idx = build_index(g);
    std::vector<int> unmet(g.tasks.size(), 0);
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> q;
    for (std::size_t i = 0; i < g.tasks.size(); ++i) {
        unmet[i] = static_cast<int>(idx.pred[i].size());
        if (unmet[i] == 0) q.push(i);
    }
    std::vector<std::size_t> order;
    order.reserve(g.tasks.size());
    while (!q.empty()) {
        std::size_t u = q.top();
        q.pop();
        order.push_back(u);
        for (std::size_t v : idx.succ[u])
            if (--unmet[v] == 0) q.push(v);
    }
    if (order.size() != g.tasks.size())
        throw std::runtime_error("graph has a dependency cycle");
    return order;
}

std::size_t edge_count(const TaskGraph& g) {
    std::size_t n = 0;
    for (const auto& t : g.tasks) n += t.deps.size();
    return n;
}

}  // namespace tbsim
