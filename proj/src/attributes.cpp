#include "tbsim/attributes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

namespace tbsim {

namespace {

std::size_t words_for(std::size_t bits) { return (bits + 63) / 64; }

void bit_set(std::vector<std::uint64_t>& w, std::size_t i) {
    w[i >> 6] |= std::uint64_t{1} << (i & 63);
}

void bit_union(std::vector<std::uint64_t>& dst, const std::vector<std::uint64_t>& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] |= src[i];
}

std::int64_t bit_count(const std::vector<std::uint64_t>& w) {
    std::int64_t n = 0;
    for (std::uint64_t x : w) n += std::popcount(x);
    return n;
}

// Longest distance (in edges) to an exit; exits are 0. Groups tasks so that
// everything in one group depends only on groups processed before it.
std::vector<std::vector<std::size_t>> height_groups(const GraphIndex& idx) {
    const std::size_t n = idx.succ.size();
    std::vector<int> height(n, 0);
    std::vector<int> unprocessed_succ(n, 0);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < n; ++i) {
        unprocessed_succ[i] = static_cast<int>(idx.succ[i].size());
        if (unprocessed_succ[i] == 0) stack.push_back(i);
    }
    int max_h = 0;
    while (!stack.empty()) {
        std::size_t u = stack.back();
        stack.pop_back();
        max_h = std::max(max_h, height[u]);
        for (std::size_t p : idx.pred[u]) {
            height[p] = std::max(height[p], height[u] + 1);
            if (--unprocessed_succ[p] == 0) stack.push_back(p);
        }
    }
    std::vector<std::vector<std::size_t>> groups(max_h + 1);
    for (std::size_t i = 0; i < n; ++i) groups[height[i]].push_back(i);
    return groups;
}

std::vector<std::int64_t> ability_impl(const TaskGraph& g, bool parallel) {
    const GraphIndex idx = build_index(g);
    const std::size_t n = g.tasks.size();
    const std::size_t nw = words_for(n);
    std::vector<std::int64_t> ability(n, 0);
    if (n == 0) return ability;

    auto groups = height_groups(idx);
    std::vector<std::vector<std::uint64_t>> desc(n);
    // A task's set can be dropped once every predecessor has consumed it.
    std::vector<int> remaining_preds(n);
    for (std::size_t i = 0; i < n; ++i)
        remaining_preds[i] = static_cast<int>(idx.pred[i].size());

    for (const auto& group : groups) {
        const std::int64_t count = static_cast<std::int64_t>(group.size());
#pragma omp parallel for schedule(dynamic, 16) if (parallel)
        for (std::int64_t gi = 0; gi < count; ++gi) {
            std::size_t u = group[static_cast<std::size_t>(gi)];
            std::vector<std::uint64_t> set(nw, 0);
            for (std::size_t s : idx.succ[u]) {
                bit_set(set, s);
                bit_union(set, desc[s]);
            }
            ability[u] = bit_count(set);
            desc[u] = std::move(set);
        }
        for (std::size_t u : group)
            for (std::size_t s : idx.succ[u])
                if (--remaining_preds[s] == 0) {
                    desc[s].clear();
                    desc[s].shrink_to_fit();
                }
    }
    return ability;
}

std::vector<double> gpu_times_or_throw(const TaskGraph& g, const CostTable& costs) {
    std::vector<double> gpu(g.tasks.size());
    for (std::size_t i = 0; i < g.tasks.size(); ++i)
        gpu[i] = costs.gpu_ms(g.tasks[i].type);  // throws naming the type
    return gpu;
}

// Per-source forward relaxation over the descendant subgraph in topological
// order. dist(d) = max over paths source->..->d of the path's GPU time sum,
// the source's own time excluded. Scratch arrays are stamped, not cleared.
struct EfficiencyScratch {
    std::vector<double> dist;
    std::vector<std::uint32_t> stamp;
    std::uint32_t cur = 0;
};

std::int64_t efficiency_of(std::size_t src, double w, const GraphIndex& idx,
                           const std::vector<std::size_t>& topo,
                           const std::vector<std::size_t>& topo_pos,
                           const std::vector<double>& gpu,
                           EfficiencyScratch& scratch) {
    scratch.cur += 1;
    scratch.dist[src] = 0.0;
    scratch.stamp[src] = scratch.cur;
    std::int64_t count = 0;
    std::size_t live = 1;  // marked nodes not yet expanded
    for (std::size_t p = topo_pos[src]; p < topo.size() && live > 0; ++p) {
        std::size_t u = topo[p];
        if (scratch.stamp[u] != scratch.cur) continue;
        live -= 1;
        if (u != src && scratch.dist[u] <= w) count += 1;
        for (std::size_t v : idx.succ[u]) {
            double cand = scratch.dist[u] + gpu[v];
            if (scratch.stamp[v] != scratch.cur) {
                scratch.stamp[v] = scratch.cur;
                scratch.dist[v] = cand;
                live += 1;
            } else if (cand > scratch.dist[v]) {
                scratch.dist[v] = cand;
            }
        }
    }
    return count;
}

std::vector<std::int64_t> efficiency_impl(const TaskGraph& g, const CostTable& costs,
                                          double w, bool parallel) {
    if (!(w >= 0.0))
        throw std::invalid_argument("unit time must be non-negative");
    const GraphIndex idx = build_index(g);
    const std::size_t n = g.tasks.size();
    std::vector<std::int64_t> eff(n, 0);
    if (n == 0) return eff;
    const std::vector<double> gpu = gpu_times_or_throw(g, costs);
    const std::vector<std::size_t> topo = topological_order(g);
    std::vector<std::size_t> topo_pos(n);
    for (std::size_t p = 0; p < n; ++p) topo_pos[topo[p]] = p;

    const std::int64_t count = static_cast<std::int64_t>(n);
#pragma omp parallel if (parallel)
    {
        EfficiencyScratch scratch;
        scratch.dist.resize(n, 0.0);
        scratch.stamp.resize(n, 0);
#pragma omp for schedule(dynamic, 32)
        for (std::int64_t i = 0; i < count; ++i)
            eff[static_cast<std::size_t>(i)] =
                efficiency_of(static_cast<std::size_t>(i), w, idx, topo, topo_pos,
                              gpu, scratch);
    }
    return eff;
}

}  // namespace

std::vector<std::int64_t> compute_inspiring_ability(const TaskGraph& g) {
    return ability_impl(g, true);
}

std::vector<std::int64_t> compute_inspiring_ability_serial(const TaskGraph& g) {
    return ability_impl(g, false);
}

std::vector<std::int64_t> compute_inspiring_efficiency(const TaskGraph& g,
                                                       const CostTable& costs,
                                                       double unit_time_ms) {
    return efficiency_impl(g, costs, unit_time_ms, true);
}

std::vector<std::int64_t> compute_inspiring_efficiency_serial(const TaskGraph& g,
                                                              const CostTable& costs,
                                                              double unit_time_ms) {
    return efficiency_impl(g, costs, unit_time_ms, false);
}

CalibrationResult calibrate_unit_time(const TaskGraph& g, const CostTable& costs) {
    CalibrationResult res;
    const std::vector<int> layers = topological_layers(g);

    // Class id per task: distinct (topological layer, task type) pairs.
    std::map<std::pair<int, std::string>, std::size_t> class_ids;
    std::vector<std::size_t> cls(g.tasks.size());
    for (std::size_t i = 0; i < g.tasks.size(); ++i) {
        auto key = std::make_pair(layers[i], g.tasks[i].type);
        auto [it, fresh] = class_ids.emplace(key, class_ids.size());
        (void)fresh;
        cls[i] = it->second;
    }

    // Score = number of distinct per-class mean efficiencies, means compared
    // as reduced fractions so no float rounding can merge or split classes.
    auto score_of = [&](const std::vector<std::int64_t>& eff) {
        std::vector<std::int64_t> sum(class_ids.size(), 0), cnt(class_ids.size(), 0);
        for (std::size_t i = 0; i < eff.size(); ++i) {
            sum[cls[i]] += eff[i];
            cnt[cls[i]] += 1;
        }
        std::set<std::pair<std::int64_t, std::int64_t>> distinct;
        for (std::size_t c = 0; c < sum.size(); ++c) {
            std::int64_t d = std::gcd(sum[c] == 0 ? cnt[c] : sum[c], cnt[c]);
            distinct.emplace(sum[c] / d, cnt[c] / d);
        }
        return static_cast<std::int64_t>(distinct.size());
    };

    res.w0_ms = 2.0 * median_gpu_time_ms(g, costs);
    res.best_score = -1;
    for (int k = -4; k <= 6; ++k) {
        double w = std::ldexp(res.w0_ms, k);  // exact scaling by 2^k
        std::int64_t s = score_of(compute_inspiring_efficiency(g, costs, w));
        res.evaluations += 1;
        if (k == 0) res.w0_score = s;
        if (s > res.best_score) {  // strict: ties keep the smaller candidate
            res.best_score = s;
            res.unit_time_ms = w;
        }
    }
    return res;
}

std::vector<std::int64_t> upward_rank_priority(const TaskGraph& g,
                                               const CostTable& costs) {
    const GraphIndex idx = build_index(g);
    const std::size_t n = g.tasks.size();
    std::vector<double> mean(n);
    for (std::size_t i = 0; i < n; ++i) mean[i] = costs.mean_ms(g.tasks[i].type);

    std::vector<std::size_t> topo = topological_order(g);
    std::vector<double> rank(n, 0.0);
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        std::size_t u = *it;
        double best = 0.0;
        for (std::size_t s : idx.succ[u]) best = std::max(best, rank[s]);
        rank[u] = mean[u] + best;
    }
    std::vector<std::int64_t> prio(n);
    for (std::size_t i = 0; i < n; ++i)
        prio[i] = static_cast<std::int64_t>(rank[i] * 1000.0);
    return prio;
}

std::vector<std::int64_t> depth_priority(const TaskGraph& g) {
    const GraphIndex idx = build_index(g);
    std::vector<std::size_t> topo = topological_order(g);
    std::vector<std::int64_t> depth(g.tasks.size(), 0);
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        std::size_t u = *it;
        for (std::size_t s : idx.succ[u])
            depth[u] = std::max(depth[u], depth[s] + 1);
    }
    return depth;
}

TaskAttributes compute_attributes(const TaskGraph& g, const CostTable& costs,
                                  PriorityKind priority) {
    TaskAttributes a;
    a.ability = compute_inspiring_ability(g);
    a.unit_time_ms = calibrate_unit_time(g, costs).unit_time_ms;
    a.efficiency = compute_inspiring_efficiency(g, costs, a.unit_time_ms);
    switch (priority) {
        case PriorityKind::UpwardRank:
            a.static_priority = upward_rank_priority(g, costs);
            break;
        case PriorityKind::Depth:
            a.static_priority = depth_priority(g);
            break;
        case PriorityKind::Zero:
            a.static_priority.assign(g.tasks.size(), 0);
            break;
    }
    return a;
}

void write_attributes_csv(std::ostream& out, const TaskGraph& g,
                          const TaskAttributes& attrs) {
    const std::vector<int> layers = topological_layers(g);
    out << "task_id,type,layer,ability,efficiency,static_priority\n";
    for (std::size_t i = 0; i < g.tasks.size(); ++i)
        out << g.tasks[i].id << ',' << g.tasks[i].type << ',' << layers[i] << ','
            << attrs.ability[i] << ',' << attrs.efficiency[i] << ','
            << attrs.static_priority[i] << '\n';
}

}  // namespace tbsim
