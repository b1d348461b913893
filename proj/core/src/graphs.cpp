#include "sreg/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>
#include <unordered_set>

namespace sreg {

void PartitionedGraph::finalize(int k_cells) {
    k = k_cells;
    cell_sizes.assign(k, 0);
    for (auto c : tau) {
        if (c < 0 || c >= k) throw std::invalid_argument("tau out of range");
        ++cell_sizes[c];
    }
    for (auto& list : adj) std::sort(list.begin(), list.end());
}

std::size_t PartitionedGraph::edge_count() const {
    std::size_t deg_sum = 0;
    for (const auto& list : adj) deg_sum += list.size();
    return deg_sum / 2;
}

bool PartitionedGraph::has_edge(std::int32_t u, std::int32_t v) const {
    const auto& list = adj[u];
    return std::binary_search(list.begin(), list.end(), v);
}

bool is_connected(const PartitionedGraph& g) {
    const int n = g.n_total();
    if (n == 0) return true;
    std::vector<char> seen(n, 0);
    std::queue<std::int32_t> q;
    q.push(0);
    seen[0] = 1;
    int count = 1;
    while (!q.empty()) {
        auto u = q.front();
        q.pop();
        for (auto v : g.adj[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                q.push(v);
            }
        }
    }
    return count == n;
}

std::optional<RegularityViolation> check_s_regular(const PartitionedGraph& g,
                                                   const QuotientSpec& spec) {
    const int k = spec.k();
    const int n = g.n_total();
    if (g.k != k || static_cast<int>(g.tau.size()) != n) {
        return RegularityViolation{-1, -1, 0, 0,
                                   "graph cell metadata is inconsistent"};
    }
    std::vector<std::int64_t> counts(k, 0);
    for (std::int32_t v = 0; v < n; ++v) {
        if (g.tau[v] < 0 || g.tau[v] >= k) {
            return RegularityViolation{v, g.tau[v], 0, 0, "tau out of range"};
        }
    }
    for (std::int32_t v = 0; v < n; ++v) {
        std::fill(counts.begin(), counts.end(), 0);
        std::int32_t prev = -1;
        for (auto u : g.adj[v]) {
            if (u == v) {
                return RegularityViolation{v, g.tau[v], 0, 0, "self loop"};
            }
            if (u == prev) {
                return RegularityViolation{v, g.tau[v], 0, 0,
                                           "duplicate neighbor"};
            }
            prev = u;
            ++counts[g.tau[u]];
        }
        for (int j = 0; j < k; ++j) {
            if (counts[j] != spec.S(g.tau[v], j)) {
                std::ostringstream os;
                os << "vertex " << v << " (cell " << g.tau[v] << ") has "
                   << counts[j] << " neighbors in cell " << j << ", expected "
                   << spec.S(g.tau[v], j);
                return RegularityViolation{v, j, spec.S(g.tau[v], j),
                                           counts[j], os.str()};
            }
        }
    }
    return std::nullopt;
}

namespace {

void require_realizable(const QuotientSpec& spec,
                        const std::vector<std::int64_t>& n) {
    const int k = spec.k();
    if (static_cast<int>(n.size()) != k) {
        throw std::invalid_argument("cell size vector has wrong length");
    }
    for (int i = 0; i < k; ++i) {
        if (n[i] <= 0) throw std::invalid_argument("cell sizes must be positive");
        for (int j = 0; j < k; ++j) {
            if (n[i] * spec.S(i, j) != n[j] * spec.S(j, i)) {
                throw std::invalid_argument(
                    "cell sizes violate the balance equations");
            }
        }
        if (n[i] <= spec.S(i, i)) {
            throw std::invalid_argument("n_i must exceed s_ii");
        }
        for (int j = 0; j < k; ++j) {
            if (n[i] < spec.S(j, i)) {
                throw std::invalid_argument("n_i must be at least s_ji");
            }
        }
        if ((n[i] * spec.S(i, i)) % 2 != 0) {
            throw std::invalid_argument("n_i * s_ii must be even");
        }
    }
}

std::vector<std::int64_t> cell_offsets(const std::vector<std::int64_t>& n) {
    std::vector<std::int64_t> off(n.size() + 1, 0);
    std::partial_sum(n.begin(), n.end(), off.begin() + 1);
    return off;
}

void add_edge(PartitionedGraph& g, std::int32_t u, std::int32_t v) {
    g.adj[u].push_back(v);
    g.adj[v].push_back(u);
}

std::vector<int> component_labels(const PartitionedGraph& g, int& n_comp) {
    const int n = g.n_total();
    std::vector<int> comp(n, -1);
    n_comp = 0;
    for (int s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        std::queue<std::int32_t> q;
        q.push(s);
        comp[s] = n_comp;
        while (!q.empty()) {
            auto u = q.front();
            q.pop();
            for (auto v : g.adj[u]) {
                if (comp[v] < 0) {
                    comp[v] = n_comp;
                    q.push(v);
                }
            }
        }
        ++n_comp;
    }
    return comp;
}

void remove_edge(PartitionedGraph& g, std::int32_t u, std::int32_t v) {
    auto drop = [&](std::int32_t a, std::int32_t b) {
        auto& list = g.adj[a];
        auto it = std::find(list.begin(), list.end(), b);
        if (it == list.end()) throw std::logic_error("edge to remove not found");
        list.erase(it);
    };
    drop(u, v);
    drop(v, u);
}

// Merges components by swapping a pair of same-cell-pair edges across two
// components. Both endpoints change components, so the swap can neither
// create a parallel edge nor a loop, and per-cell degrees are untouched.
void connect_by_swaps(PartitionedGraph& g, const QuotientSpec& spec) {
    while (true) {
        int n_comp = 0;
        auto comp = component_labels(g, n_comp);
        if (n_comp <= 1) return;

        // choose a reference cell pair with edges in every component
        int pi = -1, pj = -1;
        for (int i = 0; i < spec.k() && pi < 0; ++i) {
            for (int j = i; j < spec.k(); ++j) {
                if (spec.S(i, j) > 0) {
                    pi = i;
                    pj = j;
                    break;
                }
            }
        }
        if (pi < 0) {
            throw std::invalid_argument(
                "spec has no edges; disconnected union cannot be repaired");
        }

        auto find_edge = [&](int target_comp, std::int32_t& a,
                             std::int32_t& b) {
            for (std::int32_t u = 0; u < g.n_total(); ++u) {
                if (comp[u] != target_comp || g.tau[u] != pi) continue;
                for (auto v : g.adj[u]) {
                    if (g.tau[v] == pj) {
                        a = u;
                        b = v;
                        return true;
                    }
                }
            }
            return false;
        };

        std::int32_t a, b, c, d;
        if (!find_edge(comp[0], a, b) ||
            !find_edge(comp[0] == 0 ? 1 : 0, c, d)) {
            throw std::logic_error(
                "component without edges of the reference cell pair");
        }
        remove_edge(g, a, b);
        remove_edge(g, c, d);
        add_edge(g, a, d);
        add_edge(g, c, b);
        for (auto& list : g.adj) std::sort(list.begin(), list.end());
    }
}

}  // namespace

PartitionedGraph construct_deterministic(const QuotientSpec& spec,
                                         const std::vector<std::int64_t>& n) {
    require_realizable(spec, n);
    const int k = spec.k();
    auto off = cell_offsets(n);
    const auto n_total = off[k];
    if (n_total > std::numeric_limits<std::int32_t>::max()) {
        throw std::invalid_argument("graph too large for 32-bit vertex ids");
    }

    PartitionedGraph g;
    g.adj.resize(n_total);
    g.tau.resize(n_total);
    for (int i = 0; i < k; ++i) {
        std::fill(g.tau.begin() + off[i], g.tau.begin() + off[i + 1], i);
    }

    for (int i = 0; i < k; ++i) {
        const std::int64_t ni = n[i];
        const std::int64_t sii = spec.S(i, i);
        const std::int64_t half = sii / 2;
        for (std::int64_t v = 0; v < ni; ++v) {
            for (std::int64_t o = 1; o <= half; ++o) {
                add_edge(g, static_cast<std::int32_t>(off[i] + v),
                         static_cast<std::int32_t>(off[i] + (v + o) % ni));
            }
        }
        if (sii % 2 == 1) {
            for (std::int64_t v = 0; v < ni / 2; ++v) {
                add_edge(g, static_cast<std::int32_t>(off[i] + v),
                         static_cast<std::int32_t>(off[i] + v + ni / 2));
            }
        }
    }

    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            const std::int64_t sij = spec.S(i, j);
            if (sij <= 0) continue;
            // edge t joins left block t/s_ij to right residue t mod n_j;
            // simple because s_ij <= n_j, and degrees are s_ij / s_ji exactly
            for (std::int64_t t = 0; t < n[i] * sij; ++t) {
                add_edge(g, static_cast<std::int32_t>(off[i] + t / sij),
                         static_cast<std::int32_t>(off[j] + t % n[j]));
            }
        }
    }

    g.finalize(k);
    connect_by_swaps(g, spec);

    if (auto bad = check_s_regular(g, spec)) {
        throw std::logic_error("deterministic construction failed: " +
                               bad->message);
    }
    return g;
}

namespace {

// One block of the stub-matching sampler: pairs left stubs with right stubs
// (or stubs within one cell), redrawing on loops/parallels. Returns false on
// a dead end, leaving `edges` untouched.
class BlockMatcher {
public:
    BlockMatcher(const PartitionedGraph& g, philox4x64& rng)
        : g_(g), rng_(rng) {}

    bool match_within(const std::vector<std::int32_t>& verts, int degree,
                      std::vector<std::pair<std::int32_t, std::int32_t>>& edges) {
        std::vector<std::int32_t> stubs;
        stubs.reserve(verts.size() * degree);
        for (auto v : verts) {
            stubs.insert(stubs.end(), degree, v);
        }
        pending_.clear();
        std::vector<std::pair<std::int32_t, std::int32_t>> out;
        while (stubs.size() >= 2) {
            int attempts = 0;
            std::size_t i1, i2;
            std::int32_t u, v;
            do {
                if (++attempts > kFailCap) return false;
                i1 = rng_.uniform_below(stubs.size());
                i2 = rng_.uniform_below(stubs.size() - 1);
                if (i2 >= i1) ++i2;
                u = stubs[i1];
                v = stubs[i2];
            } while (u == v || exists(u, v));
            commit(u, v, out);
            if (i1 < i2) std::swap(i1, i2);
            drop(stubs, i1);
            drop(stubs, i2);
        }
        edges.insert(edges.end(), out.begin(), out.end());
        return true;
    }

    bool match_between(const std::vector<std::int32_t>& left, int dl,
                       const std::vector<std::int32_t>& right, int dr,
                       std::vector<std::pair<std::int32_t, std::int32_t>>& edges) {
        std::vector<std::int32_t> ls, rs;
        ls.reserve(left.size() * dl);
        rs.reserve(right.size() * dr);
        for (auto v : left) ls.insert(ls.end(), dl, v);
        for (auto v : right) rs.insert(rs.end(), dr, v);
        pending_.clear();
        std::vector<std::pair<std::int32_t, std::int32_t>> out;
        while (!ls.empty()) {
            int attempts = 0;
            std::size_t i1, i2;
            std::int32_t u, v;
            do {
                if (++attempts > kFailCap) return false;
                i1 = rng_.uniform_below(ls.size());
                i2 = rng_.uniform_below(rs.size());
                u = ls[i1];
                v = rs[i2];
            } while (exists(u, v));
            commit(u, v, out);
            drop(ls, i1);
            drop(rs, i2);
        }
        edges.insert(edges.end(), out.begin(), out.end());
        return true;
    }

private:
    static constexpr int kFailCap = 5000;

    bool exists(std::int32_t u, std::int32_t v) const {
        const auto& list = g_.adj[u];
        if (std::find(list.begin(), list.end(), v) != list.end()) return true;
        return pending_.count(key(u, v)) > 0;
    }

    void commit(std::int32_t u, std::int32_t v,
                std::vector<std::pair<std::int32_t, std::int32_t>>& out) {
        pending_.insert(key(u, v));
        out.emplace_back(u, v);
    }

    static void drop(std::vector<std::int32_t>& stubs, std::size_t i) {
        stubs[i] = stubs.back();
        stubs.pop_back();
    }

    std::uint64_t key(std::int32_t u, std::int32_t v) const {
        auto a = static_cast<std::uint64_t>(std::min(u, v));
        auto b = static_cast<std::uint64_t>(std::max(u, v));
        return a * static_cast<std::uint64_t>(g_.n_total()) + b;
    }

    const PartitionedGraph& g_;
    philox4x64& rng_;
    std::unordered_set<std::uint64_t> pending_;
};

}  // namespace

PartitionedGraph sample_configuration_model(const QuotientSpec& spec,
                                            const std::vector<std::int64_t>& n,
                                            philox4x64& rng, int max_retries) {
    require_realizable(spec, n);
    const int k = spec.k();
    auto off = cell_offsets(n);
    const auto n_total = off[k];
    if (n_total > std::numeric_limits<std::int32_t>::max()) {
        throw std::invalid_argument("graph too large for 32-bit vertex ids");
    }

    PartitionedGraph g;
    g.adj.resize(n_total);
    g.tau.resize(n_total);
    std::vector<std::vector<std::int32_t>> cells(k);
    for (int i = 0; i < k; ++i) {
        std::fill(g.tau.begin() + off[i], g.tau.begin() + off[i + 1], i);
        cells[i].resize(n[i]);
        std::iota(cells[i].begin(), cells[i].end(),
                  static_cast<std::int32_t>(off[i]));
    }

    int restarts = 0;
    BlockMatcher matcher(g, rng);
    auto run_block = [&](auto&& attempt) {
        std::vector<std::pair<std::int32_t, std::int32_t>> edges;
        while (!attempt(edges)) {
            edges.clear();
            if (++restarts > max_retries) {
                throw SamplingError(
                    "stub matching exceeded retry budget (" +
                        std::to_string(max_retries) + " block restarts)",
                    restarts);
            }
        }
        for (auto [u, v] : edges) add_edge(g, u, v);
    };

    for (int i = 0; i < k; ++i) {
        if (spec.S(i, i) > 0) {
            run_block([&](auto& edges) {
                return matcher.match_within(
                    cells[i], static_cast<int>(spec.S(i, i)), edges);
            });
        }
        for (int j = i + 1; j < k; ++j) {
            if (spec.S(i, j) > 0) {
                run_block([&](auto& edges) {
                    return matcher.match_between(
                        cells[i], static_cast<int>(spec.S(i, j)), cells[j],
                        static_cast<int>(spec.S(j, i)), edges);
                });
            }
        }
    }

    g.finalize(k);
    if (auto bad = check_s_regular(g, spec)) {
        throw std::logic_error("sampled graph failed verification: " +
                               bad->message);
    }
    return g;
}

EquitablePartition coarsest_equitable_partition(
    const std::vector<std::vector<std::int32_t>>& adj) {
    const int n = static_cast<int>(adj.size());
    EquitablePartition out;
    out.cells.assign(n, 0);
    if (n == 0) return out;

    int n_colors = 1;
    std::vector<std::int32_t> next(n);
    while (true) {
        // signature: own color plus sorted multiset of neighbor colors
        std::vector<std::pair<std::vector<std::int32_t>, std::int32_t>> sig(n);
        for (int v = 0; v < n; ++v) {
            std::vector<std::int32_t> s;
            s.reserve(adj[v].size() + 1);
            s.push_back(out.cells[v]);
            for (auto u : adj[v]) s.push_back(out.cells[u]);
            std::sort(s.begin() + 1, s.end());
            sig[v] = {std::move(s), v};
        }
        auto sorted = sig;
        std::sort(sorted.begin(), sorted.end());
        int fresh = 0;
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (i > 0 && sorted[i].first != sorted[i - 1].first) ++fresh;
            next[sorted[i].second] = fresh;
        }
        ++fresh;
        if (fresh == n_colors) break;
        n_colors = fresh;
        out.cells.swap(next);
    }

    // renumber cells by smallest member vertex
    int next_id = 0;
    std::vector<std::int32_t> relabel(n_colors, -1);
    for (int v = 0; v < n; ++v) {
        if (relabel[out.cells[v]] < 0) relabel[out.cells[v]] = next_id++;
    }
    for (int v = 0; v < n; ++v) out.cells[v] = relabel[out.cells[v]];
    out.n_cells = n_colors;

    out.quotient.setZero(n_colors, n_colors);
    std::vector<char> have(n_colors, 0);
    for (int v = 0; v < n; ++v) {
        int c = out.cells[v];
        if (have[c]) continue;
        have[c] = 1;
        for (auto u : adj[v]) out.quotient(c, out.cells[u]) += 1;
    }
    return out;
}

std::int64_t count_cycles_in_ball(const PartitionedGraph& g, std::int32_t v,
                                  int radius) {
    const int n = g.n_total();
    std::vector<int> dist(n, -1);
    std::vector<std::int32_t> ball;
    std::queue<std::int32_t> q;
    dist[v] = 0;
    q.push(v);
    ball.push_back(v);
    while (!q.empty()) {
        auto u = q.front();
        q.pop();
        if (dist[u] == radius) continue;
        for (auto w : g.adj[u]) {
            if (dist[w] < 0) {
                dist[w] = dist[u] + 1;
                ball.push_back(w);
                q.push(w);
            }
        }
    }

    std::int64_t edges2 = 0;
    for (auto u : ball) {
        for (auto w : g.adj[u]) {
            if (dist[w] >= 0) ++edges2;
        }
    }
    // the induced ball is connected by construction (every vertex reached
    // from v), so the cycle space has dimension E - V + 1
    return edges2 / 2 - static_cast<std::int64_t>(ball.size()) + 1;
}

CycleScalingResult cycle_scaling_experiment(
    const QuotientSpec& spec, const std::vector<std::int64_t>& target_sizes,
    int radius, int trials, std::uint64_t seed) {
    auto base = minimal_cell_sizes(spec);
    const std::int64_t base_total =
        std::accumulate(base.begin(), base.end(), std::int64_t{0});

    CycleScalingResult out;
    std::uint64_t stream = 0;
    for (auto target : target_sizes) {
        std::int64_t mult = std::max<std::int64_t>(
            1, (target + base_total / 2) / base_total);
        std::vector<std::int64_t> n(base);
        for (auto& x : n) x *= mult;
        const std::int64_t n_total =
            std::accumulate(n.begin(), n.end(), std::int64_t{0});

        double sum = 0, sumsq = 0;
        for (int t = 0; t < trials; ++t) {
            auto rng = philox4x64::stream(seed, stream++);
            auto g = sample_configuration_model(spec, n, rng);
            double total = 0;
            for (std::int32_t v = 0; v < g.n_total(); ++v) {
                total += static_cast<double>(count_cycles_in_ball(g, v, radius));
            }
            double mean_v = total / static_cast<double>(g.n_total());
            sum += mean_v;
            sumsq += mean_v * mean_v;
        }
        double mean = sum / trials;
        double var = std::max(0.0, (sumsq - sum * sum / trials) /
                                       std::max(1, trials - 1));
        out.rows.push_back(
            {n_total, mean, std::sqrt(var / std::max(1, trials))});
    }

    // least squares slope of log(mean) on log(n); rows with zero mean would
    // have an undefined log and are excluded
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (const auto& row : out.rows) {
        if (row.mean <= 0) continue;
        double x = std::log(static_cast<double>(row.n_total));
        double y = std::log(row.mean);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    out.slope = m >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx)
                       : std::numeric_limits<double>::quiet_NaN();
    return out;
}

TreeBall build_tree_ball(const QuotientSpec& spec, int root_cell, int radius,
                         std::int64_t max_vertices, int missing_parent_cell) {
    const int k = spec.k();
    if (root_cell < 0 || root_cell >= k) {
        throw std::invalid_argument("root cell out of range");
    }
    if (missing_parent_cell >= 0 &&
        (missing_parent_cell >= k ||
         spec.S(root_cell, missing_parent_cell) <= 0)) {
        throw std::invalid_argument(
            "missing parent cell is not adjacent to the root cell");
    }
    TreeBall tb;
    tb.root_cell = root_cell;
    tb.radius = radius;
    tb.tau.push_back(root_cell);
    tb.parent.push_back(-1);
    tb.level_begin = {0, 1};

    std::vector<int> parent_cell = {missing_parent_cell};
    std::int64_t level_start = 0, level_end = 1;
    for (int depth = 0; depth < radius; ++depth) {
        for (std::int64_t v = level_start; v < level_end; ++v) {
            int a = tb.tau[v];
            std::int64_t kids = spec.degree(a);
            if (parent_cell[v] >= 0) --kids;
            if (tb.n_total() + kids > max_vertices) {
                throw std::length_error(
                    "tree ball exceeds vertex cap of " +
                    std::to_string(max_vertices) + " at depth " +
                    std::to_string(depth + 1));
            }
            for (int b = 0; b < k; ++b) {
                std::int64_t c = spec.S(a, b) - (b == parent_cell[v] ? 1 : 0);
                for (std::int64_t t = 0; t < c; ++t) {
                    tb.tau.push_back(b);
                    tb.parent.push_back(static_cast<std::int32_t>(v));
                    parent_cell.push_back(a);
                }
            }
        }
        level_start = level_end;
        level_end = tb.n_total();
        tb.level_begin.push_back(level_end);
        if (level_start == level_end) break;  // no growth (edgeless spec)
    }
    while (static_cast<int>(tb.level_begin.size()) < radius + 2) {
        tb.level_begin.push_back(tb.n_total());
    }

    tb.child_begin.assign(tb.n_total() + 1, 0);
    for (std::int64_t v = 1; v < tb.n_total(); ++v) {
        ++tb.child_begin[tb.parent[v] + 1];
    }
    std::partial_sum(tb.child_begin.begin(), tb.child_begin.end(),
                     tb.child_begin.begin());
    return tb;
}

void write_edge_list(const PartitionedGraph& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (std::int32_t u = 0; u < g.n_total(); ++u) {
        for (auto v : g.adj[u]) {
            if (u < v) out << u << ' ' << v << '\n';
        }
    }
    out.close();

    nlohmann::json side;
    side["tau"] = g.tau;
    std::ofstream sout(path + ".json", std::ios::binary);
    if (!sout) throw std::runtime_error("cannot open for writing: " + path + ".json");
    sout << side.dump() << '\n';
}

PartitionedGraph read_edge_list(const std::string& path) {
    std::ifstream sin(path + ".json");
    if (!sin) throw std::runtime_error("cannot open sidecar: " + path + ".json");
    nlohmann::json side;
    try {
        sin >> side;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("invalid sidecar JSON: " + std::string(e.what()));
    }
    if (!side.contains("tau") || !side["tau"].is_array()) {
        throw std::runtime_error("sidecar must contain a \"tau\" array");
    }
    PartitionedGraph g;
    g.tau = side["tau"].get<std::vector<std::int32_t>>();
    const auto n = static_cast<std::int64_t>(g.tau.size());
    g.adj.resize(n);

    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open edge list: " + path);
    std::string line;
    std::int64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream is(line);
        std::int64_t u, v;
        if (!(is >> u >> v)) {
            throw std::runtime_error("bad edge list line " +
                                     std::to_string(lineno));
        }
        if (u < 0 || v < 0 || u >= n || v >= n || u == v) {
            throw std::runtime_error("invalid edge on line " +
                                     std::to_string(lineno));
        }
        add_edge(g, static_cast<std::int32_t>(u), static_cast<std::int32_t>(v));
    }
    int k = 0;
    for (auto c : g.tau) k = std::max(k, c + 1);
    g.finalize(k);
    return g;
}

}  // namespace sreg
