#ifndef SREG_GRAPHS_HPP
#define SREG_GRAPHS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sreg/quotient.hpp"
#include "sreg/rng.hpp"

namespace sreg {

// Simple undirected graph with a cell assignment per vertex. Neighbor lists
// are kept sorted so adjacency tests are O(log d).
struct PartitionedGraph {
    int k = 0;
    std::vector<std::vector<std::int32_t>> adj;
    std::vector<std::int32_t> tau;
    std::vector<std::int64_t> cell_sizes;

    int n_total() const { return static_cast<int>(adj.size()); }
    std::size_t edge_count() const;
    bool has_edge(std::int32_t u, std::int32_t v) const;
    int degree(std::int32_t v) const { return static_cast<int>(adj[v].size()); }

    // builds cell_sizes from tau and sorts neighbor lists
    void finalize(int k_cells);
};

bool is_connected(const PartitionedGraph& g);

struct RegularityViolation {
    std::int32_t vertex;
    int cell;             // neighbor cell with the wrong count
    std::int64_t expected;
    std::int64_t actual;
    std::string message;
};

// Checks |N(v) ∩ V_j| == s_{tau(v),j} for every vertex and cell, plus loops,
// duplicate neighbors and tau/cell-size consistency. nullopt means the graph
// realizes the spec.
std::optional<RegularityViolation> check_s_regular(const PartitionedGraph& g,
                                                   const QuotientSpec& spec);

// Deterministic realization on cell sizes n: circulants inside cells,
// block-circulant biregular graphs between cells, then degree-preserving
// edge swaps (deterministic scan order) until connected.
PartitionedGraph construct_deterministic(const QuotientSpec& spec,
                                         const std::vector<std::int64_t>& n);

struct SamplingError : std::runtime_error {
    int attempts;
    SamplingError(const std::string& what, int attempts_)
        : std::runtime_error(what), attempts(attempts_) {}
};

// Random realization: each cell pair (and each cell interior) is matched by
// uniform sequential pairing of half-edge stubs, redrawing pairs that would
// create a loop or parallel edge and restarting the block when it dead-ends.
// Restart counts across all blocks are capped by max_retries.
PartitionedGraph sample_configuration_model(const QuotientSpec& spec,
                                            const std::vector<std::int64_t>& n,
                                            philox4x64& rng,
                                            int max_retries = 2000);

// Coarsest equitable partition by color refinement started from the unit
// partition, with cells numbered by their smallest vertex. quotient(i,j) is
// the neighbor count in cell j of any cell-i vertex.
struct EquitablePartition {
    std::vector<std::int32_t> cells;
    int n_cells = 0;
    MatI64 quotient;
};

EquitablePartition coarsest_equitable_partition(
    const std::vector<std::vector<std::int32_t>>& adj);

// Number of independent cycles (edges - vertices + components) of the
// subgraph induced by the radius-r ball around v.
std::int64_t count_cycles_in_ball(const PartitionedGraph& g, std::int32_t v,
                                  int radius);

struct CycleScalingRow {
    std::int64_t n_total;
    double mean;        // cycles in ball, averaged over trials and vertices
    double std_error;
};

struct CycleScalingResult {
    std::vector<CycleScalingRow> rows;
    double slope;  // log-log regression of mean against n
};

// Samples `trials` graphs per target size, averages ball cycle counts over
// all vertices of each sample, and regresses log(mean) on log(n). Sizes are
// per-cell multipliers of minimal_cell_sizes chosen to land near the
// requested totals.
CycleScalingResult cycle_scaling_experiment(const QuotientSpec& spec,
                                            const std::vector<std::int64_t>& target_sizes,
                                            int radius, int trials,
                                            std::uint64_t seed);

// Truncated universal cover: the infinite tree in which a cell-a vertex has
// exactly s_ab neighbors in cell b, grown breadth-first from a root until
// `radius` or until the vertex cap would be exceeded (which throws).
// Vertices are numbered in BFS order; children of v are the contiguous range
// [child_begin[v], child_begin[v+1]).
struct TreeBall {
    int root_cell = 0;
    int radius = 0;
    std::vector<std::int32_t> tau;
    std::vector<std::int32_t> parent;       // -1 at the root
    std::vector<std::int64_t> child_begin;  // size n+1
    std::vector<std::int64_t> level_begin;  // size radius+2

    std::int64_t n_total() const {
        return static_cast<std::int64_t>(tau.size());
    }
};

// missing_parent_cell >= 0 grows the tree as if the root already had a
// parent in that cell (one fewer child there), which is the rooted tree
// whose closed walks the pair tables count.
TreeBall build_tree_ball(const QuotientSpec& spec, int root_cell, int radius,
                         std::int64_t max_vertices = 10'000'000,
                         int missing_parent_cell = -1);

// Text format: one "u v" line per edge (u < v, 0-based, sorted) plus a JSON
// sidecar {"tau": [...]} written next to it.
// The sidecar lives at path + ".json"; reading infers k from tau.
void write_edge_list(const PartitionedGraph& g, const std::string& path);
PartitionedGraph read_edge_list(const std::string& path);

}  // namespace sreg

#endif
