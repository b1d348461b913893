#ifndef SREG_BOUNDS_HPP
#define SREG_BOUNDS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sreg/graphs.hpp"
#include "sreg/quotient.hpp"

namespace sreg {

// Vertex subset with its per-cell occupation statistics.
struct SubsetProfile {
    std::vector<std::uint8_t> mask;          // one byte per vertex
    std::vector<std::int64_t> cell_counts;   // |B ∩ V_i|
    std::vector<double> fraction;            // b_i = |B ∩ V_i| / n_i
    std::int64_t total = 0;
    double global_fraction = 0;              // |B| / n

    static SubsetProfile from_mask(const PartitionedGraph& g,
                                   std::vector<std::uint8_t> mask);
    static SubsetProfile from_indices(const PartitionedGraph& g,
                                      const std::vector<std::int32_t>& verts);
};

struct BoundReport {
    std::string name;
    double lhs = 0;
    double rhs = 0;
    double slack = 0;  // rhs - lhs
    bool holds = false;
    std::string context;
};

BoundReport make_report(const std::string& name, double lhs, double rhs,
                        const std::string& context);

// Sum over ordered cell pairs of sqrt(s_ij s_ji / (n_i n_j)) |B_i| |C_j|;
// for a single cell this is (d/n)|B||C|.
double expected_edges(const QuotientSpec& spec,
                      const std::vector<std::int64_t>& n,
                      const SubsetProfile& B, const SubsetProfile& C);

// Ordered incidence count 1_B^T A 1_C: pairs (u, v) with u in B, v in C,
// u ~ v. Matches the double-sum convention of expected_edges when B and C
// overlap.
std::int64_t ordered_edge_incidences(const PartitionedGraph& g,
                                     const SubsetProfile& B,
                                     const SubsetProfile& C);

// Three expander-mixing style bounds on |incidences - expectation|:
//   classic: lambda_B sqrt(|B||C|)
//   tight:   lambda_B sqrt(sum_ij |B_i||C_j| (1-b_i)(1-c_j))
//   scaled:  lambda_B n sqrt(b sum_i c_i(1-c_i))  with b = |B|/n
BoundReport eml_classic(const PartitionedGraph& g, const QuotientSpec& spec,
                        const SubsetProfile& B, const SubsetProfile& C,
                        double lambda_b);
BoundReport eml_tight(const PartitionedGraph& g, const QuotientSpec& spec,
                      const SubsetProfile& B, const SubsetProfile& C,
                      double lambda_b);
BoundReport eml_scaled(const PartitionedGraph& g, const QuotientSpec& spec,
                       const SubsetProfile& B, const SubsetProfile& C,
                       double lambda_b);

// sum_v sum_i (|N(v) ∩ B_i| - b_i s_{tau(v),i})^2 <= lambda_B^2 sum_i b_i(1-b_i) n_i
BoundReport eml_neighbor_variance(const PartitionedGraph& g,
                                  const QuotientSpec& spec,
                                  const SubsetProfile& B, double lambda_b);

// lambda_max of the subgraph induced by the complement of C, against
// lambda_S (1 - min_i c_i) + lambda_B min_i c_i. Requires C != V.
BoundReport induced_complement_bound(const PartitionedGraph& g,
                                     const QuotientSpec& spec,
                                     const SubsetProfile& C, double lambda_s,
                                     double lambda_b);

// Number of length-l walks that avoid C, against (n - |C|) * bound^l where
// bound is the induced_complement_bound right-hand side.
BoundReport walks_avoiding_bound(const PartitionedGraph& g,
                                 const QuotientSpec& spec,
                                 const SubsetProfile& C, int ell,
                                 double lambda_s, double lambda_b);

// Finite-size lower bound on the bulk radius from cell-level walk counts:
// for each l in [ell_min, ell_max],
//   v_l = ((1/n) sum_j q_j^l <1, psi_bar_j>^2 - (1/n) sum_j q_j^{2l})^(1/2l)
// over the adjacency quotient eigenpairs q_j, skipping negative radicands;
// best is the max. target is the asymptotic sqrt(lambda_S).
struct AlonBoppanaResult {
    double best = 0;
    int best_ell = -1;
    std::vector<std::pair<int, double>> values;  // NaN where skipped
    double target = 0;
};

AlonBoppanaResult alon_boppana_lower(const QuotientSpec& spec,
                                     const std::vector<std::int64_t>& n,
                                     int ell_min, int ell_max);
BoundReport alon_boppana_report(const AlonBoppanaResult& result,
                                double lambda_b);

// Exact diameter against the walk-count threshold m*: the max over cell
// pairs (i,j) of the least t with sqrt((S^t)_ij (S^t)_ji) > (n-1) lambda_B^t
// (for lambda_B = 0: the least t with (S^t)_ij > 0). Computed in log scale
// so large powers cannot overflow. Throws on a disconnected graph.
struct DiameterCheck {
    int diameter = 0;
    std::int64_t m_star = 0;
    bool m_star_reached = false;  // false if the cap was hit
    bool lambda_b_zero_mode = false;
    double ratio_log = 0;  // m* / log(n)
    BoundReport report;
};

DiameterCheck diameter_check(const PartitionedGraph& g,
                             const QuotientSpec& spec, double lambda_b,
                             std::int64_t m_cap = 200000);

}  // namespace sreg

#endif
