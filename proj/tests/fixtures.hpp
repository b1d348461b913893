#ifndef SREG_TEST_FIXTURES_HPP
#define SREG_TEST_FIXTURES_HPP

#include <initializer_list>

#include "sreg/graphs.hpp"
#include "sreg/quotient.hpp"

namespace fixtures {

inline sreg::QuotientSpec make_spec(
    std::initializer_list<std::initializer_list<std::int64_t>> rows) {
    sreg::QuotientSpec s;
    int k = static_cast<int>(rows.size());
    s.S.resize(k, k);
    int i = 0;
    for (auto& r : rows) {
        int j = 0;
        for (auto v : r) s.S(i, j++) = v;
        ++i;
    }
    s.F = Eigen::MatrixXd::Ones(k, k);
    s.b = Eigen::VectorXd::Zero(k);
    return s;
}

inline sreg::QuotientSpec d3() { return make_spec({{3}}); }
inline sreg::QuotientSpec d2() { return make_spec({{2}}); }
inline sreg::QuotientSpec bireg23() { return make_spec({{0, 2}, {3, 0}}); }
inline sreg::QuotientSpec heavy2x2() { return make_spec({{14, 2}, {2, 2}}); }

// 5-vertex "house": a triangle {0,1,2} with a square {1,2,4,3} glued on the
// edge 1-2. Vertex 0 is the apex; 1 and 2 have degree 3, the rest degree 2.
inline const std::initializer_list<std::pair<int, int>> kHouseEdges = {
    {0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 4}, {3, 4}};

// House with every vertex its own cell: S is the 0/1 adjacency matrix.
inline sreg::QuotientSpec house5() {
    sreg::QuotientSpec s;
    s.S = sreg::MatI64::Zero(5, 5);
    for (auto [u, v] : kHouseEdges) {
        s.S(u, v) = 1;
        s.S(v, u) = 1;
    }
    s.F = Eigen::MatrixXd::Ones(5, 5);
    s.b = Eigen::VectorXd::Zero(5);
    return s;
}

// Coarsest equitable partition of the house: {0}, {1,2}, {3,4}.
inline sreg::QuotientSpec house_coarse() {
    return make_spec({{0, 2, 0}, {1, 1, 1}, {0, 1, 1}});
}

inline sreg::PartitionedGraph house_graph() {
    sreg::PartitionedGraph g;
    g.adj.resize(5);
    for (auto [u, v] : kHouseEdges) {
        g.adj[u].push_back(v);
        g.adj[v].push_back(u);
    }
    g.tau = {0, 1, 1, 2, 2};
    g.finalize(3);
    return g;
}

inline sreg::PartitionedGraph house_graph_fine() {
    auto g = house_graph();
    g.tau = {0, 1, 2, 3, 4};
    g.finalize(5);
    return g;
}

}  // namespace fixtures

#endif
