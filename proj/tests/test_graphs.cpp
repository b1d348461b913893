#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <set>

#include "fixtures.hpp"
#include "sreg/graphs.hpp"
#include "sreg/rng.hpp"

using namespace sreg;
using namespace fixtures;

TEST_CASE("deterministic construction: complete graph") {
    auto g = construct_deterministic(d3(), {4});
    CHECK(g.n_total() == 4);
    CHECK(g.edge_count() == 6);
    for (int u = 0; u < 4; ++u) {
        for (int v = u + 1; v < 4; ++v) CHECK(g.has_edge(u, v));
    }
    CHECK(!check_s_regular(g, d3()).has_value());
    CHECK(is_connected(g));
}

TEST_CASE("deterministic construction: cycle") {
    auto g = construct_deterministic(d2(), {5});
    CHECK(g.n_total() == 5);
    CHECK(g.edge_count() == 5);
    CHECK(!check_s_regular(g, d2()).has_value());
    CHECK(is_connected(g));
}

TEST_CASE("deterministic construction: biregular example") {
    auto g = construct_deterministic(bireg23(), {6, 4});
    CHECK(g.n_total() == 10);
    CHECK(g.edge_count() == 12);
    CHECK(!check_s_regular(g, bireg23()).has_value());
    CHECK(is_connected(g));
    // bipartite: no within-cell edges
    for (int v = 0; v < g.n_total(); ++v) {
        for (auto u : g.adj[v]) CHECK(g.tau[u] != g.tau[v]);
    }
}

TEST_CASE("deterministic construction stays connected across specs") {
    struct Case {
        QuotientSpec spec;
        std::vector<std::int64_t> n;
    };
    const Case cases[] = {
        {heavy2x2(), {15, 15}},
        {heavy2x2(), {30, 30}},
        {bireg23(), {30, 20}},
        {house_coarse(), {10, 20, 20}},
        {d3(), {20}},
        {d2(), {9}},
    };
    for (const auto& c : cases) {
        auto g = construct_deterministic(c.spec, c.n);
        CHECK(!check_s_regular(g, c.spec).has_value());
        CHECK(is_connected(g));
    }
}

TEST_CASE("deterministic construction rejects impossible sizes") {
    CHECK_THROWS_AS(construct_deterministic(d3(), {3}),
                    std::invalid_argument);  // needs n > 3
    CHECK_THROWS_AS(construct_deterministic(d3(), {5}),
                    std::invalid_argument);  // odd degree sum
    CHECK_THROWS_AS(construct_deterministic(bireg23(), {6, 5}),
                    std::invalid_argument);  // unbalanced
}

TEST_CASE("regularity checker pinpoints mutations") {
    auto g = construct_deterministic(d3(), {4});

    SUBCASE("missing edge") {
        // drop 0-1
        auto& a0 = g.adj[0];
        a0.erase(std::find(a0.begin(), a0.end(), 1));
        auto& a1 = g.adj[1];
        a1.erase(std::find(a1.begin(), a1.end(), 0));
        auto viol = check_s_regular(g, d3());
        REQUIRE(viol.has_value());
        CHECK(viol->vertex == 0);
        CHECK(viol->cell == 0);
        CHECK(viol->expected == 3);
        CHECK(viol->actual == 2);
    }
    SUBCASE("wrong cell assignment") {
        auto h = construct_deterministic(bireg23(), {6, 4});
        h.tau[0] = 1;
        h.finalize(2);
        CHECK(check_s_regular(h, bireg23()).has_value());
    }
    SUBCASE("self loop") {
        g.adj[2].push_back(2);
        std::sort(g.adj[2].begin(), g.adj[2].end());
        CHECK(check_s_regular(g, d3()).has_value());
    }
    SUBCASE("duplicate edge") {
        g.adj[0].push_back(1);
        std::sort(g.adj[0].begin(), g.adj[0].end());
        CHECK(check_s_regular(g, d3()).has_value());
    }
}

TEST_CASE("connectivity detector") {
    PartitionedGraph g;
    g.adj = {{1, 2}, {0, 2}, {0, 1}, {4, 5}, {3, 5}, {3, 4}};
    g.tau = {0, 0, 0, 0, 0, 0};
    g.finalize(1);
    CHECK(!is_connected(g));
    CHECK(is_connected(construct_deterministic(d2(), {6})));
}

TEST_CASE("sampler: reproducible, spec-conforming, stream-separated") {
    auto spec = heavy2x2();
    std::vector<std::int64_t> n = {30, 30};

    auto r1 = philox4x64::stream(11, 0);
    auto r2 = philox4x64::stream(11, 0);
    auto g1 = sample_configuration_model(spec, n, r1);
    auto g2 = sample_configuration_model(spec, n, r2);
    CHECK(g1.adj == g2.adj);
    CHECK(!check_s_regular(g1, spec).has_value());

    auto r3 = philox4x64::stream(11, 1);
    auto g3 = sample_configuration_model(spec, n, r3);
    CHECK(g1.adj != g3.adj);
    CHECK(!check_s_regular(g3, spec).has_value());
}

TEST_CASE("sampler respects bipartite structure") {
    auto spec = bireg23();
    auto rng = philox4x64::stream(3, 0);
    auto g = sample_configuration_model(spec, {30, 20}, rng);
    CHECK(!check_s_regular(g, spec).has_value());
    for (int v = 0; v < g.n_total(); ++v) {
        for (auto u : g.adj[v]) CHECK(g.tau[u] != g.tau[v]);
    }
}

TEST_CASE("sampler varies over seeds") {
    auto spec = d3();
    std::set<std::vector<std::vector<std::int32_t>>> distinct;
    for (int s = 0; s < 5; ++s) {
        auto rng = philox4x64::stream(s, 0);
        distinct.insert(sample_configuration_model(spec, {20}, rng).adj);
    }
    CHECK(distinct.size() >= 4);
}

TEST_CASE("color refinement finds the coarsest equitable partition") {
    SUBCASE("path on three vertices") {
        std::vector<std::vector<std::int32_t>> adj = {{1}, {0, 2}, {1}};
        auto p = coarsest_equitable_partition(adj);
        CHECK(p.n_cells == 2);
        CHECK(p.cells == std::vector<std::int32_t>{0, 1, 0});
        CHECK(p.quotient(0, 1) == 1);
        CHECK(p.quotient(1, 0) == 2);
    }
    SUBCASE("cycle is already equitable") {
        auto g = construct_deterministic(d2(), {6});
        auto p = coarsest_equitable_partition(g.adj);
        CHECK(p.n_cells == 1);
        CHECK(p.quotient(0, 0) == 2);
    }
    SUBCASE("house graph refines to three cells") {
        auto g = house_graph();
        auto p = coarsest_equitable_partition(g.adj);
        CHECK(p.n_cells == 3);
        CHECK(p.cells == std::vector<std::int32_t>{0, 1, 1, 2, 2});
        auto expect = house_coarse();
        CHECK(p.quotient == expect.S);
    }
}

TEST_CASE("cycle counts in balls") {
    auto tri = construct_deterministic(d2(), {3});
    CHECK(count_cycles_in_ball(tri, 0, 1) == 1);
    auto k4 = construct_deterministic(d3(), {4});
    CHECK(count_cycles_in_ball(k4, 0, 1) == 3);
    PartitionedGraph path;
    path.adj = {{1}, {0, 2}, {1}};
    path.tau = {0, 0, 0};
    path.finalize(1);
    CHECK(count_cycles_in_ball(path, 1, 1) == 0);
}

TEST_CASE("cycle scaling experiment decays roughly like 1/n") {
    auto res = cycle_scaling_experiment(d3(), {100, 200, 400}, 2, 20, 42);
    REQUIRE(res.rows.size() == 3);
    CHECK(res.rows[0].n_total == 100);
    CHECK(res.rows[2].n_total == 400);
    CHECK(res.rows[0].mean > res.rows[2].mean);
    CHECK(res.slope < -0.5);
    CHECK(res.slope > -1.5);
}

TEST_CASE("tree balls have the expected level structure") {
    SUBCASE("3-regular, radius 2") {
        auto ball = build_tree_ball(d3(), 0, 2);
        CHECK(ball.n_total() == 10);  // 1 + 3 + 6
        CHECK(ball.level_begin == std::vector<std::int64_t>{0, 1, 4, 10});
        // every non-root vertex has exactly one parent; edges = n - 1
        std::int64_t children = 0;
        for (std::size_t v = 0; v < ball.tau.size(); ++v) {
            children += ball.child_begin[v + 1] - ball.child_begin[v];
        }
        CHECK(children == ball.n_total() - 1);
    }
    SUBCASE("biregular root") {
        auto ball = build_tree_ball(bireg23(), 0, 2);
        CHECK(ball.n_total() == 7);  // 1 + 2 + 4
        for (std::int64_t v = ball.level_begin[1]; v < ball.level_begin[2];
             ++v) {
            CHECK(ball.tau[v] == 1);
        }
    }
    SUBCASE("missing-parent variant drops one child") {
        auto full = build_tree_ball(d3(), 0, 1);
        auto reduced = build_tree_ball(d3(), 0, 1, 10'000'000, 0);
        CHECK(full.n_total() == 4);
        CHECK(reduced.n_total() == 3);
    }
    SUBCASE("vertex cap throws") {
        CHECK_THROWS_AS(build_tree_ball(d3(), 0, 40, 1000),
                        std::length_error);
    }
    SUBCASE("bad missing-parent cell") {
        CHECK_THROWS_AS(build_tree_ball(bireg23(), 0, 2, 1000, 0),
                        std::invalid_argument);  // s_00 = 0
    }
}

TEST_CASE("edge list round-trip") {
    namespace fs = std::filesystem;
    auto path = (fs::temp_directory_path() / "sreg_graph_test.txt").string();
    for (auto [spec, n] :
         {std::pair{d3(), std::vector<std::int64_t>{4}},
          std::pair{bireg23(), std::vector<std::int64_t>{6, 4}}}) {
        auto g = construct_deterministic(spec, n);
        write_edge_list(g, path);
        auto back = read_edge_list(path);
        CHECK(back.adj == g.adj);
        CHECK(back.tau == g.tau);
        CHECK(back.k == g.k);
        CHECK(back.cell_sizes == g.cell_sizes);
    }
    std::remove(path.c_str());
    std::remove((path + ".json").c_str());
}
