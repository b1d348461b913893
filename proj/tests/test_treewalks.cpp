#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "fixtures.hpp"
#include "sreg/matrices.hpp"
#include "sreg/treewalks.hpp"

using namespace sreg;
using namespace fixtures;
using cplx = std::complex<double>;

TEST_CASE("walk tables: frozen counts") {
    auto t3 = walk_table_exact(d3(), 6);
    CHECK(t3.cell[0][0] == 1);
    CHECK(t3.cell[0][1] == 0);
    CHECK(t3.cell[0][2] == 3);
    CHECK(t3.cell[0][4] == 15);
    CHECK(t3.cell[0][6] == 87);

    // 2-regular tree is the integer line: central binomials
    auto t2 = walk_table_exact(d2(), 6);
    CHECK(t2.cell[0][2] == 2);
    CHECK(t2.cell[0][4] == 6);
    CHECK(t2.cell[0][6] == 20);

    auto tb = walk_table_exact(bireg23(), 4);
    CHECK(tb.cell[0][2] == 2);
    CHECK(tb.cell[0][4] == 8);
    CHECK(tb.cell[1][2] == 3);
    // root in cell 1 missing one edge toward cell 0: two children remain
    int p = tb.pair_index(0, 1);
    REQUIRE(p >= 0);
    CHECK(tb.pair[p][2] == 2);

    auto tp = walk_table_exact(heavy2x2(), 2);
    CHECK(tp.cell[0][2] == 16);
    CHECK(tp.cell[1][2] == 4);
}

TEST_CASE("walk tables match the materialized tree") {
    const int L = 10;
    for (auto spec : {d3(), d2(), bireg23(), house_coarse(), house5()}) {
        auto table = walk_table_exact(spec, L);
        for (int i = 0; i < spec.k(); ++i) {
            auto bf = brute_force_closed_walks(spec, i, L);
            for (int l = 0; l <= L; ++l) {
                CHECK(table.cell[i][l] == bf[l]);
            }
        }
        for (std::size_t p = 0; p < table.pairs.size(); ++p) {
            auto [i, j] = table.pairs[p];
            auto bf = brute_force_closed_walks(spec, j, L, i);
            for (int l = 0; l <= L; ++l) {
                CHECK(table.pair[p][l] == bf[l]);
            }
        }
    }
}

TEST_CASE("double tables equal exact tables on integer specs") {
    auto e = walk_table_exact(heavy2x2(), 12);
    auto d = walk_table(heavy2x2(), 12);
    for (int i = 0; i < 2; ++i) {
        for (int l = 0; l <= 12; ++l) {
            CHECK(d.cell[i][l] ==
                  doctest::Approx(static_cast<double>(e.cell[i][l]))
                      .epsilon(1e-12));
        }
    }
}

TEST_CASE("weighted recurrences match the materialized tree") {
    for (auto preset : {MatrixPreset::combinatorial_laplacian,
                        MatrixPreset::normalized_laplacian}) {
        auto spec = apply_preset(bireg23(), preset);
        auto table = walk_table(spec, 8);
        for (int i = 0; i < 2; ++i) {
            auto bf = brute_force_closed_walks_weighted(spec, i, 8);
            for (int l = 0; l <= 8; ++l) {
                CHECK(table.cell[i][l] ==
                      doctest::Approx(bf[l]).epsilon(1e-10).scale(
                          std::max(1.0, std::abs(bf[l]))));
            }
        }
    }
}

TEST_CASE("exact tables refuse to overflow or round") {
    CHECK_THROWS_AS(walk_table_exact(heavy2x2(), 60), std::overflow_error);
    auto frac = d3();
    frac.F(0, 0) = 0.5;
    CHECK_THROWS_AS(walk_table_exact(frac, 4), std::invalid_argument);
}

TEST_CASE("generating function system: structure at y = 0") {
    GFSystem sys(heavy2x2());
    CHECK(sys.k() == 2);
    CHECK(sys.dim() == 2 + 4);  // four ordered pairs with s_ij > 0
    auto p = sys.solve(0.0);
    for (int i = 0; i < sys.dim(); ++i) {
        CHECK(std::abs(p.x(i) - 1.0) < 1e-14);
    }
    CHECK(p.residual < 1e-12);
}

TEST_CASE("solver agrees with truncated series at small y") {
    for (auto spec : {d3(), bireg23(), heavy2x2(), house_coarse()}) {
        GFSystem sys(spec);
        auto table = walk_table(spec, 60);
        double radius = 0.25 / quotient_eigen(spec).lambda_s;
        for (cplx y : {cplx(radius, 0), cplx(0, radius),
                       cplx(-0.6 * radius, 0.5 * radius)}) {
            auto p = sys.solve(y);
            for (int i = 0; i < spec.k(); ++i) {
                CHECK(std::abs(p.x(i) - series_cell(table, i, y)) < 1e-9);
            }
            for (std::size_t q = 0; q < table.pairs.size(); ++q) {
                CHECK(std::abs(p.x(spec.k() + q) -
                               series_pair(table, static_cast<int>(q), y)) <
                      1e-9);
            }
        }
    }
}

TEST_CASE("solver matches the regular-tree closed form") {
    // for a d-regular tree the deficient-root function satisfies
    // 0 = 1 - P + (d-1) y^2 P^2, and the root function X = 1/(1 - d y^2 P)
    const double d = 3.0;
    GFSystem sys(d3());
    for (cplx y : {cplx(0.2, 0.0), cplx(0.05, 0.1), cplx(-0.12, 0.21),
                   cplx(0.0, 0.3)}) {
        cplx disc = std::sqrt(1.0 - 4.0 * (d - 1.0) * y * y);
        cplx P = (1.0 - disc) / (2.0 * (d - 1.0) * y * y);
        cplx X = 1.0 / (1.0 - d * y * y * P);
        auto p = sys.solve(y);
        CHECK(std::abs(p.x(0) - X) < 1e-9);
        CHECK(std::abs(p.x(1) - P) < 1e-9);
    }
}

TEST_CASE("solver matches the biregular closed form") {
    // coupled deficient-root functions for cells with degrees 2 and 3:
    // u = X_(0,1) solves y^2 u^2 + (y^2 - 1) u + 1 = 0 (branch with u(0)=1),
    // v = X_(1,0) = 1/(1 - y^2 u), X_0 = 1/(1 - 2 y^2 u), X_1 = 1/(1 - 3 y^2 v)
    GFSystem sys(bireg23());
    int pu = sys.pair_index(0, 1), pv = sys.pair_index(1, 0);
    REQUIRE(pu >= 0);
    REQUIRE(pv >= 0);
    for (cplx y : {cplx(0.15, 0.0), cplx(0.1, 0.2), cplx(-0.2, 0.1)}) {
        cplx y2 = y * y;
        cplx disc = std::sqrt((1.0 - y2) * (1.0 - y2) - 4.0 * y2);
        cplx u = ((1.0 - y2) - disc) / (2.0 * y2);
        cplx v = 1.0 / (1.0 - y2 * u);
        cplx X0 = 1.0 / (1.0 - 2.0 * y2 * u);
        cplx X1 = 1.0 / (1.0 - 3.0 * y2 * v);
        auto p = sys.solve(y);
        CHECK(std::abs(p.x(2 + pu) - u) < 1e-9);
        CHECK(std::abs(p.x(2 + pv) - v) < 1e-9);
        CHECK(std::abs(p.x(0) - X0) < 1e-9);
        CHECK(std::abs(p.x(1) - X1) < 1e-9);
    }
}

TEST_CASE("stieltjes transforms have negative imaginary part off the axis") {
    for (auto spec : {d3(), bireg23(), heavy2x2()}) {
        GFSystem sys(spec);
        double r = spectral_support_bound(spec);
        for (int i = 0; i <= 20; ++i) {
            double lambda = -1.2 * r + 2.4 * r * i / 20.0;
            for (double eps : {1e-3, 0.1, 1.0}) {
                auto R = stieltjes_all(sys, cplx(lambda, eps));
                for (int c = 0; c < spec.k(); ++c) {
                    CHECK(R(c).imag() < 0.0);
                }
            }
        }
    }
}

TEST_CASE("stieltjes transforms behave like 1/z far away") {
    for (auto spec : {d3(), heavy2x2()}) {
        GFSystem sys(spec);
        cplx z(1e6, 1.0);
        auto R = stieltjes_all(sys, z);
        for (int c = 0; c < spec.k(); ++c) {
            CHECK(std::abs(z * R(c) - 1.0) < 1e-5);
        }
    }
}

TEST_CASE("support bounds") {
    CHECK(spectral_support_bound(d3()) == doctest::Approx(3.0));
    CHECK(spectral_support_bound(heavy2x2()) == doctest::Approx(16.0));
    auto lap = apply_preset(d3(), MatrixPreset::combinatorial_laplacian);
    CHECK(spectral_support_bound(lap) == doctest::Approx(6.0));
    // high moment ratio comes out near the true edge 2 sqrt(2) = 2.828
    CHECK(support_radius_estimate(d3()) ==
          doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(0.05));
}

TEST_CASE("tree density reproduces the 3-regular closed form") {
    const double d = 3.0;
    auto km = [&](double x) {
        return d * std::sqrt(4.0 * (d - 1.0) - x * x) /
               (2.0 * M_PI * (d * d - x * x));
    };
    std::vector<double> grid;
    for (int i = 0; i <= 54; ++i) grid.push_back(-2.7 + 0.1 * i);
    auto curve = density_curve(d3(), grid);
    CHECK(curve.failed_count == 0);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        CHECK(std::abs(curve.mixture[p] - km(grid[p])) < 1e-4);
        CHECK(curve.status[p] == "ok");
        CHECK(curve.ratio(p, 0) == doctest::Approx(1.0));
    }
}

TEST_CASE("tree density vanishes outside the support bound") {
    std::vector<double> grid = {-5.0, 4.0, 5.0};
    auto curve = density_curve(d3(), grid);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        CHECK(std::abs(curve.mixture[p]) < 1e-3);
    }
}

TEST_CASE("density input validation") {
    CHECK_THROWS_AS(density_curve(d3(), {}), std::invalid_argument);
    CHECK_THROWS_AS(density_curve(d3(), {0.0}, {1e-3, 1e-2}),
                    std::invalid_argument);  // eps must decrease
    CHECK_THROWS_AS(density_curve(d3(), {0.0}, {1e-3}),
                    std::invalid_argument);  // need two for extrapolation
}

TEST_CASE("curve moments match walk counts") {
    std::vector<double> grid;
    for (int i = 0; i <= 600; ++i) grid.push_back(-3.0 + 0.01 * i);
    auto curve = density_curve(d3(), grid);
    auto table = walk_table(d3(), 8);
    auto rows = moment_check(curve, table, 8);
    for (const auto& row : rows) {
        if (row.ell == 0) continue;
        if (row.ell % 2 == 0) {
            CHECK(row.rel_err < 0.02);
        } else {
            CHECK(row.abs_err < 1e-2);
        }
    }
}

TEST_CASE("mixture cdf and ks statistic") {
    std::vector<double> grid;
    for (int i = 0; i <= 600; ++i) grid.push_back(-3.0 + 0.01 * i);
    auto curve = density_curve(d3(), grid);
    auto cdf = mixture_cdf(curve);
    REQUIRE(cdf.size() == grid.size());
    for (std::size_t i = 1; i < cdf.size(); ++i) CHECK(cdf[i] >= cdf[i - 1]);
    CHECK(cdf.back() == doctest::Approx(1.0).epsilon(1e-3));

    // samples drawn by inverting the curve's own cdf: ks must be tiny
    std::vector<double> samples;
    const int N = 500;
    for (int i = 0; i < N; ++i) {
        double target = (i + 0.5) / N * cdf.back();
        auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
        std::size_t idx = it - cdf.begin();
        samples.push_back(grid[std::min(idx, grid.size() - 1)]);
    }
    CHECK(ks_statistic(samples, curve) < 0.01);

    // shifted samples are far from the curve
    for (auto& s : samples) s += 1.0;
    CHECK(ks_statistic(samples, curve) > 0.1);
}

TEST_CASE("gf point serialization") {
    GFSystem sys(d3());
    auto p = sys.solve(cplx(0.1, 0.05));
    auto j = p.to_json();
    CHECK(j.contains("y"));
    CHECK(j.contains("x"));
    CHECK(j.contains("residual"));
    CHECK(j.contains("newton_iterations"));
}
