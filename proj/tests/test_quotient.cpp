#include <doctest.h>

#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "sreg/quotient.hpp"

using namespace sreg;
using namespace fixtures;
using nlohmann::json;

namespace {

bool has_code(const ValidationReport& r, const std::string& code) {
    for (const auto& v : r.violations) {
        if (v.code == code) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("parsing fills defaults") {
    auto spec = parse_quotient_spec(json::parse(R"({"S": [[3]]})"));
    CHECK(spec.k() == 1);
    CHECK(spec.S(0, 0) == 3);
    CHECK(spec.F(0, 0) == 1.0);
    CHECK(spec.b(0) == 0.0);
    CHECK(!spec.n.has_value());

    auto full = parse_quotient_spec(json::parse(
        R"({"S": [[0,2],[3,0]], "F": [[0,-1],[-1,0]], "b": [1, 2], "n": [6, 4]})"));
    CHECK(full.k() == 2);
    CHECK(full.F(0, 1) == -1.0);
    CHECK(full.b(1) == 2.0);
    REQUIRE(full.n.has_value());
    CHECK((*full.n)[0] == 6);
}

TEST_CASE("parsing rejects malformed specs with field diagnostics") {
    CHECK_THROWS_AS(parse_quotient_spec(json::parse(R"({})")),
                    SpecParseError);
    CHECK_THROWS_AS(parse_quotient_spec(json::parse(R"({"S": [[1,2]]})")),
                    SpecParseError);  // not square
    CHECK_THROWS_AS(parse_quotient_spec(json::parse(R"({"S": [[-1]]})")),
                    SpecParseError);  // negative
    CHECK_THROWS_AS(parse_quotient_spec(json::parse(R"({"S": [[2.5]]})")),
                    SpecParseError);  // non-integer
    CHECK_THROWS_AS(
        parse_quotient_spec(json::parse(R"({"S": [[3]], "F": [[1, 2]]})")),
        SpecParseError);  // F shape
    CHECK_THROWS_AS(
        parse_quotient_spec(json::parse(R"({"S": [[3]], "b": [1, 2]})")),
        SpecParseError);  // b length
    CHECK_THROWS_AS(
        parse_quotient_spec(json::parse(R"({"S": [[3]], "n": [0]})")),
        SpecParseError);  // n positive
    try {
        parse_quotient_spec(json::parse(R"({"S": [[3]], "F": [[1, 2]]})"));
    } catch (const SpecParseError& e) {
        CHECK(std::string(e.what()).find("F") != std::string::npos);
    }
}

TEST_CASE("to_json round-trips") {
    auto spec = bireg23();
    spec.n = std::vector<std::int64_t>{6, 4};
    auto back = parse_quotient_spec(spec.to_json());
    CHECK(back.S == spec.S);
    CHECK(back.F == spec.F);
    CHECK(back.b == spec.b);
    CHECK(*back.n == *spec.n);
}

TEST_CASE("validate accepts the standard specs") {
    for (auto spec : {d3(), d2(), bireg23(), heavy2x2(), house5(),
                      house_coarse()}) {
        auto r = validate(spec);
        CHECK(r.ok);
        CHECK(r.irreducible);
        CHECK(r.has_balance);
    }
}

TEST_CASE("validate flags structural problems") {
    SUBCASE("one-way support") {
        auto r = validate(make_spec({{0, 2}, {0, 2}}));
        CHECK(!r.ok);
        CHECK(has_code(r, "support_asymmetric"));
    }
    SUBCASE("reducible") {
        auto r = validate(make_spec({{2, 0}, {0, 2}}));
        CHECK(!r.ok);
        CHECK(has_code(r, "reducible"));
        CHECK(!r.irreducible);
    }
    SUBCASE("no balance solution") {
        // cycle of ratios multiplies to 1/8, so no positive n exists
        auto r = validate(make_spec({{0, 1, 2}, {2, 0, 1}, {1, 2, 0}}));
        CHECK(!r.ok);
        CHECK(has_code(r, "no_balance"));
        CHECK(!r.has_balance);
        CHECK(r.minimal_balance.empty());
    }
    SUBCASE("asymmetric F") {
        auto s = bireg23();
        s.F(0, 1) = 2.0;
        auto r = validate(s);
        CHECK(has_code(r, "f_asymmetric"));
    }
    SUBCASE("F vanishing on the support") {
        auto s = d3();
        s.F(0, 0) = 0.0;
        auto r = validate(s);
        CHECK(has_code(r, "f_zero_on_support"));
    }
    SUBCASE("unbalanced explicit sizes") {
        auto s = heavy2x2();
        s.n = std::vector<std::int64_t>{15, 16};
        CHECK(has_code(validate(s), "n_unbalanced"));
    }
    SUBCASE("sizes too small for a simple graph") {
        auto s = d3();
        s.n = std::vector<std::int64_t>{3};
        CHECK(has_code(validate(s), "n_too_small"));
    }
    SUBCASE("odd within-cell degree sum") {
        auto s = d3();
        s.n = std::vector<std::int64_t>{5};
        CHECK(has_code(validate(s), "n_parity"));
    }
}

TEST_CASE("minimal balance solutions") {
    CHECK(minimal_balance(d3()) == std::vector<std::int64_t>{1});
    CHECK(minimal_balance(bireg23()) == std::vector<std::int64_t>{3, 2});
    CHECK(minimal_balance(heavy2x2()) == std::vector<std::int64_t>{1, 1});
    CHECK(minimal_balance(house_coarse()) ==
          std::vector<std::int64_t>{1, 2, 2});
    CHECK(minimal_balance(house5()) ==
          std::vector<std::int64_t>{1, 1, 1, 1, 1});
    CHECK_THROWS(minimal_balance(make_spec({{0, 1, 2}, {2, 0, 1}, {1, 2, 0}})));
}

TEST_CASE("minimal cell sizes admit simple realizations") {
    CHECK(minimal_cell_sizes(d3()) == std::vector<std::int64_t>{4});
    CHECK(minimal_cell_sizes(d2()) == std::vector<std::int64_t>{3});
    CHECK(minimal_cell_sizes(heavy2x2()) == std::vector<std::int64_t>{15, 15});
    for (auto spec : {d3(), d2(), bireg23(), heavy2x2(), house_coarse()}) {
        auto n = minimal_cell_sizes(spec);
        auto s = spec;
        s.n = n;
        auto r = validate(s);
        CHECK(r.ok);
    }
}

TEST_CASE("balance equations hold for minimal sizes") {
    for (auto spec : {bireg23(), heavy2x2(), house_coarse(), house5()}) {
        auto n = minimal_balance(spec);
        for (int i = 0; i < spec.k(); ++i) {
            for (int j = 0; j < spec.k(); ++j) {
                CHECK(n[i] * spec.S(i, j) == n[j] * spec.S(j, i));
            }
        }
    }
}

TEST_CASE("symmetrized cell matrix is symmetric on balanced sizes") {
    auto M = symmetrized_cell_matrix(bireg23(), {3, 2});
    CHECK(M(0, 1) == doctest::Approx(std::sqrt(6.0)).epsilon(1e-12));
    CHECK(M(1, 0) == doctest::Approx(std::sqrt(6.0)).epsilon(1e-12));
    CHECK(M(0, 0) == 0.0);
}

TEST_CASE("quotient eigen: frozen values") {
    SUBCASE("single cell") {
        auto e = quotient_eigen(d3());
        CHECK(e.values(0) == doctest::Approx(3.0).epsilon(1e-14));
        CHECK(e.lambda_s == doctest::Approx(3.0));
        // normalization sum_i n_i psi^2 = 1 with n = (1)
        CHECK(e.psi(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("two cells, known closed form") {
        auto e = quotient_eigen(heavy2x2());
        double r = 2.0 * std::sqrt(10.0);
        CHECK(e.values(0) == doctest::Approx(8.0 + r).epsilon(1e-13));
        CHECK(e.values(1) == doctest::Approx(8.0 - r).epsilon(1e-13));
        // eigenvector of the larger value satisfies y = (sqrt(10)-3) x
        double ratio = e.psi(1, 0) / e.psi(0, 0);
        CHECK(ratio == doctest::Approx(std::sqrt(10.0) - 3.0).epsilon(1e-12));
    }
    SUBCASE("bipartite pair") {
        auto e = quotient_eigen(bireg23());
        CHECK(e.values(0) == doctest::Approx(std::sqrt(6.0)).epsilon(1e-13));
        CHECK(e.values(1) == doctest::Approx(-std::sqrt(6.0)).epsilon(1e-13));
        CHECK(e.n == std::vector<std::int64_t>{3, 2});
    }
}

TEST_CASE("quotient eigen: psi columns are N-orthonormal") {
    for (auto spec : {heavy2x2(), bireg23(), house_coarse()}) {
        auto e = quotient_eigen(spec);
        const int k = spec.k();
        for (int a = 0; a < k; ++a) {
            for (int b = 0; b < k; ++b) {
                double dot = 0;
                for (int i = 0; i < k; ++i) {
                    dot += static_cast<double>(e.n[i]) * e.psi(i, a) *
                           e.psi(i, b);
                }
                CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0)
                                 .epsilon(1e-10)
                                 .scale(1.0));
            }
        }
    }
}

TEST_CASE("quotient eigen respects explicit sizes") {
    auto s = d3();
    s.n = std::vector<std::int64_t>{4};
    auto e = quotient_eigen(s);
    CHECK(e.psi(0, 0) == doctest::Approx(0.5).epsilon(1e-14));  // 1/sqrt(4)
    CHECK(e.n == std::vector<std::int64_t>{4});
}
