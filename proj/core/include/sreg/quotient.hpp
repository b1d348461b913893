#ifndef SREG_QUOTIENT_HPP
#define SREG_QUOTIENT_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sreg {

using MatI64 = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// Cell-level description of a vertex-partitioned graph family: every vertex
// in cell i has exactly s_ij neighbors in cell j. F and b extend the
// description to edge weights (F_ij on edges between cells i,j) and diagonal
// entries (b_i on cell-i vertices). Entries of F where s_ij = 0 carry no
// meaning and are ignored everywhere.
struct QuotientSpec {
    MatI64 S;
    Eigen::MatrixXd F;  // defaults to all ones
    Eigen::VectorXd b;  // defaults to zero
    std::optional<std::vector<std::int64_t>> n;

    int k() const { return static_cast<int>(S.rows()); }
    std::int64_t degree(int i) const { return S.row(i).sum(); }

    nlohmann::json to_json() const;
};

struct SpecParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Accepts {"S": [[..]], "F"?: [[..]], "b"?: [..], "n"?: [..]}. Shape or type
// problems throw SpecParseError; semantic problems are left to validate().
// An unreadable file throws std::runtime_error instead.
QuotientSpec parse_quotient_spec(const nlohmann::json& j);
QuotientSpec load_quotient_spec(const std::string& path);

struct Violation {
    std::string code;
    std::string message;
};

struct ValidationReport {
    bool ok = false;          // no violations at all
    bool irreducible = false; // support digraph strongly connected
    bool has_balance = false; // positive rational solution of n_i s_ij = n_j s_ji
    std::vector<std::int64_t> minimal_balance;  // empty when none exists
    std::vector<Violation> violations;

    nlohmann::json to_json() const;
};

ValidationReport validate(const QuotientSpec& spec);

// Smallest positive integer solution of the balance equations
// n_i s_ij = n_j s_ji (componentwise gcd 1). Throws if none exists.
std::vector<std::int64_t> minimal_balance(const QuotientSpec& spec);

// Smallest balanced cell sizes on which a simple realization can exist:
// scales minimal_balance until n_i > s_ii, n_i >= s_ji and n_i s_ii is even.
std::vector<std::int64_t> minimal_cell_sizes(const QuotientSpec& spec);

// Similarity-symmetrized cell matrix M = N^{1/2} (S.*F + diag b) N^{-1/2}
// with N = diag(n); symmetric whenever n is balanced and F symmetric.
Eigen::MatrixXd symmetrized_cell_matrix(const QuotientSpec& spec,
                                        const std::vector<std::int64_t>& n);

// Eigenvalues (descending) and eigenvectors of S.*F + diag b. Column j of
// psi holds the cell values of the j-th eigenvector, scaled so that the
// lift v -> psi(cell(v)) has unit Euclidean norm on a graph with cell sizes
// exactly n: sum_i n_i psi(i,j)^2 = 1. The sizes n are spec.n when present,
// else the minimal balance vector; they are echoed in the result. Ties are
// ordered by lexicographic comparison of the sign-fixed vectors; each vector
// has its first coordinate of magnitude > 1e-12 positive.
struct QuotientEigen {
    Eigen::VectorXd values;
    Eigen::MatrixXd psi;
    std::vector<std::int64_t> n;
    double lambda_s = 0;  // values(0)
};

QuotientEigen quotient_eigen(const QuotientSpec& spec);

}  // namespace sreg

#endif
