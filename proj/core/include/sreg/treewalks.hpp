#ifndef SREG_TREEWALKS_HPP
#define SREG_TREEWALKS_HPP

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sreg/graphs.hpp"
#include "sreg/quotient.hpp"

namespace sreg {

// Closed-walk counts on the infinite cell-pattern tree. cell[i][l] counts
// weighted closed walks of length l at a cell-i root; pair[p][l] counts them
// at a root whose edge toward the pair's first cell has been removed (the
// "deficient root" seen by a walk that has just stepped away from there).
// Each traversal of an edge between cells a,b picks up a factor F_ab, so a
// round trip contributes F_ab * F_ba; diagonal steps pick up b_a.
template <typename T>
struct WalkTable {
    int k = 0;
    int max_length = 0;
    std::vector<std::pair<int, int>> pairs;  // (i, j): cell-j root, one edge toward cell i removed
    std::vector<std::vector<T>> cell;        // [i][l]
    std::vector<std::vector<T>> pair;        // [pair_index][l]

    int pair_index(int i, int j) const {
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            if (pairs[p].first == i && pairs[p].second == j) {
                return static_cast<int>(p);
            }
        }
        return -1;
    }
};

// Recurrence evaluation of the tables, O(L^2) per cell/pair. The exact
// variant requires integer b and F and verifies every add/multiply against
// int64 overflow.
WalkTable<std::int64_t> walk_table_exact(const QuotientSpec& spec,
                                         int max_length);
WalkTable<double> walk_table(const QuotientSpec& spec, int max_length);

// Independent oracle: materializes the distance-floor(L/2) ball of the
// pattern tree and powers the root indicator through the weighted adjacency
// operator, returning (T^l)_{root,root} for l = 0..max_length. Exact for the
// infinite tree because a closed walk of length l never leaves the ball.
// missing_parent_cell >= 0 computes the pair variant instead.
std::vector<std::int64_t> brute_force_closed_walks(
    const QuotientSpec& spec, int root_cell, int max_length,
    int missing_parent_cell = -1, std::int64_t max_vertices = 10'000'000);
std::vector<double> brute_force_closed_walks_weighted(
    const QuotientSpec& spec, int root_cell, int max_length,
    int missing_parent_cell = -1, std::int64_t max_vertices = 10'000'000);

// Partial sums of the walk generating functions, for cross-checks at small
// |y| where the series converges geometrically.
std::complex<double> series_cell(const WalkTable<double>& table, int cell,
                                 std::complex<double> y);
std::complex<double> series_pair(const WalkTable<double>& table,
                                 int pair_index, std::complex<double> y);

struct GFOptions {
    double tol = 1e-12;      // sup-norm residual target
    int max_newton = 25;
    double min_step = 1e-10; // continuation step underflow => failure
    int max_steps = 100000;
};

struct GFPoint {
    std::complex<double> y;
    Eigen::VectorXcd x;  // k cell components, then one per pair
    double residual = 0;
    int newton_iterations = 0;
    int segments = 0;
    nlohmann::json to_json() const;
};

// The generating functions X_i(y), X_ij(y) of the walk tables satisfy a
// square polynomial system: for cells,
//   0 = 1 - (1 - b_i y) X_i + y^2 X_i sum_m s_im G_im X_(i,m)
// and for pairs (i,j),
//   0 = 1 - (1 - b_j y) X_ij + y^2 X_ij sum_m (s_jm - [m==i]) G_jm X_(j,m)
// with G_ab = F_ab F_ba. At y=0 the solution is all ones with Jacobian -I;
// solve() tracks that branch by continuation from 0 to y, halving the step
// on Newton failure. For complex y the path runs down the imaginary axis and
// then along the circle |y| = const, staying clear of the real-axis branch
// cuts until the endpoint.
class GFSystem {
public:
    explicit GFSystem(const QuotientSpec& spec);

    int k() const { return k_; }
    int dim() const { return k_ + static_cast<int>(pairs_.size()); }
    const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }
    int pair_index(int i, int j) const;

    Eigen::VectorXcd residual(std::complex<double> y,
                              const Eigen::VectorXcd& x) const;
    Eigen::MatrixXcd jacobian(std::complex<double> y,
                              const Eigen::VectorXcd& x) const;

    GFPoint solve(std::complex<double> y, const GFOptions& opt = {}) const;

    // Newton from a caller-supplied starting point (warm start along a
    // sweep). Returns false if it fails to reach tol, leaving x unspecified.
    bool refine(std::complex<double> y, Eigen::VectorXcd& x, double tol,
                int max_newton, int* iterations = nullptr) const;

private:
    int k_;
    MatI64 S_;
    Eigen::VectorXd b_;
    Eigen::MatrixXd G_;
    std::vector<std::pair<int, int>> pairs_;
    Eigen::MatrixXi pair_idx_;  // -1 where s_ij = 0
};

// Stieltjes transform of the cell-i spectral measure, R_i(z) = X_i(1/z)/z.
// For Im z > 0 every component satisfies Im R < 0.
Eigen::VectorXcd stieltjes_all(const GFSystem& sys, std::complex<double> z,
                               const GFOptions& opt = {});
std::complex<double> stieltjes_transform(const GFSystem& sys, int cell,
                                         std::complex<double> z,
                                         const GFOptions& opt = {});

// Rigorous two-sided bound on the support of every cell measure (max
// weighted row sum of the tree operator).
double spectral_support_bound(const QuotientSpec& spec);

// Sharper estimate from high even moments; meaningful for b = 0 where the
// support is symmetric. Slightly low (ratio test converges from below), so
// callers should pad.
double support_radius_estimate(const QuotientSpec& spec, int even_order = 60);

// Per-cell limiting spectral densities on a lambda grid, by Stieltjes
// inversion mu_i'(l) = -Im R_i(l + i*eps)/pi with linear Richardson
// extrapolation in eps from the last two entries of the schedule. Negative
// extrapolated values are clipped to zero and counted. status per point:
// "ok", "clipped" or "failed".
struct DensityCurve {
    std::vector<double> lambda;
    std::vector<double> c;        // cell fractions n_i / sum(n)
    Eigen::MatrixXd mu;           // n_points x k
    std::vector<double> mixture;  // sum_i c_i mu_i
    Eigen::MatrixXd ratio;        // mu_i / mixture, NaN where mixture ~ 0
    std::vector<std::string> status;
    std::vector<double> epsilons;
    int clipped_count = 0;
    int failed_count = 0;
};

DensityCurve density_curve(const QuotientSpec& spec,
                           const std::vector<double>& grid,
                           const std::vector<double>& epsilons = {1e-2, 5e-3,
                                                                  2.5e-3},
                           const GFOptions& opt = {});

// Trapezoid moment of a curve column against lambda^ell (cell = -1 for the
// mixture).
double curve_moment(const DensityCurve& curve, int cell, int ell);

struct MomentCheckRow {
    int cell;  // -1 for the mixture
    int ell;
    double integral;
    double walk_value;
    double abs_err;
    double rel_err;  // abs_err / |walk_value|, inf when walk_value = 0
};

// Compares curve moments to the walk-table values they should equal
// (mixture moments to sum_i c_i omega_i).
std::vector<MomentCheckRow> moment_check(const DensityCurve& curve,
                                         const WalkTable<double>& table,
                                         int max_ell);

// Cumulative trapezoid mass of the mixture along the grid (not normalized;
// back() is the total captured mass).
std::vector<double> mixture_cdf(const DensityCurve& curve);

// Two-sided Kolmogorov-Smirnov distance between a sample and the normalized
// mixture CDF (linear interpolation on the grid, 0/1 outside).
double ks_statistic(std::vector<double> samples, const DensityCurve& curve);

}  // namespace sreg

#endif
