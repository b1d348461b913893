#ifndef SREG_MATRICES_HPP
#define SREG_MATRICES_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sreg/graphs.hpp"
#include "sreg/quotient.hpp"

namespace sreg {

// Matrix families supported on a partitioned graph. Each preset rewrites
// (F, b) of a spec while keeping S: adjacency (F=1, b=0), combinatorial
// Laplacian (F=-1, b_i = row degree), normalized Laplacian (b=1,
// F_ij = -1/sqrt(d_i d_j)); custom keeps the spec's own F and b.
enum class MatrixPreset {
    adjacency,
    combinatorial_laplacian,
    normalized_laplacian,
    custom,
};

MatrixPreset preset_from_string(const std::string& name);
QuotientSpec apply_preset(const QuotientSpec& spec, MatrixPreset preset);

// Weighted matrix T on a graph realizing the spec: T_uv = F_{tau(u),tau(v)}
// on edges, b_{tau(u)} on the diagonal. Construction verifies that the graph
// realizes spec.S. The graph must outlive this object.
class SRegularMatrix {
public:
    SRegularMatrix(const PartitionedGraph& g, const QuotientSpec& spec);

    const PartitionedGraph& graph() const { return *g_; }
    const QuotientSpec& spec() const { return spec_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd dense() const;

private:
    const PartitionedGraph* g_;
    QuotientSpec spec_;
};

// Full spectrum split into the k eigenpairs explained by the cell structure
// (lifted from the cell matrix) and the bulk. Eigenvalues come back
// ascending with orthonormal vectors; inside each degenerate cluster the
// basis is rotated so the structural directions are exactly the lifted cell
// vectors and the bulk complement is orthogonal to them (hence has zero
// per-cell sums).
struct ClassifiedSpectrum {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    std::vector<int> label;    // 1 = structural, 0 = bulk
    std::vector<int> s_index;  // for quotient eigenvalue j, its column index
    double lambda_s = 0;       // largest cell-matrix eigenvalue
    double lambda_b = 0;       // max |bulk eigenvalue|, 0 if no bulk
    double lambda_b_signed = 0;
    double match_residual = 0; // worst |lambda - matched quotient value|
    QuotientEigen quotient;
};

ClassifiedSpectrum classify(const SRegularMatrix& T);

// Per-cell mass and sum of each eigenvector: raw = sum_{v in cell} phi(v)^2,
// scaled = (n / n_cell) * raw, cell_sum = sum_{v in cell} phi(v).
struct CellStatRow {
    int eigen_index;
    double lambda;
    int cell;
    double raw;
    double scaled;
    double cell_sum;
    int label;
};

std::vector<CellStatRow> cell_sum_squares(const ClassifiedSpectrum& spec_result,
                                          const PartitionedGraph& g);

// Equal-width histogram of eigenvalues; mass is the fraction of values per
// bin, with out-of-range fractions reported separately.
struct Histogram {
    double lo = 0, hi = 0;
    int bins = 0;
    std::vector<double> mass;
    double below = 0, above = 0;
};

Histogram spectral_density_histogram(const Eigen::VectorXd& values, int bins,
                                     double lo, double hi);

// (T^l)_vv by repeated application to the indicator of v; exact for integer
// weights as long as counts stay below 2^53.
double weighted_walk_count(const SRegularMatrix& T, std::int32_t v, int length);

// Max deviation over powers m <= max_power and cells i,j of
// (S^m)_ij / n_j - sum_l lambda_l^m psi_l(i) psi_l(j), using the adjacency
// quotient eigenpairs. It vanishes for a balanced spec: cell-to-cell walk
// counts are explained by the k lifted eigenpairs alone.
double j_matrix_check(const QuotientSpec& spec,
                      const std::vector<std::int64_t>& n, int max_power);

}  // namespace sreg

#endif
