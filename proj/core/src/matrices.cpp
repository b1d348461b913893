#include "sreg/matrices.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sreg {

MatrixPreset preset_from_string(const std::string& name) {
    if (name == "adjacency") return MatrixPreset::adjacency;
    if (name == "laplacian" || name == "combinatorial-laplacian") {
        return MatrixPreset::combinatorial_laplacian;
    }
    if (name == "normalized-laplacian") return MatrixPreset::normalized_laplacian;
    if (name == "custom") return MatrixPreset::custom;
    throw std::invalid_argument("unknown matrix preset: " + name);
}

QuotientSpec apply_preset(const QuotientSpec& spec, MatrixPreset preset) {
    QuotientSpec out = spec;
    const int k = spec.k();
    switch (preset) {
        case MatrixPreset::adjacency:
            out.F = Eigen::MatrixXd::Ones(k, k);
            out.b = Eigen::VectorXd::Zero(k);
            break;
        case MatrixPreset::combinatorial_laplacian:
            out.F = -Eigen::MatrixXd::Ones(k, k);
            out.b.resize(k);
            for (int i = 0; i < k; ++i) {
                out.b(i) = static_cast<double>(spec.degree(i));
            }
            break;
        case MatrixPreset::normalized_laplacian: {
            out.b = Eigen::VectorXd::Ones(k);
            out.F.resize(k, k);
            for (int i = 0; i < k; ++i) {
                for (int j = 0; j < k; ++j) {
                    double di = static_cast<double>(spec.degree(i));
                    double dj = static_cast<double>(spec.degree(j));
                    out.F(i, j) = di > 0 && dj > 0
                                      ? -1.0 / std::sqrt(di * dj)
                                      : 0.0;
                }
            }
            break;
        }
        case MatrixPreset::custom:
            break;
    }
    return out;
}

SRegularMatrix::SRegularMatrix(const PartitionedGraph& g,
                               const QuotientSpec& spec)
    : g_(&g), spec_(spec) {
    if (auto bad = check_s_regular(g, spec)) {
        throw std::invalid_argument("graph does not realize the spec: " +
                                    bad->message);
    }
}

Eigen::VectorXd SRegularMatrix::apply(const Eigen::VectorXd& x) const {
    const auto& g = *g_;
    Eigen::VectorXd y(g.n_total());
    for (std::int32_t v = 0; v < g.n_total(); ++v) {
        double acc = spec_.b(g.tau[v]) * x(v);
        for (auto u : g.adj[v]) {
            acc += spec_.F(g.tau[v], g.tau[u]) * x(u);
        }
        y(v) = acc;
    }
    return y;
}

Eigen::MatrixXd SRegularMatrix::dense() const {
    const auto& g = *g_;
    const int n = g.n_total();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (std::int32_t v = 0; v < n; ++v) {
        M(v, v) = spec_.b(g.tau[v]);
        for (auto u : g.adj[v]) {
            M(v, u) = spec_.F(g.tau[v], g.tau[u]);
        }
    }
    return M;
}

ClassifiedSpectrum classify(const SRegularMatrix& T) {
    const auto& g = T.graph();
    const int n = g.n_total();
    const int k = g.k;

    QuotientSpec qs = T.spec();
    qs.n = g.cell_sizes;
    ClassifiedSpectrum out;
    out.quotient = quotient_eigen(qs);
    out.lambda_s = out.quotient.lambda_s;

    Eigen::MatrixXd dense = T.dense();
    Eigen::MatrixXd sym = 0.5 * (dense + dense.transpose());
    if ((dense - dense.transpose()).cwiseAbs().maxCoeff() >
        1e-9 * std::max(1.0, dense.cwiseAbs().maxCoeff())) {
        throw std::invalid_argument(
            "matrix is not symmetric; classification requires symmetric F");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("eigensolve failed");
    }
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors();

    // lifted cell eigenvectors, orthonormal because psi is N-normalized
    Eigen::MatrixXd lifted(n, k);
    for (std::int32_t v = 0; v < n; ++v) {
        for (int j = 0; j < k; ++j) {
            lifted(v, j) = out.quotient.psi(g.tau[v], j);
        }
    }

    const double scale = std::max(1.0, out.values.cwiseAbs().maxCoeff());
    const double tol = 1e-7 * scale;

    // eigenvalue index range within tol of each quotient value; ranges that
    // touch are merged into one cluster so the rotation below stays
    // orthonormal even when quotient values collide with each other
    struct Cluster {
        int lo, hi;              // eigenvalue index range [lo, hi]
        std::vector<int> qs;     // quotient columns matched to it
    };
    std::vector<Cluster> clusters;
    out.match_residual = 0;
    for (int j = 0; j < k; ++j) {
        double q = out.quotient.values(j);
        auto begin = std::lower_bound(out.values.data(),
                                      out.values.data() + n, q - tol) -
                     out.values.data();
        auto end = std::upper_bound(out.values.data(), out.values.data() + n,
                                    q + tol) -
                   out.values.data();
        int lo, hi;
        if (begin == end) {
            // no eigenvalue within tol; match the nearest one and let the
            // residual report the gap
            int nearest = 0;
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < n; ++i) {
                double d = std::abs(out.values(i) - q);
                if (d < best) {
                    best = d;
                    nearest = i;
                }
            }
            lo = hi = nearest;
        } else {
            lo = static_cast<int>(begin);
            hi = static_cast<int>(end) - 1;
        }
        for (int i = lo; i <= hi; ++i) {
            out.match_residual =
                std::max(out.match_residual, std::abs(out.values(i) - q));
        }
        clusters.push_back({lo, hi, {j}});
    }
    std::sort(clusters.begin(), clusters.end(),
              [](const Cluster& a, const Cluster& b) { return a.lo < b.lo; });
    std::vector<Cluster> merged;
    for (auto& cl : clusters) {
        if (!merged.empty() && cl.lo <= merged.back().hi) {
            merged.back().hi = std::max(merged.back().hi, cl.hi);
            merged.back().qs.insert(merged.back().qs.end(), cl.qs.begin(),
                                    cl.qs.end());
        } else {
            merged.push_back(std::move(cl));
        }
    }
    clusters = std::move(merged);

    out.label.assign(n, 0);
    out.s_index.assign(k, -1);
    for (const auto& cl : clusters) {
        const int m = static_cast<int>(cl.qs.size());
        const int c = cl.hi - cl.lo + 1;
        if (c < m) {
            throw std::runtime_error(
                "eigenvalue cluster smaller than its structural multiplicity");
        }
        Eigen::MatrixXd V = out.vectors.middleCols(cl.lo, c);
        Eigen::MatrixXd Psi(n, m);
        for (int t = 0; t < m; ++t) Psi.col(t) = lifted.col(cl.qs[t]);
        // coefficients of the lifted vectors in the cluster basis; QR turns
        // them into an orthonormal basis whose first m directions span the
        // lifted vectors and whose remainder is the bulk complement
        Eigen::MatrixXd A = V.transpose() * Psi;
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
        Eigen::MatrixXd Q = qr.householderQ();
        Eigen::MatrixXd W = V * Q;
        // align the structural columns with the lifted vectors themselves
        // (exact when the graph realizes the spec)
        for (int t = 0; t < m; ++t) {
            double dot = W.col(t).dot(Psi.col(t));
            if (dot < 0) W.col(t) = -W.col(t);
        }
        out.vectors.middleCols(cl.lo, c) = W;
        for (int t = 0; t < m; ++t) {
            out.label[cl.lo + t] = 1;
            out.s_index[cl.qs[t]] = cl.lo + t;
        }
    }

    out.lambda_b = 0;
    out.lambda_b_signed = 0;
    for (int i = 0; i < n; ++i) {
        if (out.label[i]) continue;
        double a = std::abs(out.values(i));
        if (a > out.lambda_b ||
            (a == out.lambda_b && out.values(i) > out.lambda_b_signed)) {
            out.lambda_b = a;
            out.lambda_b_signed = out.values(i);
        }
    }
    return out;
}

std::vector<CellStatRow> cell_sum_squares(const ClassifiedSpectrum& spec_result,
                                          const PartitionedGraph& g) {
    const int n = g.n_total();
    const int k = g.k;
    std::vector<CellStatRow> rows;
    rows.reserve(static_cast<std::size_t>(n) * k);
    const double total = static_cast<double>(n);
    for (int e = 0; e < n; ++e) {
        std::vector<double> raw(k, 0.0), sums(k, 0.0);
        for (std::int32_t v = 0; v < n; ++v) {
            double phi = spec_result.vectors(v, e);
            raw[g.tau[v]] += phi * phi;
            sums[g.tau[v]] += phi;
        }
        for (int c = 0; c < k; ++c) {
            CellStatRow row;
            row.eigen_index = e;
            row.lambda = spec_result.values(e);
            row.cell = c;
            row.raw = raw[c];
            row.scaled = raw[c] * total / static_cast<double>(g.cell_sizes[c]);
            row.cell_sum = sums[c];
            row.label = spec_result.label[e];
            rows.push_back(row);
        }
    }
    return rows;
}

Histogram spectral_density_histogram(const Eigen::VectorXd& values, int bins,
                                     double lo, double hi) {
    if (bins <= 0 || !(hi > lo)) {
        throw std::invalid_argument("histogram needs bins > 0 and hi > lo");
    }
    Histogram h;
    h.lo = lo;
    h.hi = hi;
    h.bins = bins;
    h.mass.assign(bins, 0.0);
    const double total = static_cast<double>(values.size());
    const double width = (hi - lo) / bins;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        double v = values(i);
        if (v < lo) {
            h.below += 1;
        } else if (v >= hi) {
            // the top edge belongs to the last bin
            if (v == hi) {
                h.mass[bins - 1] += 1;
            } else {
                h.above += 1;
            }
        } else {
            int b = std::min(bins - 1, static_cast<int>((v - lo) / width));
            h.mass[b] += 1;
        }
    }
    for (auto& m : h.mass) m /= total;
    h.below /= total;
    h.above /= total;
    return h;
}

double weighted_walk_count(const SRegularMatrix& T, std::int32_t v,
                           int length) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(T.graph().n_total());
    x(v) = 1.0;
    for (int l = 0; l < length; ++l) x = T.apply(x);
    return x(v);
}

double j_matrix_check(const QuotientSpec& spec,
                      const std::vector<std::int64_t>& n, int max_power) {
    // the identity concerns powers of S itself, so use the adjacency
    // quotient eigenpairs whatever F and b the spec carries
    QuotientSpec qs = apply_preset(spec, MatrixPreset::adjacency);
    qs.n = n;
    auto eig = quotient_eigen(qs);
    const int k = spec.k();

    Eigen::MatrixXd S = spec.S.cast<double>();
    Eigen::MatrixXd Sm = Eigen::MatrixXd::Identity(k, k);
    double worst = 0;
    for (int m = 1; m <= max_power; ++m) {
        Sm = Sm * S;
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
                double lhs = Sm(i, j) / static_cast<double>(n[j]);
                double rhs = 0;
                for (int l = 0; l < k; ++l) {
                    rhs += std::pow(eig.values(l), m) * eig.psi(i, l) *
                           eig.psi(j, l);
                }
                worst = std::max(worst, std::abs(lhs - rhs));
            }
        }
    }
    return worst;
}

}  // namespace sreg
