#include "sreg/bounds.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace sreg {

SubsetProfile SubsetProfile::from_mask(const PartitionedGraph& g,
                                       std::vector<std::uint8_t> mask) {
    if (static_cast<int>(mask.size()) != g.n_total()) {
        throw std::invalid_argument("subset mask has wrong length");
    }
    SubsetProfile p;
    p.mask = std::move(mask);
    p.cell_counts.assign(g.k, 0);
    for (std::int32_t v = 0; v < g.n_total(); ++v) {
        if (p.mask[v]) {
            ++p.cell_counts[g.tau[v]];
            ++p.total;
        }
    }
    p.fraction.resize(g.k);
    for (int i = 0; i < g.k; ++i) {
        p.fraction[i] = static_cast<double>(p.cell_counts[i]) /
                        static_cast<double>(g.cell_sizes[i]);
    }
    p.global_fraction =
        static_cast<double>(p.total) / static_cast<double>(g.n_total());
    return p;
}

SubsetProfile SubsetProfile::from_indices(
    const PartitionedGraph& g, const std::vector<std::int32_t>& verts) {
    std::vector<std::uint8_t> mask(g.n_total(), 0);
    for (auto v : verts) {
        if (v < 0 || v >= g.n_total()) {
            throw std::invalid_argument("subset vertex out of range");
        }
        mask[v] = 1;
    }
    return from_mask(g, std::move(mask));
}

BoundReport make_report(const std::string& name, double lhs, double rhs,
                        const std::string& context) {
    BoundReport r;
    r.name = name;
    r.lhs = lhs;
    r.rhs = rhs;
    r.slack = rhs - lhs;
    r.holds = r.slack >= -1e-9 * std::max(1.0, std::abs(rhs));
    r.context = context;
    return r;
}

double expected_edges(const QuotientSpec& spec,
                      const std::vector<std::int64_t>& n,
                      const SubsetProfile& B, const SubsetProfile& C) {
    const int k = spec.k();
    double acc = 0;
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            if (spec.S(i, j) <= 0) continue;
            double w = std::sqrt(
                static_cast<double>(spec.S(i, j)) *
                static_cast<double>(spec.S(j, i)) /
                (static_cast<double>(n[i]) * static_cast<double>(n[j])));
            acc += w * static_cast<double>(B.cell_counts[i]) *
                   static_cast<double>(C.cell_counts[j]);
        }
    }
    return acc;
}

std::int64_t ordered_edge_incidences(const PartitionedGraph& g,
                                     const SubsetProfile& B,
                                     const SubsetProfile& C) {
    std::int64_t acc = 0;
    for (std::int32_t u = 0; u < g.n_total(); ++u) {
        if (!B.mask[u]) continue;
        for (auto v : g.adj[u]) {
            if (C.mask[v]) ++acc;
        }
    }
    return acc;
}

namespace {

std::string subset_context(const SubsetProfile& B, const SubsetProfile& C) {
    std::ostringstream os;
    os << "|B|=" << B.total << " |C|=" << C.total;
    return os.str();
}

double eml_lhs(const PartitionedGraph& g, const QuotientSpec& spec,
               const SubsetProfile& B, const SubsetProfile& C) {
    double expect = expected_edges(spec, g.cell_sizes, B, C);
    double observed =
        static_cast<double>(ordered_edge_incidences(g, B, C));
    return std::abs(observed - expect);
}

}  // namespace

BoundReport eml_classic(const PartitionedGraph& g, const QuotientSpec& spec,
                        const SubsetProfile& B, const SubsetProfile& C,
                        double lambda_b) {
    double rhs = lambda_b * std::sqrt(static_cast<double>(B.total) *
                                      static_cast<double>(C.total));
    return make_report("eml_classic", eml_lhs(g, spec, B, C), rhs,
                       subset_context(B, C));
}

BoundReport eml_tight(const PartitionedGraph& g, const QuotientSpec& spec,
                      const SubsetProfile& B, const SubsetProfile& C,
                      double lambda_b) {
    double sum = 0;
    for (int i = 0; i < g.k; ++i) {
        for (int j = 0; j < g.k; ++j) {
            sum += static_cast<double>(B.cell_counts[i]) *
                   static_cast<double>(C.cell_counts[j]) *
                   (1.0 - B.fraction[i]) * (1.0 - C.fraction[j]);
        }
    }
    return make_report("eml_tight", eml_lhs(g, spec, B, C),
                       lambda_b * std::sqrt(std::max(0.0, sum)),
                       subset_context(B, C));
}

BoundReport eml_scaled(const PartitionedGraph& g, const QuotientSpec& spec,
                       const SubsetProfile& B, const SubsetProfile& C,
                       double lambda_b) {
    double sum = 0;
    for (int i = 0; i < g.k; ++i) {
        sum += C.fraction[i] * (1.0 - C.fraction[i]);
    }
    double rhs = lambda_b * static_cast<double>(g.n_total()) *
                 std::sqrt(std::max(0.0, B.global_fraction * sum));
    return make_report("eml_scaled", eml_lhs(g, spec, B, C), rhs,
                       subset_context(B, C));
}

BoundReport eml_neighbor_variance(const PartitionedGraph& g,
                                  const QuotientSpec& spec,
                                  const SubsetProfile& B, double lambda_b) {
    const int k = g.k;
    double lhs = 0;
    std::vector<std::int64_t> counts(k);
    for (std::int32_t v = 0; v < g.n_total(); ++v) {
        std::fill(counts.begin(), counts.end(), 0);
        for (auto u : g.adj[v]) {
            if (B.mask[u]) ++counts[g.tau[u]];
        }
        for (int i = 0; i < k; ++i) {
            double dev = static_cast<double>(counts[i]) -
                         B.fraction[i] *
                             static_cast<double>(spec.S(g.tau[v], i));
            lhs += dev * dev;
        }
    }
    double rhs = 0;
    for (int i = 0; i < k; ++i) {
        rhs += B.fraction[i] * (1.0 - B.fraction[i]) *
               static_cast<double>(g.cell_sizes[i]);
    }
    rhs *= lambda_b * lambda_b;
    std::ostringstream os;
    os << "|B|=" << B.total;
    return make_report("eml_neighbor_variance", lhs, rhs, os.str());
}

namespace {

// Largest adjacency eigenvalue of the subgraph induced by the complement of
// C (dense solve; the bounds regime is small n).
double complement_lambda_max(const PartitionedGraph& g,
                             const SubsetProfile& C) {
    std::vector<std::int32_t> keep;
    std::vector<std::int32_t> pos(g.n_total(), -1);
    for (std::int32_t v = 0; v < g.n_total(); ++v) {
        if (!C.mask[v]) {
            pos[v] = static_cast<std::int32_t>(keep.size());
            keep.push_back(v);
        }
    }
    if (keep.empty()) {
        throw std::invalid_argument("C must be a proper subset of V");
    }
    const int m = static_cast<int>(keep.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
    for (auto v : keep) {
        for (auto u : g.adj[v]) {
            if (pos[u] >= 0) A(pos[v], pos[u]) = 1.0;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A,
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

double complement_bound_rhs(const SubsetProfile& C, double lambda_s,
                            double lambda_b) {
    double cmin = 1.0;
    for (double c : C.fraction) cmin = std::min(cmin, c);
    return lambda_s * (1.0 - cmin) + lambda_b * cmin;
}

}  // namespace

BoundReport induced_complement_bound(const PartitionedGraph& g,
                                     const QuotientSpec& spec,
                                     const SubsetProfile& C, double lambda_s,
                                     double lambda_b) {
    (void)spec;
    double lhs = complement_lambda_max(g, C);
    double rhs = complement_bound_rhs(C, lambda_s, lambda_b);
    std::ostringstream os;
    os << "|C|=" << C.total;
    return make_report("induced_complement", lhs, rhs, os.str());
}

BoundReport walks_avoiding_bound(const PartitionedGraph& g,
                                 const QuotientSpec& spec,
                                 const SubsetProfile& C, int ell,
                                 double lambda_s, double lambda_b) {
    (void)spec;
    if (ell < 0) throw std::invalid_argument("walk length must be >= 0");
    const std::int64_t m = g.n_total() - C.total;
    if (m <= 0) throw std::invalid_argument("C must be a proper subset of V");

    // lhs = 1^T A_comp^ell 1 by repeated sparse application
    std::vector<double> x(g.n_total(), 0.0), y(g.n_total(), 0.0);
    for (std::int32_t v = 0; v < g.n_total(); ++v) {
        x[v] = C.mask[v] ? 0.0 : 1.0;
    }
    for (int step = 0; step < ell; ++step) {
        std::fill(y.begin(), y.end(), 0.0);
        for (std::int32_t v = 0; v < g.n_total(); ++v) {
            if (C.mask[v]) continue;
            double acc = 0;
            for (auto u : g.adj[v]) {
                if (!C.mask[u]) acc += x[u];
            }
            y[v] = acc;
        }
        x.swap(y);
    }
    double lhs = 0;
    for (std::int32_t v = 0; v < g.n_total(); ++v) {
        if (!C.mask[v]) lhs += x[v];
    }

    double base = complement_bound_rhs(C, lambda_s, lambda_b);
    double rhs = static_cast<double>(m) * std::pow(base, ell);
    std::ostringstream os;
    os << "|C|=" << C.total << " ell=" << ell;
    return make_report("walks_avoiding", lhs, rhs, os.str());
}

AlonBoppanaResult alon_boppana_lower(const QuotientSpec& spec,
                                     const std::vector<std::int64_t>& n,
                                     int ell_min, int ell_max) {
    if (ell_min < 1 || ell_max < ell_min) {
        throw std::invalid_argument("bad ell range");
    }
    QuotientSpec qs = spec;
    qs.F = Eigen::MatrixXd::Ones(spec.k(), spec.k());
    qs.b = Eigen::VectorXd::Zero(spec.k());
    qs.n = n;
    auto eig = quotient_eigen(qs);
    const int k = spec.k();
    double n_total = 0;
    for (auto v : n) n_total += static_cast<double>(v);

    // <1, psi_bar_j> = sum_i n_i psi_j(i)
    std::vector<double> overlap(k, 0.0);
    for (int j = 0; j < k; ++j) {
        for (int i = 0; i < k; ++i) {
            overlap[j] += static_cast<double>(n[i]) * eig.psi(i, j);
        }
    }

    AlonBoppanaResult out;
    out.target = std::sqrt(std::max(0.0, eig.lambda_s));
    out.best = -std::numeric_limits<double>::infinity();
    for (int ell = ell_min; ell <= ell_max; ++ell) {
        double walk_term = 0, trace_term = 0;
        for (int j = 0; j < k; ++j) {
            walk_term += std::pow(eig.values(j), ell) * overlap[j] * overlap[j];
            trace_term += std::pow(eig.values(j), 2 * ell);
        }
        double radicand = (walk_term - trace_term) / n_total;
        if (radicand < 0) {
            out.values.emplace_back(
                ell, std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        double value = std::pow(radicand, 1.0 / (2.0 * ell));
        out.values.emplace_back(ell, value);
        if (value > out.best) {
            out.best = value;
            out.best_ell = ell;
        }
    }
    if (out.best_ell < 0) out.best = 0;  // every ell skipped
    return out;
}

BoundReport alon_boppana_report(const AlonBoppanaResult& result,
                                double lambda_b) {
    std::ostringstream os;
    os << "best_ell=" << result.best_ell << " target=" << result.target;
    return make_report("alon_boppana", result.best, lambda_b, os.str());
}

DiameterCheck diameter_check(const PartitionedGraph& g,
                             const QuotientSpec& spec, double lambda_b,
                             std::int64_t m_cap) {
    const int n = g.n_total();
    DiameterCheck out;

    // exact diameter by BFS from every vertex
    std::vector<int> dist(n);
    for (std::int32_t s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        std::queue<std::int32_t> q;
        q.push(s);
        dist[s] = 0;
        int reached = 1;
        while (!q.empty()) {
            auto u = q.front();
            q.pop();
            for (auto v : g.adj[u]) {
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    ++reached;
                    q.push(v);
                }
            }
        }
        if (reached != n) {
            throw std::invalid_argument(
                "diameter undefined: graph is disconnected");
        }
        out.diameter =
            std::max(out.diameter, *std::max_element(dist.begin(), dist.end()));
    }

    const int k = spec.k();
    out.lambda_b_zero_mode = lambda_b <= 0;
    const double log_target = std::log(static_cast<double>(n) - 1.0);
    const double log_lb = out.lambda_b_zero_mode ? 0.0 : std::log(lambda_b);

    // scaled powers: P_t = S^t / exp(log_scale), entries kept near 1
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(k, k);
    Eigen::MatrixXd S = spec.S.cast<double>();
    double log_scale = 0;
    std::vector<std::int64_t> t_pair(k * k, -1);
    int remaining = k * k;
    std::int64_t t = 0;
    while (remaining > 0 && t < m_cap) {
        ++t;
        P = P * S;
        double mx = P.maxCoeff();
        if (mx > 1e100) {
            P /= mx;
            log_scale += std::log(mx);
        }
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
                if (t_pair[i * k + j] >= 0) continue;
                if (P(i, j) <= 0 || P(j, i) <= 0) continue;
                if (out.lambda_b_zero_mode) {
                    t_pair[i * k + j] = t;
                    --remaining;
                    continue;
                }
                double lhs_log = 0.5 * (std::log(P(i, j)) + std::log(P(j, i))) +
                                 log_scale;
                if (lhs_log > log_target + static_cast<double>(t) * log_lb) {
                    t_pair[i * k + j] = t;
                    --remaining;
                }
            }
        }
    }
    out.m_star_reached = remaining == 0;
    out.m_star = 0;
    for (auto v : t_pair) out.m_star = std::max(out.m_star, v < 0 ? m_cap : v);
    out.ratio_log = static_cast<double>(out.m_star) /
                    std::log(static_cast<double>(std::max(2, n)));

    std::ostringstream os;
    os << "m_star=" << out.m_star << (out.m_star_reached ? "" : " (cap hit)")
       << " lambda_b=" << lambda_b;
    out.report = make_report("diameter", static_cast<double>(out.diameter),
                             static_cast<double>(out.m_star), os.str());
    if (!out.m_star_reached) out.report.holds = false;
    return out;
}

}  // namespace sreg
