#include "sreg/treewalks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sreg {

namespace {

template <typename T>
struct Arith;

template <>
struct Arith<std::int64_t> {
    static std::int64_t add(std::int64_t a, std::int64_t b) {
        std::int64_t r;
        if (__builtin_add_overflow(a, b, &r)) {
            throw std::overflow_error("walk count exceeds int64");
        }
        return r;
    }
    static std::int64_t mul(std::int64_t a, std::int64_t b) {
        std::int64_t r;
        if (__builtin_mul_overflow(a, b, &r)) {
            throw std::overflow_error("walk count exceeds int64");
        }
        return r;
    }
};

template <>
struct Arith<double> {
    static double add(double a, double b) { return a + b; }
    static double mul(double a, double b) { return a * b; }
};

std::int64_t require_integer(double v, const char* what) {
    double r = std::nearbyint(v);
    if (!(std::abs(v - r) == 0.0) || std::abs(r) > 1e15) {
        throw std::invalid_argument(std::string(what) +
                                    " must be integral for exact tables");
    }
    return static_cast<std::int64_t>(r);
}

std::vector<std::pair<int, int>> enumerate_pairs(const MatI64& S,
                                                 Eigen::MatrixXi& pair_idx) {
    const int k = static_cast<int>(S.rows());
    std::vector<std::pair<int, int>> pairs;
    pair_idx.setConstant(k, k, -1);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            if (S(i, j) > 0) {
                pair_idx(i, j) = static_cast<int>(pairs.size());
                pairs.emplace_back(i, j);
            }
        }
    }
    return pairs;
}

// Shared recurrence: first-excursion decomposition of a closed walk into
// loop steps (b^r), one excursion through a neighbor cell (G * shorter pair
// walk) and a remaining closed walk at the same root.
template <typename T>
WalkTable<T> walk_core(const QuotientSpec& spec, int max_length,
                       const std::vector<T>& b, const std::vector<T>& G) {
    using A = Arith<T>;
    const int k = spec.k();
    const int L = max_length;

    WalkTable<T> table;
    table.k = k;
    table.max_length = L;
    Eigen::MatrixXi pidx;
    table.pairs = enumerate_pairs(spec.S, pidx);

    std::vector<std::vector<T>> bpow(k, std::vector<T>(L + 1));
    for (int i = 0; i < k; ++i) {
        bpow[i][0] = T(1);
        for (int l = 1; l <= L; ++l) {
            bpow[i][l] = A::mul(bpow[i][l - 1], b[i]);
        }
    }

    table.cell.assign(k, std::vector<T>(L + 1, T(0)));
    table.pair.assign(table.pairs.size(), std::vector<T>(L + 1, T(0)));
    for (int i = 0; i < k; ++i) table.cell[i][0] = T(1);
    for (auto& w : table.pair) w[0] = T(1);

    auto inner_sum = [&](const std::vector<T>& loops,
                         const std::vector<T>& self,
                         const std::vector<T>& excursion, int l) {
        // sum over r + s + t = l - 2 of b^r * self[s] * excursion[t]
        T acc = T(0);
        for (int r = 0; r <= l - 2; ++r) {
            for (int s = 0; s <= l - 2 - r; ++s) {
                int t = l - 2 - r - s;
                acc = A::add(acc,
                             A::mul(loops[r], A::mul(self[s], excursion[t])));
            }
        }
        return acc;
    };

    for (int l = 1; l <= L; ++l) {
        for (int i = 0; i < k; ++i) {
            T acc = bpow[i][l];
            if (l >= 2) {
                for (int m = 0; m < k; ++m) {
                    if (spec.S(i, m) <= 0) continue;
                    T inner = inner_sum(bpow[i], table.cell[i],
                                        table.pair[pidx(i, m)], l);
                    acc = A::add(acc, A::mul(T(spec.S(i, m)),
                                             A::mul(G[i * k + m], inner)));
                }
            }
            table.cell[i][l] = acc;
        }
        for (std::size_t p = 0; p < table.pairs.size(); ++p) {
            auto [i, j] = table.pairs[p];
            T acc = bpow[j][l];
            if (l >= 2) {
                for (int m = 0; m < k; ++m) {
                    std::int64_t coeff = spec.S(j, m) - (m == i ? 1 : 0);
                    if (spec.S(j, m) <= 0 || coeff == 0) continue;
                    T inner = inner_sum(bpow[j], table.pair[p],
                                        table.pair[pidx(j, m)], l);
                    acc = A::add(acc, A::mul(T(coeff),
                                             A::mul(G[j * k + m], inner)));
                }
            }
            table.pair[p][l] = acc;
        }
    }
    return table;
}

}  // namespace

WalkTable<std::int64_t> walk_table_exact(const QuotientSpec& spec,
                                         int max_length) {
    const int k = spec.k();
    std::vector<std::int64_t> b(k), G(k * k, 0);
    for (int i = 0; i < k; ++i) {
        b[i] = require_integer(spec.b(i), "b");
        for (int j = 0; j < k; ++j) {
            if (spec.S(i, j) > 0) {
                std::int64_t fij = require_integer(spec.F(i, j), "F");
                std::int64_t fji = require_integer(spec.F(j, i), "F");
                G[i * k + j] = Arith<std::int64_t>::mul(fij, fji);
            }
        }
    }
    return walk_core<std::int64_t>(spec, max_length, b, G);
}

WalkTable<double> walk_table(const QuotientSpec& spec, int max_length) {
    const int k = spec.k();
    std::vector<double> b(k), G(k * k, 0.0);
    for (int i = 0; i < k; ++i) {
        b[i] = spec.b(i);
        for (int j = 0; j < k; ++j) {
            if (spec.S(i, j) > 0) G[i * k + j] = spec.F(i, j) * spec.F(j, i);
        }
    }
    return walk_core<double>(spec, max_length, b, G);
}

namespace {

template <typename T>
std::vector<T> brute_core(const QuotientSpec& spec, int root_cell,
                          int max_length, int missing_parent_cell,
                          std::int64_t max_vertices, const std::vector<T>& b,
                          const std::vector<T>& F) {
    using A = Arith<T>;
    const int k = spec.k();
    TreeBall ball = build_tree_ball(spec, root_cell, max_length / 2,
                                    max_vertices, missing_parent_cell);
    const std::int64_t n = ball.n_total();

    std::vector<T> x(n, T(0)), y(n, T(0));
    x[0] = T(1);
    std::vector<T> out(max_length + 1, T(0));
    out[0] = T(1);
    for (int step = 1; step <= max_length; ++step) {
        for (std::int64_t v = 0; v < n; ++v) {
            y[v] = A::mul(b[ball.tau[v]], x[v]);
        }
        for (std::int64_t v = 1; v < n; ++v) {
            const std::int64_t p = ball.parent[v];
            const T w = F[ball.tau[p] * k + ball.tau[v]];
            y[v] = A::add(y[v], A::mul(w, x[p]));
            y[p] = A::add(y[p], A::mul(w, x[v]));
        }
        x.swap(y);
        out[step] = x[0];
    }
    return out;
}

}  // namespace

std::vector<std::int64_t> brute_force_closed_walks(const QuotientSpec& spec,
                                                   int root_cell,
                                                   int max_length,
                                                   int missing_parent_cell,
                                                   std::int64_t max_vertices) {
    const int k = spec.k();
    std::vector<std::int64_t> b(k), F(k * k, 0);
    for (int i = 0; i < k; ++i) {
        b[i] = require_integer(spec.b(i), "b");
        for (int j = 0; j < k; ++j) {
            if (spec.S(i, j) > 0 || spec.S(j, i) > 0) {
                F[i * k + j] = require_integer(spec.F(i, j), "F");
            }
        }
    }
    return brute_core<std::int64_t>(spec, root_cell, max_length,
                                    missing_parent_cell, max_vertices, b, F);
}

std::vector<double> brute_force_closed_walks_weighted(
    const QuotientSpec& spec, int root_cell, int max_length,
    int missing_parent_cell, std::int64_t max_vertices) {
    const int k = spec.k();
    std::vector<double> b(k), F(k * k, 0.0);
    for (int i = 0; i < k; ++i) {
        b[i] = spec.b(i);
        for (int j = 0; j < k; ++j) F[i * k + j] = spec.F(i, j);
    }
    return brute_core<double>(spec, root_cell, max_length,
                              missing_parent_cell, max_vertices, b, F);
}

std::complex<double> series_cell(const WalkTable<double>& table, int cell,
                                 std::complex<double> y) {
    std::complex<double> acc = 0, yp = 1;
    for (int l = 0; l <= table.max_length; ++l) {
        acc += table.cell[cell][l] * yp;
        yp *= y;
    }
    return acc;
}

std::complex<double> series_pair(const WalkTable<double>& table,
                                 int pair_index, std::complex<double> y) {
    std::complex<double> acc = 0, yp = 1;
    for (int l = 0; l <= table.max_length; ++l) {
        acc += table.pair[pair_index][l] * yp;
        yp *= y;
    }
    return acc;
}

nlohmann::json GFPoint::to_json() const {
    nlohmann::json j;
    j["y"] = {y.real(), y.imag()};
    j["x"] = nlohmann::json::array();
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        j["x"].push_back({x(i).real(), x(i).imag()});
    }
    j["residual"] = residual;
    j["newton_iterations"] = newton_iterations;
    j["segments"] = segments;
    return j;
}

GFSystem::GFSystem(const QuotientSpec& spec)
    : k_(spec.k()), S_(spec.S), b_(spec.b) {
    G_.setZero(k_, k_);
    for (int i = 0; i < k_; ++i) {
        for (int j = 0; j < k_; ++j) {
            if (S_(i, j) > 0) G_(i, j) = spec.F(i, j) * spec.F(j, i);
        }
    }
    pairs_ = enumerate_pairs(S_, pair_idx_);
}

int GFSystem::pair_index(int i, int j) const { return pair_idx_(i, j); }

Eigen::VectorXcd GFSystem::residual(std::complex<double> y,
                                    const Eigen::VectorXcd& x) const {
    const std::complex<double> y2 = y * y;
    Eigen::VectorXcd P(dim());
    for (int i = 0; i < k_; ++i) {
        std::complex<double> sum = 0;
        for (int m = 0; m < k_; ++m) {
            if (S_(i, m) > 0) {
                sum += static_cast<double>(S_(i, m)) * G_(i, m) *
                       x(k_ + pair_idx_(i, m));
            }
        }
        P(i) = 1.0 - (1.0 - b_(i) * y) * x(i) + y2 * x(i) * sum;
    }
    for (std::size_t p = 0; p < pairs_.size(); ++p) {
        auto [i, j] = pairs_[p];
        std::complex<double> sum = 0;
        for (int m = 0; m < k_; ++m) {
            if (S_(j, m) <= 0) continue;
            double coeff = static_cast<double>(S_(j, m)) - (m == i ? 1.0 : 0.0);
            if (coeff != 0.0) {
                sum += coeff * G_(j, m) * x(k_ + pair_idx_(j, m));
            }
        }
        const int row = k_ + static_cast<int>(p);
        P(row) = 1.0 - (1.0 - b_(j) * y) * x(row) + y2 * x(row) * sum;
    }
    return P;
}

Eigen::MatrixXcd GFSystem::jacobian(std::complex<double> y,
                                    const Eigen::VectorXcd& x) const {
    const std::complex<double> y2 = y * y;
    Eigen::MatrixXcd J = Eigen::MatrixXcd::Zero(dim(), dim());
    for (int i = 0; i < k_; ++i) {
        std::complex<double> sum = 0;
        for (int m = 0; m < k_; ++m) {
            if (S_(i, m) <= 0) continue;
            const int col = k_ + pair_idx_(i, m);
            const double w = static_cast<double>(S_(i, m)) * G_(i, m);
            sum += w * x(col);
            J(i, col) += y2 * x(i) * w;
        }
        J(i, i) += -(1.0 - b_(i) * y) + y2 * sum;
    }
    for (std::size_t p = 0; p < pairs_.size(); ++p) {
        auto [i, j] = pairs_[p];
        const int row = k_ + static_cast<int>(p);
        std::complex<double> sum = 0;
        for (int m = 0; m < k_; ++m) {
            if (S_(j, m) <= 0) continue;
            double coeff = static_cast<double>(S_(j, m)) - (m == i ? 1.0 : 0.0);
            if (coeff == 0.0) continue;
            const int col = k_ + pair_idx_(j, m);
            const double w = coeff * G_(j, m);
            sum += w * x(col);
            J(row, col) += y2 * x(row) * w;
        }
        J(row, row) += -(1.0 - b_(j) * y) + y2 * sum;
    }
    return J;
}

bool GFSystem::refine(std::complex<double> y, Eigen::VectorXcd& x, double tol,
                      int max_newton, int* iterations) const {
    for (int it = 0; it <= max_newton; ++it) {
        Eigen::VectorXcd P = residual(y, x);
        double r = P.cwiseAbs().maxCoeff();
        if (!std::isfinite(r)) return false;
        if (r <= tol) {
            if (iterations) *iterations = it;
            return true;
        }
        if (it == max_newton) break;
        Eigen::MatrixXcd J = jacobian(y, x);
        Eigen::VectorXcd dx = J.partialPivLu().solve(-P);
        if (!dx.allFinite() || dx.cwiseAbs().maxCoeff() > 1e12) return false;
        x += dx;
    }
    return false;
}

namespace {

// Continuation path from 0 to y. Every principal-sheet singularity of the
// generating functions lies on the real y axis (the components are walk
// generating functions of real spectral measures), so for complex y the path
// runs down the imaginary axis to |y| and then along the circle of radius
// |y|: it approaches the real axis only at the endpoint itself. A straight
// segment would instead shave past the branch point at the inverse spectral
// radius whenever y sits just off the cut, and Newton can hop sheets there.
// Real y keeps the straight segment (callers stay inside the convergence
// disc, where the segment is singularity-free).
std::complex<double> path_point(std::complex<double> y, double t) {
    if (t >= 1.0) return y;
    if (y.imag() == 0.0) return y * t;
    const double rho = std::abs(y);
    const double th1 = std::arg(y);
    const double th0 = y.imag() < 0 ? -M_PI / 2 : M_PI / 2;
    if (t <= 0.5) return std::polar(rho * (2.0 * t), th0);
    return std::polar(rho, th0 + (th1 - th0) * (2.0 * t - 1.0));
}

// Newton converging is not the same as Newton converging to the tracked
// branch: a long continuation step can land on another root of the
// polynomial system. On the tracked branch every component times y is a
// Stieltjes transform, so its imaginary part must carry the sign opposite to
// Im z = Im(1/p); a violation flags the step for rejection. Real p has no
// such invariant and is accepted as is.
bool sheet_ok(const Eigen::VectorXcd& x, std::complex<double> p) {
    if (p.imag() == 0.0) return true;
    const double sign = p.imag() < 0 ? 1.0 : -1.0;
    for (Eigen::Index c = 0; c < x.size(); ++c) {
        if (sign * (x(c) * p).imag() > 1e-9) return false;
    }
    return true;
}

}  // namespace

GFPoint GFSystem::solve(std::complex<double> y, const GFOptions& opt) const {
    GFPoint out;
    out.y = y;
    Eigen::VectorXcd x = Eigen::VectorXcd::Ones(dim());
    if (std::abs(y) == 0.0) {
        out.x = x;
        out.residual = residual(y, x).cwiseAbs().maxCoeff();
        return out;
    }

    double t = 0, h = 1;
    int steps = 0;
    while (t < 1.0) {
        if (++steps > opt.max_steps) {
            throw std::runtime_error("generating function continuation did "
                                     "not terminate");
        }
        double tn = std::min(1.0, t + h);
        std::complex<double> p = path_point(y, tn);
        Eigen::VectorXcd x_try = x;
        int iters = 0;
        if (refine(p, x_try, opt.tol, opt.max_newton, &iters) &&
            sheet_ok(x_try, p)) {
            x = x_try;
            t = tn;
            out.newton_iterations += iters;
            ++out.segments;
            if (iters <= 5) h = std::min(2 * h, 1.0);
        } else {
            h /= 2;
            if (h < opt.min_step) {
                throw std::runtime_error(
                    "generating function continuation stalled near a branch "
                    "point (step underflow at t = " + std::to_string(t) + ")");
            }
        }
    }
    out.x = x;
    out.residual = residual(y, x).cwiseAbs().maxCoeff();
    return out;
}

Eigen::VectorXcd stieltjes_all(const GFSystem& sys, std::complex<double> z,
                               const GFOptions& opt) {
    if (std::abs(z) == 0.0) {
        throw std::invalid_argument("Stieltjes transform undefined at z = 0");
    }
    std::complex<double> y = 1.0 / z;
    GFPoint pt = sys.solve(y, opt);
    return pt.x.head(sys.k()) * y;
}

std::complex<double> stieltjes_transform(const GFSystem& sys, int cell,
                                         std::complex<double> z,
                                         const GFOptions& opt) {
    return stieltjes_all(sys, z, opt)(cell);
}

double spectral_support_bound(const QuotientSpec& spec) {
    double bound = 0;
    for (int i = 0; i < spec.k(); ++i) {
        double row = std::abs(spec.b(i));
        for (int j = 0; j < spec.k(); ++j) {
            if (spec.S(i, j) > 0) {
                row += static_cast<double>(spec.S(i, j)) *
                       std::abs(spec.F(i, j));
            }
        }
        bound = std::max(bound, row);
    }
    return bound;
}

double support_radius_estimate(const QuotientSpec& spec, int even_order) {
    int L = std::max(4, even_order - even_order % 2);
    auto table = walk_table(spec, L);
    auto n = spec.n ? *spec.n : minimal_balance(spec);
    double total = 0;
    for (auto v : n) total += static_cast<double>(v);
    double hi = 0, lo = 0;
    for (int i = 0; i < spec.k(); ++i) {
        double c = static_cast<double>(n[i]) / total;
        hi += c * table.cell[i][L];
        lo += c * table.cell[i][L - 2];
    }
    if (lo <= 0) return spectral_support_bound(spec);
    return std::sqrt(hi / lo);
}

namespace {

// One horizontal sweep at fixed eps: warm-started Newton point to point,
// with a cold continuation restart (and a branch guard) when that fails.
// Returns, per grid point, the k cell values Im R_i(lambda + i eps), or NaN
// on failure.
Eigen::MatrixXd sweep_imag(const GFSystem& sys,
                           const std::vector<double>& grid, double eps,
                           const GFOptions& opt, int& failures) {
    const int k = sys.k();
    Eigen::MatrixXd im(grid.size(), k);
    Eigen::VectorXcd x;
    bool have_warm = false;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::complex<double> z(grid[g], eps);
        std::complex<double> y = 1.0 / z;
        bool ok = false;
        if (have_warm) {
            Eigen::VectorXcd x_try = x;
            if (sys.refine(y, x_try, opt.tol, opt.max_newton)) {
                // all components are walk generating functions of positive
                // spectral measures, so x*y must have negative imaginary
                // part for Im z > 0; a violation means the warm start
                // slipped onto another sheet
                bool herglotz = true;
                for (Eigen::Index c = 0; c < x_try.size(); ++c) {
                    if ((x_try(c) * y).imag() > 1e-10) {
                        herglotz = false;
                        break;
                    }
                }
                if (herglotz) {
                    x = x_try;
                    ok = true;
                }
            }
        }
        if (!ok) {
            try {
                GFPoint pt = sys.solve(y, opt);
                x = pt.x;
                ok = true;
            } catch (const std::runtime_error&) {
                ok = false;
            }
        }
        if (ok) {
            have_warm = true;
            for (int c = 0; c < k; ++c) im(g, c) = (x(c) * y).imag();
        } else {
            have_warm = false;
            ++failures;
            for (int c = 0; c < k; ++c) {
                im(g, c) = std::numeric_limits<double>::quiet_NaN();
            }
        }
    }
    return im;
}

}  // namespace

DensityCurve density_curve(const QuotientSpec& spec,
                           const std::vector<double>& grid,
                           const std::vector<double>& epsilons,
                           const GFOptions& opt) {
    if (grid.empty()) throw std::invalid_argument("empty density grid");
    if (epsilons.size() < 2) {
        throw std::invalid_argument(
            "eps schedule needs at least two entries for extrapolation");
    }
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0)) {
            throw std::invalid_argument("eps values must be > 0");
        }
        if (i > 0 && !(epsilons[i] < epsilons[i - 1])) {
            throw std::invalid_argument("eps schedule must decrease");
        }
    }
    const int k = spec.k();
    GFSystem sys(spec);

    DensityCurve curve;
    curve.lambda = grid;
    curve.epsilons = epsilons;
    auto n = spec.n ? *spec.n : minimal_balance(spec);
    double total = 0;
    for (auto v : n) total += static_cast<double>(v);
    curve.c.resize(k);
    for (int i = 0; i < k; ++i) {
        curve.c[i] = static_cast<double>(n[i]) / total;
    }

    std::vector<Eigen::MatrixXd> sweeps;
    int failures = 0;
    for (double eps : epsilons) {
        sweeps.push_back(sweep_imag(sys, grid, eps, opt, failures));
    }

    const std::size_t npts = grid.size();
    curve.mu.setZero(npts, k);
    curve.mixture.assign(npts, 0.0);
    curve.ratio.setZero(npts, k);
    curve.status.assign(npts, "ok");

    const std::size_t ne = epsilons.size();
    for (std::size_t g = 0; g < npts; ++g) {
        bool failed = false, clipped = false;
        for (int c = 0; c < k; ++c) {
            double f;
            if (ne == 1) {
                f = -sweeps[0](g, c) / M_PI;
            } else {
                // linear extrapolation to eps = 0 from the two smallest eps
                double e1 = epsilons[ne - 2], e2 = epsilons[ne - 1];
                double f1 = -sweeps[ne - 2](g, c) / M_PI;
                double f2 = -sweeps[ne - 1](g, c) / M_PI;
                f = (e1 * f2 - e2 * f1) / (e1 - e2);
            }
            if (std::isnan(f)) {
                failed = true;
            } else if (f < 0) {
                f = 0;
                clipped = true;
            }
            curve.mu(g, c) = f;
        }
        if (failed) {
            curve.status[g] = "failed";
            ++curve.failed_count;
            for (int c = 0; c < k; ++c) {
                curve.mu(g, c) = std::numeric_limits<double>::quiet_NaN();
            }
            curve.mixture[g] = std::numeric_limits<double>::quiet_NaN();
            for (int c = 0; c < k; ++c) {
                curve.ratio(g, c) = std::numeric_limits<double>::quiet_NaN();
            }
            continue;
        }
        if (clipped) {
            curve.status[g] = "clipped";
            ++curve.clipped_count;
        }
        double mix = 0;
        for (int c = 0; c < k; ++c) mix += curve.c[c] * curve.mu(g, c);
        curve.mixture[g] = mix;
        for (int c = 0; c < k; ++c) {
            curve.ratio(g, c) = mix > 1e-12
                                    ? curve.mu(g, c) / mix
                                    : std::numeric_limits<double>::quiet_NaN();
        }
    }
    return curve;
}

double curve_moment(const DensityCurve& curve, int cell, int ell) {
    auto value = [&](std::size_t g) {
        double f = cell < 0 ? curve.mixture[g] : curve.mu(g, cell);
        if (std::isnan(f)) f = 0;  // failed points carry no mass
        return f * std::pow(curve.lambda[g], ell);
    };
    double acc = 0;
    for (std::size_t g = 0; g + 1 < curve.lambda.size(); ++g) {
        double h = curve.lambda[g + 1] - curve.lambda[g];
        acc += 0.5 * h * (value(g) + value(g + 1));
    }
    return acc;
}

std::vector<MomentCheckRow> moment_check(const DensityCurve& curve,
                                         const WalkTable<double>& table,
                                         int max_ell) {
    if (table.k != static_cast<int>(curve.c.size())) {
        throw std::invalid_argument("walk table and curve disagree on k");
    }
    std::vector<MomentCheckRow> rows;
    for (int cell = -1; cell < table.k; ++cell) {
        for (int ell = 0; ell <= std::min(max_ell, table.max_length); ++ell) {
            MomentCheckRow row;
            row.cell = cell;
            row.ell = ell;
            row.integral = curve_moment(curve, cell, ell);
            if (cell < 0) {
                row.walk_value = 0;
                for (int i = 0; i < table.k; ++i) {
                    row.walk_value += curve.c[i] * table.cell[i][ell];
                }
            } else {
                row.walk_value = table.cell[cell][ell];
            }
            row.abs_err = std::abs(row.integral - row.walk_value);
            row.rel_err = row.walk_value != 0
                              ? row.abs_err / std::abs(row.walk_value)
                              : (row.abs_err == 0
                                     ? 0
                                     : std::numeric_limits<double>::infinity());
            rows.push_back(row);
        }
    }
    return rows;
}

std::vector<double> mixture_cdf(const DensityCurve& curve) {
    std::vector<double> cdf(curve.lambda.size(), 0.0);
    for (std::size_t g = 0; g + 1 < curve.lambda.size(); ++g) {
        double h = curve.lambda[g + 1] - curve.lambda[g];
        double fa = std::isnan(curve.mixture[g]) ? 0 : curve.mixture[g];
        double fb = std::isnan(curve.mixture[g + 1]) ? 0 : curve.mixture[g + 1];
        cdf[g + 1] = cdf[g] + 0.5 * h * (fa + fb);
    }
    return cdf;
}

double ks_statistic(std::vector<double> samples, const DensityCurve& curve) {
    if (samples.empty()) throw std::invalid_argument("empty sample");
    auto cdf = mixture_cdf(curve);
    double total = cdf.back();
    if (!(total > 0)) {
        throw std::invalid_argument("mixture carries no mass on the grid");
    }
    auto theory = [&](double x) {
        const auto& l = curve.lambda;
        if (x <= l.front()) return 0.0;
        if (x >= l.back()) return 1.0;
        auto it = std::upper_bound(l.begin(), l.end(), x);
        std::size_t hi = static_cast<std::size_t>(it - l.begin());
        std::size_t lo = hi - 1;
        double w = (x - l[lo]) / (l[hi] - l[lo]);
        return (cdf[lo] + w * (cdf[hi] - cdf[lo])) / total;
    };

    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double ks = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double F = theory(samples[i]);
        ks = std::max(ks, std::abs((static_cast<double>(i) + 1.0) / n - F));
        ks = std::max(ks, std::abs(static_cast<double>(i) / n - F));
    }
    return ks;
}

}  // namespace sreg
