#include "sreg/quotient.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>

namespace sreg {

namespace {

// Exact rational with reduction after every operation; the balance ratios we
// track are products of small integer entries, so int64 after reduction is
// ample. Overflow in an intermediate product is still checked.
struct Rat {
    std::int64_t num = 0;
    std::int64_t den = 1;
};

Rat make_rat(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::overflow_error("rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    return Rat{num, den};
}

std::int64_t checked_i64(__int128 v, const char* what) {
    if (v > std::numeric_limits<std::int64_t>::max() ||
        v < std::numeric_limits<std::int64_t>::min()) {
        throw std::overflow_error(std::string("integer overflow in ") + what);
    }
    return static_cast<std::int64_t>(v);
}

Rat mul(const Rat& a, std::int64_t num, std::int64_t den) {
    // reduce cross factors first so the products stay small
    std::int64_t g1 = std::gcd(a.num < 0 ? -a.num : a.num, den);
    std::int64_t g2 = std::gcd(num < 0 ? -num : num, a.den);
    __int128 n = static_cast<__int128>(a.num / g1) * (num / g2);
    __int128 d = static_cast<__int128>(a.den / g2) * (den / g1);
    return make_rat(checked_i64(n, "balance ratio"),
                    checked_i64(d, "balance ratio"));
}

std::string cell_pair(int i, int j) {
    std::ostringstream os;
    os << "(" << i << "," << j << ")";
    return os.str();
}

}  // namespace

QuotientSpec parse_quotient_spec(const nlohmann::json& j) {
    if (!j.is_object()) throw SpecParseError("spec must be a JSON object");
    if (!j.contains("S")) throw SpecParseError("spec is missing \"S\"");
    const auto& js = j.at("S");
    if (!js.is_array() || js.empty()) {
        throw SpecParseError("\"S\" must be a non-empty array of rows");
    }
    const int k = static_cast<int>(js.size());

    QuotientSpec spec;
    spec.S.resize(k, k);
    for (int i = 0; i < k; ++i) {
        const auto& row = js.at(i);
        if (!row.is_array() || static_cast<int>(row.size()) != k) {
            throw SpecParseError("\"S\" must be square; row " +
                                 std::to_string(i) + " has wrong length");
        }
        for (int c = 0; c < k; ++c) {
            const auto& v = row.at(c);
            if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
                throw SpecParseError("S[" + std::to_string(i) + "][" +
                                     std::to_string(c) +
                                     "] must be a non-negative integer");
            }
            spec.S(i, c) = v.get<std::int64_t>();
        }
    }

    spec.F = Eigen::MatrixXd::Ones(k, k);
    if (j.contains("F")) {
        const auto& jf = j.at("F");
        if (!jf.is_array() || static_cast<int>(jf.size()) != k) {
            throw SpecParseError("\"F\" must be a " + std::to_string(k) + "x" +
                                 std::to_string(k) + " array");
        }
        for (int i = 0; i < k; ++i) {
            const auto& row = jf.at(i);
            if (!row.is_array() || static_cast<int>(row.size()) != k) {
                throw SpecParseError("\"F\" row " + std::to_string(i) +
                                     " has wrong length");
            }
            for (int c = 0; c < k; ++c) {
                if (!row.at(c).is_number()) {
                    throw SpecParseError("F entries must be numbers");
                }
                spec.F(i, c) = row.at(c).get<double>();
            }
        }
    }

    spec.b = Eigen::VectorXd::Zero(k);
    if (j.contains("b")) {
        const auto& jb = j.at("b");
        if (!jb.is_array() || static_cast<int>(jb.size()) != k) {
            throw SpecParseError("\"b\" must have length " + std::to_string(k));
        }
        for (int i = 0; i < k; ++i) {
            if (!jb.at(i).is_number()) {
                throw SpecParseError("b entries must be numbers");
            }
            spec.b(i) = jb.at(i).get<double>();
        }
    }

    if (j.contains("n")) {
        const auto& jn = j.at("n");
        if (!jn.is_array() || static_cast<int>(jn.size()) != k) {
            throw SpecParseError("\"n\" must have length " + std::to_string(k));
        }
        std::vector<std::int64_t> n(k);
        for (int i = 0; i < k; ++i) {
            if (!jn.at(i).is_number_integer() ||
                jn.at(i).get<std::int64_t>() <= 0) {
                throw SpecParseError("n entries must be positive integers");
            }
            n[i] = jn.at(i).get<std::int64_t>();
        }
        spec.n = std::move(n);
    }
    return spec;
}

QuotientSpec load_quotient_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open spec file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SpecParseError("invalid JSON in " + path + ": " + e.what());
    }
    return parse_quotient_spec(j);
}

nlohmann::json QuotientSpec::to_json() const {
    nlohmann::json j;
    const int kk = k();
    for (int i = 0; i < kk; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < kk; ++c) row.push_back(S(i, c));
        j["S"].push_back(row);
    }
    for (int i = 0; i < kk; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < kk; ++c) row.push_back(F(i, c));
        j["F"].push_back(row);
    }
    for (int i = 0; i < kk; ++i) j["b"].push_back(b(i));
    if (n) j["n"] = *n;
    return j;
}

nlohmann::json ValidationReport::to_json() const {
    nlohmann::json j;
    j["ok"] = ok;
    j["irreducible"] = irreducible;
    j["has_balance"] = has_balance;
    j["minimal_balance"] = minimal_balance;
    j["violations"] = nlohmann::json::array();
    for (const auto& v : violations) {
        j["violations"].push_back({{"code", v.code}, {"message", v.message}});
    }
    return j;
}

namespace {

bool support_symmetric(const MatI64& S) {
    for (int i = 0; i < S.rows(); ++i) {
        for (int j = 0; j < S.cols(); ++j) {
            if ((S(i, j) > 0) != (S(j, i) > 0)) return false;
        }
    }
    return true;
}

// Strong connectivity of the support digraph. For symmetric support this is
// plain connectivity; for asymmetric support we still answer the question
// honestly with forward+backward reachability from cell 0.
bool strongly_connected(const MatI64& S) {
    const int k = static_cast<int>(S.rows());
    auto reach = [&](bool transpose) {
        std::vector<char> seen(k, 0);
        std::queue<int> q;
        q.push(0);
        seen[0] = 1;
        int count = 1;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v = 0; v < k; ++v) {
                std::int64_t w = transpose ? S(v, u) : S(u, v);
                if (w > 0 && !seen[v]) {
                    seen[v] = 1;
                    ++count;
                    q.push(v);
                }
            }
        }
        return count == k;
    };
    return reach(false) && reach(true);
}

// Propagates cell-size ratios over the support graph. Returns ratios
// relative to cell 0, or nullopt when the balance equations are
// inconsistent (a cycle with ratio product != 1) or the support is not
// symmetric/connected.
std::optional<std::vector<Rat>> balance_ratios(const MatI64& S) {
    const int k = static_cast<int>(S.rows());
    if (!support_symmetric(S)) return std::nullopt;
    std::vector<Rat> ratio(k);
    std::vector<char> seen(k, 0);
    ratio[0] = Rat{1, 1};
    seen[0] = 1;
    std::queue<int> q;
    q.push(0);
    while (!q.empty()) {
        int i = q.front();
        q.pop();
        for (int j = 0; j < k; ++j) {
            if (S(i, j) <= 0) continue;
            // n_i s_ij = n_j s_ji  =>  n_j = n_i * s_ij / s_ji
            if (!seen[j]) {
                ratio[j] = mul(ratio[i], S(i, j), S(j, i));
                seen[j] = 1;
                q.push(j);
            } else {
                __int128 lhs = static_cast<__int128>(ratio[i].num) *
                               ratio[j].den * S(i, j);
                __int128 rhs = static_cast<__int128>(ratio[j].num) *
                               ratio[i].den * S(j, i);
                if (lhs != rhs) return std::nullopt;
            }
        }
    }
    for (int i = 0; i < k; ++i) {
        if (!seen[i]) return std::nullopt;
    }
    return ratio;
}

std::vector<std::int64_t> ratios_to_minimal(const std::vector<Rat>& ratio) {
    __int128 lcm = 1;
    for (const auto& r : ratio) {
        lcm = lcm / std::gcd(checked_i64(lcm % r.den, "balance lcm"), r.den) *
              r.den;
        checked_i64(lcm, "balance lcm");
    }
    std::vector<std::int64_t> n(ratio.size());
    for (std::size_t i = 0; i < ratio.size(); ++i) {
        __int128 v = static_cast<__int128>(ratio[i].num) *
                     (static_cast<std::int64_t>(lcm) / ratio[i].den);
        n[i] = checked_i64(v, "balance solution");
    }
    std::int64_t g = 0;
    for (auto v : n) g = std::gcd(g, v);
    if (g > 1) {
        for (auto& v : n) v /= g;
    }
    return n;
}

}  // namespace

ValidationReport validate(const QuotientSpec& spec) {
    ValidationReport rep;
    const int k = spec.k();

    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            if ((spec.S(i, j) > 0) != (spec.S(j, i) > 0)) {
                rep.violations.push_back(
                    {"support_asymmetric",
                     "s" + cell_pair(i, j) + " > 0 but s" + cell_pair(j, i) +
                         " = 0; no balanced realization exists"});
            }
        }
    }

    rep.irreducible = strongly_connected(spec.S);
    if (!rep.irreducible) {
        rep.violations.push_back(
            {"reducible",
             "support of S is not strongly connected; constructions and "
             "tree-based analysis require an irreducible spec"});
    }

    auto ratios = balance_ratios(spec.S);
    rep.has_balance = ratios.has_value();
    if (ratios) {
        rep.minimal_balance = ratios_to_minimal(*ratios);
    } else if (rep.irreducible && support_symmetric(spec.S)) {
        rep.violations.push_back(
            {"no_balance",
             "balance equations n_i s_ij = n_j s_ji have no positive "
             "solution (inconsistent cycle ratios)"});
    }

    for (int i = 0; i < k; ++i) {
        for (int j = i; j < k; ++j) {
            if (spec.S(i, j) == 0 && spec.S(j, i) == 0) continue;
            if (spec.F(i, j) != spec.F(j, i)) {
                rep.violations.push_back(
                    {"f_asymmetric", "F" + cell_pair(i, j) + " != F" +
                                         cell_pair(j, i) +
                                         " on a pair with s > 0"});
            }
            if (spec.F(i, j) == 0.0 || spec.F(j, i) == 0.0) {
                rep.violations.push_back(
                    {"f_zero_on_support",
                     "F" + cell_pair(i, j) + " is zero but s" +
                         cell_pair(i, j) + " > 0"});
            }
        }
    }
    for (int i = 0; i < k; ++i) {
        if (!std::isfinite(spec.b(i))) {
            rep.violations.push_back({"b_not_finite", "b entries must be finite"});
            break;
        }
    }

    if (spec.n) {
        const auto& n = *spec.n;
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
                __int128 lhs = static_cast<__int128>(n[i]) * spec.S(i, j);
                __int128 rhs = static_cast<__int128>(n[j]) * spec.S(j, i);
                if (lhs != rhs) {
                    rep.violations.push_back(
                        {"n_unbalanced",
                         "n_" + std::to_string(i) + " s" + cell_pair(i, j) +
                             " != n_" + std::to_string(j) + " s" +
                             cell_pair(j, i)});
                }
            }
        }
        for (int i = 0; i < k; ++i) {
            if (n[i] <= spec.S(i, i)) {
                rep.violations.push_back(
                    {"n_too_small",
                     "n_" + std::to_string(i) + " must exceed s" +
                         cell_pair(i, i) + " for a simple realization"});
            }
            for (int j = 0; j < k; ++j) {
                if (n[i] < spec.S(j, i)) {
                    rep.violations.push_back(
                        {"n_too_small", "n_" + std::to_string(i) +
                                            " < s" + cell_pair(j, i)});
                }
            }
            if ((n[i] * spec.S(i, i)) % 2 != 0) {
                rep.violations.push_back(
                    {"n_parity", "n_" + std::to_string(i) + " s" +
                                     cell_pair(i, i) +
                                     " must be even (handshake count)"});
            }
        }
    }

    rep.ok = rep.violations.empty();
    return rep;
}

std::vector<std::int64_t> minimal_balance(const QuotientSpec& spec) {
    auto ratios = balance_ratios(spec.S);
    if (!ratios) {
        throw std::invalid_argument(
            "balance equations have no positive solution");
    }
    return ratios_to_minimal(*ratios);
}

std::vector<std::int64_t> minimal_cell_sizes(const QuotientSpec& spec) {
    auto base = minimal_balance(spec);
    const int k = spec.k();
    // Feasibility in the multiplier a is monotone except for the parity
    // constraint, which either forces even a or nothing; so the minimum is
    // the max of the per-constraint lower bounds, bumped to even if needed.
    std::int64_t a = 1;
    bool need_even = false;
    for (int i = 0; i < k; ++i) {
        if (spec.S(i, i) > 0) {
            a = std::max(a, spec.S(i, i) / base[i] + 1);
            if ((base[i] * spec.S(i, i)) % 2 != 0) need_even = true;
        }
        for (int j = 0; j < k; ++j) {
            std::int64_t need = spec.S(j, i);
            a = std::max(a, (need + base[i] - 1) / base[i]);
        }
    }
    if (need_even && a % 2 != 0) ++a;
    for (auto& v : base) v *= a;
    return base;
}

Eigen::MatrixXd symmetrized_cell_matrix(const QuotientSpec& spec,
                                        const std::vector<std::int64_t>& n) {
    const int k = spec.k();
    Eigen::MatrixXd M(k, k);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            double v = 0;
            if (spec.S(i, j) > 0) {
                v = static_cast<double>(spec.S(i, j)) * spec.F(i, j) *
                    std::sqrt(static_cast<double>(n[i]) /
                              static_cast<double>(n[j]));
            }
            if (i == j) v += spec.b(i);
            M(i, j) = v;
        }
    }
    return M;
}

QuotientEigen quotient_eigen(const QuotientSpec& spec) {
    const int k = spec.k();
    QuotientEigen out;
    out.n = spec.n ? *spec.n : minimal_balance(spec);

    Eigen::MatrixXd M = symmetrized_cell_matrix(spec, out.n);
    Eigen::MatrixXd Msym = 0.5 * (M + M.transpose());
    double skew = (M - M.transpose()).cwiseAbs().maxCoeff();
    double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    if (skew > 1e-9 * scale) {
        throw std::invalid_argument(
            "cell matrix does not symmetrize; spec is unbalanced or F is "
            "asymmetric");
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Msym);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("cell matrix eigensolve failed");
    }

    // u columns are orthonormal; psi = N^{-1/2} u makes the lifted vectors
    // unit-norm on a graph with cell sizes n.
    Eigen::MatrixXd psi = es.eigenvectors();
    for (int i = 0; i < k; ++i) {
        psi.row(i) /= std::sqrt(static_cast<double>(out.n[i]));
    }
    Eigen::VectorXd vals = es.eigenvalues();

    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    // descending by eigenvalue; sign-fix before lexicographic tie-break
    Eigen::MatrixXd fixed = psi;
    for (int j = 0; j < k; ++j) {
        for (int i = 0; i < k; ++i) {
            if (std::abs(fixed(i, j)) > 1e-12) {
                if (fixed(i, j) < 0) fixed.col(j) = -fixed.col(j);
                break;
            }
        }
    }
    std::sort(order.begin(), order.end(), [&](int a, int c) {
        if (vals(a) != vals(c)) return vals(a) > vals(c);
        for (int i = 0; i < k; ++i) {
            if (fixed(i, a) != fixed(i, c)) return fixed(i, a) < fixed(i, c);
        }
        return a < c;
    });

    out.values.resize(k);
    out.psi.resize(k, k);
    for (int j = 0; j < k; ++j) {
        out.values(j) = vals(order[j]);
        out.psi.col(j) = fixed.col(order[j]);
    }
    out.lambda_s = out.values(0);
    return out;
}

}  // namespace sreg
