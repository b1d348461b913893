// sreg: construct, sample and analyze S-regular graphs and matrices.
//
// Exit codes (stage-tagged so scripts can tell failures apart):
//   0  success; for validate/verify-bounds: everything holds
//   1  semantic violation (spec invalid, bound violated, graph/spec mismatch)
//   2  configuration error (bad flags, malformed JSON, bad grid)
//   3  sampling failure (retry budget exhausted)
//   4  spectral stage failure
//   5  tree density stage failure (generating-function continuation)
//   6  file I/O failure

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sreg/bounds.hpp"
#include "sreg/graphs.hpp"
#include "sreg/io.hpp"
#include "sreg/matrices.hpp"
#include "sreg/quotient.hpp"
#include "sreg/rng.hpp"
#include "sreg/treewalks.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSampling = 3;
constexpr int kExitSpectral = 4;
constexpr int kExitTree = 5;
constexpr int kExitIo = 6;

struct CliError : std::runtime_error {
    int code;
    CliError(int code_, const std::string& what)
        : std::runtime_error(what), code(code_) {}
};

sreg::QuotientSpec load_spec(const std::string& path) {
    try {
        return sreg::load_quotient_spec(path);
    } catch (const sreg::SpecParseError& e) {
        throw CliError(kExitConfig, std::string("spec parse: ") + e.what());
    } catch (const json::exception& e) {
        throw CliError(kExitConfig, std::string("spec parse: ") + e.what());
    } catch (const std::exception& e) {
        throw CliError(kExitIo, std::string("spec load: ") + e.what());
    }
}

struct GridSpec {
    double lo = 0, hi = 0;
    int points = 0;

    std::vector<double> values() const {
        std::vector<double> v(points);
        for (int i = 0; i < points; ++i) {
            double t = points == 1 ? 0.0
                                   : static_cast<double>(i) /
                                         static_cast<double>(points - 1);
            v[i] = lo + (hi - lo) * t;
        }
        return v;
    }
};

GridSpec parse_grid(const std::string& s) {
    GridSpec g;
    char colon1 = 0, colon2 = 0;
    std::istringstream is(s);
    if (!(is >> g.lo >> colon1 >> g.hi >> colon2 >> g.points) ||
        colon1 != ':' || colon2 != ':' || !(is >> std::ws).eof()) {
        throw CliError(kExitConfig, "grid must be lo:hi:points, got " + s);
    }
    if (g.points < 2 || g.hi <= g.lo) {
        throw CliError(kExitConfig, "grid needs hi > lo and points >= 2");
    }
    return g;
}

std::vector<double> parse_eps(const std::string& s) {
    std::vector<double> eps;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ',')) {
        try {
            eps.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw CliError(kExitConfig, "bad epsilon entry: " + item);
        }
    }
    if (eps.size() < 2) {
        throw CliError(kExitConfig,
                       "need at least two epsilons for extrapolation");
    }
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (eps[i] <= 0 || (i && eps[i] >= eps[i - 1])) {
            throw CliError(kExitConfig,
                           "epsilons must be positive and decreasing");
        }
    }
    return eps;
}

sreg::MatrixPreset parse_matrix(const std::string& name) {
    try {
        return sreg::preset_from_string(name);
    } catch (const std::exception& e) {
        throw CliError(kExitConfig, e.what());
    }
}

std::vector<std::int64_t> resolve_sizes(const sreg::QuotientSpec& spec,
                                        const std::vector<std::int64_t>& n_flag,
                                        bool required) {
    if (!n_flag.empty()) {
        if (static_cast<int>(n_flag.size()) != spec.k()) {
            throw CliError(kExitConfig, "--n needs one size per cell");
        }
        return n_flag;
    }
    if (spec.n) return *spec.n;
    if (required) {
        throw CliError(kExitConfig,
                       "cell sizes required: pass --n or put \"n\" in the spec");
    }
    return sreg::minimal_balance(spec);
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw CliError(kExitIo, "cannot create output dir " + dir + ": " +
                                    ec.message());
    }
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CliError(kExitIo, "cannot open for writing: " + path);
    out << j.dump(2) << '\n';
}

void ensure_parent_dir(const std::string& path) {
    auto parent = fs::path(path).parent_path();
    if (parent.empty()) return;
    std::error_code ec;
    fs::create_directories(parent, ec);
    if (ec) {
        throw CliError(kExitIo, "cannot create directory " + parent.string() +
                                    ": " + ec.message());
    }
}

std::string numbered_path(const std::string& base, int index) {
    fs::path p(base);
    auto stem = p.stem().string();
    auto ext = p.extension().string();
    char suffix[16];
    std::snprintf(suffix, sizeof(suffix), "_%03d", index);
    return (p.parent_path() / (stem + suffix + ext)).string();
}

// ---------------------------------------------------------------- validate

struct ValidateOpts {
    std::string spec_path;
    std::string out_path;
};

int cmd_validate(const ValidateOpts& o) {
    auto spec = load_spec(o.spec_path);
    auto report = sreg::validate(spec);
    json j = report.to_json();
    if (!o.out_path.empty()) {
        write_json_file(o.out_path, j);
    }
    std::cout << j.dump(2) << '\n';
    return report.ok ? kExitOk : kExitViolation;
}

// --------------------------------------------------------------- construct

struct ConstructOpts {
    std::string spec_path;
    std::vector<std::int64_t> n;
    std::string out_path = "graph.txt";
};

int cmd_construct(const ConstructOpts& o) {
    auto spec = load_spec(o.spec_path);
    auto n = resolve_sizes(spec, o.n, false);
    sreg::PartitionedGraph g;
    try {
        g = sreg::construct_deterministic(spec, n);
    } catch (const std::invalid_argument& e) {
        throw CliError(kExitViolation, e.what());
    }
    ensure_parent_dir(o.out_path);
    try {
        sreg::write_edge_list(g, o.out_path);
    } catch (const std::exception& e) {
        throw CliError(kExitIo, e.what());
    }
    std::cerr << "wrote " << o.out_path << " (" << g.n_total() << " vertices, "
              << g.edge_count() << " edges)\n";
    return kExitOk;
}

// ------------------------------------------------------------------ sample

struct SampleOpts {
    std::string spec_path;
    std::vector<std::int64_t> n;
    std::uint64_t seed = 0;
    int trials = 1;
    int max_retries = 2000;
    std::string out_path = "graph.txt";
};

int cmd_sample(const SampleOpts& o) {
    auto spec = load_spec(o.spec_path);
    auto n = resolve_sizes(spec, o.n, false);
    for (int t = 0; t < o.trials; ++t) {
        auto rng = sreg::philox4x64::stream(o.seed, t);
        sreg::PartitionedGraph g;
        try {
            g = sreg::sample_configuration_model(spec, n, rng, o.max_retries);
        } catch (const sreg::SamplingError& e) {
            throw CliError(kExitSampling, e.what());
        } catch (const std::invalid_argument& e) {
            throw CliError(kExitViolation, e.what());
        }
        std::string path =
            o.trials == 1 ? o.out_path : numbered_path(o.out_path, t);
        ensure_parent_dir(path);
        try {
            sreg::write_edge_list(g, path);
        } catch (const std::exception& e) {
            throw CliError(kExitIo, e.what());
        }
        std::cerr << "wrote " << path << " (" << g.n_total() << " vertices, "
                  << g.edge_count() << " edges)\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------- spectrum

struct SpectrumOpts {
    std::string spec_path;
    std::string graph_path;
    std::vector<std::int64_t> n;
    std::optional<std::uint64_t> seed;
    std::string matrix = "custom";
    std::string out_dir = ".";
    int bins = 100;
};

struct SpectrumFiles {
    sreg::ClassifiedSpectrum cls;
    std::vector<sreg::CellStatRow> stats;
};

SpectrumFiles classify_graph(const sreg::PartitionedGraph& g,
                             const sreg::QuotientSpec& preset_spec) {
    SpectrumFiles out;
    try {
        sreg::SRegularMatrix T(g, preset_spec);
        out.cls = sreg::classify(T);
        out.stats = sreg::cell_sum_squares(out.cls, g);
    } catch (const std::invalid_argument& e) {
        // graph does not realize the spec
        throw CliError(kExitViolation, e.what());
    } catch (const std::exception& e) {
        throw CliError(kExitSpectral, e.what());
    }
    return out;
}

int cmd_spectrum(const SpectrumOpts& o) {
    auto spec = load_spec(o.spec_path);
    auto preset_spec = apply_preset(spec, parse_matrix(o.matrix));

    sreg::PartitionedGraph g;
    if (!o.graph_path.empty()) {
        try {
            g = sreg::read_edge_list(o.graph_path);
        } catch (const std::exception& e) {
            throw CliError(kExitIo, e.what());
        }
    } else {
        auto n = resolve_sizes(spec, o.n, true);
        if (o.seed) {
            auto rng = sreg::philox4x64::stream(*o.seed, 0);
            try {
                g = sreg::sample_configuration_model(spec, n, rng);
            } catch (const sreg::SamplingError& e) {
                throw CliError(kExitSampling, e.what());
            }
        } else {
            try {
                g = sreg::construct_deterministic(spec, n);
            } catch (const std::invalid_argument& e) {
                throw CliError(kExitViolation, e.what());
            }
        }
    }

    auto res = classify_graph(g, preset_spec);
    ensure_dir(o.out_dir);
    fs::path dir(o.out_dir);

    const int n_eigs = static_cast<int>(res.cls.values.size());
    {
        sreg::csv_writer w((dir / "eigenvalues.csv").string(),
                           {"index", "value", "class"});
        for (int i = 0; i < n_eigs; ++i) {
            w.field(i)
                .field(res.cls.values(i))
                .field(res.cls.label[i] ? std::string("structural")
                                        : std::string("bulk"));
            w.end_row();
        }
    }
    {
        sreg::csv_writer w((dir / "cellstats.csv").string(),
                           {"lambda", "cell", "raw", "scaled", "cellsum"});
        for (const auto& row : res.stats) {
            w.field(row.lambda)
                .field(row.cell)
                .field(row.raw)
                .field(row.scaled)
                .field(row.cell_sum);
            w.end_row();
        }
    }
    {
        std::vector<double> bulk;
        for (int i = 0; i < n_eigs; ++i) {
            if (!res.cls.label[i]) bulk.push_back(res.cls.values(i));
        }
        double lo = -1, hi = 1;
        if (!bulk.empty()) {
            lo = *std::min_element(bulk.begin(), bulk.end());
            hi = *std::max_element(bulk.begin(), bulk.end());
            if (hi - lo < 1e-9) {
                lo -= 1;
                hi += 1;
            }
        }
        Eigen::VectorXd bv(bulk.size());
        for (std::size_t i = 0; i < bulk.size(); ++i) bv(i) = bulk[i];
        auto hist = sreg::spectral_density_histogram(bv, o.bins, lo, hi);
        sreg::csv_writer w((dir / "density.csv").string(),
                           {"bin_left", "bin_right", "mass"});
        double width = (hist.hi - hist.lo) / hist.bins;
        for (int b = 0; b < hist.bins; ++b) {
            w.field(hist.lo + b * width)
                .field(hist.lo + (b + 1) * width)
                .field(hist.mass[b]);
            w.end_row();
        }
    }

    json summary = {
        {"n", g.n_total()},
        {"lambda_s", res.cls.lambda_s},
        {"lambda_b", res.cls.lambda_b},
        {"lambda_b_signed", res.cls.lambda_b_signed},
        {"match_residual", res.cls.match_residual},
        {"bulk_count", n_eigs - static_cast<int>(res.cls.quotient.values.size())},
    };
    std::cout << summary.dump(2) << '\n';
    return kExitOk;
}

// ------------------------------------------------------------- tree-density

struct TreeDensityOpts {
    std::string spec_path;
    std::string grid;
    std::string eps;
    std::string matrix = "custom";
    std::string out_dir = ".";
    std::string gf_debug_path;
};

void write_density_csv(const std::string& path, const sreg::DensityCurve& c) {
    const int k = static_cast<int>(c.c.size());
    std::vector<std::string> header = {"lambda"};
    for (int i = 0; i < k; ++i) header.push_back("mu_" + std::to_string(i + 1));
    header.push_back("mixture");
    for (int i = 0; i < k; ++i) {
        header.push_back("ratio_" + std::to_string(i + 1));
    }
    header.push_back("status");
    sreg::csv_writer w(path, header);
    for (std::size_t p = 0; p < c.lambda.size(); ++p) {
        w.field(c.lambda[p]);
        for (int i = 0; i < k; ++i) w.field(c.mu(p, i));
        w.field(c.mixture[p]);
        for (int i = 0; i < k; ++i) w.field(c.ratio(p, i));
        w.field(c.status[p]);
        w.end_row();
    }
}

int cmd_tree_density(const TreeDensityOpts& o) {
    auto spec = load_spec(o.spec_path);
    auto preset_spec = apply_preset(spec, parse_matrix(o.matrix));
    auto grid = parse_grid(o.grid);
    std::vector<double> eps = {1e-2, 5e-3, 2.5e-3};
    if (!o.eps.empty()) eps = parse_eps(o.eps);

    sreg::DensityCurve curve;
    try {
        curve = sreg::density_curve(preset_spec, grid.values(), eps);
    } catch (const std::exception& e) {
        throw CliError(kExitTree, e.what());
    }
    ensure_dir(o.out_dir);
    write_density_csv((fs::path(o.out_dir) / "treedensity.csv").string(),
                      curve);

    if (!o.gf_debug_path.empty()) {
        // cold re-solves at a strided subset of grid points, one entry per
        // (epsilon, lambda): the raw generating-function evaluations behind
        // the curve
        sreg::GFSystem sys(preset_spec);
        json dump = json::array();
        int stride = std::max(1, grid.points / 16);
        try {
            for (double e : eps) {
                for (int p = 0; p < grid.points; p += stride) {
                    double lambda = curve.lambda[p];
                    std::complex<double> z(lambda, e);
                    auto pt = sys.solve(1.0 / z);
                    json entry = pt.to_json();
                    entry["epsilon"] = e;
                    entry["lambda"] = lambda;
                    dump.push_back(std::move(entry));
                }
            }
        } catch (const std::exception& e) {
            throw CliError(kExitTree, e.what());
        }
        write_json_file(o.gf_debug_path, dump);
    }

    if (curve.failed_count > 0) {
        std::cerr << curve.failed_count << " grid points failed\n";
        return kExitTree;
    }
    std::cerr << "wrote treedensity.csv (" << grid.points << " points, "
              << curve.clipped_count << " clipped)\n";
    return kExitOk;
}

// ------------------------------------------------------------ verify-bounds

struct BoundsOpts {
    std::string spec_path;
    std::vector<std::int64_t> n;
    std::uint64_t seed = 0;
    int trials = 10;
    int subsets = 4;
    std::string out_dir = ".";
};

sreg::SubsetProfile random_subset(const sreg::PartitionedGraph& g,
                                  sreg::philox4x64& rng, bool proper) {
    const int n = g.n_total();
    std::vector<std::uint8_t> mask(n, 0);
    double p = 0.1 + 0.8 * rng.uniform_double();
    std::int64_t total = 0;
    for (int v = 0; v < n; ++v) {
        if (rng.uniform_double() < p) {
            mask[v] = 1;
            ++total;
        }
    }
    if (proper && total == n) {
        mask[rng.uniform_below(static_cast<std::uint64_t>(n))] = 0;
    }
    return sreg::SubsetProfile::from_mask(g, std::move(mask));
}

int cmd_verify_bounds(const BoundsOpts& o) {
    auto spec = load_spec(o.spec_path);
    auto n = resolve_sizes(spec, o.n, true);
    auto adj_spec = apply_preset(spec, sreg::MatrixPreset::adjacency);

    ensure_dir(o.out_dir);
    sreg::csv_writer w((fs::path(o.out_dir) / "bounds.csv").string(),
                       {"name", "lhs", "rhs", "slack", "holds", "context"});
    auto emit = [&](int trial, const sreg::BoundReport& r) {
        w.field(r.name)
            .field(r.lhs)
            .field(r.rhs)
            .field(r.slack)
            .field(static_cast<std::int64_t>(r.holds ? 1 : 0))
            .field("trial=" + std::to_string(trial) +
                   (r.context.empty() ? "" : " " + r.context));
        w.end_row();
        return r.holds;
    };

    bool all_hold = true;
    int skipped_diameter = 0;
    auto ab = sreg::alon_boppana_lower(adj_spec, n, 1, 8);

    for (int t = 0; t < o.trials; ++t) {
        auto rng = sreg::philox4x64::stream(o.seed, t);
        sreg::PartitionedGraph g;
        try {
            g = sreg::sample_configuration_model(spec, n, rng);
        } catch (const sreg::SamplingError& e) {
            throw CliError(kExitSampling, e.what());
        } catch (const std::invalid_argument& e) {
            throw CliError(kExitViolation, e.what());
        }
        auto res = classify_graph(g, adj_spec);
        const double ls = res.cls.lambda_s;
        const double lb = res.cls.lambda_b;

        for (int s = 0; s < o.subsets; ++s) {
            auto B = random_subset(g, rng, false);
            auto C = random_subset(g, rng, true);
            int ell = 1 + static_cast<int>(rng.uniform_below(6));
            all_hold &= emit(t, sreg::eml_classic(g, adj_spec, B, C, lb));
            all_hold &= emit(t, sreg::eml_tight(g, adj_spec, B, C, lb));
            all_hold &= emit(t, sreg::eml_scaled(g, adj_spec, B, C, lb));
            all_hold &= emit(t, sreg::eml_neighbor_variance(g, adj_spec, B, lb));
            all_hold &=
                emit(t, sreg::induced_complement_bound(g, adj_spec, C, ls, lb));
            all_hold &= emit(
                t, sreg::walks_avoiding_bound(g, adj_spec, C, ell, ls, lb));
        }
        all_hold &= emit(t, sreg::alon_boppana_report(ab, lb));
        if (sreg::is_connected(g)) {
            all_hold &= emit(t, sreg::diameter_check(g, adj_spec, lb).report);
        } else {
            ++skipped_diameter;
        }
    }
    if (skipped_diameter) {
        std::cerr << "diameter check skipped on " << skipped_diameter
                  << " disconnected samples\n";
    }
    std::cerr << (all_hold ? "all bounds hold\n" : "bound violations found\n");
    return all_hold ? kExitOk : kExitViolation;
}

// ------------------------------------------------------------------ report

struct ReportOpts {
    std::string spec_path;
    std::vector<std::int64_t> n;
    std::uint64_t seed = 0;
    int trials = 20;
    std::string matrix = "custom";
    std::string grid;
    std::string eps;
    std::string out_dir = ".";
    int bins = 100;
    int threads = 0;
};

struct TrialResult {
    sreg::ClassifiedSpectrum cls;
    std::vector<sreg::CellStatRow> stats;
};

int cmd_report(const ReportOpts& o) {
    auto spec = load_spec(o.spec_path);
    auto preset_spec = apply_preset(spec, parse_matrix(o.matrix));
    auto n = resolve_sizes(spec, o.n, true);
    preset_spec.n = n;

    GridSpec grid;
    if (!o.grid.empty()) {
        grid = parse_grid(o.grid);
    } else {
        double r = sreg::spectral_support_bound(preset_spec) + 0.25;
        grid = GridSpec{-r, r, 601};
    }
    std::vector<double> eps = {1e-2, 5e-3, 2.5e-3};
    if (!o.eps.empty()) eps = parse_eps(o.eps);

    // trials run concurrently; trial t draws from the counter-based stream
    // (seed, t), so results are identical no matter how work is scheduled
    std::vector<TrialResult> results(o.trials);
    std::vector<std::exception_ptr> errors(o.trials);
    std::atomic<int> next{0};
    unsigned n_threads = o.threads > 0
                             ? static_cast<unsigned>(o.threads)
                             : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(o.trials));
    auto worker = [&]() {
        while (true) {
            int t = next.fetch_add(1);
            if (t >= o.trials) break;
            try {
                auto rng = sreg::philox4x64::stream(o.seed, t);
                auto g = sreg::sample_configuration_model(spec, n, rng);
                sreg::SRegularMatrix T(g, preset_spec);
                results[t].cls = sreg::classify(T);
                results[t].stats = sreg::cell_sum_squares(results[t].cls, g);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (int t = 0; t < o.trials; ++t) {
        if (!errors[t]) continue;
        try {
            std::rethrow_exception(errors[t]);
        } catch (const sreg::SamplingError& e) {
            throw CliError(kExitSampling,
                           "trial " + std::to_string(t) + ": " + e.what());
        } catch (const std::invalid_argument& e) {
            throw CliError(kExitViolation,
                           "trial " + std::to_string(t) + ": " + e.what());
        } catch (const std::exception& e) {
            throw CliError(kExitSpectral,
                           "trial " + std::to_string(t) + ": " + e.what());
        }
    }

    ensure_dir(o.out_dir);
    fs::path dir(o.out_dir);

    std::vector<double> bulk;
    std::int64_t structural_count = 0;
    double lambda_s_sum = 0, lambda_b_sum = 0, lambda_b_max = 0;
    double match_residual_max = 0;
    {
        sreg::csv_writer w((dir / "eigenvalues.csv").string(),
                           {"trial", "index", "value", "class"});
        for (int t = 0; t < o.trials; ++t) {
            const auto& cls = results[t].cls;
            for (int i = 0; i < static_cast<int>(cls.values.size()); ++i) {
                bool structural = cls.label[i] != 0;
                w.field(t)
                    .field(i)
                    .field(cls.values(i))
                    .field(structural ? std::string("structural")
                                      : std::string("bulk"));
                w.end_row();
                if (structural) {
                    ++structural_count;
                } else {
                    bulk.push_back(cls.values(i));
                }
            }
            lambda_s_sum += cls.lambda_s;
            lambda_b_sum += cls.lambda_b;
            lambda_b_max = std::max(lambda_b_max, cls.lambda_b);
            match_residual_max =
                std::max(match_residual_max, cls.match_residual);
        }
    }
    {
        sreg::csv_writer w((dir / "cellstats.csv").string(),
                           {"trial", "index", "lambda", "cell", "raw", "scaled",
                            "cellsum", "class"});
        for (int t = 0; t < o.trials; ++t) {
            for (const auto& row : results[t].stats) {
                w.field(t)
                    .field(row.eigen_index)
                    .field(row.lambda)
                    .field(row.cell)
                    .field(row.raw)
                    .field(row.scaled)
                    .field(row.cell_sum)
                    .field(row.label ? std::string("structural")
                                     : std::string("bulk"));
                w.end_row();
            }
        }
    }
    {
        Eigen::VectorXd bv(bulk.size());
        for (std::size_t i = 0; i < bulk.size(); ++i) bv(i) = bulk[i];
        auto hist =
            sreg::spectral_density_histogram(bv, o.bins, grid.lo, grid.hi);
        sreg::csv_writer w((dir / "density.csv").string(),
                           {"bin_left", "bin_right", "mass"});
        double width = (hist.hi - hist.lo) / hist.bins;
        for (int b = 0; b < hist.bins; ++b) {
            w.field(hist.lo + b * width)
                .field(hist.lo + (b + 1) * width)
                .field(hist.mass[b]);
            w.end_row();
        }
    }

    sreg::DensityCurve curve;
    try {
        curve = sreg::density_curve(preset_spec, grid.values(), eps);
    } catch (const std::exception& e) {
        throw CliError(kExitTree, e.what());
    }
    write_density_csv((dir / "treedensity.csv").string(), curve);

    double ks = std::numeric_limits<double>::quiet_NaN();
    double captured = 0;
    try {
        auto cdf = sreg::mixture_cdf(curve);
        captured = cdf.empty() ? 0.0 : cdf.back();
        if (!bulk.empty()) ks = sreg::ks_statistic(bulk, curve);
    } catch (const std::exception& e) {
        throw CliError(kExitTree, e.what());
    }

    json cmp = {
        {"trials", o.trials},
        {"seed", o.seed},
        {"matrix", o.matrix},
        {"n", n},
        {"grid", {{"lo", grid.lo}, {"hi", grid.hi}, {"points", grid.points}}},
        {"bulk_count", static_cast<std::int64_t>(bulk.size())},
        {"structural_count", structural_count},
        {"ks_bulk_vs_mixture", ks},
        {"captured_mass", captured},
        {"missing_mass", 1.0 - captured},
        {"clipped_points", curve.clipped_count},
        {"failed_points", curve.failed_count},
        {"lambda_s_mean", lambda_s_sum / o.trials},
        {"lambda_b_mean", lambda_b_sum / o.trials},
        {"lambda_b_max", lambda_b_max},
        {"match_residual_max", match_residual_max},
    };
    write_json_file((dir / "comparison.json").string(), cmp);
    std::cout << cmp.dump(2) << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "S-regular graphs: construction, sampling, spectra and the limiting "
        "tree densities"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    ValidateOpts vo;
    auto* validate = app.add_subcommand(
        "validate", "Check a quotient spec (exit 0 valid, 1 violations)");
    validate->add_option("--spec", vo.spec_path, "spec JSON file")->required();
    validate->add_option("--out", vo.out_path, "also write the report here");

    ConstructOpts co;
    auto* construct = app.add_subcommand(
        "construct", "Deterministic realization on given cell sizes");
    construct->add_option("--spec", co.spec_path, "spec JSON file")->required();
    construct->add_option("--n", co.n, "cell sizes (default: from spec)");
    construct->add_option("--out", co.out_path,
                          "edge list path (default graph.txt)");

    SampleOpts so;
    auto* sample = app.add_subcommand(
        "sample", "Random realization(s) via stub matching");
    sample->add_option("--spec", so.spec_path, "spec JSON file")->required();
    sample->add_option("--n", so.n, "cell sizes (default: from spec)");
    sample->add_option("--seed", so.seed, "RNG seed; trial t uses stream (seed, t)")
        ->required();
    sample->add_option("--trials", so.trials, "number of graphs (default 1)");
    sample->add_option("--max-retries", so.max_retries,
                       "block restart budget (default 2000)");
    sample->add_option("--out", so.out_path,
                       "edge list path; _000 suffixes when trials > 1");

    SpectrumOpts po;
    auto* spectrum = app.add_subcommand(
        "spectrum",
        "Eigenvalues of one graph, split into structural and bulk");
    spectrum->add_option("--spec", po.spec_path, "spec JSON file")->required();
    spectrum->add_option("--graph", po.graph_path,
                         "edge list produced by construct/sample");
    spectrum->add_option("--n", po.n, "cell sizes (with --seed: sample)");
    std::uint64_t spectrum_seed = 0;
    auto* seed_opt = spectrum->add_option(
        "--seed", spectrum_seed, "sample instead of deterministic construct");
    spectrum->add_option("--matrix", po.matrix,
                         "adjacency|laplacian|normalized-laplacian|custom");
    spectrum->add_option("--out", po.out_dir, "output directory (default .)");
    spectrum->add_option("--bins", po.bins, "histogram bins (default 100)");

    TreeDensityOpts to;
    auto* tree = app.add_subcommand(
        "tree-density", "Limiting per-cell spectral densities on a grid");
    tree->add_option("--spec", to.spec_path, "spec JSON file")->required();
    tree->add_option("--grid", to.grid, "lambda grid lo:hi:points")->required();
    tree->add_option("--eps", to.eps,
                     "imaginary offsets, decreasing (default 1e-2,5e-3,2.5e-3)");
    tree->add_option("--matrix", to.matrix,
                     "adjacency|laplacian|normalized-laplacian|custom");
    tree->add_option("--out", to.out_dir, "output directory (default .)");
    tree->add_option("--gf-debug", to.gf_debug_path,
                     "dump raw generating-function solves to this JSON file");

    BoundsOpts bo;
    auto* bounds = app.add_subcommand(
        "verify-bounds",
        "Fuzz eigenvalue inequalities on sampled graphs (exit 1 on violation)");
    bounds->add_option("--spec", bo.spec_path, "spec JSON file")->required();
    bounds->add_option("--n", bo.n, "cell sizes");
    bounds->add_option("--seed", bo.seed, "RNG seed")->required();
    bounds->add_option("--trials", bo.trials, "sampled graphs (default 10)");
    bounds->add_option("--subsets", bo.subsets,
                       "random subset pairs per graph (default 4)");
    bounds->add_option("--out", bo.out_dir, "output directory (default .)");

    ReportOpts ro;
    auto* report = app.add_subcommand(
        "report",
        "Ensemble spectra vs limiting densities: sample, classify, compare");
    report->add_option("--spec", ro.spec_path, "spec JSON file")->required();
    report->add_option("--n", ro.n, "cell sizes");
    report->add_option("--seed", ro.seed, "RNG seed; trial t uses stream (seed, t)")
        ->required();
    report->add_option("--trials", ro.trials, "ensemble size (default 20)");
    report->add_option("--matrix", ro.matrix,
                       "adjacency|laplacian|normalized-laplacian|custom");
    report->add_option("--grid", ro.grid,
                       "lambda grid lo:hi:points (default from support bound)");
    report->add_option("--eps", ro.eps, "imaginary offsets, decreasing");
    report->add_option("--bins", ro.bins, "histogram bins (default 100)");
    report->add_option("--threads", ro.threads,
                       "worker threads (default: hardware)");
    report->add_option("--out", ro.out_dir, "output directory (default .)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        // CLI11 returns 0 for --help; everything else is a usage error
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*validate) return cmd_validate(vo);
        if (*construct) return cmd_construct(co);
        if (*sample) return cmd_sample(so);
        if (*spectrum) {
            if (seed_opt->count()) po.seed = spectrum_seed;
            return cmd_spectrum(po);
        }
        if (*tree) return cmd_tree_density(to);
        if (*bounds) return cmd_verify_bounds(bo);
        if (*report) return cmd_report(ro);
    } catch (const CliError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}
