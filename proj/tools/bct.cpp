// bct: sampling, counting and regime diagnostics for binary contingency
// tables via the configuration model.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bct/bct.hpp"

using nlohmann::json;

namespace {

// exit codes shared with the test suite
enum exit_code : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_validation = 2,
    exit_infeasible = 3,
    exit_exhausted = 4,
    exit_inconclusive = 5,
};

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw bct::validation_error("cannot open file '" + path + "'");
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

struct common_opts {
    std::string margins_file;
    std::string r_list, c_list;
    std::uint64_t seed = 0;
    bool seed_given = false;
    unsigned threads = 1;
    bool pretty = false;
    bool strict = false;
    std::string manifest_path;
    std::map<std::string, std::uint64_t> digests;  // path -> fnv1a64
};

void add_margin_flags(CLI::App* cmd, common_opts& o) {
    cmd->add_option("--margins", o.margins_file, "margin file (text or JSON)");
    cmd->add_option("--r", o.r_list, "row sums, space separated");
    cmd->add_option("--c", o.c_list, "column sums, space separated");
}

void add_seed_flag(CLI::App* cmd, common_opts& o) {
    cmd->add_option("--seed", o.seed, "root seed (64-bit); falls back to env BCT_SEED, then 0")
        ->each([&o](const std::string&) { o.seed_given = true; });
}

void resolve_seed(common_opts& o) {
    if (o.seed_given) return;
    if (const char* env = std::getenv("BCT_SEED")) o.seed = std::strtoull(env, nullptr, 10);
}

bct::margins load_margins(common_opts& o) {
    if (!o.margins_file.empty()) {
        const std::string text = read_file(o.margins_file);
        o.digests[o.margins_file] = fnv1a64(text);
        return bct::parse_margins(text);
    }
    if (!o.r_list.empty() && !o.c_list.empty())
        return bct::parse_margins("r: " + o.r_list + "\nc: " + o.c_list + "\n");
    throw bct::validation_error("margins required: --margins FILE or --r \"...\" --c \"...\"");
}

bct::sequence_family load_family_arg(const std::string& arg, common_opts& o) {
    for (const auto& name : bct::builtin_family_names())
        if (arg == name) return bct::builtin_family(arg);
    const std::string text = read_file(arg);
    o.digests[arg] = fnv1a64(text);
    return bct::load_family(text);
}

void print_json(const json& j, const common_opts& o) {
    if (o.pretty)
        std::cout << j.dump(2) << "\n";
    else
        std::cout << j.dump() << "\n";
}

// labels follow the user's input order, not the internal sorted order
std::vector<std::vector<std::uint32_t>> table_in_input_order(const bct::contingency_table& t) {
    const auto& m = t.source_margins();
    std::vector<std::vector<std::uint32_t>> out(m.m(), std::vector<std::uint32_t>(m.n(), 0));
    t.for_each_nonzero([&](std::size_t i, std::size_t j, std::uint32_t v) {
        out[m.row_input_pos(i)][m.col_input_pos(j)] = v;
    });
    return out;
}

void write_table_csv(std::ostream& os, const bct::contingency_table& t) {
    const auto grid = table_in_input_order(t);
    for (const auto& row : grid) {
        for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << row[j];
        os << "\n";
    }
}

void write_table_edges(std::ostream& os, const bct::contingency_table& t) {
    const auto& m = t.source_margins();
    std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> edges;
    t.for_each_nonzero([&](std::size_t i, std::size_t j, std::uint32_t v) {
        edges.emplace_back(m.row_input_pos(i), m.col_input_pos(j), v);
    });
    std::sort(edges.begin(), edges.end());
    for (const auto& [i, j, v] : edges) os << i << "," << j << "," << v << "\n";
}

json report_to_json(const bct::condition_report& rep) {
    json j;
    j["family"] = rep.family;
    j["grid"] = rep.grid;
    j["cond1_values"] = rep.cond1_values;
    j["cond1_exponent"] = rep.cond1_exponent;
    j["cond1_verdict"] = bct::to_string(rep.cond1);
    std::vector<std::string> classes;
    for (auto c : rep.index_class) classes.emplace_back(bct::to_string(c));
    j["index_class"] = classes;
    if (rep.kappa_beyond_cap)
        j["kappa"] = nullptr;
    else
        j["kappa"] = rep.kappa;
    j["kappa_beyond_cap"] = rep.kappa_beyond_cap;
    j["kappa_uncertain"] = rep.kappa_uncertain;
    j["tail_mass"] = rep.tail_mass;
    j["tail_limsup"] = rep.tail_limsup;
    j["tail_class"] = bct::to_string(rep.tail_class);
    j["c1_values"] = rep.c1_values;
    j["c1_limit"] = rep.c1_limit;
    if (rep.kappa_prime == 0)
        j["kappa_prime"] = nullptr;
    else
        j["kappa_prime"] = rep.kappa_prime;
    j["remark2_shortcut"] = rep.remark2_shortcut;
    j["role_swapped"] = rep.role_swapped;
    j["cond2_verdict"] = bct::to_string(rep.cond2);
    j["overall"] = bct::to_string(rep.overall);
    return j;
}

json estimate_to_json(const bct::count_estimate& est) {
    json j;
    j["p_hat"] = est.p_hat;
    j["ci_low"] = est.ci_low;
    j["ci_high"] = est.ci_high;
    j["log2_count"] = est.log2_count;
    if (est.count_rounded) j["count"] = est.count_rounded->str();
    j["samples_used"] = est.samples_used;
    j["accepted"] = est.accepted;
    if (est.epsilon > 0) j["epsilon"] = est.epsilon;
    j["delta"] = est.delta;
    j["seed"] = est.seed;
    return j;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"binary contingency tables via the configuration model"};
    app.require_subcommand(1);

    common_opts o;
    app.add_flag("--pretty", o.pretty, "indent JSON output");
    app.add_option("--manifest", o.manifest_path, "write the run manifest to a file");
    app.add_option("--threads", o.threads, "worker threads for sampling loops")
        ->default_val(1);
    app.add_flag("--strict", o.strict, "exit 5 on inconclusive verdicts");

    // --- sample ---------------------------------------------------------
    auto* sample = app.add_subcommand("sample", "draw exact uniform binary tables");
    std::uint64_t sample_count = 1, max_attempts = 1000;
    std::string format = "csv";
    add_margin_flags(sample, o);
    add_seed_flag(sample, o);
    sample->add_option("--count", sample_count, "number of tables to draw")->default_val(1);
    sample->add_option("--max-attempts", max_attempts, "rejection attempts per table")
        ->default_val(1000);
    sample->add_option("--format", format, "csv (dense) or edges (sparse i,j,count)")
        ->check(CLI::IsMember({"csv", "edges"}))
        ->default_val("csv");

    // --- count-exact ----------------------------------------------------
    auto* count_exact = app.add_subcommand("count-exact", "exact |Omega| by dynamic programming");
    std::uint64_t budget = 10'000'000;
    add_margin_flags(count_exact, o);
    count_exact->add_option("--budget", budget, "memo state budget")->default_val(10'000'000);

    // --- estimate ---------------------------------------------------------
    auto* estimate = app.add_subcommand("estimate", "FPRAS estimate of |Omega|");
    double eps = 0.1, delta = 0.05;
    std::uint64_t sample_cap = 10'000'000;
    add_margin_flags(estimate, o);
    add_seed_flag(estimate, o);
    estimate->add_option("--epsilon", eps, "relative precision")->default_val(0.1);
    estimate->add_option("--delta", delta, "failure probability")->default_val(0.05);
    estimate->add_option("--cap", sample_cap, "hard cap on total samples")
        ->default_val(10'000'000);

    // --- diagnose ---------------------------------------------------------
    auto* diagnose = app.add_subcommand("diagnose", "mu/lambda/gamma/I_L for one instance");
    double split_eps = 0.1;
    add_margin_flags(diagnose, o);
    diagnose->add_option("--epsilon", split_eps, "I_L split threshold")->default_val(0.1);

    // --- check-conditions ---------------------------------------------------
    auto* check = app.add_subcommand("check-conditions",
                                     "evaluate the optimality conditions on a family");
    std::string family_arg, csv_path;
    std::vector<double> grid_arg;
    bct::evaluate_options eval_opt;
    check->add_option("--family", family_arg, "built-in family name or JSON file")->required();
    check->add_option("--grid", grid_arg, "N values (e.g. 1e3 1e4 ... 1e7)");
    check->add_option("--theta", eval_opt.theta, "o(N) classification threshold")
        ->default_val(0.01);
    check->add_option("--growth-tol", eval_opt.growth_tol, "condition-1 exponent tolerance")
        ->default_val(0.1);
    check->add_option("--index-cap", eval_opt.index_cap, "per-index classification cap")
        ->default_val(64);
    check->add_option("--csv", csv_path, "also write per-grid-point data as CSV");

    // --- test-uniformity -----------------------------------------------------
    auto* uniflag = app.add_subcommand("test-uniformity",
                                       "chi-square test against the enumerated Omega");
    std::uint64_t uni_samples = 0, enum_limit = 100'000;
    add_margin_flags(uniflag, o);
    add_seed_flag(uniflag, o);
    uniflag->add_option("--samples", uni_samples, "accepted samples to draw")->required();
    uniflag->add_option("--limit", enum_limit, "max |Omega| to enumerate")->default_val(100'000);

    // --- property-transfer ---------------------------------------------------
    auto* ptrans = app.add_subcommand("property-transfer",
                                      "empirical contiguity bound for a graph property");
    std::string property = "connected";
    std::uint64_t pt_samples = 10'000;
    add_margin_flags(ptrans, o);
    add_seed_flag(ptrans, o);
    ptrans->add_option("--property", property,
                       "connected | has-giant-component | max-degree-le-K")
        ->default_val("connected");
    ptrans->add_option("--samples", pt_samples, "configuration draws")->default_val(10'000);

    // --- bench -----------------------------------------------------------
    auto* bench = app.add_subcommand("bench", "wall time of sample_pairing over a family");
    std::string bench_family = "unit-margins";
    std::vector<double> bench_grid{1e6, 1e7};
    unsigned reps = 5;
    std::string bench_csv;
    add_seed_flag(bench, o);
    bench->add_option("--family", bench_family, "built-in family name or JSON file")
        ->default_val("unit-margins");
    bench->add_option("--grid", bench_grid, "N values");
    bench->add_option("--reps", reps, "repetitions per N (median reported)")->default_val(5);
    bench->add_option("--csv", bench_csv, "also write per-N data as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? exit_ok : exit_usage;
    }

    resolve_seed(o);
    const auto t_start = std::chrono::steady_clock::now();
    int rc = exit_ok;

    try {
        if (sample->parsed()) {
            const bct::margins m = load_margins(o);
            if (format == "csv" &&
                static_cast<std::uint64_t>(m.m()) * m.n() > bct::contingency_table::dense_limit)
                throw bct::validation_error("table too large for csv output; use --format edges");
            bct::rng gen(o.seed);
            for (std::uint64_t s = 0; s < sample_count; ++s) {
                const auto res = bct::sample_binary_rejection(m, gen, max_attempts);
                if (!res.table) {
                    std::cerr << "rejection exhausted after " << res.attempts
                              << " attempts; mu(N) = " << bct::mu_stat(m)
                              << ", condition-1 statistic = " << bct::condition1_stat(m)
                              << " (large values mean the configuration model is the wrong tool"
                              << " for these margins)\n";
                    rc = exit_exhausted;
                    break;
                }
                std::cout << "# sample " << (s + 1) << " attempts=" << res.attempts << "\n";
                if (format == "csv")
                    write_table_csv(std::cout, *res.table);
                else
                    write_table_edges(std::cout, *res.table);
            }
        } else if (count_exact->parsed()) {
            const bct::margins m = load_margins(o);
            const auto res = bct::exact_count(m, budget);
            json j;
            j["count"] = res.count.str();
            j["acceptance_num"] = boost::multiprecision::numerator(res.acceptance).str();
            j["acceptance_den"] = boost::multiprecision::denominator(res.acceptance).str();
            j["acceptance"] = static_cast<double>(res.acceptance);
            j["dp_states"] = res.dp_states;
            print_json(j, o);
        } else if (estimate->parsed()) {
            const bct::margins m = load_margins(o);
            const auto est = bct::estimate_count(m, eps, delta, o.seed, o.threads, sample_cap);
            print_json(estimate_to_json(est), o);
        } else if (diagnose->parsed()) {
            const bct::margins m = load_margins(o);
            const auto d = bct::split_diagnostics(m, split_eps);
            json j;
            j["N"] = m.total();
            j["m"] = m.m();
            j["n"] = m.n();
            j["feasible"] = bct::gale_ryser_feasible(m);
            j["epsilon"] = d.epsilon;
            j["mu"] = d.mu;
            j["lambda"] = d.lambda;
            j["gamma"] = d.gamma;
            j["large_set_size"] = d.large_set_size;
            if (d.large_set_size <= 1000) {
                json entries = json::array();
                for (const auto& [i, jj] : d.entries()) entries.push_back({i, jj});
                j["large_set"] = entries;
            }
            j["condition1_stat"] = bct::condition1_stat(m);
            print_json(j, o);
        } else if (check->parsed()) {
            const auto fam = load_family_arg(family_arg, o);
            for (const double g : grid_arg)
                eval_opt.grid.push_back(static_cast<std::uint64_t>(g));
            const auto rep = bct::evaluate_family(fam, eval_opt);
            print_json(report_to_json(rep), o);
            if (!csv_path.empty()) {
                std::ofstream f(csv_path);
                f << "N,cond1_stat,tail_mass,c1\n";
                for (std::size_t k = 0; k < rep.grid.size(); ++k)
                    f << rep.grid[k] << "," << rep.cond1_values[k] << "," << rep.tail_mass[k]
                      << "," << rep.c1_values[k] << "\n";
            }
            if (o.strict && (rep.overall == bct::overall_verdict::inconclusive))
                rc = exit_inconclusive;
        } else if (uniflag->parsed()) {
            const bct::margins m = load_margins(o);
            const auto res = bct::uniformity_test(m, uni_samples, o.seed, enum_limit);
            json j;
            j["table_count"] = res.table_count;
            j["chi2"] = res.chi2;
            j["dof"] = res.dof;
            j["p_value"] = res.p_value;
            j["samples"] = res.samples;
            j["seed"] = res.seed;
            if (res.observed.size() <= 1000) j["observed"] = res.observed;
            print_json(j, o);
        } else if (ptrans->parsed()) {
            const bct::margins m = load_margins(o);
            std::uint32_t k = 0;
            const auto prop = bct::parse_graph_property(property);
            if (prop == bct::graph_property::max_degree_le_k)
                k = static_cast<std::uint32_t>(
                    std::strtoul(property.c_str() + std::string("max-degree-le-").size(),
                                 nullptr, 10));
            const auto res = bct::property_transfer(m, prop, pt_samples, o.seed, k);
            json j;
            j["property"] = property;
            j["p_config"] = res.p_config;
            j["p_uniform"] = res.p_uniform;
            j["rho"] = res.rho;
            j["bound_rhs"] = res.bound_rhs;
            j["se_combined"] = res.se_combined;
            j["bound_check"] = res.bound_check;
            j["samples"] = res.samples;
            j["accepted"] = res.accepted;
            j["seed"] = res.seed;
            print_json(j, o);
        } else if (bench->parsed()) {
            const auto fam = load_family_arg(bench_family, o);
            json out = json::array();
            std::ofstream csv;
            if (!bench_csv.empty()) {
                csv.open(bench_csv);
                csv << "N,median_ms\n";
            }
            for (const double g : bench_grid) {
                const auto N = static_cast<std::uint64_t>(g);
                const bct::margins m = fam.generate(N);
                bct::rng gen(o.seed);
                bct::token_pairing p;
                std::vector<double> times;
                for (unsigned rep = 0; rep < reps + 1; ++rep) {
                    const auto t0 = std::chrono::steady_clock::now();
                    bct::sample_pairing_into(m, gen, p);
                    const auto t1 = std::chrono::steady_clock::now();
                    if (p.perm.size() != N) throw bct::validation_error("bench: bad pairing");
                    if (rep == 0) continue;  // warm-up excluded
                    times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
                }
                const double med = median(times);
                json row;
                row["N"] = N;
                row["median_ms"] = med;
                row["times_ms"] = times;
                out.push_back(row);
                if (csv.is_open()) csv << N << "," << med << "\n";
            }
            print_json(out, o);
        }
    } catch (const bct::infeasible_margins_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        rc = exit_infeasible;
    } catch (const bct::budget_exceeded_error& e) {
        std::cerr << "error: " << e.what() << " (states=" << e.states_visited << ")\n";
        rc = exit_exhausted;
    } catch (const bct::acceptance_too_low_error& e) {
        std::cerr << "error: " << e.what() << " (p upper bound " << e.p_hat_upper << " after "
                  << e.samples_used << " samples)\n";
        rc = exit_exhausted;
    } catch (const bct::parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        rc = exit_validation;
    } catch (const bct::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        rc = exit_validation;
    } catch (const bct::instance_too_large_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        rc = exit_validation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        rc = exit_validation;
    }

    // every run emits a manifest; identical manifests (same version) imply
    // bit-identical stdout for the deterministic subcommands
    const double duration =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    json manifest;
    manifest["subcommand"] = app.get_subcommands().empty()
                                 ? std::string("")
                                 : app.get_subcommands().front()->get_name();
    std::vector<std::string> args(argv, argv + argc);
    manifest["argv"] = args;
    manifest["root_seed"] = o.seed;
    manifest["version"] = BCT_VERSION;
    manifest["duration_s"] = duration;
    json digests = json::object();
    for (const auto& [path, digest] : o.digests) {
        std::ostringstream hex;
        hex << "fnv1a64:" << std::hex << digest;
        digests[path] = hex.str();
    }
    manifest["input_digests"] = digests;
    manifest["exit_code"] = rc;
    if (!o.manifest_path.empty())
        std::ofstream(o.manifest_path) << manifest.dump() << "\n";
    else
        std::cerr << manifest.dump() << "\n";

    return rc;
}
