// solar_cli: fit, analyze-group, prox and verify front end.
#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <solar/io.hpp>
#include <solar/solar.hpp>

using namespace solar;
using io::json;

namespace {

enum Exit : int { ok = 0, io_error = 1, refusal = 2, boundary = 3, verify_failed = 4 };

struct Common
{
    std::string penalty;
    std::vector<double> lambdas;
    std::string edges;
    std::string output;
    long n = 0;
    std::size_t cap = 100000;
};

struct FitArgs
{
    std::string data;
    std::string family = "gaussian";
    std::string method = "auto";
    std::string trace;
    std::string sweep_order = "cyclic";
    unsigned long long seed = 0;
};

struct VerifyArgs
{
    std::vector<unsigned long long> seeds{1, 2, 3};
    double inject = 0.0;
    std::string data;
    std::size_t trials = 50;
};

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw io::IoError("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// --penalty is inline JSON, a JSON file, or a kind name.
PenaltySpec resolve_penalty(const Common& c, std::optional<Index> data_n)
{
    json j;
    const auto first = c.penalty.find_first_not_of(" \t\n");
    if (first != std::string::npos && c.penalty[first] == '{') {
        try {
            j = json::parse(c.penalty);
        } catch (const json::exception& e) {
            throw io::IoError(std::string("--penalty: ") + e.what());
        }
    } else if (std::filesystem::is_regular_file(c.penalty)) {
        try {
            j = json::parse(slurp(c.penalty));
        } catch (const json::exception& e) {
            throw io::IoError(c.penalty + ": " + e.what());
        }
    } else {
        j = {{"kind", c.penalty}};
    }
    if (!j.is_object()) throw io::IoError("--penalty must be a JSON object or a kind name");

    Index n = c.n > 0 ? static_cast<Index>(c.n) : 0;
    if (data_n) {
        if (n > 0 && n != *data_n) throw DimensionMismatch("--n vs data", n, *data_n);
        n = *data_n;
    }
    if (j.contains("n")) {
        if (n > 0 && j["n"].get<Index>() != n) throw DimensionMismatch("penalty n vs data", j["n"].get<Index>(), n);
    } else {
        if (n <= 0) throw io::IoError("the penalty dimension is unknown; pass --n or --data");
        j["n"] = n;
    }
    if (!c.lambdas.empty()) j["lambda"] = c.lambdas;

    PenaltySpec spec = io::penalty_spec_from_json(j);
    if (!c.edges.empty()) spec.edges = io::read_edges_csv(c.edges);
    return spec;
}

void emit(const json& j, const std::string& output)
{
    const std::string text = j.dump(2) + "\n";
    if (output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(output, std::ios::binary);
    if (!out) throw io::IoError("cannot write '" + output + "'");
    out << text;
}

int cmd_fit(const Common& c, const FitArgs& a)
{
    const Vector x = io::read_signal_csv(a.data);
    const PenaltySpec spec = resolve_penalty(c, x.size());
    const auto family = GeneratorFamily::from_name(a.family);

    FitOptions opts;
    opts.method = parse_fit_method(a.method);
    opts.group_cap = c.cap;
    if (a.sweep_order == "shuffled") opts.solve.sweep_order = SweepOrder::cyclic_shuffled_once;
    else if (a.sweep_order != "cyclic") throw Error("--sweep-order must be cyclic or shuffled");
    opts.solve.shuffle_seed = a.seed;
    const bool tracing = !a.trace.empty();
    if (tracing) {
        if (opts.method == FitMethod::automatic) opts.method = FitMethod::dual_cd;
        if (opts.method != FitMethod::dual_cd) throw Error("--trace requires the dual-cd method");
    }

    FitReport rep;
    try {
        rep = fit(family, spec, x, opts, tracing);
    } catch (const InvarianceRefusal& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return refusal;
    }
    if (tracing) {
        std::ofstream t(a.trace, std::ios::binary);
        if (!t) throw io::IoError("cannot write '" + a.trace + "'");
        write_trace_csv(t, rep.trace);
    }
    json j = io::to_json(rep);
    j["seed"] = a.seed;
    emit(j, c.output);
    if (!rep.t) {
        std::cerr << "boundary: the least-squares fit leaves the " << family.name() << " mean domain\n";
        return boundary;
    }
    return ok;
}

int cmd_analyze_group(const Common& c)
{
    const PenaltySpec spec = resolve_penalty(c, std::nullopt);
    const auto rep = generate_group(build_penalty(spec), c.cap);
    json j;
    j["penalty"] = io::to_json(spec);
    j["group"] = io::to_json(rep);
    emit(j, c.output);
    return ok;
}

int cmd_prox(const Common& c, const FitArgs& a)
{
    const Vector x = io::read_signal_csv(a.data);
    const PenaltySpec spec = resolve_penalty(c, x.size());
    FitOptions opts;
    opts.method = parse_fit_method(a.method);
    FitReport scratch;
    const Vector u = least_squares_fit(spec, build_penalty(spec), x, opts, scratch);
    emit(io::vector_json(u), c.output);
    return ok;
}

/// Reduction checks on user data: every applicable family against the direct solver.
json data_checks(const Common& c, const VerifyArgs& v)
{
    const Vector x = io::read_signal_csv(v.data);
    const PenaltySpec spec = resolve_penalty(c, x.size());
    const SolarBase base = build_penalty(spec);
    const GroupReport group = generate_group(base, c.cap);
    json checks = json::array();

    const Vector u = solve_min_norm(x, base, detail::tight_solve()).fit;
    if (group.is_finite()) {
        const bool pass = gminimal_sample_check(base, group, x, u, v.trials);
        checks.push_back({{"name", "g-minimality-sampling"}, {"passed", pass},
                          {"detail", std::to_string(v.trials) + " sampled dual-feasible points"}});
    }
    for (const char* name : {"gaussian", "bernoulli", "poisson", "spherical-power"}) {
        const auto family = GeneratorFamily::from_name(name);
        if (!check_invariance(family, group) || !family.boundary_coordinates(u).empty()) continue;
        const Vector t = reduce(family, u);
        const auto direct = oracle_solve(family, base, x);
        const double diff = (t - direct.theta).lpNorm<Eigen::Infinity>();
        const double gap = composite_objective(family, base, x, t) - composite_objective(family, base, x, direct.theta);
        const bool pass = diff <= 1e-4 && gap <= 1e-6;
        char buf[160];
        std::snprintf(buf, sizeof buf, "max |T(x) - direct| = %.3e, objective gap = %.3e", diff, gap);
        checks.push_back({{"name", std::string("reduction-") + name}, {"passed", pass}, {"detail", buf}});
    }
    return checks;
}

int cmd_verify(const Common& c, const VerifyArgs& v)
{
    json data;
    if (!v.data.empty()) data = data_checks(c, v);

    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SOLAR_OPT_THREADS")) {
        try {
            threads = static_cast<unsigned>(std::max(1L, std::stol(env)));
        } catch (const std::exception&) {
            throw io::IoError("SOLAR_OPT_THREADS must be a positive integer");
        }
    }
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(v.seeds.size(), 1)));

    SuiteOptions so;
    so.inject_perturbation = v.inject;
    std::vector<SuiteReport> reports(v.seeds.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < v.seeds.size(); i = next++) reports[i] = lemma_suite(v.seeds[i], so);
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    bool passed = true;
    json suites = json::array();
    for (const auto& r : reports) {
        passed = passed && r.passed();
        suites.push_back(io::to_json(r));
    }
    json j;
    j["suites"] = suites;
    if (!data.is_null()) {
        j["data_checks"] = data;
        for (const auto& ch : data) passed = passed && ch["passed"].get<bool>();
    }
    j["passed"] = passed;
    emit(j, c.output);
    return passed ? ok : verify_failed;
}

void add_penalty_options(CLI::App* sub, Common& c, bool penalty_required = true)
{
    auto* p = sub->add_option("--penalty", c.penalty, "penalty kind name, JSON file, or inline JSON");
    if (penalty_required) p->required();
    sub->add_option("--lambda", c.lambdas, "penalty level(s); one value or one per summand");
    sub->add_option("--edges", c.edges, "two-column CSV of 1-based edges for graph penalties");
    sub->add_option("--n", c.n, "dimension when there is no data file");
    sub->add_option("--cap", c.cap, "maximum group order to enumerate");
    sub->add_option("-o,--output", c.output, "write JSON here instead of stdout");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Solar-penalized estimation: fits, reflection groups and verification"};
    app.require_subcommand(1);

    Common common;
    FitArgs fa;
    VerifyArgs va;

    auto* fit_cmd = app.add_subcommand("fit", "fit an estimator through the least-squares reduction");
    add_penalty_options(fit_cmd, common);
    fit_cmd->add_option("--data", fa.data, "headerless single-column CSV signal")->required();
    fit_cmd->add_option("--family", fa.family, "gaussian, bernoulli, poisson or spherical-power");
    fit_cmd->add_option("--method", fa.method, "auto, taut-string, pava, soft-threshold or dual-cd");
    fit_cmd->add_option("--trace", fa.trace, "write per-update dual solver trace CSV here");
    fit_cmd->add_option("--sweep-order", fa.sweep_order, "cyclic or shuffled");
    fit_cmd->add_option("--seed", fa.seed, "seed for the shuffled sweep order");

    auto* group_cmd = app.add_subcommand("analyze-group", "identify the reflection group of a penalty");
    add_penalty_options(group_cmd, common);

    auto* prox_cmd = app.add_subcommand("prox", "penalized least-squares fit (prox of the penalty)");
    add_penalty_options(prox_cmd, common);
    prox_cmd->add_option("--data", fa.data, "headerless single-column CSV signal")->required();
    prox_cmd->add_option("--method", fa.method, "auto, taut-string, pava, soft-threshold or dual-cd");

    auto* verify_cmd = app.add_subcommand("verify", "run the property suites");
    add_penalty_options(verify_cmd, common, false);
    verify_cmd->add_option("--seeds", va.seeds, "suite seeds");
    verify_cmd->add_option("--seed", va.seeds, "alias of --seeds");
    verify_cmd->add_option("--inject-perturbation", va.inject, "perturb U(x) by this amount (harness check)");
    verify_cmd->add_option("--data", va.data, "also check the reduction on this signal (needs --penalty)");
    verify_cmd->add_option("--trials", va.trials, "sampled points for the minimality check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : io_error;
    }

    try {
        if (fit_cmd->parsed()) return cmd_fit(common, fa);
        if (group_cmd->parsed()) return cmd_analyze_group(common);
        if (prox_cmd->parsed()) return cmd_prox(common, fa);
        if (verify_cmd->parsed()) {
            if (!va.data.empty() && common.penalty.empty()) throw Error("verify --data needs --penalty");
            return cmd_verify(common, va);
        }
    } catch (const BoundarySolution& e) {
        std::cerr << "boundary: " << e.what() << "\n";
        return boundary;
    } catch (const InvarianceRefusal& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return refusal;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return io_error;
    }
    return io_error;
}
