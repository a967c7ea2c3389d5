// Command-line driver: single runs, ensembles, chi sweeps, and offline
// re-analysis / GARCH fitting of stored run artifacts.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gm1/garch.hpp"
#include "gm1/observables.hpp"
#include "gm1/runner.hpp"

namespace fs = std::filesystem;
using namespace gm1;

namespace {

struct Overrides {
    std::string config;
    bool paper = false;
    int n = 0;
    double chi = 0.0;
    std::uint64_t seed = 0;
    int runs = 0;
    long long heatbath_steps = 0;
    long long signal_updates = 0;
    double beta = 0.0;
    double rho = 0.0;
    double init_spread = 0.0;
    double delta_r = 0.0;
    double delta_lambda = 0.0;
    std::string out;
    bool save_trace = false;
    bool garch = false;
};

void add_common(CLI::App* sub, Overrides& o) {
    sub->add_option("--config", o.config, "flat key=value config file")
        ->check(CLI::ExistingFile);
    sub->add_flag("--paper-scale", o.paper,
                  "start from the full-scale protocol "
                  "(n=782, 10^4 sweeps, 4x10^6 updates, 2400 runs)");
    sub->add_option("--n", o.n, "time slices");
    sub->add_option("--chi", o.chi, "update-shift strength");
    sub->add_option("--seed", o.seed, "base seed");
    sub->add_option("--runs", o.runs, "ensemble size");
    sub->add_option("--heatbath-steps", o.heatbath_steps, "equilibration sweeps");
    sub->add_option("--signal-updates", o.signal_updates, "extremal update steps");
    sub->add_option("--beta", o.beta, "gauge coupling");
    sub->add_option("--rho", o.rho, "cash interest factor");
    sub->add_option("--init-spread", o.init_spread, "random start width");
    sub->add_option("--delta-r", o.delta_r, "gains histogram bin width");
    sub->add_option("--delta-lambda", o.delta_lambda, "avalanche histogram bin width");
    sub->add_option("--out", o.out, "output directory");
    sub->add_flag("--save-trace", o.save_trace, "write per-step signal trace CSV");
    sub->add_flag("--fit-garch", o.garch, "fit GARCH(1,1) to each run's returns");
}

// Precedence: defaults < --paper-scale < --config < explicit flags.
RunConfig resolve_config(CLI::App* sub, const Overrides& o) {
    RunConfig cfg;
    if (o.paper) {
        cfg.n = 782;
        cfg.beta = 1.0;
        cfg.heatbath_steps = 10000;
        cfg.signal_updates = 4000000;
        cfg.ensemble_size = 2400;
    }
    if (sub->count("--config")) load_config_into(cfg, o.config);
    if (sub->count("--n")) cfg.n = o.n;
    if (sub->count("--chi")) cfg.chi = o.chi;
    if (sub->count("--seed")) cfg.base_seed = o.seed;
    if (sub->count("--runs")) cfg.ensemble_size = o.runs;
    if (sub->count("--heatbath-steps")) cfg.heatbath_steps = o.heatbath_steps;
    if (sub->count("--signal-updates")) cfg.signal_updates = o.signal_updates;
    if (sub->count("--beta")) cfg.beta = o.beta;
    if (sub->count("--rho")) cfg.rho = o.rho;
    if (sub->count("--init-spread")) cfg.init_spread = o.init_spread;
    if (sub->count("--delta-r")) cfg.delta_r = o.delta_r;
    if (sub->count("--delta-lambda")) cfg.delta_lambda = o.delta_lambda;
    if (sub->count("--out")) cfg.output_dir = o.out;
    if (o.save_trace) cfg.save_signal_trace = true;
    if (o.garch) cfg.fit_garch = true;
    validate(cfg);
    return cfg;
}

std::vector<double> parse_chi_list(const std::string& list) {
    std::vector<double> vals;
    std::size_t start = 0;
    while (start <= list.size()) {
        const auto comma = list.find(',', start);
        const std::string tok = comma == std::string::npos
                                    ? list.substr(start)
                                    : list.substr(start, comma - start);
        if (!tok.empty()) {
            std::size_t pos = 0;
            const double v = std::stod(tok, &pos);
            if (pos != tok.size()) throw std::runtime_error("bad chi value: '" + tok + "'");
            vals.push_back(v);
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return vals;
}

// run_<idx:4digits><suffix> files in a directory, sorted by index.
std::vector<std::pair<int, std::string>> find_runs(const std::string& dir,
                                                   const std::string& suffix) {
    std::vector<std::pair<int, std::string>> out;
    for (const auto& ent : fs::directory_iterator(dir)) {
        if (!ent.is_regular_file()) continue;
        const std::string name = ent.path().filename().string();
        if (name.size() != 8 + suffix.size() || name.rfind("run_", 0) != 0 ||
            name.substr(8) != suffix)
            continue;
        const std::string digits = name.substr(4, 4);
        if (digits.find_first_not_of("0123456789") != std::string::npos) continue;
        out.emplace_back(std::stoi(digits), ent.path().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

int cmd_analyze(const std::string& in_dir, std::string out_dir, double delta_r,
                double delta_lambda) {
    if (out_dir.empty()) out_dir = in_dir;
    fs::create_directories(out_dir);
    const auto returns_files = find_runs(in_dir, "_returns.csv");
    if (returns_files.empty())
        throw std::runtime_error("no run_*_returns.csv files in " + in_dir);

    std::vector<std::vector<double>> series;
    std::vector<AvalancheRecord> records;
    std::vector<double> links;
    for (const auto& [idx, path] : returns_files) {
        series.push_back(read_returns_csv(path));
        links.push_back(lattice_avg_link(series.back()));
        char tag[24];
        std::snprintf(tag, sizeof tag, "run_%04d_avalanches.csv", idx);
        const fs::path av = fs::path(in_dir) / tag;
        if (fs::exists(av)) records.push_back(read_avalanches_csv(av.string()));
    }
    const Histogram gains = gains_histogram(series, delta_r);
    write_histogram_csv((fs::path(out_dir) / "gains_histogram.csv").string(), gains);
    if (!records.empty()) {
        const Histogram av = avalanche_histogram(records, delta_lambda);
        write_histogram_csv((fs::path(out_dir) / "avalanche_histogram.csv").string(), av);
    }
    const double mean_L = mean(links);
    const double err =
        links.size() >= 2 ? std::sqrt(sample_variance(links) / links.size()) : 0.0;
    nlohmann::json summary = {{"runs", static_cast<int>(series.size())},
                              {"mean_L", mean_L},
                              {"stderr_L", err},
                              {"delta_r", delta_r},
                              {"delta_lambda", delta_lambda}};
    write_text_atomic((fs::path(out_dir) / "analysis.json").string(),
                      summary.dump(2) + "\n");
    std::printf("analyzed %zu runs: mean_L=%.6g stderr=%.6g\n", series.size(), mean_L, err);
    return 0;
}

int cmd_garch_fit(const std::string& in_dir, std::string out_dir,
                  std::optional<double> chi_flag) {
    if (out_dir.empty()) out_dir = in_dir;
    fs::create_directories(out_dir);
    const auto returns_files = find_runs(in_dir, "_returns.csv");
    if (returns_files.empty())
        throw std::runtime_error("no run_*_returns.csv files in " + in_dir);

    double chi = chi_flag.value_or(0.0);
    if (!chi_flag) {
        const fs::path manifest = fs::path(in_dir) / "manifest.json";
        if (fs::exists(manifest)) {
            std::ifstream in(manifest);
            nlohmann::json m;
            in >> m;
            if (m.contains("config") && m["config"].contains("chi"))
                chi = m["config"]["chi"].get<double>();
        }
    }

    std::string jsonl;
    int fitted = 0, converged = 0;
    for (const auto& [idx, path] : returns_files) {
        GarchFit fit;
        try {
            fit = fit_garch(read_returns_csv(path));
        } catch (const std::exception& e) {
            // Same policy as ensemble runs: an unfittable series (too short,
            // degenerate variance) is skipped, not fatal for the batch.
            std::fprintf(stderr, "  run %d skipped: %s\n", idx, e.what());
            continue;
        }
        ++fitted;
        converged += fit.converged ? 1 : 0;
        nlohmann::json rec = {{"run", idx},          {"chi", chi},
                              {"alpha0", fit.alpha0}, {"alpha1", fit.alpha1},
                              {"beta1", fit.beta1},   {"loglik", fit.loglik},
                              {"converged", fit.converged}};
        jsonl += rec.dump();
        jsonl += '\n';
    }
    write_text_atomic((fs::path(out_dir) / "garch_fits.jsonl").string(), jsonl);
    std::printf("fitted %d/%zu series (%d converged) -> %s/garch_fits.jsonl\n", fitted,
                returns_files.size(), converged, out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gm1: lattice gauge market simulator"};
    app.require_subcommand(1);
    Overrides o;

    auto* sim = app.add_subcommand("simulate", "one full run (equilibrate + signal updates)");
    int run_index = 0;
    sim->add_option("--run-index", run_index, "run index for seed derivation");
    add_common(sim, o);

    auto* ens = app.add_subcommand("ensemble", "independent runs pooled into ensemble statistics");
    add_common(ens, o);

    auto* sweep = app.add_subcommand("sweep-chi", "one ensemble per chi value plus tanh crossover fit");
    std::string chi_list = "1e-6,1e-5,1e-4,1e-3,1e-2,1e-1,1,10";
    sweep->add_option("--chi-values", chi_list, "comma-separated chi values");
    add_common(sweep, o);

    auto* ana = app.add_subcommand("analyze", "recompute pooled statistics from stored runs");
    std::string in_dir, out_dir;
    double a_delta_r = 0.01, a_delta_lambda = 1.0;
    ana->add_option("--in", in_dir, "directory with run_* artifacts")->required();
    ana->add_option("--out", out_dir, "output directory (default: --in)");
    ana->add_option("--delta-r", a_delta_r, "gains histogram bin width");
    ana->add_option("--delta-lambda", a_delta_lambda, "avalanche histogram bin width");

    auto* gf = app.add_subcommand("garch-fit", "fit GARCH(1,1) to stored return series");
    std::string g_in, g_out;
    double g_chi = 0.0;
    gf->add_option("--in", g_in, "directory with run_*_returns.csv")->required();
    gf->add_option("--out", g_out, "output directory (default: --in)");
    gf->add_option("--chi", g_chi, "chi recorded in the JSONL (default: from manifest)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            const RunConfig cfg = resolve_config(sim, o);
            const RunArtifacts art = run_single(cfg, run_index);
            std::printf("run %d: seed=%llu avg_link=%.6g avalanches=%zu -> %s\n", run_index,
                        static_cast<unsigned long long>(art.seed), art.avg_link,
                        art.avalanches.lambda.size(), cfg.output_dir.c_str());
        } else if (ens->parsed()) {
            const RunConfig cfg = resolve_config(ens, o);
            const EnsembleResult res = run_ensemble(cfg);
            std::printf("ensemble: %zu/%d runs ok, mean_L=%.6g stderr=%.6g -> %s\n",
                        res.runs.size(), cfg.ensemble_size, res.mean_L, res.stderr_L,
                        cfg.output_dir.c_str());
            for (const std::string& f : res.failures) std::fprintf(stderr, "  %s\n", f.c_str());
        } else if (sweep->parsed()) {
            const RunConfig cfg = resolve_config(sweep, o);
            const SweepResult res = sweep_chi(cfg, parse_chi_list(chi_list));
            for (const ChiPoint& p : res.points)
                std::printf("chi=%-10.4g mean_L=%.6g stderr=%.6g\n", p.chi, p.mean_L, p.err);
            std::printf(
                "tanh fit%s: a=(%.6g, %.6g, %.6g, %.6g) chi*=%.6g plateaus=(%.6g, %.6g)\n",
                res.fit_ok ? "" : " (NOT converged)", res.fit.a1, res.fit.a2, res.fit.a3,
                res.fit.a4, std::pow(10.0, res.fit.a3), res.fit.a4 + res.fit.a1,
                res.fit.a4 - res.fit.a1);
        } else if (ana->parsed()) {
            return cmd_analyze(in_dir, out_dir, a_delta_r, a_delta_lambda);
        } else if (gf->parsed()) {
            std::optional<double> chi_flag;
            if (gf->count("--chi")) chi_flag = g_chi;
            return cmd_garch_fit(g_in, g_out, chi_flag);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
