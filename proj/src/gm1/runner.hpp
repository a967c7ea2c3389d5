#pragma once
// Ensemble orchestration: flat-file configuration, deterministic per-run
// seed derivation, equilibrate -> signal-update pipelines, bounded-pool
// parallel ensembles, chi sweeps with the tanh crossover fit, and atomic
// persistence of all artifacts (CSV + JSON manifest).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gm1/garch.hpp"
#include "gm1/lattice.hpp"
#include "gm1/observables.hpp"

namespace gm1 {

struct RunConfig {
    int n = 782;                       // time slices
    double beta = 1.0;                 // gauge coupling
    double d_plus = 1.0;               // forward hop coupling
    double d_bar_plus = 1.0;           // reverse hop coupling
    double d_minus = 1.0;              // accepted but enters no action term
    double d_bar_minus = 1.0;
    double chi = 1e-3;                 // update-shift strength
    double rho = 1.0;                  // cash-rail interest factor
    long long heatbath_steps = 10000;  // equilibration sweeps
    long long signal_updates = 4000000;
    int ensemble_size = 1;
    std::uint64_t base_seed = 1;
    std::string output_dir = "out";
    double delta_r = 0.01;             // gains histogram bin width
    double delta_lambda = 1.0;         // avalanche histogram bin width
    double init_spread = 1.0;          // width of the random initial fields
    bool save_signal_trace = false;    // write per-step (s, V, j_s) CSV
    bool fit_garch = false;            // fit each run's return series
};

// Flat key=value file, '#' comments; keys mirror the RunConfig field names.
// Unknown keys are an error.
RunConfig load_config(const std::string& path);

// Same parser, applied on top of an existing config (preset layering).
void load_config_into(RunConfig& cfg, const std::string& path);

// Applies one key=value override (the CLI flag path shares the parser).
void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

void validate(const RunConfig& cfg);

Couplings couplings_of(const RunConfig& cfg);

// Worker-pool width: GM1_THREADS when set (> 0), else hardware concurrency,
// clamped to the number of tasks.
int resolve_threads(int tasks);

struct RunArtifacts {
    int run_index = 0;
    std::uint64_t seed = 0;
    std::vector<double> returns;  // final-configuration return series
    AvalancheRecord avalanches;
    double avg_link = 0.0;
    std::optional<GarchFit> garch;
};

// One full run (random start -> axis freeze -> equilibration -> signal
// updates), writing run_<idx>_returns.csv, run_<idx>_avalanches.csv,
// run_<idx>_snapshot.txt (and optionally run_<idx>_trace.csv) into
// cfg.output_dir. The run's generator is seeded from
// derive_seed(cfg.base_seed, run_index).
RunArtifacts run_single(const RunConfig& cfg, int run_index);

struct EnsembleResult {
    std::vector<RunArtifacts> runs;      // successful runs, run-index order
    std::vector<std::string> failures;   // "run <i>: <message>"
    Histogram gains;
    Histogram avalanche_sizes;
    double mean_L = 0.0;                 // mean of per-run avg_link
    double stderr_L = 0.0;               // ddof=1 standard error (0 for one run)
};

// Runs all ensemble members (parallel over a bounded pool), pools their
// statistics in run-index order, and writes gains_histogram.csv,
// avalanche_histogram.csv, manifest.json and (when cfg.fit_garch)
// garch_fits.jsonl. Failed runs are excluded and recorded in the manifest.
EnsembleResult run_ensemble(const RunConfig& cfg);

struct SweepResult {
    std::vector<ChiPoint> points;
    TanhFit fit;        // best-so-far when fit_ok is false
    bool fit_ok = false;
    std::string fit_message;
};

// One ensemble per chi value (sub-seeded, written to point_<p>_chi_<v>/),
// then the tanh crossover fit. Emits chi_sweep.csv and tanh_fit.json into
// cfg.output_dir; the table is written even if the fit fails.
SweepResult sweep_chi(const RunConfig& cfg, const std::vector<double>& chi_values);

// Shortest exact decimal for a double (%.17g).
std::string fmt17(double x);

// Write-then-rename so no output file is ever observed half-written.
void write_text_atomic(const std::string& path, const std::string& content);

void write_returns_csv(const std::string& path, const std::vector<double>& returns);
void write_histogram_csv(const std::string& path, const Histogram& h);
void write_avalanches_csv(const std::string& path, const AvalancheRecord& rec);
void write_chi_sweep_csv(const std::string& path, const std::vector<ChiPoint>& points);

std::vector<double> read_returns_csv(const std::string& path);
AvalancheRecord read_avalanches_csv(const std::string& path);

}  // namespace gm1
