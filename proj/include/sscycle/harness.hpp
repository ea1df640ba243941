#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sscycle/field.hpp"

namespace sscycle {

enum class Schedule { ConstantP, LogLambda, Table };
enum class InitKind { Point, Uniform };
enum class ModelKind { SS, ARW, Coupled };

// Declarative Monte Carlo sweep description.
struct ExperimentSpec {
    std::vector<int> n_grid;
    Schedule schedule = Schedule::ConstantP;
    double p_const = 0.5;             // ConstantP only
    std::map<int, double> p_table;    // Table only: n -> p
    int trials = 200;
    std::uint64_t master_seed = 1;
    InitKind init = InitKind::Point;
    ModelKind model = ModelKind::SS;
    std::uint64_t cap_factor = 64;    // cap = cap_factor * n^3 topplings

    double lazy_parameter(int n) const;  // p for this n; 0 < p < 1 enforced
    void validate() const;
};

struct RunRecord {
    int n = 0;
    std::string schedule;
    double p = 0.0;
    double lambda = 0.0;
    int trial = 0;
    std::uint64_t seed = 0;
    std::uint64_t topplings = 0;  // T: topplings to stabilization
    bool capped = false;
};

std::string schedule_name(Schedule s);
Schedule schedule_from_name(const std::string& name);

// Deterministic per-trial seed: a pure function of (master_seed, n, trial),
// so results are independent of worker count and scheduling order.
std::uint64_t derive_trial_seed(std::uint64_t master_seed, int n, int trial);

// Initial configuration for one trial; Uniform places each particle on an
// independently uniform site drawn from the trial seed.
SandpileConfig initial_config(InitKind init, int n, std::uint64_t trial_seed);

// Runs every (n, trial) pair of the sweep; capped runs are flagged per
// record rather than failing the sweep. workers <= 0 selects the hardware
// concurrency.
std::vector<RunRecord> run_experiment(const ExperimentSpec& spec, int workers = 0);

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

// Ordinary least squares on (ln n, ln mean-T) over the records' distinct n;
// capped records are excluded from the means. Requires >= 3 grid points
// with at least one uncapped record each.
FitResult fit_loglog(const std::vector<RunRecord>& records);

// CSV with the exact header n,schedule,p,lambda,trial,seed,T,capped.
std::string records_to_csv(const std::vector<RunRecord>& records);
std::vector<RunRecord> records_from_csv(const std::string& csv);
void write_csv_file(const std::string& path, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_csv_file(const std::string& path);

// Log-log scatter of per-n mean T with fitted lines, one series (schedule)
// per color, slopes annotated.
struct PlotSeries {
    std::string name;
    std::string color;
    std::vector<std::pair<double, double>> points;  // (n, mean T)
    FitResult fit;
};
std::string render_svg(const std::vector<PlotSeries>& series);
void write_svg_file(const std::string& path, const std::vector<PlotSeries>& series);

// Groups records by schedule and builds one plot series per group.
std::vector<PlotSeries> build_plot_series(const std::vector<RunRecord>& records);

// Corollary-style fast-phase proxy: log(n) * (1 - p(n)); values >= 2 on the
// grid suggest slow-phase behavior and likely capped runs.
double slow_phase_proxy(int n, double p);

}  // namespace sscycle
