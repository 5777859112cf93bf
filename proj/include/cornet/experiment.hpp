#pragma once
#include <map>
#include <optional>
#include <string>

#include "cornet/baselines.hpp"
#include "cornet/cornet.hpp"
#include "cornet/datagen.hpp"

namespace cornet {

struct EstimatorOptions {
    double avg_lambda = 0.5;
    double weight_lambda_cap = 1.0;  // Lambda for tau_weight
    PropensitySpec kallus_propensity;
    double kallus_ridge_scale = 1e-2;
};

/// Declarative sweep over one scenario. Sweep dimensions take their values
/// from named lists; unswept parameters come from the base config. The grid
/// is the cartesian product in a fixed canonical key order, so grid indices
/// (and with them all derived seeds) do not depend on config file layout.
struct ExperimentSpec {
    DgpConfig base;
    std::optional<double> delta_target;  // calibrate beta to this bias per cell
    std::vector<std::pair<std::string, Vec>> sweep;
    std::vector<std::string> estimators;
    int reps = 10;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    int parallelism = 1;
    bool timing = true;  // off: wall_ms written as 0 for byte-stable output
    std::size_t test_rows = 2000;
    EstimatorOptions opts;
    NetArch arch;
    TrainControls train;

    void validate() const;
};

struct RawRow {
    std::string scenario;
    std::string grid_key;
    std::string grid_value;
    std::string estimator;
    int rep = 0;
    std::uint64_t seed = 0;
    double sqrt_pehe = 0.0;  // NaN on failure
    double wall_ms = 0.0;
    std::string error;
};

struct RunRecord {
    std::string spec_hash;
    std::vector<RawRow> rows;
};

struct AggregateRow {
    std::string scenario, grid_key, grid_value, estimator;
    double mean_sqrt_pehe = 0.0;
    double sd_sqrt_pehe = 0.0;  // sample sd, ddof = 1
    int n_reps = 0;
};

const std::vector<std::string>& known_estimators();

/// Run every (grid point, estimator, rep) cell, write raw.csv and
/// aggregate.csv under spec.out_dir, and return the raw rows (canonically
/// sorted). Cell seeds are pure functions of (spec.seed, grid index, rep);
/// parallelism changes wall time only. Failed cells record NaN plus an error
/// string and never abort the sweep.
RunRecord run_experiment(const ExperimentSpec& spec);

std::vector<AggregateRow> aggregate_rows(const std::vector<RawRow>& rows);
std::vector<RawRow> read_raw_csv(const std::string& path);
void write_raw_csv(const std::vector<RawRow>& rows, const std::string& path);
void write_aggregate_csv(const std::vector<AggregateRow>& rows, const std::string& path);

/// Flat key=value config with [section] headers; see configs/ for examples.
ExperimentSpec load_experiment_config(const std::string& path);
DgpConfig load_dgp_config(const std::string& path);

/// Fit one registered estimator on already-generated data and return its
/// CATE predictor (shared by the runner and the fit subcommand).
CateFn fit_estimator(const std::string& name, const CombinedData& data, const ExperimentSpec& spec, Rng& rng,
                     const std::string& model_out_path = "");

}  // namespace cornet
