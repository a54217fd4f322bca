#ifndef BILAYER_EXPERIMENT_HPP
#define BILAYER_EXPERIMENT_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "bilayer/pipeline.hpp"

namespace bilayer {

// Experiment description parsed from a JSON config file. Sweep axes default
// to the singleton values from `lattice` / `kinds`.
struct ExperimentConfig {
  LatticeSpec lattice;
  std::vector<ModelKind> kinds{ModelKind::FloquetEngineered};
  ModelOptions model;
  std::size_t trajectories = 500;
  std::uint64_t dtwa_seed = 1;
  TimeGrid grid;
  double dt = 0.0;
  double dt_safety = 0.02;
  double energy_tol = 1e-8;
  double sz_tol = 1e-8;
  double norm_tol = 1e-10;
  int threads = 0;
  int realizations = 1;
  std::uint64_t disorder_seed = 2;
  // sweep axes (empty = use the base value)
  std::vector<int> sweep_sides;
  std::vector<double> sweep_alpha;
  std::vector<double> sweep_a_z;
  std::vector<double> sweep_filling;
  OracleKind oracle = OracleKind::Auto;
  int tms_n = 0;           // oracle kind tms: explicit N
  double tms_v_avg = 1.0;  // and V_avg
  std::string out_dir = "out";
  std::string prefix = "series";

  void validate() const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& file);
std::string serialize_config(const ExperimentConfig& config);

// Point in a sweep, with the file its series was written to.
struct PointRecord {
  ModelKind kind;
  int side;
  double alpha, a_z, filling;
  std::filesystem::path file;
  ObservableSeries series;
};

// run: execute the pipeline over the cartesian product of the sweep axes and
// write one CSV per (model, parameter point) plus a manifest.
std::vector<PointRecord> run_experiment(const ExperimentConfig& config);

// sweep: run + summary JSON with minima, scaling fits per model (over the L
// axis) and collapse metrics over the filling axis.
std::filesystem::path sweep_experiment(const ExperimentConfig& config);

// oracle: exact series in the same schema plus a dTWA comparison report.
std::filesystem::path oracle_experiment(const ExperimentConfig& config);

// fit: read a sweep summary and refit the size scaling.
std::string fit_summary(const std::filesystem::path& summary_file);

// CSV schema (one row per sample time):
// t,tau,npair,npair_err,var_minus,var_minus_err,var_plus,var_plus_err,
// spinlen,spinlen_err,saz,sbz
void write_series_csv(const std::filesystem::path& file, const ObservableSeries& series);
ObservableSeries read_series_csv(const std::filesystem::path& file);

}  // namespace bilayer

#endif
