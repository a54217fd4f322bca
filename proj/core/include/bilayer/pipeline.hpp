#ifndef BILAYER_PIPELINE_HPP
#define BILAYER_PIPELINE_HPP

#include "bilayer/analysis.hpp"
#include "bilayer/collective.hpp"

namespace bilayer {

// Output grid: either explicit times or a uniform grid in tau = N V_avg t.
struct TimeGrid {
  std::vector<double> times;  // explicit, if non-empty
  double tau_max = 0;
  int tau_points = 0;

  bool is_tau() const { return times.empty(); }
  void validate() const;
  std::vector<double> resolve(double n_v_avg) const;
};

// One parameter point of the lattice -> model -> dTWA -> analysis pipeline.
struct RunSpec {
  LatticeSpec lattice;
  ModelKind kind = ModelKind::FloquetEngineered;
  ModelOptions model;
  std::size_t trajectories = 500;
  std::uint64_t dtwa_seed = 1;
  TimeGrid grid;
  IntegratorConfig integrator;  // sample_times filled from grid
};

struct RunResult {
  ObservableSeries series;
  double v_avg = 0, stagger_h = 0;
  std::size_t n_occ = 0;
  double dt = 0;
};

RunResult run_point(const RunSpec& spec);

// Full pipeline per occupancy realization, averaged with
// realization-to-realization standard errors. V_avg is recomputed per
// realization; the time grid is shared (resolved with the mean V_avg).
// At unit filling this is a single run regardless of n_realizations.
ObservableSeries disorder_average(const RunSpec& spec, int n_realizations,
                                  std::uint64_t disorder_seed);

// Exact reference for the same parameter point: collective ED when alpha = 0,
// brute force when the occupied system is small enough.
enum class OracleKind { Auto, Collective, BruteForce, Tms };
ObservableSeries oracle_series(const RunSpec& spec, OracleKind kind);

}  // namespace bilayer

#endif
