#ifndef BILAYER_ANALYSIS_HPP
#define BILAYER_ANALYSIS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bilayer/dtwa.hpp"

namespace bilayer {

struct ObservablePoint {
  double t = 0, tau = 0;
  double n_pair = 0, n_pair_err = 0;
  double var_minus = 0, var_minus_err = 0;  // mean of the two squeezed variants
  double var_plus = 0, var_plus_err = 0;
  // individual quadrature variants: 1 = (S_A^x + S_B^y), 2 = (S_A^y - S_B^x)
  // and their anti-squeezed partners 1 = (S_A^x - S_B^y), 2 = (S_A^y + S_B^x)
  double var_minus_1 = 0, var_minus_1_err = 0;
  double var_minus_2 = 0, var_minus_2_err = 0;
  double var_plus_1 = 0, var_plus_1_err = 0;
  double var_plus_2 = 0, var_plus_2_err = 0;
  double spin_length = 0, spin_length_err = 0;  // <S_A^2 + S_B^2>
  double s_a_z = 0, s_b_z = 0;
};

struct SeriesMeta {
  ModelKind kind = ModelKind::RawXXZ;
  int side = 0;
  double a_lat = 1, a_z = 1, alpha = 0, filling = 1;
  std::size_t n_occ = 0;  // occupied sites per layer
  double v_avg = 0, stagger_h = 0;
  std::size_t trajectories = 0;
  std::uint64_t lattice_seed = 0, dtwa_seed = 0;
  int realizations = 1;
  double dt = 0;
  bool exact = false;  // true for oracle series (errors are zero)
  std::string label;
};

struct ObservableSeries {
  SeriesMeta meta;
  std::vector<ObservablePoint> points;
};

// Trajectory statistics of the paper's observables from per-trajectory layer
// sums. tau = n_occ * v_avg * t.
ObservableSeries measure(const EnsembleSeries& series, double v_avg);

// Convenience overload computing layer sums from retained snapshots; agrees
// bit-for-bit with the EnsembleSeries path.
ObservableSeries measure(const std::vector<SpinEnsemble>& snapshots, const SiteSet& sites,
                         double v_avg);

struct MinVariance {
  double t = 0, tau = 0;
  double value = 0, err = 0;
  std::size_t index = 0;
  bool boundary = false;  // minimum sits on the grid edge: grid too short
};

// Global minimum of Var- over the sampled grid after a 3-point moving-average
// smoothing pass in log space; returns the unsmoothed value at that index.
MinVariance min_variance(const ObservableSeries& series);

struct ScalingPoint {
  double n = 0;        // spins per layer
  double var_min = 0;
};

struct ScalingFit {
  double nu = 0, nu_err = 0;
  double intercept = 0;
  std::size_t n_points = 0;
};

// Least-squares fit of log(var_min / N) = c - nu log N.
ScalingFit scaling_fit(std::span<const ScalingPoint> points);

// Rescales each series' time axis by its factor, resamples log(Var-/(N/2))
// onto the overlapping grid, and returns the maximum spread across series in
// units of the combined standard error.
double collapse_metric(std::span<const ObservableSeries> series, std::span<const double> factors);

}  // namespace bilayer

#endif
