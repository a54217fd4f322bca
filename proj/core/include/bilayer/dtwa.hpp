#ifndef BILAYER_DTWA_HPP
#define BILAYER_DTWA_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bilayer/engineering.hpp"
#include "bilayer/lattice.hpp"

namespace bilayer {

// R classical trajectories over the occupied sites (layer A block first).
// Component arrays are site-major, trajectory-contiguous: sx[i * R + r].
struct SpinEnsemble {
  std::size_t trajectories = 0;
  std::size_t sites = 0;
  std::size_t n_a = 0;
  double time = 0.0;
  std::uint64_t master_seed = 0;
  std::vector<double> sx, sy, sz;

  double get(int mu, std::size_t site, std::size_t traj) const {
    const std::vector<double>& c = mu == 0 ? sx : (mu == 1 ? sy : sz);
    return c[site * trajectories + traj];
  }
};

// Discrete Wigner sampling of the oppositely polarized product state:
// s_z = -1/2 on layer A and +1/2 on layer B exactly; s_x, s_y drawn from
// {-1/2, +1/2} with a per-trajectory stream keyed by (seed, trajectory).
SpinEnsemble sample_initial(const SiteSet& sites, std::size_t trajectories, std::uint64_t seed);

// Mean-field b_i = sum_{j != i} J_ij s_j + h_i for one trajectory
// (gradient of the classical energy in s_i). Reference implementation used
// by tests and small oracles; the integrator has a blocked equivalent.
std::vector<Vec3> effective_field(const EffectiveModel& model, std::span<const Vec3> spins);

// Classical energy of one trajectory, sum_{i<j} s_i.J_ij.s_j + sum_i h_i.s_i.
double classical_energy(const EffectiveModel& model, std::span<const Vec3> spins);

struct ConservationReport {
  double max_energy_drift = 0.0;  // relative to max(|E0|, N V_avg)
  double max_sz_drift = 0.0;      // absolute drift of total S^z
  double max_norm_dev = 0.0;      // max |s_i|^2 - 3/4 over the run
  double energy_tol = 0.0, sz_tol = 0.0, norm_tol = 0.0;
  bool checked = false;
  bool pass() const {
    return max_energy_drift <= energy_tol && max_sz_drift <= sz_tol && max_norm_dev <= norm_tol;
  }
  std::string summary() const;
};

struct IntegratorConfig {
  // Fixed RK4 step; 0 derives dt from dt_safety / max(N V_avg, max_i |b_i|).
  double dt = 0.0;
  double dt_safety = 0.02;
  std::vector<double> sample_times;  // strictly increasing, starting at 0
  double energy_tol = 1e-8;
  double sz_tol = 1e-8;
  double norm_tol = 1e-10;  // scaled by max(1, tau at end of run)
  int threads = 0;          // 0 = hardware concurrency; never affects results
  bool check_conservation = true;
  bool keep_snapshots = false;

  void validate() const;
};

// Per-trajectory layer sums at each sample time, plus conservation
// diagnostics. Trajectory reduction order is fixed, so downstream statistics
// are bit-identical regardless of the worker count.
struct EnsembleSeries {
  std::vector<double> times;
  std::size_t trajectories = 0;
  std::size_t n_a = 0, n_b = 0;
  // [sample][trajectory][6]: S_A^x, S_A^y, S_A^z, S_B^x, S_B^y, S_B^z
  std::vector<double> layer_sums;
  ConservationReport conservation;
  double dt_used = 0.0;
  std::vector<SpinEnsemble> snapshots;  // populated when keep_snapshots

  const double* sums(std::size_t sample, std::size_t traj) const {
    return layer_sums.data() + (sample * trajectories + traj) * 6;
  }
};

double default_time_step(const EffectiveModel& model, double dt_safety);

// Fixed-step RK4 on ds_i/dt = b_i x s_i, all trajectories independently.
// Throws IntegrationQualityError when conservation tolerances are exceeded.
EnsembleSeries integrate(const SpinEnsemble& initial, const EffectiveModel& model,
                         const IntegratorConfig& config);

// Piecewise-constant toggled-frame evolution of a raw Ising model
// (v_perp = 0), cycling through the sequence with the given period.
// Converges to integrate() under the averaged model as period -> 0.
EnsembleSeries stroboscopic_integrate(const SpinEnsemble& initial, const EffectiveModel& ising,
                                      const ToggleSequence& seq, double cycle_period,
                                      const IntegratorConfig& config);

}  // namespace bilayer

#endif
