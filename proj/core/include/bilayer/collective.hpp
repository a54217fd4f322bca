#ifndef BILAYER_COLLECTIVE_HPP
#define BILAYER_COLLECTIVE_HPP

#include <complex>
#include <vector>

#include "bilayer/analysis.hpp"
#include "bilayer/engineering.hpp"

namespace bilayer {

// Collective subspace |S, m_A; S, m_B> with m_A + m_B = 0, S = N/2, indexed
// by the pair count p: (m_A, m_B) = (-S + p, S - p), p = 0..N. Valid for
// uniform couplings (alpha = 0), where the dynamics never leaves it.
struct CollectiveHamiltonian {
  ModelKind kind = ModelKind::FloquetEngineered;
  int n = 0;          // spins per layer
  double v_avg = 1.0;  // uniform coupling strength
  std::vector<double> diag;  // N+1
  std::vector<double> off;   // N, <p+1|H|p>

  int dim() const { return n + 1; }
};

CollectiveHamiltonian build_collective_hamiltonian(ModelKind kind, int n, double v_avg);

struct CollectiveState {
  std::vector<std::complex<double>> amp;  // over p
  double time = 0;
  double norm() const;
};

// Spectral evolution of |p=0> through the full eigendecomposition; exact at
// any time. Reusable across time grids.
class CollectiveEvolution {
 public:
  explicit CollectiveEvolution(const CollectiveHamiltonian& h);
  CollectiveState at(double t) const;

 private:
  int n_;
  std::vector<double> eval_;
  std::vector<double> evec_;    // column-major (dim x dim)
  std::vector<double> weight_;  // U^T e_0
};

std::vector<CollectiveState> evolve_collective(const CollectiveHamiltonian& h,
                                               const std::vector<double>& times);

struct CollectiveObservables {
  double n_pair = 0;
  double var_minus = 0, var_plus = 0;
  double spin_length = 0;  // 2 S(S+1), constant on the manifold
  double s_a_z = 0, s_b_z = 0;
};

CollectiveObservables collective_observables(const CollectiveState& state, int n);

// Closed-form two-mode-squeezing predictions (hbar = 1):
// N_pair = 2 sinh^2(N V t / 2), Var[O-+] = (N/2) exp(-+ N V t).
struct TmsPrediction {
  int n = 0;
  double v_avg = 1.0;
  double n_pair(double t) const;
  double var_minus(double t) const;
  double var_plus(double t) const;
};

// Full 2^M brute-force evolution of the polarized product state under the
// model's pair tensors and fields; exact quantum expectations and operator
// variances in the same layout as the dTWA analysis. M <= 14.
ObservableSeries exact_small_evolve(const EffectiveModel& model, const std::vector<double>& times);

// Exact series from the collective Hamiltonian on a time grid.
ObservableSeries collective_series(const CollectiveHamiltonian& h, const std::vector<double>& times);

}  // namespace bilayer

#endif
