#ifndef BILAYER_ENGINEERING_HPP
#define BILAYER_ENGINEERING_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "bilayer/lattice.hpp"
#include "bilayer/rational.hpp"

namespace bilayer {

enum class Axis : int { X = 0, Y = 1, Z = 2 };

// One toggling-frame step: during this fraction of the cycle the bare s^z of
// a layer appears as sign * s^axis.
struct ToggleStep {
  Axis axis_a = Axis::Z;
  int sign_a = +1;
  Axis axis_b = Axis::Z;
  int sign_b = +1;
  Rational duration{1, 1};
};

// Layer-dependent pulse sequence in toggling-frame representation. Durations
// are normalized so the cycle has unit length.
struct ToggleSequence {
  std::vector<ToggleStep> steps;

  static ToggleSequence from_steps(std::vector<ToggleStep> steps);
  std::size_t step_at(double phase) const;  // phase in [0, 1)
};

// Six equal steps visiting each axis twice per layer; the two z steps carry
// opposite relative signs between the layers, so the inter-layer zz weight
// averages to zero while xx and yy average to 1/3.
ToggleSequence canonical_sequence();

struct Tensor3 {
  std::array<std::array<double, 3>, 3> m{};
  double& operator()(int mu, int nu) { return m[mu][nu]; }
  double operator()(int mu, int nu) const { return m[mu][nu]; }
  static Tensor3 diagonal(double x, double y, double z);
  Tensor3 scaled(double f) const;
  Tensor3 transposed() const;
};

struct RationalTensor3 {
  std::array<std::array<Rational, 3>, 3> m{};
  Rational& operator()(int mu, int nu) { return m[mu][nu]; }
  const Rational& operator()(int mu, int nu) const { return m[mu][nu]; }
  Tensor3 value() const;
};

// Dimensionless weights multiplying V_ij for the three pair classes.
struct PairClassTensor {
  Tensor3 aa, bb, ab;
};

struct RationalPairClassTensor {
  RationalTensor3 aa, bb, ab;
  PairClassTensor value() const { return {aa.value(), bb.value(), ab.value()}; }
};

struct SequenceReport {
  bool realizable = false;
  // Duration weight each layer spends on each axis (sums to 1).
  std::array<std::array<Rational, 3>, 2> intra_weight{};
  // Signed duration-weighted inter-layer products per axis pair.
  RationalTensor3 inter_weight{};
  std::vector<std::string> notes;
  bool pass() const { return realizable; }
};

// Checks per-layer frame-transition realizability (consecutive frames must
// differ by a single-axis rotation of 0, +-90 or 180 degrees, including the
// cyclic wrap-around) and tabulates axis weights.
SequenceReport validate_sequence(const ToggleSequence& seq);

// First-order average Hamiltonian weights of the toggled Ising interaction,
// exact in rational arithmetic.
RationalPairClassTensor average_tensor_exact(const ToggleSequence& seq);
PairClassTensor average_tensor(const ToggleSequence& seq);

// Instantaneous (un-averaged) weights of the step active at the given phase.
PairClassTensor toggled_tensor_at(const ToggleSequence& seq, double phase);

enum class ModelKind { RawXXZ, StaggeredField, FloquetEngineered };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct ModelOptions {
  double v_perp = 1.0;  // RawXXZ only
  double v_z = 1.0;
  std::optional<ToggleSequence> sequence;  // Floquet; canonical if unset
  // Rescale the Floquet average Hamiltonian by 3 so the canonical sequence's
  // V_z/3 prefactor drops out and both engineered models share a time axis.
  bool rescale_prefactor = true;
};

// The simulated Hamiltonian H = sum_{i<j} s_i . J_ij . s_j + sum_i h_i . s_i
// with J_ij = V_ij * T_class(i,j). Sites are the occupied ones, layer A
// block first, matching CouplingMatrix.
struct EffectiveModel {
  ModelKind kind = ModelKind::RawXXZ;
  std::size_t n_a = 0, n_b = 0;
  std::vector<double> v_aa;  // n_a x n_a, row-major, zero diagonal
  std::vector<double> v_bb;  // n_b x n_b
  std::vector<double> v_ab;  // n_a x n_b
  Tensor3 t_aa, t_bb, t_ab;
  std::vector<Vec3> field;  // per occupied site
  double v_avg = 0.0;
  double stagger_h = 0.0;  // 0 unless StaggeredField
  double v_perp = 0.0, v_z = 0.0;
  bool rescaled = false;

  std::size_t size() const { return n_a + n_b; }
  Layer layer_of(std::size_t i) const { return i < n_a ? Layer::A : Layer::B; }
  double coupling(std::size_t i, std::size_t j) const;
  Tensor3 pair_tensor(std::size_t i, std::size_t j) const;  // J_ij, includes V_ij
  // Largest possible |b_i| given per-spin norm sqrt(3)/2; used for step control.
  double field_bound() const;
};

EffectiveModel build_model(ModelKind kind, const CouplingMatrix& couplings,
                           const ModelOptions& options = {});

// Same couplings with the class tensors replaced (used by the stroboscopic
// integrator to switch toggled frames).
EffectiveModel with_tensors(const EffectiveModel& base, const PairClassTensor& tensors);

}  // namespace bilayer

#endif
