#include <doctest.h>

#include <cmath>
#include <random>

#include "bilayer/engineering.hpp"
#include "bilayer/lattice.hpp"

using namespace bilayer;

namespace {

CouplingMatrix couplings_for(int side, double a_z, double alpha, double filling = 1.0,
                             std::uint64_t seed = 0) {
  LatticeSpec s;
  s.side = side;
  s.a_z = a_z;
  s.alpha = alpha;
  s.filling = filling;
  s.seed = seed;
  return compute_couplings(build_sites(s), alpha);
}

}  // namespace

TEST_CASE("rational arithmetic") {
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK((Rational(1, 6) + Rational(1, 6)) == Rational(1, 3));
  CHECK((Rational(1, 2) * Rational(-2, 3)) == Rational(-1, 3));
  CHECK(Rational::parse("1/6") == Rational(1, 6));
  CHECK(Rational::parse("0.25") == Rational(1, 4));
  CHECK(Rational::parse("-3") == Rational(-3));
  CHECK_THROWS_AS(Rational::parse("x"), ParameterError);
  CHECK_THROWS_AS(Rational(1, 0), ParameterError);
}

TEST_CASE("canonical sequence") {
  const ToggleSequence seq = canonical_sequence();
  REQUIRE(seq.steps.size() == 6);
  for (const auto& s : seq.steps) CHECK(s.duration == Rational(1, 6));
  const SequenceReport rep = validate_sequence(seq);
  CHECK(rep.pass());
  for (int layer = 0; layer < 2; ++layer)
    for (int axis = 0; axis < 3; ++axis) CHECK(rep.intra_weight[layer][axis] == Rational(1, 3));
  CHECK(rep.inter_weight(0, 0) == Rational(1, 3));
  CHECK(rep.inter_weight(1, 1) == Rational(1, 3));
  CHECK(rep.inter_weight(2, 2) == Rational(0));
}

TEST_CASE("average_tensor") {
  SUBCASE("canonical: intra diag(1/3,1/3,1/3), inter diag(1/3,1/3,0), exact") {
    const RationalPairClassTensor t = average_tensor_exact(canonical_sequence());
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        CHECK(t.aa(a, b) == (a == b ? Rational(1, 3) : Rational(0)));
        CHECK(t.bb(a, b) == (a == b ? Rational(1, 3) : Rational(0)));
        const Rational want = (a == b && a != 2) ? Rational(1, 3) : Rational(0);
        CHECK(t.ab(a, b) == want);
      }
  }
  SUBCASE("trivial z-only sequence") {
    const auto seq = ToggleSequence::from_steps({{Axis::Z, +1, Axis::Z, +1, Rational(1)}});
    const RationalPairClassTensor t = average_tensor_exact(seq);
    CHECK(t.aa(2, 2) == Rational(1));
    CHECK(t.ab(2, 2) == Rational(1));
    CHECK(t.aa(0, 0) == Rational(0));
    const SequenceReport rep = validate_sequence(seq);
    CHECK(rep.pass());
    CHECK(rep.intra_weight[0][2] == Rational(1));
  }
  SUBCASE("two-step z,+/z,- on layer B cancels only the inter weight") {
    const auto seq = ToggleSequence::from_steps({{Axis::Z, +1, Axis::Z, +1, Rational(1, 2)},
                                                 {Axis::Z, +1, Axis::Z, -1, Rational(1, 2)}});
    const RationalPairClassTensor t = average_tensor_exact(seq);
    CHECK(t.ab(2, 2) == Rational(0));
    CHECK(t.aa(2, 2) == Rational(1));
    CHECK(t.bb(2, 2) == Rational(1));
  }
  SUBCASE("x to -x in one step is a legal 180 degree rotation") {
    const auto seq = ToggleSequence::from_steps({{Axis::X, +1, Axis::X, +1, Rational(1, 2)},
                                                 {Axis::X, -1, Axis::X, +1, Rational(1, 2)}});
    CHECK(validate_sequence(seq).pass());
  }
  SUBCASE("durations normalize to one") {
    const auto seq = ToggleSequence::from_steps({{Axis::X, +1, Axis::Y, +1, Rational(3)},
                                                 {Axis::Z, +1, Axis::Z, -1, Rational(1)}});
    CHECK(seq.steps[0].duration == Rational(3, 4));
    CHECK(seq.steps[1].duration == Rational(1, 4));
  }
  SUBCASE("intra-layer weights are nonnegative and sum to 1 for random sequences") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<ToggleStep> steps;
      const int n = 1 + static_cast<int>(rng() % 7);
      for (int k = 0; k < n; ++k)
        steps.push_back({static_cast<Axis>(rng() % 3), rng() % 2 ? 1 : -1,
                         static_cast<Axis>(rng() % 3), rng() % 2 ? 1 : -1,
                         Rational(1 + static_cast<std::int64_t>(rng() % 5), 1)});
      const auto seq = ToggleSequence::from_steps(std::move(steps));
      const SequenceReport rep = validate_sequence(seq);
      CHECK(rep.pass());
      for (int layer = 0; layer < 2; ++layer) {
        Rational sum{0};
        for (int axis = 0; axis < 3; ++axis) {
          CHECK(!(rep.intra_weight[layer][axis] < Rational(0)));
          sum = sum + rep.intra_weight[layer][axis];
        }
        CHECK(sum == Rational(1));
      }
    }
  }
}

TEST_CASE("toggled_tensor_at") {
  const ToggleSequence seq = canonical_sequence();
  SUBCASE("step 3 and 4 carry opposite inter-layer zz weight") {
    const PairClassTensor t3 = toggled_tensor_at(seq, 2.5 / 6.0);
    CHECK(t3.ab(2, 2) == doctest::Approx(+1.0));
    const PairClassTensor t4 = toggled_tensor_at(seq, 3.5 / 6.0);
    CHECK(t4.ab(2, 2) == doctest::Approx(-1.0));
  }
  SUBCASE("duration-weighted integral reproduces the average tensor") {
    PairClassTensor sum;
    for (std::size_t k = 0; k < seq.steps.size(); ++k) {
      const double w = seq.steps[k].duration.value();
      const double phase = (k + 0.5) / 6.0;
      const PairClassTensor t = toggled_tensor_at(seq, phase);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          sum.aa(a, b) += w * t.aa(a, b);
          sum.bb(a, b) += w * t.bb(a, b);
          sum.ab(a, b) += w * t.ab(a, b);
        }
    }
    const PairClassTensor avg = average_tensor(seq);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        CHECK(sum.aa(a, b) == doctest::Approx(avg.aa(a, b)));
        CHECK(sum.ab(a, b) == doctest::Approx(avg.ab(a, b)));
      }
  }
}

TEST_CASE("build_model") {
  const CouplingMatrix c = couplings_for(3, 2.0, 3.0);
  SUBCASE("floquet inter-layer zz vanishes for every pair") {
    const EffectiveModel m = build_model(ModelKind::FloquetEngineered, c);
    for (std::size_t i = 0; i < m.n_a; ++i)
      for (std::size_t j = m.n_a; j < m.size(); ++j) CHECK(m.pair_tensor(i, j)(2, 2) == 0.0);
    // rescaled canonical: intra weights are 1
    CHECK(m.t_aa(0, 0) == doctest::Approx(1.0));
    CHECK(m.t_ab(1, 1) == doctest::Approx(1.0));
    CHECK(m.rescaled);
  }
  SUBCASE("physical prefactor keeps V_z/3") {
    ModelOptions opt;
    opt.rescale_prefactor = false;
    opt.v_z = 2.0;
    const EffectiveModel m = build_model(ModelKind::FloquetEngineered, c, opt);
    CHECK(m.t_aa(0, 0) == doctest::Approx(2.0 / 3.0));
    CHECK(m.t_ab(2, 2) == 0.0);
  }
  SUBCASE("staggered field value and direction") {
    const CouplingMatrix c0 = couplings_for(10, 2.0, 0.0);
    const EffectiveModel m = build_model(ModelKind::StaggeredField, c0);
    CHECK(m.stagger_h == doctest::Approx(50.0));  // N V_avg / 2 with N=100, V_avg=1
    CHECK(m.field[0].z == doctest::Approx(-50.0));
    CHECK(m.field[m.size() - 1].z == doctest::Approx(+50.0));
  }
  SUBCASE("staggered field equals the re-summed inter-layer coupling") {
    const CouplingMatrix cd = couplings_for(4, 1.5, 2.2, 0.75, 7);
    const EffectiveModel m = build_model(ModelKind::StaggeredField, cd);
    double sum = 0;
    for (std::size_t i = 0; i < cd.n_a; ++i)
      for (std::size_t j = cd.n_a; j < cd.size(); ++j) sum += cd(i, j);
    CHECK(m.stagger_h == doctest::Approx(sum / (2.0 * cd.n_a)).epsilon(1e-14));
  }
  SUBCASE("Heisenberg point: raw XXZ with V_perp=V_z=1 matches staggered couplings") {
    ModelOptions opt;
    opt.v_perp = 1.0;
    opt.v_z = 1.0;
    const EffectiveModel raw = build_model(ModelKind::RawXXZ, c, opt);
    const EffectiveModel stag = build_model(ModelKind::StaggeredField, c);
    for (std::size_t i = 0; i < raw.size(); ++i)
      for (std::size_t j = 0; j < raw.size(); ++j) {
        if (i == j) continue;
        const Tensor3 a = raw.pair_tensor(i, j), b = stag.pair_tensor(i, j);
        for (int mu = 0; mu < 3; ++mu)
          for (int nu = 0; nu < 3; ++nu) CHECK(a(mu, nu) == doctest::Approx(b(mu, nu)));
      }
    CHECK(raw.field[0].z == 0.0);
  }
  SUBCASE("layer swap symmetry of the floquet model") {
    // swapping layers together with exchanging the layer sequences transposes
    // the inter-layer tensor and swaps the intra-layer ones
    ToggleSequence swapped = canonical_sequence();
    for (auto& s : swapped.steps) {
      std::swap(s.axis_a, s.axis_b);
      std::swap(s.sign_a, s.sign_b);
    }
    ModelOptions opt;
    opt.sequence = swapped;
    const EffectiveModel m = build_model(ModelKind::FloquetEngineered, c);
    const EffectiveModel ms = build_model(ModelKind::FloquetEngineered, c, opt);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        CHECK(ms.t_aa(a, b) == doctest::Approx(m.t_bb(a, b)));
        CHECK(ms.t_bb(a, b) == doctest::Approx(m.t_aa(a, b)));
        CHECK(ms.t_ab(a, b) == doctest::Approx(m.t_ab(b, a)));
      }
  }
}
