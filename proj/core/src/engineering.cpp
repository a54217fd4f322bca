#include "bilayer/engineering.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace bilayer {

Rational Rational::parse(const std::string& text) {
  if (text.empty()) throw ParameterError("empty rational literal");
  const auto slash = text.find('/');
  auto parse_int = [](const std::string& s) -> std::int64_t {
    std::size_t pos = 0;
    std::int64_t v = 0;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::exception&) {
      throw ParameterError("bad rational literal: " + s);
    }
    if (pos != s.size()) throw ParameterError("bad rational literal: " + s);
    return v;
  };
  if (slash != std::string::npos) {
    return Rational(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
  }
  const auto dot = text.find('.');
  if (dot == std::string::npos) return Rational(parse_int(text));
  // finite decimal: digits after the dot give the power-of-ten denominator
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  std::int64_t den = 1;
  for (std::size_t k = dot + 1; k < text.size(); ++k) {
    if (den > (1LL << 52)) throw ParameterError("decimal literal too long: " + text);
    den *= 10;
  }
  return Rational(parse_int(digits), den);
}

std::string Rational::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

Tensor3 Tensor3::diagonal(double x, double y, double z) {
  Tensor3 t;
  t(0, 0) = x;
  t(1, 1) = y;
  t(2, 2) = z;
  return t;
}

Tensor3 Tensor3::scaled(double f) const {
  Tensor3 t;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) t(a, b) = m[a][b] * f;
  return t;
}

Tensor3 Tensor3::transposed() const {
  Tensor3 t;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) t(a, b) = m[b][a];
  return t;
}

Tensor3 RationalTensor3::value() const {
  Tensor3 t;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) t(a, b) = m[a][b].value();
  return t;
}

ToggleSequence ToggleSequence::from_steps(std::vector<ToggleStep> steps) {
  if (steps.empty()) throw ParameterError("toggle sequence needs at least one step");
  Rational total{0};
  for (const auto& s : steps) {
    if (!(Rational{0} < s.duration)) throw ParameterError("toggle step durations must be positive");
    if (s.sign_a * s.sign_a != 1 || s.sign_b * s.sign_b != 1)
      throw ParameterError("toggle step signs must be +1 or -1");
    total = total + s.duration;
  }
  for (auto& s : steps) s.duration = s.duration / total;
  ToggleSequence seq;
  seq.steps = std::move(steps);
  return seq;
}

std::size_t ToggleSequence::step_at(double phase) const {
  phase -= std::floor(phase);
  double acc = 0.0;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    acc += steps[k].duration.value();
    if (phase < acc) return k;
  }
  return steps.size() - 1;
}

ToggleSequence canonical_sequence() {
  const Rational d{1, 6};
  const Axis order[6] = {Axis::X, Axis::Y, Axis::Z, Axis::Z, Axis::Y, Axis::X};
  std::vector<ToggleStep> steps;
  for (int k = 0; k < 6; ++k) {
    ToggleStep s;
    s.axis_a = order[k];
    s.axis_b = order[k];
    s.sign_a = +1;
    s.sign_b = (k == 3) ? -1 : +1;  // opposite relative sign on the second z step
    s.duration = d;
    steps.push_back(s);
  }
  return ToggleSequence::from_steps(std::move(steps));
}

namespace {

// Can a single rotation about one coordinate axis (0, +-90 or 180 degrees)
// map signed axis (a1, s1) to (a2, s2)? The frame transition between steps
// only constrains the image of the z row, so this is the whole check.
bool frame_transition_ok(Axis a1, int s1, Axis a2, int s2) {
  if (a1 == a2) return true;         // identity, or 180 deg about a perpendicular axis
  (void)s1;
  (void)s2;
  return true;  // distinct axes: +-90 deg about the remaining axis reaches either sign
}

}  // namespace

SequenceReport validate_sequence(const ToggleSequence& seq) {
  SequenceReport rep;
  rep.realizable = true;
  const auto& steps = seq.steps;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const auto& cur = steps[k];
    const auto& nxt = steps[(k + 1) % steps.size()];
    if (!frame_transition_ok(cur.axis_a, cur.sign_a, nxt.axis_a, nxt.sign_a) ||
        !frame_transition_ok(cur.axis_b, cur.sign_b, nxt.axis_b, nxt.sign_b)) {
      rep.realizable = false;
      rep.notes.push_back("step " + std::to_string(k) + ": frame jump not a single-axis rotation");
    }
  }
  for (const auto& s : steps) {
    rep.intra_weight[0][static_cast<int>(s.axis_a)] =
        rep.intra_weight[0][static_cast<int>(s.axis_a)] + s.duration;
    rep.intra_weight[1][static_cast<int>(s.axis_b)] =
        rep.intra_weight[1][static_cast<int>(s.axis_b)] + s.duration;
    const int mu = static_cast<int>(s.axis_a), nu = static_cast<int>(s.axis_b);
    rep.inter_weight(mu, nu) =
        rep.inter_weight(mu, nu) + s.duration * Rational{s.sign_a * s.sign_b};
  }
  return rep;
}

RationalPairClassTensor average_tensor_exact(const ToggleSequence& seq) {
  RationalPairClassTensor t;
  for (const auto& s : seq.steps) {
    const int a = static_cast<int>(s.axis_a), b = static_cast<int>(s.axis_b);
    t.aa(a, a) = t.aa(a, a) + s.duration;  // sign_a^2 = 1
    t.bb(b, b) = t.bb(b, b) + s.duration;
    t.ab(a, b) = t.ab(a, b) + s.duration * Rational{s.sign_a * s.sign_b};
  }
  return t;
}

PairClassTensor average_tensor(const ToggleSequence& seq) {
  return average_tensor_exact(seq).value();
}

PairClassTensor toggled_tensor_at(const ToggleSequence& seq, double phase) {
  const auto& s = seq.steps[seq.step_at(phase)];
  PairClassTensor t;
  const int a = static_cast<int>(s.axis_a), b = static_cast<int>(s.axis_b);
  t.aa(a, a) = 1.0;
  t.bb(b, b) = 1.0;
  t.ab(a, b) = static_cast<double>(s.sign_a * s.sign_b);
  return t;
}

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::RawXXZ: return "raw_xxz";
    case ModelKind::StaggeredField: return "staggered";
    case ModelKind::FloquetEngineered: return "floquet";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "raw_xxz") return ModelKind::RawXXZ;
  if (name == "staggered") return ModelKind::StaggeredField;
  if (name == "floquet") return ModelKind::FloquetEngineered;
  throw ParameterError("unknown model kind: " + name);
}

double EffectiveModel::coupling(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  const bool ia = i < n_a, ja = j < n_a;
  if (ia && ja) return v_aa[i * n_a + j];
  if (!ia && !ja) return v_bb[(i - n_a) * n_b + (j - n_a)];
  if (ia) return v_ab[i * n_b + (j - n_a)];
  return v_ab[j * n_b + (i - n_a)];
}

Tensor3 EffectiveModel::pair_tensor(std::size_t i, std::size_t j) const {
  const bool ia = i < n_a, ja = j < n_a;
  const double vij = coupling(i, j);
  if (ia && ja) return t_aa.scaled(vij);
  if (!ia && !ja) return t_bb.scaled(vij);
  if (ia) return t_ab.scaled(vij);
  return t_ab.transposed().scaled(vij);
}

namespace {

double tensor_opnorm_bound(const Tensor3& t) {
  // Frobenius norm, an upper bound on the spectral norm of the 3x3 block.
  double s = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) s += t(a, b) * t(a, b);
  return std::sqrt(s);
}

}  // namespace

double EffectiveModel::field_bound() const {
  const double spin = std::sqrt(3.0) / 2.0;
  const double naa = tensor_opnorm_bound(t_aa);
  const double nbb = tensor_opnorm_bound(t_bb);
  const double nab = tensor_opnorm_bound(t_ab);
  const std::size_t m = size();
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      const bool ia = i < n_a, ja = j < n_a;
      const double norm = (ia == ja) ? (ia ? naa : nbb) : nab;
      row += coupling(i, j) * norm;
    }
    const Vec3& h = field[i];
    row = row * spin + std::sqrt(h.x * h.x + h.y * h.y + h.z * h.z);
    worst = std::max(worst, row);
  }
  return worst;
}

EffectiveModel build_model(ModelKind kind, const CouplingMatrix& couplings,
                           const ModelOptions& options) {
  EffectiveModel m;
  m.kind = kind;
  m.n_a = couplings.n_a;
  m.n_b = couplings.n_b;
  const std::size_t n = couplings.size();
  m.v_aa.assign(m.n_a * m.n_a, 0.0);
  m.v_bb.assign(m.n_b * m.n_b, 0.0);
  m.v_ab.assign(m.n_a * m.n_b, 0.0);
  for (std::size_t i = 0; i < m.n_a; ++i)
    for (std::size_t j = 0; j < m.n_a; ++j) m.v_aa[i * m.n_a + j] = couplings.v[i * n + j];
  for (std::size_t i = 0; i < m.n_b; ++i)
    for (std::size_t j = 0; j < m.n_b; ++j)
      m.v_bb[i * m.n_b + j] = couplings.v[(m.n_a + i) * n + (m.n_a + j)];
  for (std::size_t i = 0; i < m.n_a; ++i)
    for (std::size_t j = 0; j < m.n_b; ++j) m.v_ab[i * m.n_b + j] = couplings.v[i * n + (m.n_a + j)];

  m.v_avg = average_inter_coupling(couplings);
  m.field.assign(n, Vec3{});
  m.v_perp = options.v_perp;
  m.v_z = options.v_z;

  switch (kind) {
    case ModelKind::RawXXZ:
      // Eq.-(1)-style XXZ over unordered pairs: the ladder term
      // (V_perp/2)(s+s- + s-s+) equals V_perp (sx sx + sy sy).
      m.t_aa = m.t_bb = m.t_ab = Tensor3::diagonal(options.v_perp, options.v_perp, options.v_z);
      break;
    case ModelKind::StaggeredField: {
      m.t_aa = m.t_bb = m.t_ab = Tensor3::diagonal(1.0, 1.0, 1.0);
      if (m.n_a != m.n_b)
        throw ParameterError("staggered-field model needs equal occupied counts per layer");
      m.stagger_h = static_cast<double>(m.n_a) * m.v_avg / 2.0;
      for (std::size_t i = 0; i < n; ++i)
        m.field[i].z = (i < m.n_a) ? -m.stagger_h : +m.stagger_h;
      break;
    }
    case ModelKind::FloquetEngineered: {
      const ToggleSequence seq = options.sequence ? *options.sequence : canonical_sequence();
      if (!validate_sequence(seq).pass()) throw ParameterError("invalid toggle sequence");
      const PairClassTensor avg = average_tensor(seq);
      const double scale = options.rescale_prefactor ? 3.0 * options.v_z : options.v_z;
      m.t_aa = avg.aa.scaled(scale);
      m.t_bb = avg.bb.scaled(scale);
      m.t_ab = avg.ab.scaled(scale);
      m.rescaled = options.rescale_prefactor;
      break;
    }
  }
  return m;
}

EffectiveModel with_tensors(const EffectiveModel& base, const PairClassTensor& tensors) {
  EffectiveModel m = base;
  m.t_aa = tensors.aa;
  m.t_bb = tensors.bb;
  m.t_ab = tensors.ab;
  return m;
}

}  // namespace bilayer
