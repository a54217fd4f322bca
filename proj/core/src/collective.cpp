#include "bilayer/collective.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace bilayer {

CollectiveHamiltonian build_collective_hamiltonian(ModelKind kind, int n, double v_avg) {
  if (kind != ModelKind::StaggeredField && kind != ModelKind::FloquetEngineered)
    throw ParameterError("collective oracle supports the two engineered models only");
  if (n < 1) throw ParameterError("need at least one spin per layer");
  CollectiveHamiltonian h;
  h.kind = kind;
  h.n = n;
  h.v_avg = v_avg;
  const double s = n / 2.0;
  h.off.resize(n);
  for (int p = 0; p < n; ++p)
    h.off[p] = 0.5 * v_avg * (p + 1) * (n - p);  // <p+1| (V/2)(S_A^+ S_B^- + h.c.) |p>
  h.diag.assign(n + 1, v_avg * (s * (s + 1.0) - 0.75 * n));  // intra-layer Heisenberg constants
  if (kind == ModelKind::StaggeredField) {
    const double field = n * v_avg / 2.0;
    for (int p = 0; p <= n; ++p) {
      const double m_a = -s + p, m_b = s - p;
      h.diag[p] += v_avg * m_a * m_b + field * (m_b - m_a);
    }
  }
  return h;
}

double CollectiveState::norm() const {
  double r = 0;
  for (const auto& a : amp) r += std::norm(a);
  return std::sqrt(r);
}

CollectiveEvolution::CollectiveEvolution(const CollectiveHamiltonian& h) : n_(h.n) {
  const int dim = h.dim();
  Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(h.diag.data(), dim);
  Eigen::VectorXd off = Eigen::Map<const Eigen::VectorXd>(h.off.data(), dim - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success)
    throw CapacityError("tridiagonal eigendecomposition failed");
  eval_.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + dim);
  evec_.assign(solver.eigenvectors().data(), solver.eigenvectors().data() + dim * dim);
  weight_.resize(dim);
  for (int k = 0; k < dim; ++k) weight_[k] = evec_[k * dim + 0];  // U^T e_0
}

CollectiveState CollectiveEvolution::at(double t) const {
  const int dim = n_ + 1;
  CollectiveState st;
  st.time = t;
  st.amp.assign(dim, {0.0, 0.0});
  for (int k = 0; k < dim; ++k) {
    const std::complex<double> phase =
        std::polar(weight_[k], -eval_[k] * t);  // e^{-i lambda t} (U^T psi0)_k
    const double* col = evec_.data() + k * dim;
    for (int p = 0; p < dim; ++p) st.amp[p] += col[p] * phase;
  }
  return st;
}

std::vector<CollectiveState> evolve_collective(const CollectiveHamiltonian& h,
                                               const std::vector<double>& times) {
  CollectiveEvolution evo(h);
  std::vector<CollectiveState> out;
  out.reserve(times.size());
  for (double t : times) {
    CollectiveState st = evo.at(t);
    if (std::abs(st.norm() - 1.0) > 1e-10)
      throw CapacityError("collective evolution lost unitarity");
    out.push_back(std::move(st));
  }
  return out;
}

CollectiveObservables collective_observables(const CollectiveState& state, int n) {
  const double s = n / 2.0;
  CollectiveObservables obs;
  double mean_p = 0;
  double base = 0;
  for (int p = 0; p <= n; ++p) {
    const double w = std::norm(state.amp[p]);
    mean_p += w * p;
    const double m = s - p;  // |m_A| = |m_B|
    base += w * (s * (s + 1.0) - m * m);
  }
  double cross = 0;
  for (int p = 0; p < n; ++p) {
    const double a = (p + 1.0) * (n - p);  // <p+1|S_A^+ S_B^-|p>
    cross += a * std::imag(std::conj(state.amp[p]) * state.amp[p + 1]);
  }
  obs.n_pair = 2.0 * mean_p;
  obs.var_minus = base + cross;
  obs.var_plus = base - cross;
  obs.spin_length = 2.0 * s * (s + 1.0);
  obs.s_a_z = -s + mean_p;
  obs.s_b_z = s - mean_p;
  return obs;
}

double TmsPrediction::n_pair(double t) const {
  const double x = std::sinh(0.5 * n * v_avg * t);
  return 2.0 * x * x;
}
double TmsPrediction::var_minus(double t) const { return 0.5 * n * std::exp(-n * v_avg * t); }
double TmsPrediction::var_plus(double t) const { return 0.5 * n * std::exp(+n * v_avg * t); }

ObservableSeries collective_series(const CollectiveHamiltonian& h,
                                   const std::vector<double>& times) {
  CollectiveEvolution evo(h);
  ObservableSeries out;
  out.meta.kind = h.kind;
  out.meta.n_occ = static_cast<std::size_t>(h.n);
  out.meta.v_avg = h.v_avg;
  out.meta.exact = true;
  out.meta.label = "collective-ed";
  for (double t : times) {
    const CollectiveState st = evo.at(t);
    const CollectiveObservables obs = collective_observables(st, h.n);
    ObservablePoint p;
    p.t = t;
    p.tau = h.n * h.v_avg * t;
    p.n_pair = obs.n_pair;
    p.var_minus = p.var_minus_1 = p.var_minus_2 = obs.var_minus;
    p.var_plus = p.var_plus_1 = p.var_plus_2 = obs.var_plus;
    p.spin_length = obs.spin_length;
    p.s_a_z = obs.s_a_z;
    p.s_b_z = obs.s_b_z;
    out.points.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Brute-force oracle: dense state over 2^M basis states, Hamiltonian applied
// term by term. Basis bit i set = spin i down; site order matches the model.
// ---------------------------------------------------------------------------

namespace {

using Cvec = Eigen::VectorXcd;
using Complex = std::complex<double>;

// out += coeff * s^mu_i |in>
void apply_single(int mu, std::size_t site, const Cvec& in, Cvec& out, Complex coeff) {
  const std::size_t bit = std::size_t{1} << site;
  const std::size_t dim = static_cast<std::size_t>(in.size());
  switch (mu) {
    case 0:  // s^x: flip
      for (std::size_t b = 0; b < dim; ++b) out[b ^ bit] += 0.5 * coeff * in[b];
      break;
    case 1:  // s^y: flip with sign, s^y|up> = (i/2)|down>
      for (std::size_t b = 0; b < dim; ++b) {
        const double sgn = (b & bit) ? -1.0 : 1.0;
        out[b ^ bit] += Complex(0, 0.5) * sgn * coeff * in[b];
      }
      break;
    default:  // s^z: diagonal, up = +1/2
      for (std::size_t b = 0; b < dim; ++b) {
        const double sgn = (b & bit) ? -0.5 : 0.5;
        out[b] += sgn * coeff * in[b];
      }
  }
}

struct BruteForce {
  const EffectiveModel* model;
  std::size_t m, dim;

  explicit BruteForce(const EffectiveModel& mod)
      : model(&mod), m(mod.size()), dim(std::size_t{1} << mod.size()) {
    if (m > 14) throw CapacityError("brute-force oracle limited to 14 spins");
  }

  Cvec initial() const {
    Cvec psi = Cvec::Zero(dim);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < model->n_a; ++i) idx |= std::size_t{1} << i;  // layer A down
    psi[idx] = 1.0;
    return psi;
  }

  Cvec apply_h(const Cvec& in) const {
    Cvec out = Cvec::Zero(dim);
    Cvec tmp(dim);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        const Tensor3 t = model->pair_tensor(i, j);
        for (int mu = 0; mu < 3; ++mu)
          for (int nu = 0; nu < 3; ++nu) {
            if (t(mu, nu) == 0.0) continue;
            tmp.setZero();
            apply_single(nu, j, in, tmp, 1.0);
            apply_single(mu, i, tmp, out, t(mu, nu));
          }
      }
      const Vec3& h = model->field[i];
      if (h.x != 0) apply_single(0, i, in, out, h.x);
      if (h.y != 0) apply_single(1, i, in, out, h.y);
      if (h.z != 0) apply_single(2, i, in, out, h.z);
    }
    return out;
  }

  // layer sum operator applied to psi
  Cvec apply_layer(int mu, Layer which, const Cvec& in) const {
    Cvec out = Cvec::Zero(dim);
    const std::size_t lo = which == Layer::A ? 0 : model->n_a;
    const std::size_t hi = which == Layer::A ? model->n_a : m;
    for (std::size_t i = lo; i < hi; ++i) apply_single(mu, i, in, out, 1.0);
    return out;
  }
};

double real_expect(const Cvec& psi, const Cvec& opsi) { return psi.dot(opsi).real(); }

}  // namespace

namespace {

// Crude upper bound on ||H|| from the term structure; only used to pick
// Lanczos substeps.
double hamiltonian_norm_bound(const EffectiveModel& model) {
  double bound = 0;
  const std::size_t m = model.size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const Tensor3 t = model.pair_tensor(i, j);
      for (int mu = 0; mu < 3; ++mu)
        for (int nu = 0; nu < 3; ++nu) bound += std::abs(t(mu, nu)) * 0.25;
    }
    const Vec3& h = model.field[i];
    bound += 0.5 * (std::abs(h.x) + std::abs(h.y) + std::abs(h.z));
  }
  return bound;
}

// psi <- exp(-i H dt) psi via a Krylov subspace with full reorthogonalization.
void lanczos_expm(const BruteForce& bf, Cvec& psi, double dt) {
  constexpr int kKrylov = 64;
  const auto dim = static_cast<Eigen::Index>(bf.dim);
  std::vector<Cvec> basis;
  basis.reserve(kKrylov);
  Eigen::VectorXd alpha(kKrylov), beta(kKrylov);
  const double nrm0 = psi.norm();
  basis.push_back(psi / nrm0);
  int m = 0;
  for (int k = 0; k < kKrylov; ++k) {
    Cvec w = bf.apply_h(basis[k]);
    alpha[k] = basis[k].dot(w).real();
    w -= alpha[k] * basis[k];
    if (k > 0) w -= beta[k - 1] * basis[k - 1];
    for (const auto& v : basis) w -= v.dot(w) * v;  // reorthogonalize
    beta[k] = w.norm();
    m = k + 1;
    if (beta[k] < 1e-14 || k + 1 == kKrylov) break;
    basis.push_back(w / beta[k]);
  }
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k < m; ++k) {
    t(k, k) = alpha[k];
    if (k + 1 < m) t(k, k + 1) = t(k + 1, k) = beta[k];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(t);
  Eigen::VectorXcd coef = Eigen::VectorXcd::Zero(m);
  for (int k = 0; k < m; ++k) {
    const std::complex<double> ph = std::polar(1.0, -small.eigenvalues()[k] * dt);
    for (int p = 0; p < m; ++p)
      coef[p] += small.eigenvectors()(p, k) * ph * small.eigenvectors()(0, k);
  }
  psi = Cvec::Zero(dim);
  for (int p = 0; p < m; ++p) psi += (nrm0 * coef[p]) * basis[p];
}

}  // namespace

ObservableSeries exact_small_evolve(const EffectiveModel& model,
                                    const std::vector<double>& times) {
  BruteForce bf(model);
  if (model.n_a != model.n_b)
    throw ParameterError("pair counting expects equally occupied layers");
  const double n_occ = static_cast<double>(model.n_a);

  const bool dense = bf.dim <= 4096;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver;
  Cvec w;
  if (dense) {
    // dense Hermitian eigendecomposition, built column by column
    Eigen::MatrixXcd h(bf.dim, bf.dim);
    Cvec e = Cvec::Zero(bf.dim);
    for (std::size_t c = 0; c < bf.dim; ++c) {
      e[c] = 1.0;
      h.col(c) = bf.apply_h(e);
      e[c] = 0.0;
    }
    solver.compute(h);
    if (solver.info() != Eigen::Success) throw CapacityError("brute-force eigensolve failed");
    w = solver.eigenvectors().adjoint() * bf.initial();
  }

  ObservableSeries out;
  out.meta.kind = model.kind;
  out.meta.n_occ = model.n_a;
  out.meta.v_avg = model.v_avg;
  out.meta.exact = true;
  out.meta.label = "brute-force-ed";

  const double hnorm = dense ? 0.0 : hamiltonian_norm_bound(model);
  Cvec psi_l = dense ? Cvec() : bf.initial();
  double t_l = 0.0;

  for (double t : times) {
    Cvec psi;
    if (dense) {
      Cvec phase(w.size());
      for (Eigen::Index k = 0; k < w.size(); ++k)
        phase[k] = w[k] * std::polar(1.0, -solver.eigenvalues()[k] * t);
      psi = solver.eigenvectors() * phase;
    } else {
      double span = t - t_l;
      if (span < 0) throw ParameterError("times must be non-decreasing for the Krylov path");
      const int nsub = std::max(1, static_cast<int>(std::ceil(hnorm * span / 10.0)));
      for (int k = 0; k < nsub; ++k) lanczos_expm(bf, psi_l, span / nsub);
      t_l = t;
      psi = psi_l;
    }

    ObservablePoint p;
    p.t = t;
    p.tau = n_occ * model.v_avg * t;
    const Cvec sax = bf.apply_layer(0, Layer::A, psi);
    const Cvec say = bf.apply_layer(1, Layer::A, psi);
    const Cvec saz = bf.apply_layer(2, Layer::A, psi);
    const Cvec sbx = bf.apply_layer(0, Layer::B, psi);
    const Cvec sby = bf.apply_layer(1, Layer::B, psi);
    const Cvec sbz = bf.apply_layer(2, Layer::B, psi);
    p.s_a_z = real_expect(psi, saz);
    p.s_b_z = real_expect(psi, sbz);
    p.n_pair = p.s_a_z - p.s_b_z + n_occ;

    auto variance = [&](const Cvec& u, const Cvec& v, double sign) {
      // Var[U + sign V] with O psi = u + sign v
      const Cvec opsi = u + sign * v;
      const double mean = real_expect(psi, opsi);
      return opsi.squaredNorm() - mean * mean;
    };
    p.var_minus_1 = variance(sax, sby, +1.0);
    p.var_minus_2 = variance(say, sbx, -1.0);
    p.var_plus_1 = variance(sax, sby, -1.0);
    p.var_plus_2 = variance(say, sbx, +1.0);
    p.var_minus = 0.5 * (p.var_minus_1 + p.var_minus_2);
    p.var_plus = 0.5 * (p.var_plus_1 + p.var_plus_2);
    p.spin_length = sax.squaredNorm() + say.squaredNorm() + saz.squaredNorm() +
                    sbx.squaredNorm() + sby.squaredNorm() + sbz.squaredNorm();
    out.points.push_back(p);
  }
  return out;
}

}  // namespace bilayer
