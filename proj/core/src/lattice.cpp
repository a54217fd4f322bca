#include "bilayer/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bilayer/rng.hpp"

namespace bilayer {

void LatticeSpec::validate() const {
  if (side < 1) throw ParameterError("lattice side must be >= 1");
  if (!(a_lat > 0)) throw ParameterError("a_lat must be positive");
  if (!(a_z > 0)) throw ParameterError("a_Z must be positive");
  if (!(alpha >= 0)) throw ParameterError("alpha must be >= 0");
  if (!(filling > 0) || filling > 1.0) throw ParameterError("filling must be in (0, 1]");
}

std::size_t SiteSet::occupied_count(Layer which) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < positions.size(); ++i)
    if (occupied[i] && layer[i] == which) ++n;
  return n;
}

std::vector<std::size_t> SiteSet::occupied_indices() const {
  std::vector<std::size_t> idx;
  idx.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i)
    if (occupied[i] && layer[i] == Layer::A) idx.push_back(i);
  for (std::size_t i = 0; i < positions.size(); ++i)
    if (occupied[i] && layer[i] == Layer::B) idx.push_back(i);
  return idx;
}

SiteSet build_sites(const LatticeSpec& spec) {
  spec.validate();
  const int L = spec.side;
  SiteSet sites;
  sites.side = L;
  sites.a_lat = spec.a_lat;
  sites.a_z = spec.a_z;
  const std::size_t n = static_cast<std::size_t>(L) * L;
  sites.positions.reserve(2 * n);
  sites.layer.reserve(2 * n);
  for (int pass = 0; pass < 2; ++pass) {
    const double z = pass == 0 ? 0.0 : spec.a_z;
    for (int iy = 0; iy < L; ++iy)
      for (int ix = 0; ix < L; ++ix) {
        sites.positions.push_back({ix * spec.a_lat, iy * spec.a_lat, z});
        sites.layer.push_back(pass == 0 ? Layer::A : Layer::B);
      }
  }
  sites.occupied.assign(2 * n, 1);
  return apply_filling(std::move(sites), spec.filling, spec.seed);
}

SiteSet apply_filling(SiteSet sites, double filling, std::uint64_t seed) {
  if (!(filling > 0) || filling > 1.0) throw ParameterError("filling must be in (0, 1]");
  const std::size_t per_layer = sites.positions.size() / 2;
  const std::size_t keep = static_cast<std::size_t>(std::llround(filling * per_layer));
  if (keep == 0)
    throw DegenerateFillingError("round(filling * L^2) = 0 leaves a layer empty");
  if (keep == per_layer) {
    std::fill(sites.occupied.begin(), sites.occupied.end(), 1);
    return sites;
  }
  std::fill(sites.occupied.begin(), sites.occupied.end(), 0);
  for (int pass = 0; pass < 2; ++pass) {
    auto rng = make_stream_rng(seed, static_cast<std::uint64_t>(pass));
    std::vector<std::size_t> pool(per_layer);
    std::iota(pool.begin(), pool.end(), pass == 0 ? 0 : per_layer);
    // partial Fisher-Yates: the first `keep` entries are the sample
    for (std::size_t k = 0; k < keep; ++k) {
      const std::size_t j = k + uniform_index(rng, per_layer - k);
      std::swap(pool[k], pool[j]);
      sites.occupied[pool[k]] = 1;
    }
  }
  return sites;
}

CouplingMatrix compute_couplings(const SiteSet& sites, double alpha) {
  const auto idx = sites.occupied_indices();
  CouplingMatrix c;
  c.alpha = alpha;
  c.n_a = sites.occupied_count(Layer::A);
  c.n_b = idx.size() - c.n_a;
  const std::size_t m = idx.size();
  c.v.assign(m * m, 0.0);
  for (std::size_t a = 0; a < m; ++a) {
    const Vec3& ra = sites.positions[idx[a]];
    for (std::size_t b = a + 1; b < m; ++b) {
      const Vec3& rb = sites.positions[idx[b]];
      const double dx = ra.x - rb.x, dy = ra.y - rb.y, dz = ra.z - rb.z;
      const double d2 = dx * dx + dy * dy + dz * dz;
      if (d2 <= 0.0) throw GeometryError("coincident sites in coupling matrix");
      // alpha = 0 is infinite range by definition, not pow(d, 0)
      const double vij = alpha == 0.0 ? 1.0 : std::pow(d2, -0.5 * alpha);
      c.v[a * m + b] = vij;
      c.v[b * m + a] = vij;
    }
  }
  return c;
}

double average_inter_coupling(const CouplingMatrix& couplings) {
  if (couplings.n_a == 0 || couplings.n_b == 0)
    throw DegenerateFillingError("average inter-layer coupling needs both layers occupied");
  const std::size_t m = couplings.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < couplings.n_a; ++i)
    for (std::size_t j = couplings.n_a; j < m; ++j) sum += couplings.v[i * m + j];
  return sum / (static_cast<double>(couplings.n_a) * static_cast<double>(couplings.n_b));
}

}  // namespace bilayer
