#ifndef BILAYER_LATTICE_HPP
#define BILAYER_LATTICE_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bilayer/errors.hpp"

namespace bilayer {

enum class Layer : std::uint8_t { A = 0, B = 1 };

struct Vec3 {
  double x = 0, y = 0, z = 0;
};

// Geometry of an L x L bilayer with power-law couplings. Units: a_lat = 1
// energy unit = coupling at unit distance, hbar = 1.
struct LatticeSpec {
  int side = 1;          // L, sites per side of each square layer
  double a_lat = 1.0;    // in-plane spacing
  double a_z = 1.0;      // inter-layer spacing, in units of a_lat
  double alpha = 0.0;    // power-law exponent, >= 0
  double filling = 1.0;  // mean occupancy fraction, in (0, 1]
  std::uint64_t seed = 0;

  void validate() const;
};

// Full bilayer site list with an occupancy mask. Sites are ordered layer A
// first (row-major over (ix, iy)), then layer B in the same order.
struct SiteSet {
  int side = 0;
  double a_lat = 1.0;
  double a_z = 1.0;
  std::vector<Vec3> positions;
  std::vector<Layer> layer;
  std::vector<char> occupied;

  std::size_t total_sites() const { return positions.size(); }
  std::size_t occupied_count(Layer which) const;
  // Indices of occupied sites, all of layer A first, then layer B.
  std::vector<std::size_t> occupied_indices() const;
};

// Dense symmetric coupling matrix over occupied sites only, layer A block
// first. V(i,i) = 0.
struct CouplingMatrix {
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  double alpha = 0.0;
  std::vector<double> v;  // (n_a+n_b)^2, row-major

  std::size_t size() const { return n_a + n_b; }
  double operator()(std::size_t i, std::size_t j) const { return v[i * size() + j]; }
  Layer layer_of(std::size_t i) const { return i < n_a ? Layer::A : Layer::B; }
};

SiteSet build_sites(const LatticeSpec& spec);

// Marks exactly round(filling * L^2) sites per layer as occupied, chosen
// uniformly without replacement and independently per layer.
SiteSet apply_filling(SiteSet sites, double filling, std::uint64_t seed);

// V_ij = |r_i - r_j|^(-alpha); alpha = 0 gives V_ij = 1 for all i != j.
CouplingMatrix compute_couplings(const SiteSet& sites, double alpha);

// V_avg = (1 / (N_A N_B)) sum_{i in A, j in B} V_ij.
double average_inter_coupling(const CouplingMatrix& couplings);

}  // namespace bilayer

#endif
