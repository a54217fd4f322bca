#include <doctest.h>

#include <cmath>
#include <set>

#include "bilayer/lattice.hpp"

using namespace bilayer;

namespace {

LatticeSpec spec(int side, double a_z, double alpha, double filling = 1.0,
                 std::uint64_t seed = 0) {
  LatticeSpec s;
  s.side = side;
  s.a_z = a_z;
  s.alpha = alpha;
  s.filling = filling;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("build_sites geometry") {
  SUBCASE("smallest lattice: two stacked sites") {
    const SiteSet s = build_sites(spec(1, 2.0, 3.0));
    REQUIRE(s.total_sites() == 2);
    CHECK(s.positions[0].x == 0);
    CHECK(s.positions[0].z == 0);
    CHECK(s.positions[1].z == 2.0);
    CHECK(s.layer[0] == Layer::A);
    CHECK(s.layer[1] == Layer::B);
  }
  SUBCASE("L=70 has 9800 sites") {
    const SiteSet s = build_sites(spec(70, 2.0, 0.0));
    CHECK(s.total_sites() == 9800);
    CHECK(s.occupied_count(Layer::A) == 4900);
  }
  SUBCASE("L=2 per-layer positions enumerate the unit square") {
    const SiteSet s = build_sites(spec(2, 1.0, 3.0));
    std::set<std::pair<double, double>> got;
    for (std::size_t i = 0; i < 4; ++i) got.insert({s.positions[i].x, s.positions[i].y});
    const std::set<std::pair<double, double>> want{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    CHECK(got == want);
  }
  SUBCASE("invalid specs are rejected") {
    CHECK_THROWS_AS(build_sites(spec(0, 2.0, 3.0)), ParameterError);
    CHECK_THROWS_AS(build_sites(spec(2, -1.0, 3.0)), ParameterError);
    CHECK_THROWS_AS(build_sites(spec(2, 2.0, -0.5)), ParameterError);
    CHECK_THROWS_AS(build_sites(spec(2, 2.0, 3.0, 1.5)), ParameterError);
  }
}

TEST_CASE("apply_filling") {
  SUBCASE("unit filling keeps everything") {
    const SiteSet s = build_sites(spec(4, 2.0, 3.0, 1.0));
    CHECK(s.occupied_count(Layer::A) == 16);
    CHECK(s.occupied_count(Layer::B) == 16);
  }
  SUBCASE("10% of L=70 is 490 per layer") {
    const SiteSet s = build_sites(spec(70, 2.0, 3.0, 0.1, 11));
    CHECK(s.occupied_count(Layer::A) == 490);
    CHECK(s.occupied_count(Layer::B) == 490);
  }
  SUBCASE("deterministic given the seed") {
    const SiteSet a = build_sites(spec(8, 2.0, 3.0, 0.4, 123));
    const SiteSet b = build_sites(spec(8, 2.0, 3.0, 0.4, 123));
    const SiteSet c = build_sites(spec(8, 2.0, 3.0, 0.4, 124));
    CHECK(a.occupied == b.occupied);
    CHECK(a.occupied != c.occupied);
  }
  SUBCASE("degenerate filling is an error") {
    CHECK_THROWS_AS(build_sites(spec(2, 2.0, 3.0, 0.1)), DegenerateFillingError);
  }
}

TEST_CASE("compute_couplings values") {
  const SiteSet s = build_sites(spec(2, 2.0, 3.0));
  SUBCASE("nearest in-plane neighbors at alpha=3") {
    const CouplingMatrix c = compute_couplings(s, 3.0);
    CHECK(c(0, 1) == doctest::Approx(1.0));                  // distance 1
    CHECK(c(0, 4) == doctest::Approx(1.0 / 8.0));            // stacked pair, distance 2
    CHECK(c(0, 3) == doctest::Approx(std::pow(2.0, -1.5)));  // in-plane diagonal
  }
  SUBCASE("alpha=0 gives 1 for every pair") {
    const CouplingMatrix c = compute_couplings(s, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j) CHECK(c(i, j) == (i == j ? 0.0 : 1.0));
  }
  SUBCASE("coincident sites rejected") {
    SiteSet bad = s;
    bad.positions[1] = bad.positions[0];
    CHECK_THROWS_AS(compute_couplings(bad, 3.0), GeometryError);
  }
}

TEST_CASE("average_inter_coupling") {
  SUBCASE("alpha=0 gives exactly 1") {
    const SiteSet s = build_sites(spec(3, 2.0, 0.0));
    CHECK(average_inter_coupling(compute_couplings(s, 0.0)) == doctest::Approx(1.0));
  }
  SUBCASE("single stacked pair") {
    const SiteSet s = build_sites(spec(1, 2.0, 3.0));
    CHECK(average_inter_coupling(compute_couplings(s, 3.0)) == doctest::Approx(0.125));
  }
  SUBCASE("L=2, a_Z=2, alpha=3 by direct offset enumeration") {
    // 16 inter-layer pairs: 4 stacked (d=2), 8 at in-plane offset 1 (d=sqrt5),
    // 4 at the diagonal (d=sqrt6)
    const double expect =
        (4 * std::pow(2.0, -3.0) + 8 * std::pow(5.0, -1.5) + 4 * std::pow(6.0, -1.5)) / 16.0;
    CHECK(expect == doctest::Approx(0.092982).epsilon(1e-5));
    const SiteSet s = build_sites(spec(2, 2.0, 3.0));
    CHECK(average_inter_coupling(compute_couplings(s, 3.0)) ==
          doctest::Approx(expect).epsilon(1e-14));
  }
  SUBCASE("empty layer is an error") {
    CouplingMatrix c;
    c.n_a = 2;
    c.n_b = 0;
    c.v.assign(4, 1.0);
    CHECK_THROWS_AS(average_inter_coupling(c), DegenerateFillingError);
  }
}

TEST_CASE("coupling matrix invariants") {
  auto rng_sites = build_sites(spec(5, 1.7, 2.3, 0.6, 42));
  SUBCASE("symmetry") {
    const CouplingMatrix c = compute_couplings(rng_sites, 2.3);
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j) CHECK(c(i, j) == c(j, i));
  }
  SUBCASE("monotonicity in alpha") {
    const CouplingMatrix lo = compute_couplings(rng_sites, 1.5);
    const CouplingMatrix hi = compute_couplings(rng_sites, 2.5);
    const auto idx = rng_sites.occupied_indices();
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = a + 1; b < idx.size(); ++b) {
        const Vec3 &ra = rng_sites.positions[idx[a]], &rb = rng_sites.positions[idx[b]];
        const double d = std::sqrt((ra.x - rb.x) * (ra.x - rb.x) + (ra.y - rb.y) * (ra.y - rb.y) +
                                   (ra.z - rb.z) * (ra.z - rb.z));
        if (d > 1.0) CHECK(hi(a, b) <= lo(a, b));
        if (d < 1.0) CHECK(hi(a, b) >= lo(a, b));
      }
  }
  SUBCASE("translation invariance") {
    SiteSet shifted = rng_sites;
    for (auto& p : shifted.positions) {
      p.x += 3.25;
      p.y -= 1.5;
      p.z += 0.75;
    }
    const CouplingMatrix a = compute_couplings(rng_sites, 2.3);
    const CouplingMatrix b = compute_couplings(shifted, 2.3);
    for (std::size_t k = 0; k < a.v.size(); ++k)
      CHECK(a.v[k] == doctest::Approx(b.v[k]).epsilon(1e-12));
  }
  SUBCASE("large layer separation homogenizes inter-layer couplings") {
    const CouplingMatrix c = compute_couplings(build_sites(spec(4, 400.0, 3.0)), 3.0);
    double vmin = 1e300, vmax = 0;
    for (std::size_t i = 0; i < c.n_a; ++i)
      for (std::size_t j = c.n_a; j < c.size(); ++j) {
        vmin = std::min(vmin, c(i, j));
        vmax = std::max(vmax, c(i, j));
      }
    CHECK(vmax / vmin < 1.01);
  }
}
