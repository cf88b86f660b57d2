#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "doctest.h"
#include "support.hpp"
#include "wdmarb/model.hpp"

using namespace wdmarb;
using wdmarb::test::zero_variation;

namespace {

// Every replica j in a generous window, checked one by one.
std::vector<double> codes_oracle(const Ring& ring, double lambda, double eps) {
  std::vector<double> out;
  for (int j = -200; j <= 200; ++j) {
    const double d = lambda - (ring.resonance + j * ring.fsr);
    if (d >= -eps && d <= ring.tr + eps) out.push_back(d);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_SUITE("core-model") {

TEST_CASE("pre-fab laser grid at defaults and a wide grid") {
  const auto grid = pre_fab_laser_grid(DwdmGridSpec{});
  REQUIRE(grid.size() == 8);
  CHECK(grid[0] == doctest::Approx(1296.08).epsilon(1e-12));
  CHECK(grid[7] == doctest::Approx(1303.92).epsilon(1e-12));
  for (int i = 1; i < 8; ++i) CHECK(grid[i] - grid[i - 1] == doctest::Approx(1.12));

  DwdmGridSpec wide;
  wide.n_ch = 16;
  wide.grid_spacing = 2.24;
  CHECK(pre_fab_laser_grid(wide)[8] == doctest::Approx(1301.12).epsilon(1e-12));
}

TEST_CASE("grid and variation validation") {
  DwdmGridSpec g;
  g.n_ch = 1;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = {};
  g.grid_spacing = 0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = {};
  g.ring_bias = -1;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);

  VariationParams v;
  v.ring_local_bound = -0.1;
  CHECK_THROWS_AS(v.validate(), std::invalid_argument);
  v = {};
  v.fsr_mean = 0;
  CHECK_THROWS_AS(v.validate(), std::invalid_argument);
  CHECK_NOTHROW(VariationParams{}.validate());
}

TEST_CASE("orderings") {
  CHECK(SpectralOrdering::natural(4).ranks() == std::vector<int>{0, 1, 2, 3});
  CHECK(SpectralOrdering::permuted(8).ranks() == std::vector<int>{0, 4, 1, 5, 2, 6, 3, 7});
  const auto p = SpectralOrdering::permuted(8);
  for (int i = 0; i < 8; ++i) CHECK(p.ring_at(p.rank_of(i)) == i);
  CHECK_THROWS_AS(SpectralOrdering({0, 0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(SpectralOrdering({0, 3}), std::invalid_argument);
}

TEST_CASE("zero variation laser sample equals the nominal grid") {
  Rng rng(42);
  const MwlSample s = sample_mwl(DwdmGridSpec{}, zero_variation(), rng);
  CHECK(s.wavelengths == pre_fab_laser_grid(DwdmGridSpec{}));
}

TEST_CASE("global offset only shifts every channel by one draw") {
  VariationParams v = zero_variation();
  v.grid_offset_bound = 1.0;
  Rng rng(7);
  const MwlSample s = sample_mwl(DwdmGridSpec{}, v, rng);
  const auto nominal = pre_fab_laser_grid(DwdmGridSpec{});
  CHECK(std::abs(s.grid_offset) <= 1.0);
  for (int i = 0; i < 8; ++i) CHECK(s.wavelengths[i] - nominal[i] == doctest::Approx(s.grid_offset).epsilon(1e-9));
}

TEST_CASE("laser local deviation is uniform on +-0.28 nm (chi-square)") {
  // 10^5 deviations in 20 equal bins; df = 19, 0.1% critical value 43.82.
  const VariationParams v{};
  const auto nominal = pre_fab_laser_grid(DwdmGridSpec{});
  constexpr int kBins = 20;
  std::array<long, kBins> hist{};
  Rng rng(2024);
  long n = 0;
  while (n < 100000) {
    const MwlSample s = sample_mwl(DwdmGridSpec{}, v, rng);
    for (int i = 0; i < 8 && n < 100000; ++i, ++n) {
      const double dev = s.wavelengths[i] - nominal[i] - s.grid_offset;
      REQUIRE(std::abs(dev) <= v.laser_local_bound + 1e-9);
      const int b = std::min(kBins - 1, static_cast<int>((dev + 0.28) / 0.56 * kBins));
      ++hist[b];
    }
  }
  const double expected = static_cast<double>(n) / kBins;
  double chi2 = 0.0;
  for (long h : hist) chi2 += (h - expected) * (h - expected) / expected;
  CHECK(chi2 < 43.82);
}

TEST_CASE("zero variation ring row, natural and permuted") {
  const DwdmGridSpec g{};
  Rng rng(1);
  const RingRowSample nat = sample_ring_row(g, zero_variation(), SpectralOrdering::natural(8), rng);
  CHECK(nat.rings[0].resonance == doctest::Approx(1291.60).epsilon(1e-12));
  CHECK(nat.rings[7].resonance == doctest::Approx(1299.44).epsilon(1e-12));
  CHECK(nat.rings[3].fsr == 8.96);
  CHECK(nat.rings[3].tr == 2.24);

  const RingRowSample perm = sample_ring_row(g, zero_variation(), SpectralOrdering::permuted(8), rng);
  CHECK(perm.order.rank_of(1) == 4);
  CHECK(perm.rings[1].resonance == doctest::Approx(1296.08).epsilon(1e-12));
}

TEST_CASE("ring local variation stays inside its bound") {
  VariationParams v = zero_variation();
  v.ring_local_bound = 2.24;
  const auto nominal = pre_fab_ring_grid(DwdmGridSpec{}, SpectralOrdering::natural(8));
  Rng rng(99);
  for (int t = 0; t < 1000; ++t) {
    const RingRowSample row = sample_ring_row(DwdmGridSpec{}, v, SpectralOrdering::natural(8), rng);
    for (int i = 0; i < 8; ++i) REQUIRE(std::abs(row.rings[i].resonance - nominal[i]) <= 2.24);
  }
}

TEST_CASE("tuner codes") {
  const Ring ring0{1291.60, 8.96, 2.24};
  const auto hit = tuner_codes_for(ring0, 1301.68);
  REQUIRE(hit.size() == 1);
  CHECK(hit[0] == doctest::Approx(1.12).epsilon(1e-9));
  CHECK(tuner_codes_for(ring0, 1296.08).empty());

  // Tuning range past one FSR: both replica windows cover 1292.00 nm.
  const Ring wide{1291.60, 8.96, 10.08};
  const auto two = tuner_codes_for(wide, 1292.00);
  REQUIRE(two.size() == 2);
  const auto oracle = codes_oracle(wide, 1292.00, kDefaultEps);
  REQUIRE(oracle.size() == 2);
  CHECK(two[0] == doctest::Approx(oracle[0]).epsilon(1e-12));
  CHECK(two[1] == doctest::Approx(oracle[1]).epsilon(1e-12));
  CHECK(two[1] - two[0] == doctest::Approx(8.96));
  CHECK(nearest_tuner_code(wide, 1292.00) == doctest::Approx(two[0]));
}

TEST_CASE("tuner codes agree with a replica-by-replica oracle") {
  Rng rng(5);
  for (int t = 0; t < 20000; ++t) {
    const Ring ring{1290.0 + 10.0 * rng.canonical(), 6.0 + 6.0 * rng.canonical(), 14.0 * rng.canonical()};
    const double lambda = 1280.0 + 40.0 * rng.canonical();
    const auto got = tuner_codes_for(ring, lambda);
    const auto want = codes_oracle(ring, lambda, kDefaultEps);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-9));
  }
}

TEST_CASE("reachable lasers at zero variation") {
  const auto in = wdmarb::test::zero_variation_instance();
  for (int p = 0; p < 8; ++p) {
    const auto got = reachable_lasers(in.row.rings[p], in.mwl);
    std::set<int> want{(p + 4) % 8, (p + 5) % 8, (p + 6) % 8};
    CHECK(std::set<int>(got.begin(), got.end()) == want);
  }
  CHECK(reachable_lasers(in.row.rings[0], in.mwl) == std::vector<int>{4, 5, 6});

  const auto fixed = wdmarb::test::zero_variation_instance(0.0);
  for (int p = 0; p < 8; ++p) CHECK(reachable_lasers(fixed.row.rings[p], fixed.mwl) == std::vector<int>{(p + 4) % 8});

  const auto full = wdmarb::test::zero_variation_instance(8.96);
  for (int p = 0; p < 8; ++p) CHECK(reachable_lasers(full.row.rings[p], full.mwl).size() == 8);
}

TEST_CASE("zero variation geometry: rank p sits on laser (p+4) mod 8") {
  const auto in = wdmarb::test::zero_variation_instance();
  for (int p = 0; p < 8; ++p) {
    const double res = in.row.rings[p].resonance;
    const double laser = in.mwl.wavelengths[(p + 4) % 8];
    const double k = std::round((laser - res) / 8.96);
    CHECK(std::abs(laser - res - k * 8.96) < 1e-9);
  }
}

TEST_CASE("property: enlarging tr_mean never shrinks reachability") {
  Rng seeds(11);
  for (int t = 0; t < 500; ++t) {
    VariationParams v{};
    v.ring_local_bound = 4.0 * seeds.canonical();
    v.tr_mean = 0.5 + 6.0 * seeds.canonical();
    const auto in = wdmarb::test::sample_instance(DwdmGridSpec{}, v, SpectralOrdering::natural(8), 1000 + t);
    const double bigger = v.tr_mean + 4.0 * seeds.canonical();
    const RingRowSample wide = in.row.with_tr_mean(bigger);
    for (int i = 0; i < 8; ++i) {
      const auto a = reachable_lasers(in.row.rings[i], in.mwl);
      const auto b = reachable_lasers(wide.rings[i], in.mwl);
      CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
    }
  }
}

TEST_CASE("property: identical seed and parameters give identical samples") {
  const VariationParams v{};
  const TrialSet a = sample_trials(DwdmGridSpec{}, v, SpectralOrdering::permuted(8), 7, 9, 123);
  const TrialSet b = sample_trials(DwdmGridSpec{}, v, SpectralOrdering::permuted(8), 7, 9, 123);
  REQUIRE(a.lasers.size() == 7);
  REQUIRE(a.rows.size() == 9);
  for (std::size_t i = 0; i < a.lasers.size(); ++i) CHECK(a.lasers[i].wavelengths == b.lasers[i].wavelengths);
  for (std::size_t i = 0; i < a.rows.size(); ++i)
    for (int k = 0; k < 8; ++k) {
      CHECK(a.rows[i].rings[k].resonance == b.rows[i].rings[k].resonance);
      CHECK(a.rows[i].rings[k].fsr == b.rows[i].rings[k].fsr);
      CHECK(a.rows[i].rings[k].tr == b.rows[i].rings[k].tr);
    }
  const TrialSet c = sample_trials(DwdmGridSpec{}, v, SpectralOrdering::permuted(8), 7, 9, 124);
  CHECK(c.lasers[0].wavelengths != a.lasers[0].wavelengths);
}

TEST_CASE("property: every deviation within its bound over 10^6 draws") {
  VariationParams v{};
  v.grid_offset_bound = 3.0;
  v.fsr_rel_bound = 0.05;
  v.tr_rel_bound = 0.2;
  const DwdmGridSpec g{};
  const auto laser_nominal = pre_fab_laser_grid(g);
  const auto ring_nominal = pre_fab_ring_grid(g, SpectralOrdering::natural(8));
  Rng rng(77);
  bool ok = true;
  for (int t = 0; t < 125000; ++t) {
    const MwlSample m = sample_mwl(g, v, rng);
    const RingRowSample r = sample_ring_row(g, v, SpectralOrdering::natural(8), rng);
    ok = ok && std::abs(m.grid_offset) <= v.grid_offset_bound;
    for (int i = 0; i < 8; ++i) {
      ok = ok && std::abs(m.wavelengths[i] - laser_nominal[i] - m.grid_offset) <= v.laser_local_bound + 1e-9;
      ok = ok && std::abs(r.rings[i].resonance - ring_nominal[i]) <= v.ring_local_bound + 1e-9;
      ok = ok && std::abs(r.rings[i].fsr - v.fsr_mean) <= v.fsr_rel_bound * v.fsr_mean + 1e-12;
      ok = ok && std::abs(r.rings[i].tr - v.tr_mean) <= v.tr_rel_bound * v.tr_mean + 1e-12;
      ok = ok && r.rings[i].fsr > 0 && r.rings[i].tr >= 0;
    }
  }
  CHECK(ok);
}

TEST_CASE("ring draws are keyed by spectral rank") {
  VariationParams v{};
  Rng a(9), b(9);
  const RingRowSample nat = sample_ring_row(DwdmGridSpec{}, v, SpectralOrdering::natural(8), a);
  const RingRowSample perm = sample_ring_row(DwdmGridSpec{}, v, SpectralOrdering::permuted(8), b);
  for (int rank = 0; rank < 8; ++rank) {
    const Ring& x = nat.rings[nat.order.ring_at(rank)];
    const Ring& y = perm.rings[perm.order.ring_at(rank)];
    CHECK(x.resonance == y.resonance);
    CHECK(x.tr == y.tr);
  }
}

TEST_CASE("derive_seed separates keys") {
  CHECK(derive_seed(1, {0}) != derive_seed(1, {1}));
  CHECK(derive_seed(1, {0}) != derive_seed(2, {0}));
  CHECK(derive_seed(1, {3, 4}) == derive_seed(1, {3, 4}));
  CHECK(derive_seed(1, {3, 4}) != derive_seed(1, {4, 3}));
}

}  // TEST_SUITE
