#include "omtopo/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "omtopo/errors.hpp"
#include "omtopo/twosite.hpp"
#include "test_helpers.hpp"

using namespace omtopo;

namespace {

ChainParams baseline() {
  ChainParams p;
  p.g_plus = 0.242;
  p.g_minus = 1.0;
  p.j_hop = 0.5;
  p.kappa = 1.0;
  p.gamma = 1e-4;
  p.n_cells = 10;
  return p;
}

// Indices of the n most terminal-cell-localized modes, most localized first.
std::vector<int> most_localized(const SpectrumReport& rep, int n) {
  std::vector<int> order(rep.localization.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return rep.localization(a) > rep.localization(b);
  });
  order.resize(n);
  return order;
}

}  // namespace

TEST_CASE("baseline open chain carries eight protected end modes") {
  const SpectrumReport rep = eigenspectrum(build_chain(baseline()));
  REQUIRE(rep.end_count() == 8);

  int slow = 0, fast = 0;
  for (int i = 0; i < rep.eigenvalues.size(); ++i) {
    if (rep.labels[i] != ModeLabel::End) continue;
    CHECK(std::abs(rep.eigenvalues(i).real()) < 1e-8);
    const double im = rep.eigenvalues(i).imag();
    if (std::abs(im - (-4.074570332398e-4)) < 1e-10) ++slow;
    if (std::abs(im - (-0.594880673)) < 1e-6) ++fast;
  }
  // two quadruplets: a long-lived one and a strongly damped one
  CHECK(slow == 4);
  CHECK(fast == 4);
  CHECK(rep.im_e_end == doctest::Approx(-4.074570332398e-4).epsilon(1e-9));
  CHECK(rep.im_e_bulk_max == doctest::Approx(-0.028435986423818).epsilon(1e-9));

  // bulk modes keep a real gap the end modes sit inside
  double bulk_re_min = 1e300;
  for (int i = 0; i < rep.eigenvalues.size(); ++i) {
    if (rep.labels[i] == ModeLabel::Bulk) {
      bulk_re_min = std::min(bulk_re_min, std::abs(rep.eigenvalues(i).real()));
    }
  }
  CHECK(bulk_re_min == doctest::Approx(0.048579404844).epsilon(1e-6));
}

TEST_CASE("degenerate damping clusters count as bulk") {
  ChainParams p = baseline();
  p.g_plus = p.g_minus = p.j_hop = 0.0;
  const SpectrumReport rep = eigenspectrum(build_chain(p));
  CHECK(rep.end_count() == 0);
  int at_kappa = 0, at_gamma = 0;
  for (int i = 0; i < rep.eigenvalues.size(); ++i) {
    CHECK(std::abs(rep.eigenvalues(i).real()) < 1e-14);
    if (std::abs(rep.eigenvalues(i).imag() + 0.5) < 1e-12) ++at_kappa;
    if (std::abs(rep.eigenvalues(i).imag() + 5e-5) < 1e-12) ++at_gamma;
  }
  CHECK(at_kappa == 80);
  CHECK(at_gamma == 80);
}

TEST_CASE("periodic chains have no end modes") {
  ChainParams p = baseline();
  p.boundary = Boundary::PBC;
  const SpectrumReport rep = eigenspectrum(build_chain(p));
  CHECK(rep.end_count() == 0);
  CHECK(std::isnan(rep.im_e_end));
  CHECK(rep.im_e_bulk_max < 0.0);
}

TEST_CASE("protected quadruplet splitting decays with chain length") {
  // All eight strongly localized near-zero-real modes exist from N=4 on, but
  // one quadruplet carries a finite-size real splitting that shrinks by
  // roughly 17x per added cell; |Re E| < 1e-8 for all eight first holds at
  // N=7.
  const double expected_split[] = {4.270e-6, 2.509e-7, 1.474e-8, 8.66e-10};
  for (int n = 4; n <= 7; ++n) {
    ChainParams p = baseline();
    p.n_cells = n;
    const SpectrumReport rep = eigenspectrum(build_chain(p));
    std::vector<double> re;
    for (int i = 0; i < rep.eigenvalues.size(); ++i) {
      if (rep.localization(i) > 0.9 &&
          std::abs(rep.eigenvalues(i).real()) < 1e-3) {
        re.push_back(std::abs(rep.eigenvalues(i).real()));
      }
    }
    REQUIRE(re.size() == 8);
    std::sort(re.begin(), re.end());
    for (int i = 0; i < 4; ++i) CHECK(re[i] < 1e-10);
    for (int i = 4; i < 8; ++i) {
      CHECK(re[i] == doctest::Approx(expected_split[n - 4]).epsilon(0.05));
    }
  }
  for (int n : {7, 8}) {
    ChainParams p = baseline();
    p.n_cells = n;
    const SpectrumReport rep = eigenspectrum(build_chain(p));
    CHECK(rep.end_count() == 8);
    for (int i = 0; i < rep.eigenvalues.size(); ++i) {
      if (rep.labels[i] == ModeLabel::End) {
        CHECK(std::abs(rep.eigenvalues(i).real()) < 1e-8);
      }
    }
  }
}

TEST_CASE("end damping is independent of chain length") {
  double ime[2];
  int idx = 0;
  for (int n : {8, 16}) {
    ChainParams p = baseline();
    p.n_cells = n;
    ime[idx++] = eigenspectrum(build_chain(p)).im_e_end;
  }
  CHECK(std::abs(ime[0] - ime[1]) < 1e-6);
}

TEST_CASE("phase classification walks the drive axis through all regions") {
  struct Expect {
    double gp;
    PhaseRegion region;
    double ime;
    double bmax;
  };
  const Expect table[] = {
      {0.05, PhaseRegion::A, -0.094756477, -0.090410331},
      {0.2, PhaseRegion::B, -0.028306005, -0.048348505},
      {0.242, PhaseRegion::B, -4.074570332e-4, -0.026515071},
      {0.26, PhaseRegion::C, 0.012355601, -0.015861849},
      {0.35, PhaseRegion::D, 0.081667556, 0.047087444},
      {1.0, PhaseRegion::E, 0.691595516, 0.661346154},
  };
  for (const Expect& e : table) {
    ChainParams p = baseline();
    p.g_plus = e.gp;
    const PhaseLabel lab = classify_phase(p);
    CHECK(lab.region == e.region);
    CHECK(lab.im_e_end == doctest::Approx(e.ime).epsilon(1e-6));
    CHECK(lab.bulk_im_max == doctest::Approx(e.bmax).epsilon(1e-6));
    // flags are implied by the region
    const bool end_ok = lab.stable_end;
    const bool bulk_ok = lab.stable_bulk;
    switch (e.region) {
      case PhaseRegion::A:
      case PhaseRegion::B:
        CHECK(end_ok);
        CHECK(bulk_ok);
        break;
      case PhaseRegion::C:
        CHECK_FALSE(end_ok);
        CHECK(bulk_ok);
        break;
      case PhaseRegion::D:
      case PhaseRegion::E:
        CHECK_FALSE(bulk_ok);
        break;
      default:
        break;
    }
  }
  // the gapless D region closes into a gap by delta_gap at E
  ChainParams d = baseline();
  d.g_plus = 0.35;
  CHECK(classify_phase(d).bulk_im_absmin < 1e-3);
  ChainParams e = baseline();
  e.g_plus = 1.0;
  CHECK(classify_phase(e).bulk_im_absmin > 1e-3);
}

TEST_CASE("marginal calls are reported as boundaries, not guesses") {
  ChainParams p = baseline();
  PhaseTolerances tol;
  tol.boundary_tol = 1.0;  // absurdly wide margin forces the ambiguous path
  CHECK(classify_phase(p, tol).region == PhaseRegion::Boundary);
}

TEST_CASE("drive sweeps bracket the end instability") {
  const std::vector<SweepRow> rows = sweep_line(baseline(), 0.242, 0.26, 5);
  REQUIRE(rows.size() == 5);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].g_plus > rows[i - 1].g_plus);
  }
  CHECK(rows.front().g_plus == 0.242);
  CHECK(rows.back().g_plus == 0.26);
  CHECK(rows.front().im_e_end < 0.0);
  CHECK(rows.back().im_e_end > 0.0);
  // overlay column is the reduced model evaluated on the same grid
  for (const SweepRow& r : rows) {
    TwoSiteParams frag;
    frag.g_plus = r.g_plus;
    const double expect = twosite_im_max(frag);
    CHECK(r.im_e_twosite == expect);
  }
}

TEST_CASE("single-step sweep degenerates to one spectrum row") {
  const std::vector<SweepRow> rows = sweep_line(baseline(), 0.242, 0.242, 1);
  REQUIRE(rows.size() == 1);
  const SpectrumReport rep = eigenspectrum(build_chain(baseline()));
  CHECK(rows[0].im_e_end == rep.im_e_end);
  CHECK(rows[0].im_e_bulk_max == rep.im_e_bulk_max);
}

TEST_CASE("sweep output does not depend on the thread count") {
  const std::vector<SweepRow> one = sweep_line(baseline(), 0.0, 0.3, 7, 1);
  const std::vector<SweepRow> four = sweep_line(baseline(), 0.0, 0.3, 7, 4);
  REQUIRE(one.size() == four.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].g_plus == four[i].g_plus);
    CHECK(one[i].im_e_end == four[i].im_e_end);
    CHECK(one[i].im_e_bulk_max == four[i].im_e_bulk_max);
    CHECK(one[i].im_e_twosite == four[i].im_e_twosite);
  }
}

TEST_CASE("two-site overlay tracks the chain end measure within band") {
  // the reduced model stays within 0.05 kappa of the chain over the sweep
  const std::vector<SweepRow> rows = sweep_line(baseline(), 0.0, 0.4, 9);
  for (const SweepRow& r : rows) {
    CHECK(std::abs(r.im_e_end - r.im_e_twosite) < 0.05);
  }
}

TEST_CASE("phase diagram grid is consistent with pointwise classification") {
  SUBCASE("degenerate 1x1 grid") {
    const auto grid = phase_diagram(baseline(), 1.0, 1.0, 1, 0.26, 0.26, 1);
    REQUIRE(grid.size() == 1);
    CHECK(grid[0].g_minus == 1.0);
    CHECK(grid[0].g_plus == 0.26);
    ChainParams p = baseline();
    p.g_plus = 0.26;
    const PhaseLabel direct = classify_phase(p);
    CHECK(grid[0].label.region == direct.region);
    CHECK(grid[0].label.im_e_end == direct.im_e_end);
  }
  SUBCASE("zero drive row is entirely stable") {
    const auto grid = phase_diagram(baseline(), 0.5, 1.0, 3, 0.0, 0.0, 1);
    REQUIRE(grid.size() == 3);
    for (const PhasePoint& pt : grid) {
      CHECK(pt.label.stable_end);
      CHECK(pt.label.stable_bulk);
    }
  }
  SUBCASE("grid coordinates are row-major in g_minus then g_plus") {
    const auto grid = phase_diagram(baseline(), 0.9, 1.0, 2, 0.05, 0.26, 2);
    REQUIRE(grid.size() == 4);
    CHECK(grid[0].g_minus == 0.9);
    CHECK(grid[0].g_plus == 0.05);
    CHECK(grid[1].g_minus == 0.9);
    CHECK(grid[1].g_plus == 0.26);
    CHECK(grid[2].g_minus == 1.0);
    CHECK(grid[3].g_plus == 0.26);
  }
}

TEST_CASE("hop disorder splits the end quadruplets into pairs") {
  const DisorderSpec spec{DisorderKind::HoppingJ, 0.1, 7};
  const SpectrumReport rep = eigenspectrum(build_chain(baseline(), {spec}));
  // disorder also traps some bulk modes near the ends; the 8 genuinely
  // protected modes separate cleanly as the most localized ones
  CHECK(rep.end_count() == 12);
  const std::vector<int> end8 = most_localized(rep, 8);
  std::vector<double> ims;
  for (int i : end8) {
    CHECK(rep.localization(i) > 0.99);
    CHECK(std::abs(rep.eigenvalues(i).real()) < 1e-8);
    ims.push_back(rep.eigenvalues(i).imag());
  }
  std::sort(ims.begin(), ims.end());
  const double expected[] = {-0.595209799, -0.595209799, -0.59500634,
                             -0.59500634,  0.002396239,  0.002396239,
                             0.010073722,  0.010073722};
  for (int i = 0; i < 8; ++i) {
    CHECK(ims[i] == doctest::Approx(expected[i]).epsilon(1e-6));
  }
  // former quadruplets now split into resolved pairs
  CHECK(ims[2] - ims[0] > 1e-5);
  CHECK(ims[7] - ims[5] > 1e-4);
  CHECK(std::abs(ims[1] - ims[0]) < 1e-9);
  CHECK(std::abs(ims[7] - ims[6]) < 1e-9);
}

TEST_CASE("frequency disorder shifts end modes off the imaginary axis") {
  const DisorderSpec spec{DisorderKind::MechFrequency, 0.01, 7};
  const SpectrumReport rep = eigenspectrum(build_chain(baseline(), {spec}));
  const std::vector<int> end8 = most_localized(rep, 8);
  double end_re_max = 0.0;
  for (int i : end8) {
    CHECK(rep.localization(i) > 0.99);
    end_re_max = std::max(end_re_max, std::abs(rep.eigenvalues(i).real()));
  }
  double rest_re_min = 1e300;
  for (int i = 0; i < rep.eigenvalues.size(); ++i) {
    if (std::find(end8.begin(), end8.end(), i) == end8.end()) {
      rest_re_min = std::min(rest_re_min, std::abs(rep.eigenvalues(i).real()));
    }
  }
  CHECK(end_re_max == doctest::Approx(0.004388).epsilon(0.05));
  CHECK(rest_re_min == doctest::Approx(0.048271).epsilon(0.02));
  CHECK(end_re_max > 0.0);
  CHECK(end_re_max < 0.3 * rest_re_min);
}

TEST_CASE("end linewidth renormalization shifts the end damping slightly") {
  const SpectrumReport clean = eigenspectrum(build_chain(baseline()));
  const DisorderSpec gend{DisorderKind::EndGamma, 100.0, 0};
  const SpectrumReport renorm = eigenspectrum(build_chain(baseline(), {gend}));
  CHECK(renorm.end_count() == 8);
  CHECK(renorm.im_e_end == doctest::Approx(-0.003949).epsilon(2e-3));
  const double shift = std::abs(renorm.im_e_end - clean.im_e_end);
  CHECK(shift == doctest::Approx(3.542e-3).epsilon(0.02));
  // The end mode keeps ~3/4 of its weight on the terminal mechanical sites,
  // so a 99-gamma linewidth bump must shift Im E_e by about half of that
  // times 99*gamma = 3.5e-3 -- which exceeds one tenth of the bulk gap
  // (2.84e-3).  The often-quoted "essentially unchanged" 10% threshold is
  // therefore not attainable at these parameters; pinned here, expected-fail
  // in the acceptance gate.
  CHECK(shift > 0.1 * std::abs(clean.im_e_bulk_max));
  CHECK(shift < 0.13 * std::abs(clean.im_e_bulk_max));
}

TEST_CASE("spectrum rejects malformed operators") {
  NHOperator bad;
  bad.matrix = Eigen::MatrixXcd::Zero(4, 4);
  bad.matrix(1, 2) = std::numeric_limits<double>::quiet_NaN();
  bad.n_cells = 1;
  CHECK_THROWS_AS((void)eigenspectrum(bad), ValidationError);

  NHOperator empty;
  empty.matrix = Eigen::MatrixXcd::Zero(0, 0);
  CHECK_THROWS_AS((void)eigenspectrum(empty), ValidationError);
}

TEST_CASE("sweep and grid argument validation") {
  CHECK_THROWS_AS((void)sweep_line(baseline(), 0.3, 0.1, 5), ValidationError);
  CHECK_THROWS_AS((void)sweep_line(baseline(), 0.1, 0.3, 0), ValidationError);
  CHECK_THROWS_AS(
      (void)phase_diagram(baseline(), 1.0, 0.5, 2, 0.0, 0.1, 2),
      ValidationError);
  PhaseTolerances tol;
  tol.bloch_samples = 2;
  CHECK_THROWS_AS((void)classify_phase(baseline(), tol), ValidationError);
}
