#pragma once

#include <cstdint>

#include "omtopo/errors.hpp"

namespace omtopo {

enum class Boundary { OBC, PBC };

// Geometry: N four-site unit cells, each site carrying one optical and one
// mechanical mode.  Sites 1 and 4 of a cell are "blue" (parametric pairing
// G+), sites 2 and 3 are "red" (beam-splitter G-).  All rates are quoted in
// units of the optical linewidth kappa.
struct ChainParams {
  double g_plus = 0.242;
  double g_minus = 1.0;
  double j_hop = 0.5;
  double kappa = 1.0;
  double gamma = 1e-4;
  double n_c = 0.0;  // optical bath occupation
  double n_m = 0.0;  // mechanical bath occupation
  int n_cells = 10;
  Boundary boundary = Boundary::OBC;

  int sites() const noexcept { return 4 * n_cells; }
  int modes() const noexcept { return 8 * n_cells; }
  int doubled_dim() const noexcept { return 16 * n_cells; }
  void validate() const;
};

// Beyond this the doubled dense operator passes the gigabyte scale and the
// dense solvers here stop being the right tool.
inline constexpr int kMaxCells = 512;

enum class DisorderKind { HoppingJ, MechFrequency, EndGamma, OpticalHopping };

// amplitude semantics by kind:
//   HoppingJ       relative: each bond offset uniform in [-amp*J, +amp*J]
//   MechFrequency  absolute detuning (units of kappa): uniform in [-amp, +amp]
//   EndGamma       deterministic multiplier on gamma at the two end sites
//   OpticalHopping absolute hop strength: uniform in [-amp, +amp] per bond
struct DisorderSpec {
  DisorderKind kind = DisorderKind::HoppingJ;
  double amplitude = 0.0;
  std::uint64_t seed = 0;
  void validate() const;
};

struct TwoSiteParams {
  double g_plus = 0.0;
  double g_minus = 1.0;
  double j_hop = 0.5;
  double kappa = 1.0;
  double gamma = 1e-4;
  void validate() const;
};

}  // namespace omtopo
