#pragma once

#include <vector>

#include "omtopo/lattice.hpp"

namespace omtopo {

enum class ModeLabel { End, Bulk };

// Eigenvalues with localization on the two terminal unit cells.  A mode is
// End-labeled when more than half its weight sits on cells 1 and N; for
// eigenvalues degenerate within 1e-10 the weight is evaluated on the
// degenerate subspace as a whole (projector trace), which deliberately
// classifies symmetric degenerate manifolds as delocalized.
struct SpectrumReport {
  Eigen::VectorXcd eigenvalues;
  Eigen::MatrixXcd eigenvectors;      // columns, same order
  Eigen::VectorXd localization;       // in [0, 1]
  std::vector<ModeLabel> labels;
  double im_e_end;                    // max Im over End modes (NaN if none)
  double im_e_bulk_max;
  double im_e_bulk_min;
  int end_count() const noexcept;
};

SpectrumReport eigenspectrum(const NHOperator& op);

enum class PhaseRegion { A, B, C, D, E, Boundary };

struct PhaseLabel {
  PhaseRegion region;
  bool stable_end;
  bool stable_bulk;
  double im_e_end;        // OBC end-mode measure
  double bulk_im_max;     // Bloch band-edge measures (dense k sweep)
  double bulk_im_absmin;
};

struct PhaseTolerances {
  double delta_gap = 1e-3;      // units of kappa; band-gap width separating D/E
  double boundary_tol = 1e-9;   // classification margins below this => Boundary
  int bloch_samples = 256;
};

// Region semantics along growing drive: A end mode inside the bulk band,
// B end mode above the band but stable, C end modes unstable with stable
// bulk, D unstable bulk band touching Im E = 0, E unstable bulk with an
// open gap around Im E = 0.  Bulk band edges come from a dense Bloch sweep
// (an OBC bulk spectrum at N~10 is too coarse to resolve the D/E gap).
PhaseLabel classify_phase(const ChainParams& params,
                          const PhaseTolerances& tol = {});

struct SweepRow {
  double g_plus;
  double im_e_end;
  double im_e_bulk_max;
  double im_e_twosite;  // largest pole of the two-site reduced model
};

std::vector<SweepRow> sweep_line(const ChainParams& base, double g_plus_min,
                                 double g_plus_max, int steps,
                                 int threads = 0);

struct PhasePoint {
  double g_minus;
  double g_plus;
  PhaseLabel label;
};

std::vector<PhasePoint> phase_diagram(const ChainParams& base,
                                      double g_minus_min, double g_minus_max,
                                      int g_minus_steps, double g_plus_min,
                                      double g_plus_max, int g_plus_steps,
                                      const PhaseTolerances& tol = {},
                                      int threads = 0);

char region_letter(PhaseRegion r) noexcept;

}  // namespace omtopo
