#include "omtopo/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "omtopo/errors.hpp"
#include "omtopo/parallel.hpp"
#include "omtopo/twosite.hpp"

namespace omtopo {
namespace {

constexpr double kDegeneracyTol = 1e-10;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Row mask selecting both halves of the modes in cells 1 and N.
std::vector<int> terminal_rows(int n_cells) {
  const int ns = 4 * n_cells;
  const int half = 2 * ns;
  std::vector<bool> site_in(ns, false);
  for (int s = 0; s < 4; ++s) site_in[s] = true;
  for (int s = ns - 4; s < ns; ++s) site_in[s] = true;
  std::vector<int> rows;
  for (int s = 0; s < ns; ++s) {
    if (!site_in[s]) continue;
    rows.push_back(2 * s);
    rows.push_back(2 * s + 1);
    rows.push_back(half + 2 * s);
    rows.push_back(half + 2 * s + 1);
  }
  return rows;
}

double mask_weight(const Eigen::MatrixXcd& cols, const std::vector<int>& rows) {
  double on = 0.0;
  for (int r : rows) on += cols.row(r).squaredNorm();
  const double total = cols.squaredNorm();
  return total > 0.0 ? on / total : 0.0;
}

}  // namespace

int SpectrumReport::end_count() const noexcept {
  return static_cast<int>(
      std::count(labels.begin(), labels.end(), ModeLabel::End));
}

SpectrumReport eigenspectrum(const NHOperator& op) {
  const int dim = op.dim();
  if (dim == 0 || op.matrix.rows() != op.matrix.cols()) {
    throw ValidationError("operator must be square and non-empty");
  }
  if (!op.matrix.allFinite()) {
    throw ValidationError("operator has non-finite entries");
  }
  if (op.n_cells < 1) {
    throw ValidationError("operator carries no cell count");
  }

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(op.matrix, true);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigensolver did not converge on a " +
                         std::to_string(dim) + "-dim operator with norm " +
                         std::to_string(op.matrix.norm()));
  }

  SpectrumReport rep;
  rep.eigenvalues = es.eigenvalues();
  rep.eigenvectors = es.eigenvectors();
  rep.localization.resize(dim);

  const std::vector<int> rows = terminal_rows(op.n_cells);

  // Group eigenvalues that coincide within kDegeneracyTol: localization of a
  // degenerate cluster is a property of its invariant subspace, so the whole
  // cluster shares the weight of its orthonormalized span.
  std::vector<int> order(dim);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const Complex ea = rep.eigenvalues(a), eb = rep.eigenvalues(b);
    if (ea.real() != eb.real()) return ea.real() < eb.real();
    return ea.imag() < eb.imag();
  });
  std::vector<int> cluster;
  auto flush = [&](const std::vector<int>& members) {
    if (members.empty()) return;
    if (members.size() == 1) {
      const int i = members[0];
      rep.localization(i) = mask_weight(rep.eigenvectors.col(i), rows);
      return;
    }
    Eigen::MatrixXcd span(dim, members.size());
    for (std::size_t c = 0; c < members.size(); ++c) {
      span.col(c) = rep.eigenvectors.col(members[c]);
    }
    const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(span);
    const Eigen::MatrixXcd q =
        qr.householderQ() *
        Eigen::MatrixXcd::Identity(dim, static_cast<int>(members.size()));
    const double w = mask_weight(q, rows);
    for (int i : members) rep.localization(i) = w;
  };
  for (int idx : order) {
    if (!cluster.empty() &&
        std::abs(rep.eigenvalues(idx) - rep.eigenvalues(cluster.back())) >
            kDegeneracyTol) {
      flush(cluster);
      cluster.clear();
    }
    cluster.push_back(idx);
  }
  flush(cluster);

  // Periodic and Bloch operators have no ends to localize on.
  const bool can_have_ends =
      op.boundary == Boundary::OBC && op.basis == BasisKind::RealSpace;
  rep.labels.resize(dim);
  double end_max = -std::numeric_limits<double>::infinity();
  double bulk_max = -std::numeric_limits<double>::infinity();
  double bulk_min = std::numeric_limits<double>::infinity();
  int n_end = 0;
  for (int i = 0; i < dim; ++i) {
    const bool is_end = can_have_ends && rep.localization(i) > 0.5;
    rep.labels[i] = is_end ? ModeLabel::End : ModeLabel::Bulk;
    const double im = rep.eigenvalues(i).imag();
    if (is_end) {
      ++n_end;
      end_max = std::max(end_max, im);
    } else {
      bulk_max = std::max(bulk_max, im);
      bulk_min = std::min(bulk_min, im);
    }
  }
  rep.im_e_end = n_end > 0 ? end_max : kNaN;
  rep.im_e_bulk_max = n_end < dim ? bulk_max : kNaN;
  rep.im_e_bulk_min = n_end < dim ? bulk_min : kNaN;
  return rep;
}

char region_letter(PhaseRegion r) noexcept {
  switch (r) {
    case PhaseRegion::A:
      return 'A';
    case PhaseRegion::B:
      return 'B';
    case PhaseRegion::C:
      return 'C';
    case PhaseRegion::D:
      return 'D';
    case PhaseRegion::E:
      return 'E';
    case PhaseRegion::Boundary:
      return '?';
  }
  return '?';
}

PhaseLabel classify_phase(const ChainParams& params,
                          const PhaseTolerances& tol) {
  params.validate();
  if (tol.bloch_samples < 8) {
    throw ValidationError("band edges need at least 8 momentum samples");
  }
  if (!(tol.delta_gap > 0.0) || !(tol.boundary_tol >= 0.0)) {
    throw ValidationError("phase tolerances must be positive");
  }

  // End measure from the open chain; band measures from a dense momentum
  // sweep (an open chain of desk size samples the band too coarsely to
  // resolve a delta_gap-wide crossing).
  ChainParams open_chain = params;
  open_chain.boundary = Boundary::OBC;
  const SpectrumReport rep = eigenspectrum(build_chain(open_chain));
  const double ime = rep.im_e_end;
  const bool has_end = !std::isnan(ime);

  double bmax = -std::numeric_limits<double>::infinity();
  double absmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < tol.bloch_samples; ++i) {
    const double k = 2.0 * M_PI * i / tol.bloch_samples;
    const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(
        build_bloch(params, k).matrix, false);
    if (es.info() != Eigen::Success) {
      throw NumericalError("Bloch eigensolver did not converge at k = " +
                           std::to_string(k));
    }
    const Eigen::VectorXd im = es.eigenvalues().imag();
    bmax = std::max(bmax, im.maxCoeff());
    absmin = std::min(absmin, im.cwiseAbs().minCoeff());
  }

  PhaseLabel out;
  out.im_e_end = ime;
  out.bulk_im_max = bmax;
  out.bulk_im_absmin = absmin;
  out.stable_bulk = bmax < 0.0;
  out.stable_end = !has_end || ime < 0.0;

  const double margin = tol.boundary_tol;
  if (std::abs(bmax) < margin) {
    out.region = PhaseRegion::Boundary;
    return out;
  }
  if (bmax < 0.0) {
    if (has_end && (std::abs(ime - bmax) < margin || std::abs(ime) < margin)) {
      out.region = PhaseRegion::Boundary;
    } else if (!has_end || ime <= bmax) {
      out.region = PhaseRegion::A;
    } else if (ime < 0.0) {
      out.region = PhaseRegion::B;
    } else {
      out.region = PhaseRegion::C;
    }
  } else {
    if (std::abs(absmin - tol.delta_gap) < margin) {
      out.region = PhaseRegion::Boundary;
    } else {
      out.region = absmin < tol.delta_gap ? PhaseRegion::D : PhaseRegion::E;
    }
  }
  return out;
}

std::vector<SweepRow> sweep_line(const ChainParams& base, double g_plus_min,
                                 double g_plus_max, int steps, int threads) {
  base.validate();
  if (steps < 1) throw ValidationError("sweep needs at least one step");
  if (!(g_plus_min <= g_plus_max)) {
    throw ValidationError("sweep range must satisfy min <= max");
  }
  if (g_plus_min < 0.0) throw ValidationError("g_plus must be >= 0");

  std::vector<SweepRow> rows(steps);
  parallel_for(steps, threads, [&](int i) {
    const double gp =
        steps == 1 ? g_plus_min
                   : g_plus_min + (g_plus_max - g_plus_min) * i / (steps - 1);
    ChainParams p = base;
    p.g_plus = gp;
    p.boundary = Boundary::OBC;  // the end measure only exists with ends
    const SpectrumReport rep = eigenspectrum(build_chain(p));
    TwoSiteParams frag;
    frag.g_plus = gp;
    frag.g_minus = base.g_minus;
    frag.j_hop = base.j_hop;
    frag.kappa = base.kappa;
    frag.gamma = base.gamma;
    rows[i] = SweepRow{gp, rep.im_e_end, rep.im_e_bulk_max,
                       twosite_im_max(frag)};
  });
  return rows;
}

std::vector<PhasePoint> phase_diagram(const ChainParams& base,
                                      double g_minus_min, double g_minus_max,
                                      int g_minus_steps, double g_plus_min,
                                      double g_plus_max, int g_plus_steps,
                                      const PhaseTolerances& tol,
                                      int threads) {
  base.validate();
  if (g_minus_steps < 1 || g_plus_steps < 1) {
    throw ValidationError("phase diagram needs at least a 1x1 grid");
  }
  if (!(g_minus_min <= g_minus_max) || !(g_plus_min <= g_plus_max)) {
    throw ValidationError("grid ranges must satisfy min <= max");
  }
  if (g_minus_min < 0.0 || g_plus_min < 0.0) {
    throw ValidationError("couplings must be >= 0");
  }

  const int total = g_minus_steps * g_plus_steps;
  std::vector<PhasePoint> grid(total);
  parallel_for(total, threads, [&](int idx) {
    const int im = idx / g_plus_steps;
    const int ip = idx % g_plus_steps;
    const double gm =
        g_minus_steps == 1
            ? g_minus_min
            : g_minus_min + (g_minus_max - g_minus_min) * im / (g_minus_steps - 1);
    const double gp =
        g_plus_steps == 1
            ? g_plus_min
            : g_plus_min + (g_plus_max - g_plus_min) * ip / (g_plus_steps - 1);
    ChainParams p = base;
    p.g_minus = gm;
    p.g_plus = gp;
    grid[idx] = PhasePoint{gm, gp, classify_phase(p, tol)};
  });
  return grid;
}

}  // namespace omtopo
