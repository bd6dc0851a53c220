#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "omtopo/params.hpp"

namespace omtopo {

using Complex = std::complex<double>;

enum class BasisKind { RealSpace, Bloch };

// Dense dynamical operator H such that d/dt v = -i H v for the doubled vector
//   v = [a_1, b_1, ..., a_S, b_S, a_1^+, b_1^+, ..., a_S^+, b_S^+],  S = 4N.
// Mode index of site s (0-based): optical 2s, mechanical 2s+1; the creation
// half is offset by modes().  Bloch operators are one cell (dim 16) with the
// inter-cell mechanical bond wrapped by e^{+-ik}.
struct NHOperator {
  Eigen::MatrixXcd matrix;
  BasisKind basis = BasisKind::RealSpace;
  Boundary boundary = Boundary::OBC;  // Bloch operators count as periodic
  int n_cells = 0;
  int dim() const noexcept { return static_cast<int>(matrix.rows()); }
  int modes() const noexcept { return dim() / 2; }
};

inline bool is_blue_site(int site) noexcept {
  const int r = site % 4;
  return r == 0 || r == 3;
}

struct DisorderRealization {
  DisorderKind kind;
  // HoppingJ / OpticalHopping: one offset per bond; MechFrequency: one per
  // site; EndGamma: single multiplier.
  std::vector<double> offsets;
};

DisorderRealization sample_disorder(const DisorderSpec& spec,
                                    const ChainParams& params);

NHOperator build_chain(const ChainParams& params,
                       const std::vector<DisorderSpec>& disorder = {});

// k in [0, 2pi); any disorder request is rejected (translation invariance).
NHOperator build_bloch(const ChainParams& params, double k,
                       const std::vector<DisorderSpec>& disorder = {});

// Analytic d/dk of the Bloch operator (only the wrapped bond carries k).
Eigen::MatrixXcd bloch_k_derivative(const ChainParams& params, double k);

// Diagonal dissipation in three equivalent representations: per-row
// linewidths of the doubled basis, the noise-matrix diagonal, and the
// half-rate (occupation+1)/occupation blocks used by the Liouvillian path.
// d_diag == 2*(m_hat ++ n_hat) entrywise by construction.
struct DissipationData {
  Eigen::VectorXd eta_bar;  // 2L
  Eigen::VectorXd d_diag;   // 2L
  Eigen::VectorXd m_hat;    // L
  Eigen::VectorXd n_hat;    // L
};

DissipationData dissipation_data(const ChainParams& params,
                                 const std::vector<DisorderSpec>& disorder = {});

}  // namespace omtopo
