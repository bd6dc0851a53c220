#pragma once

#include <vector>

#include "omtopo/lattice.hpp"

namespace omtopo {

// Diagonal +-1 operator S on the 16-dim Bloch space obeying
// S H(k) S^-1 = -H(k)^+ .  Two printed candidate forms exist; construction
// tests both against the defining relation and records which one won.
struct ChiralOperator {
  enum class Provenance { MainTextForm, SigmaPiForm };
  Eigen::VectorXd diag;  // 16 entries, +-1
  Provenance provenance;
  double residual_main_text;
  double residual_sigma_pi;
  Eigen::MatrixXd matrix() const { return diag.asDiagonal(); }
};

ChiralOperator chiral_operator(const ChainParams& params);

// H_eff(k, eta) = eta*S - i*S*H_NH(k): Hermitian for every (k, eta); its
// lower half-spectrum carries the band topology.
Eigen::MatrixXcd effective_hamiltonian(const ChainParams& params, double k,
                                       double eta);

// Unitary conjugation R(eta) = cos(th) I + i sin(th) G, th = pi/4 (1+tanh eta)
// with G the block-antidiagonal pairing of the 4-site flavors; same spectrum,
// but with well-defined eta -> +-inf limits so the plaquette sum closes.
Eigen::MatrixXcd compactified_hamiltonian(const ChainParams& params, double k,
                                          double eta);

// Sum-over-states curvature at one point, analytic derivatives.  Orientation
// matches the plaquette sum below: the (eta, k) frame is taken
// right-handed, so integrating over the full window gives +C.
double berry_curvature(const ChainParams& params, double k, double eta);

struct CurvatureSample {
  double k;
  double eta;
  double omega;  // plaquette flux / plaquette area at the cell center
};

struct TopologyReport {
  double chern;
  int rounded;
  double boundary_flux;    // |arg prod of edge links| / 2pi, both eta edges
  double eta_window;
  int grid_k;
  int grid_eta;
  int refinements;
  std::vector<CurvatureSample> curvature_samples;
};

// Link-variable plaquette sum over k in [0, 2pi) x eta in [-eta_max, eta_max]
// projected on the lower 8 bands of the compactified Hamiltonian.  Doubles
// grid and eta window together until two successive refinements agree on the
// integer, the offset from it is < 1e-2 and the boundary flux is < 1e-3.
// eta_max <= 0 selects the default 10*max(kappa, G+, G-, J).
TopologyReport chern_number(const ChainParams& params, int grid_k = 64,
                            int grid_eta = 64, double eta_max = 0.0,
                            bool keep_samples = false, int threads = 0);

}  // namespace omtopo
