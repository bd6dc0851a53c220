#pragma once

#include <optional>
#include <vector>

#include "omtopo/lattice.hpp"

namespace omtopo {

enum class SolverPath { Lyapunov, ThirdQuantization, OdeIntegration };

// Second moments V = <zeta zeta^+> of the doubled vector zeta = (d, d^+),
// same mode ordering as NHOperator:
//   V = [ <d d^+>  <d d>   ]
//       [ <d^+d^+> <d^+ d> ]
// Vacuum is [[I,0],[0,0]].  time == nullopt marks a stationary state.
struct CovarianceState {
  Eigen::MatrixXcd v;
  SolverPath provenance = SolverPath::Lyapunov;
  std::optional<double> time;
  std::optional<Eigen::VectorXcd> mean;  // first moments when evolved from a displaced start
  bool ill_conditioned = false;  // eigenvalue-sum denominators close to zero
  int modes() const noexcept { return static_cast<int>(v.rows()) / 2; }
};

// Margin inside the left half plane a dynamical matrix must keep for a
// stationary state to be accepted.
inline constexpr double kStabilityMargin = 1e-9;

CovarianceState stationary_covariance(const NHOperator& op,
                                      const DissipationData& d);

// Closed-form time evolution from vacuum (optionally displaced by z0) via the
// eigenbasis of the dynamical matrix; falls back to direct integration when
// that basis is ill-conditioned.  Unstable modes with overflowing exponents
// raise UnstableGrowthError (the saturation path below handles that regime).
CovarianceState evolve_covariance(const ChainParams& params, double t,
                                  const std::vector<DisorderSpec>& disorder = {},
                                  const Eigen::VectorXcd* z0 = nullptr);

// Independent integrator used as a cross-checking oracle: exponential
// doubling of the one-step affine map V -> E V E^+ + Phi.
CovarianceState evolve_covariance_ode(const ChainParams& params, double t,
                                      const std::vector<DisorderSpec>& disorder = {});

enum class Species { Optical, Mechanical };

// Real symmetric 4x4 covariance of (X_i, P_i, X_j, P_j) for one mode pair,
// scaled so that vacuum gives the identity.  sites are 1-based.
struct QuadratureBlock {
  Eigen::Matrix4d m;
  Eigen::Matrix2d alpha() const { return m.topLeftCorner<2, 2>(); }
  Eigen::Matrix2d beta() const { return m.bottomRightCorner<2, 2>(); }
  Eigen::Matrix2d gamma() const { return m.topRightCorner<2, 2>(); }
};

QuadratureBlock quadrature_block(const CovarianceState& v, int site_i,
                                 Species kind_i, int site_j, Species kind_j);

// E_N = max(0, -log2 nu-), nu- the smaller symplectic eigenvalue of the
// partially transposed block.
double log_negativity(const QuadratureBlock& q);

struct SitePopulations {
  std::vector<double> n_opt;
  std::vector<double> n_mech;
};

SitePopulations populations(const CovarianceState& v);

// Liouvillian data: the generator X, noise block Y, dynamical matrix
// A = -2 X^T (equal to -i H_NH entrywise in this basis), and the rapidity
// spectrum eig(X) (= i E / 2 up to ordering).
struct ThirdQuantizationData {
  Eigen::MatrixXcd x;
  Eigen::MatrixXcd y;
  Eigen::MatrixXcd a;
  Eigen::VectorXcd rapidities;
};

ThirdQuantizationData build_third_quantization(
    const ChainParams& params, const std::vector<DisorderSpec>& disorder = {});

// Stationary covariance through the Liouvillian normal-mode kernel; an
// independent path from stationary_covariance (shares no solve).
CovarianceState stationary_covariance_liouvillian(
    const ChainParams& params, const std::vector<DisorderSpec>& disorder = {});

struct SaturationResult {
  double e_n;
  double nu_minus;
  std::vector<double> iterates;  // nu- along the doubling-time sequence
  double lambda_end;             // shared growth rate of the end quadruplet
};

// Entanglement of an unstable-end pair: populations diverge but the smaller
// symplectic eigenvalue of the pair block approaches a finite limit.  The
// divergent direction enters the determinants only through polynomial
// coefficients, evaluated in the inverse growth variable, so the limit is
// reached without cancellation.  Requires exactly the four end modes
// unstable (region C).
SaturationResult saturation_negativity(const ChainParams& params, int site_i,
                                       Species kind_i, int site_j,
                                       Species kind_j);

}  // namespace omtopo
