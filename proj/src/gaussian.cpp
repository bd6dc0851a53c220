#include "omtopo/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "omtopo/errors.hpp"

namespace omtopo {

namespace {

constexpr double kIllConditionRatio = 1e-6;   // eigenvalue-sum denominators
constexpr double kBasisConditionLimit = 1e12; // eigenvector basis fallback
constexpr double kOverflowExponent = 700.0;
constexpr double kKernelSeriesCut = 1e-4;
constexpr double kQuadratureImagTol = 1e-8;
constexpr double kGrowthRateSpreadTol = 1e-6;
constexpr double kSaturationStepTol = 1e-4;
constexpr int kSaturationMaxIterates = 30;

struct SpectralBasis {
  Eigen::VectorXcd lam;
  Eigen::MatrixXcd b;
  Eigen::MatrixXcd bi;
  double condition;
};

double inf_norm(const Eigen::MatrixXcd& m) {
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

SpectralBasis spectral_basis(const Eigen::MatrixXcd& a) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(a);
  if (solver.info() != Eigen::Success)
    throw NumericalError("eigendecomposition of the dynamical matrix failed");
  SpectralBasis s;
  s.lam = solver.eigenvalues();
  s.b = solver.eigenvectors();
  s.bi = s.b.inverse();
  s.condition = inf_norm(s.b) * inf_norm(s.bi);
  return s;
}

// (exp(ss*t) - 1)/ss, series-expanded where the direct form would cancel.
Complex growth_kernel(Complex ss, double t) {
  const Complex x = ss * t;
  if (std::abs(x) < kKernelSeriesCut)
    return t * (1.0 + x * (0.5 + x * (1.0 / 6.0 + x / 24.0)));
  return (std::exp(x) - 1.0) / ss;
}

// V = [[I + 2 C01, 2 C00], [2 C11, 2 C10]] maps the normal-mode kernel back
// to the <zeta zeta^+> convention; with_vacuum=false drops the identity.
Eigen::MatrixXcd covariance_from_kernel(const Eigen::MatrixXcd& c,
                                        bool with_vacuum) {
  const Eigen::Index l = c.rows() / 2;
  Eigen::MatrixXcd v(2 * l, 2 * l);
  v.topLeftCorner(l, l) = 2.0 * c.topRightCorner(l, l);
  if (with_vacuum)
    v.topLeftCorner(l, l) += Eigen::MatrixXcd::Identity(l, l);
  v.topRightCorner(l, l) = 2.0 * c.topLeftCorner(l, l);
  v.bottomLeftCorner(l, l) = 2.0 * c.bottomRightCorner(l, l);
  v.bottomRightCorner(l, l) = 2.0 * c.bottomLeftCorner(l, l);
  return v;
}

int mode_index(const CovarianceState& state, int site, Species kind,
               const char* which) {
  const int sites = state.modes() / 2;
  if (site < 1 || site > sites)
    throw ValidationError(std::string(which) + " site " + std::to_string(site) +
                          " outside 1.." + std::to_string(sites));
  return 2 * (site - 1) + (kind == Species::Mechanical ? 1 : 0);
}

// Raw 4x4 quadrature combination for the ordered mode pair, complex and
// plain-transpose symmetrized; the caller decides how to treat the imaginary
// residue.
Eigen::Matrix4cd raw_quadrature(const Eigen::MatrixXcd& v, int m1, int m2) {
  const Eigen::Index l = v.rows() / 2;
  const int idx[2] = {m1, m2};
  Eigen::Matrix4cd q = Eigen::Matrix4cd::Zero();
  const Complex half_i(0.0, 0.5);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const int i = idx[a];
      const int j = idx[b];
      const Complex v00 = v(i, j);
      const Complex v01 = v(i, l + j);
      const Complex v10 = v(l + i, j);
      const Complex v11 = v(l + i, l + j);
      q(2 * a, 2 * b) = 0.5 * (v10 + v11 + v00 + v01);
      q(2 * a, 2 * b + 1) = half_i * (v10 - v11 + v00 - v01);
      q(2 * a + 1, 2 * b) = half_i * (v10 + v11 - v00 - v01);
      q(2 * a + 1, 2 * b + 1) = 0.5 * (-v10 + v11 + v00 - v01);
    }
  }
  return (q + q.transpose()) / 2.0;
}

// Coherent couplings (real symmetric), pairing couplings, and the half-rate
// diagonals, assembled independently of the chain operator so the two
// constructions can cross-check each other.
struct LiouvillianBlocks {
  Eigen::MatrixXd h;
  Eigen::MatrixXd k;
  Eigen::VectorXd m_hat;
  Eigen::VectorXd n_hat;
};

LiouvillianBlocks liouvillian_blocks(const ChainParams& params,
                                     const std::vector<DisorderSpec>& disorder) {
  params.validate();
  const int ns = params.sites();
  const int l = 2 * ns;
  const bool pbc = params.boundary == Boundary::PBC;
  const int mech_bonds = pbc ? ns : ns - 1;

  std::vector<double> j_bond(static_cast<size_t>(std::max(mech_bonds, 0)),
                             params.j_hop);
  std::vector<double> delta_site(static_cast<size_t>(ns), 0.0);
  std::vector<double> gamma_site(static_cast<size_t>(ns), params.gamma);
  std::vector<double> t_bond;  // empty unless optical hopping is requested
  for (const DisorderSpec& spec : disorder) {
    const DisorderRealization real = sample_disorder(spec, params);
    switch (real.kind) {
      case DisorderKind::HoppingJ:
        for (size_t b = 0; b < real.offsets.size(); ++b)
          j_bond[b] += real.offsets[b];
        break;
      case DisorderKind::MechFrequency:
        for (size_t s = 0; s < real.offsets.size(); ++s)
          delta_site[s] += real.offsets[s];
        break;
      case DisorderKind::EndGamma:
        gamma_site.front() *= real.offsets.front();
        gamma_site.back() *= real.offsets.front();
        break;
      case DisorderKind::OpticalHopping:
        if (t_bond.empty()) t_bond.assign(real.offsets.size(), 0.0);
        for (size_t b = 0; b < real.offsets.size(); ++b)
          t_bond[b] += real.offsets[b];
        break;
    }
  }

  LiouvillianBlocks blocks;
  blocks.h = Eigen::MatrixXd::Zero(l, l);
  blocks.k = Eigen::MatrixXd::Zero(l, l);
  for (int i = 0; i < ns; ++i) {
    if (is_blue_site(i)) {
      blocks.k(2 * i, 2 * i + 1) += params.g_plus / 2;
      blocks.k(2 * i + 1, 2 * i) += params.g_plus / 2;
    } else {
      blocks.h(2 * i, 2 * i + 1) += params.g_minus;
      blocks.h(2 * i + 1, 2 * i) += params.g_minus;
    }
    blocks.h(2 * i + 1, 2 * i + 1) += delta_site[static_cast<size_t>(i)];
  }
  for (int b = 0; b < mech_bonds; ++b) {
    const int i = b;
    const int j = (b + 1) % ns;
    const double jb = -j_bond[static_cast<size_t>(b)];
    blocks.h(2 * i + 1, 2 * j + 1) += jb;
    blocks.h(2 * j + 1, 2 * i + 1) += jb;
  }
  for (size_t b = 0; b < t_bond.size(); ++b) {
    const int i = static_cast<int>(b);
    const int j = (i + 1) % ns;
    blocks.h(2 * i, 2 * j) += t_bond[b];
    blocks.h(2 * j, 2 * i) += t_bond[b];
  }
  blocks.m_hat = Eigen::VectorXd::Zero(l);
  blocks.n_hat = Eigen::VectorXd::Zero(l);
  for (int i = 0; i < ns; ++i) {
    const double gi = gamma_site[static_cast<size_t>(i)];
    blocks.m_hat[2 * i] = params.kappa * (params.n_c + 1) / 2;
    blocks.m_hat[2 * i + 1] = gi * (params.n_m + 1) / 2;
    blocks.n_hat[2 * i] = params.kappa * params.n_c / 2;
    blocks.n_hat[2 * i + 1] = gi * params.n_m / 2;
  }
  return blocks;
}

void require_time(double t) {
  if (!std::isfinite(t) || t < 0.0)
    throw ValidationError("evolution time must be finite and non-negative");
}

Eigen::MatrixXcd vacuum_covariance(Eigen::Index l) {
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(2 * l, 2 * l);
  v.topLeftCorner(l, l) = Eigen::MatrixXcd::Identity(l, l);
  return v;
}

// Matrix exponential by truncated Taylor series; callers scale the argument
// below unit norm first.
Eigen::MatrixXcd expm_small(const Eigen::MatrixXcd& m) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(n, n);
  for (int k = 1; k <= 18; ++k) {
    term = (term * m) / static_cast<double>(k);
    x += term;
  }
  return x;
}

}  // namespace

CovarianceState stationary_covariance(const NHOperator& op,
                                      const DissipationData& d) {
  const Eigen::Index dim = op.matrix.rows();
  if (dim == 0 || op.matrix.cols() != dim)
    throw ValidationError("chain operator must be square and non-empty");
  if (d.d_diag.size() != dim)
    throw ValidationError(
        "noise diagonal does not match the operator dimension (" +
        std::to_string(d.d_diag.size()) + " vs " + std::to_string(dim) + ")");

  const Eigen::MatrixXcd a = Complex(0.0, -1.0) * op.matrix;
  const SpectralBasis s = spectral_basis(a);
  const double max_re = s.lam.real().maxCoeff();
  if (max_re > -kStabilityMargin)
    throw NoStationaryStateError(
        "dynamical matrix has a non-decaying mode (max Re = " +
        std::to_string(max_re) + "); no stationary second moments exist");

  const Eigen::MatrixXcd d_tilde =
      s.bi * d.d_diag.cast<Complex>().asDiagonal() * s.bi.adjoint();
  const double lam_scale = s.lam.cwiseAbs().maxCoeff();
  double min_den = std::numeric_limits<double>::infinity();
  Eigen::MatrixXcd v_tilde(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      const Complex den = s.lam[i] + std::conj(s.lam[j]);
      min_den = std::min(min_den, std::abs(den));
      v_tilde(i, j) = -d_tilde(i, j) / den;
    }
  }
  CovarianceState state;
  state.v = s.b * v_tilde * s.b.adjoint();
  state.provenance = SolverPath::Lyapunov;
  state.ill_conditioned = min_den < kIllConditionRatio * lam_scale;
  return state;
}

ThirdQuantizationData build_third_quantization(
    const ChainParams& params, const std::vector<DisorderSpec>& disorder) {
  const LiouvillianBlocks blk = liouvillian_blocks(params, disorder);
  const Eigen::Index l = blk.h.rows();
  const Complex iu(0.0, 1.0);
  ThirdQuantizationData data;
  data.x = Eigen::MatrixXcd::Zero(2 * l, 2 * l);
  data.x.topLeftCorner(l, l) =
      0.5 * (iu * blk.h +
             Eigen::MatrixXd(blk.m_hat.asDiagonal()).cast<Complex>() -
             Eigen::MatrixXd(blk.n_hat.asDiagonal()).cast<Complex>());
  data.x.topRightCorner(l, l) = 0.5 * (-2.0 * iu * blk.k);
  data.x.bottomLeftCorner(l, l) = 0.5 * (2.0 * iu * blk.k);
  data.x.bottomRightCorner(l, l) =
      0.5 * (-iu * blk.h +
             Eigen::MatrixXd(blk.m_hat.asDiagonal()).cast<Complex>() -
             Eigen::MatrixXd(blk.n_hat.asDiagonal()).cast<Complex>());
  data.y = Eigen::MatrixXcd::Zero(2 * l, 2 * l);
  data.y.topLeftCorner(l, l) = -iu * blk.k;
  data.y.topRightCorner(l, l) =
      Eigen::MatrixXd(blk.n_hat.asDiagonal()).cast<Complex>();
  data.y.bottomLeftCorner(l, l) =
      Eigen::MatrixXd(blk.n_hat.asDiagonal()).cast<Complex>();
  data.y.bottomRightCorner(l, l) = iu * blk.k;
  data.a = -2.0 * data.x.transpose();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(data.x, false);
  if (solver.info() != Eigen::Success)
    throw NumericalError("rapidity spectrum computation failed");
  data.rapidities = solver.eigenvalues();
  return data;
}

CovarianceState stationary_covariance_liouvillian(
    const ChainParams& params, const std::vector<DisorderSpec>& disorder) {
  const ThirdQuantizationData data = build_third_quantization(params, disorder);
  const SpectralBasis s = spectral_basis(data.a);
  const double max_re = s.lam.real().maxCoeff();
  if (max_re > -kStabilityMargin)
    throw NoStationaryStateError(
        "dynamical matrix has a non-decaying mode (max Re = " +
        std::to_string(max_re) + "); no stationary second moments exist");

  const Eigen::Index dim = data.a.rows();
  const Eigen::MatrixXcd g_tilde = s.bi * data.y * s.bi.transpose();
  const double lam_scale = s.lam.cwiseAbs().maxCoeff();
  double min_den = std::numeric_limits<double>::infinity();
  Eigen::MatrixXcd kernel(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      const Complex den = s.lam[i] + s.lam[j];
      min_den = std::min(min_den, std::abs(den));
      kernel(i, j) = -g_tilde(i, j) / den;
    }
  }
  CovarianceState state;
  state.v = covariance_from_kernel(s.b * kernel * s.b.transpose(), true);
  state.provenance = SolverPath::ThirdQuantization;
  state.ill_conditioned = min_den < kIllConditionRatio * lam_scale;
  return state;
}

CovarianceState evolve_covariance(const ChainParams& params, double t,
                                  const std::vector<DisorderSpec>& disorder,
                                  const Eigen::VectorXcd* z0) {
  require_time(t);
  const ThirdQuantizationData data = build_third_quantization(params, disorder);
  const Eigen::Index dim = data.a.rows();
  const Eigen::Index l = dim / 2;
  if (z0 != nullptr && z0->size() != dim)
    throw ValidationError("initial mean vector must have the doubled length " +
                          std::to_string(dim));
  if (t == 0.0) {
    CovarianceState state;
    state.v = vacuum_covariance(l);
    state.provenance = SolverPath::ThirdQuantization;
    state.time = 0.0;
    if (z0 != nullptr) state.mean = *z0;
    return state;
  }

  const SpectralBasis s = spectral_basis(data.a);
  const double max_re = s.lam.real().maxCoeff();
  if (2.0 * max_re * t > kOverflowExponent)
    throw UnstableGrowthError(
        "second moments overflow before t=" + std::to_string(t) +
        " (fastest growth rate " + std::to_string(max_re) +
        "); use the saturation solver for the divergent regime");
  const bool shaky = s.condition > kBasisConditionLimit;
  if (shaky && z0 == nullptr) return evolve_covariance_ode(params, t, disorder);

  const Eigen::MatrixXcd g_tilde = s.bi * data.y * s.bi.transpose();
  Eigen::MatrixXcd kernel(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j)
      kernel(i, j) = g_tilde(i, j) * growth_kernel(s.lam[i] + s.lam[j], t);
  CovarianceState state;
  state.v = covariance_from_kernel(s.b * kernel * s.b.transpose(), true);
  state.provenance = SolverPath::ThirdQuantization;
  state.time = t;
  state.ill_conditioned = shaky;
  if (z0 != nullptr) {
    const Eigen::VectorXcd phases = (s.lam.array() * t).exp().matrix();
    state.mean = s.b * phases.asDiagonal() * (s.bi * (*z0));
  }
  return state;
}

CovarianceState evolve_covariance_ode(const ChainParams& params, double t,
                                      const std::vector<DisorderSpec>& disorder) {
  require_time(t);
  const NHOperator op = build_chain(params, disorder);
  const DissipationData diss = dissipation_data(params, disorder);
  const Eigen::Index dim = op.matrix.rows();
  const Eigen::Index l = dim / 2;
  CovarianceState state;
  state.provenance = SolverPath::OdeIntegration;
  state.time = t;
  if (t == 0.0) {
    state.v = vacuum_covariance(l);
    return state;
  }

  const Eigen::MatrixXcd a = Complex(0.0, -1.0) * op.matrix;
  const Eigen::MatrixXcd d =
      diss.d_diag.cast<Complex>().asDiagonal().toDenseMatrix();
  // block generator [[A, D], [0, -A^+]]; its exponential over a sub-step
  // yields the one-step propagator and accumulated noise in one solve
  Eigen::MatrixXcd gen = Eigen::MatrixXcd::Zero(2 * dim, 2 * dim);
  gen.topLeftCorner(dim, dim) = a;
  gen.topRightCorner(dim, dim) = d;
  gen.bottomRightCorner(dim, dim) = -a.adjoint();

  const double scale = inf_norm(gen) * t;
  int doublings = 0;
  while (scale / std::pow(2.0, doublings) > 0.25 && doublings < 64)
    ++doublings;
  const double h = t / std::pow(2.0, doublings);
  const Eigen::MatrixXcd f = expm_small(gen * h);
  Eigen::MatrixXcd e = f.topLeftCorner(dim, dim);
  Eigen::MatrixXcd phi =
      f.topRightCorner(dim, dim) * e.adjoint();
  for (int step = 0; step < doublings; ++step) {
    phi = e * phi * e.adjoint() + phi;
    e = e * e;
  }
  state.v = e.leftCols(l) * e.leftCols(l).adjoint() + phi;
  if (!state.v.allFinite())
    throw UnstableGrowthError(
        "second moments overflowed during direct integration to t=" +
        std::to_string(t));
  return state;
}

QuadratureBlock quadrature_block(const CovarianceState& v, int site_i,
                                 Species kind_i, int site_j, Species kind_j) {
  if (v.v.rows() == 0 || v.v.rows() % 4 != 0 || v.v.rows() != v.v.cols())
    throw ValidationError("covariance matrix has no valid doubled layout");
  const int m1 = mode_index(v, site_i, kind_i, "first");
  const int m2 = mode_index(v, site_j, kind_j, "second");
  if (m1 == m2)
    throw ValidationError("quadrature block needs two distinct modes");
  const Eigen::Matrix4cd q = raw_quadrature(v.v, m1, m2);
  const double imag_res = q.imag().cwiseAbs().maxCoeff();
  if (imag_res > kQuadratureImagTol)
    throw DataCorruptionError(
        "quadrature block has imaginary residue " + std::to_string(imag_res) +
        "; the covariance matrix is not Hermitian-consistent");
  QuadratureBlock block;
  block.m = 2.0 * q.real();
  return block;
}

double log_negativity(const QuadratureBlock& q) {
  const double det_alpha = q.alpha().determinant();
  const double det_beta = q.beta().determinant();
  const double det_gamma = q.gamma().determinant();
  const double det_v = q.m.determinant();
  const double delta = det_alpha + det_beta - 2.0 * det_gamma;
  double disc = delta * delta - 4.0 * det_v;
  if (disc < -1e-9)
    throw UnphysicalCovarianceError(
        "partial-transpose invariants are complex (discriminant " +
        std::to_string(disc) + "); covariance block is not a physical state");
  disc = std::max(disc, 0.0);
  const double denom = delta + std::sqrt(disc);
  if (denom <= 0.0)
    throw UnphysicalCovarianceError(
        "partial-transpose invariant sum is non-positive; covariance block "
        "is not a physical state");
  const double nu2 = 2.0 * det_v / denom;
  if (nu2 <= 0.0)
    throw UnphysicalCovarianceError(
        "smallest partial-transpose eigenvalue is non-positive; covariance "
        "block is not a physical state");
  const double nu = std::sqrt(nu2);
  return std::max(0.0, -std::log2(nu));
}

SitePopulations populations(const CovarianceState& v) {
  if (v.v.rows() == 0 || v.v.rows() % 4 != 0 || v.v.rows() != v.v.cols())
    throw ValidationError("covariance matrix has no valid doubled layout");
  const Eigen::Index l = v.v.rows() / 2;
  SitePopulations pops;
  pops.n_opt.reserve(static_cast<size_t>(l / 2));
  pops.n_mech.reserve(static_cast<size_t>(l / 2));
  for (Eigen::Index m = 0; m < l; m += 2) {
    pops.n_opt.push_back(std::real(v.v(l + m, l + m)));
    pops.n_mech.push_back(std::real(v.v(l + m + 1, l + m + 1)));
  }
  return pops;
}

SaturationResult saturation_negativity(const ChainParams& params, int site_i,
                                       Species kind_i, int site_j,
                                       Species kind_j) {
  const ThirdQuantizationData data = build_third_quantization(params, {});
  const Eigen::Index dim = data.a.rows();
  const Eigen::Index l = dim / 2;
  const SpectralBasis s = spectral_basis(data.a);

  std::vector<Eigen::Index> unstable;
  for (Eigen::Index i = 0; i < dim; ++i)
    if (s.lam[i].real() > kStabilityMargin) unstable.push_back(i);
  if (unstable.empty())
    throw UnsupportedRegionError(
        "all modes decay; the stationary solvers apply instead of the "
        "saturation limit");
  if (unstable.size() != 4)
    throw UnsupportedRegionError(
        "saturation limit needs exactly the four end modes unstable, found " +
        std::to_string(unstable.size()));
  Complex lam_bar(0.0, 0.0);
  for (const Eigen::Index i : unstable) lam_bar += s.lam[i];
  lam_bar /= 4.0;
  double spread = 0.0;
  for (const Eigen::Index i : unstable)
    spread = std::max(spread, std::abs(s.lam[i].real() - lam_bar.real()));
  if (spread > kGrowthRateSpreadTol)
    throw UnsupportedRegionError(
        "unstable modes do not share a growth rate (spread " +
        std::to_string(spread) + "); single-exponential factorization fails");
  double worst_mixed = -std::numeric_limits<double>::infinity();
  for (const Eigen::Index i : unstable)
    for (Eigen::Index j = 0; j < dim; ++j)
      if (s.lam[j].real() <= kStabilityMargin)
        worst_mixed = std::max(worst_mixed, s.lam[i].real() + s.lam[j].real());
  if (worst_mixed >= 0.0)
    throw UnsupportedRegionError(
        "a mixed unstable-stable pair fails to decay; the divergent part is "
        "not a clean rank-two direction");

  std::vector<bool> is_unstable(static_cast<size_t>(dim), false);
  for (const Eigen::Index i : unstable) is_unstable[static_cast<size_t>(i)] = true;
  const Eigen::MatrixXcd g_tilde = s.bi * data.y * s.bi.transpose();

  // divergent part: unstable-pair kernel entries only, no vacuum term
  Eigen::MatrixXcd kernel_div = Eigen::MatrixXcd::Zero(dim, dim);
  for (const Eigen::Index i : unstable)
    for (const Eigen::Index j : unstable)
      kernel_div(i, j) = g_tilde(i, j) / (s.lam[i] + s.lam[j]);
  const Eigen::MatrixXcd v_div =
      covariance_from_kernel(s.b * kernel_div * s.b.transpose(), false);

  // dummy state wrappers so the shared index mapping applies
  CovarianceState div_state;
  div_state.v = v_div;
  const int m1 = mode_index(div_state, site_i, kind_i, "first");
  const int m2 = mode_index(div_state, site_j, kind_j, "second");
  if (m1 == m2)
    throw ValidationError("saturation limit needs two distinct modes");
  const Eigen::Matrix4d q1 =
      2.0 * raw_quadrature(v_div, m1, m2).real();

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> q1_eig(q1);
  const Eigen::Vector4d w1 = q1_eig.eigenvalues();
  const double w1_scale = w1.cwiseAbs().maxCoeff();
  std::vector<int> keep;
  for (int i = 0; i < 4; ++i)
    if (std::abs(w1[i]) > 1e-12 * w1_scale) keep.push_back(i);
  const int rank = static_cast<int>(keep.size());
  if (rank > 2)
    throw UnsupportedRegionError(
        "divergent quadrature block has rank " + std::to_string(rank) +
        "; the rank-two determinant factorization does not apply");
  Eigen::MatrixXd f(4, rank);
  Eigen::VectorXd sgn(rank);
  for (int c = 0; c < rank; ++c) {
    f.col(c) = q1_eig.eigenvectors().col(keep[static_cast<size_t>(c)]) *
               std::sqrt(std::abs(w1[keep[static_cast<size_t>(c)]]));
    sgn[c] = w1[keep[static_cast<size_t>(c)]] >= 0.0 ? 1.0 : -1.0;
  }

  const auto det_coeffs = [](const Eigen::Matrix2d& b0,
                             const Eigen::Matrix2d& b1) {
    Eigen::Vector3d c;
    c[0] = b0.determinant();
    c[2] = b1.determinant();
    c[1] = b0(0, 0) * b1(1, 1) + b1(0, 0) * b0(1, 1) - b0(0, 1) * b1(1, 0) -
           b1(0, 1) * b0(1, 0);
    return c;
  };

  const double rate = lam_bar.real();
  const double t0 = 5.0 / rate;
  std::vector<double> iterates;
  for (int n = 1; n <= kSaturationMaxIterates; ++n) {
    const double t = n * t0;
    const double inv_growth = std::exp(-2.0 * rate * t);  // s = 1/xi

    Eigen::MatrixXcd kernel(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      for (Eigen::Index j = 0; j < dim; ++j) {
        if (is_unstable[static_cast<size_t>(i)] &&
            is_unstable[static_cast<size_t>(j)]) {
          kernel(i, j) = -g_tilde(i, j) / (s.lam[i] + s.lam[j]);
        } else {
          kernel(i, j) = g_tilde(i, j) * growth_kernel(s.lam[i] + s.lam[j], t);
        }
      }
    }
    const Eigen::MatrixXcd v0 =
        covariance_from_kernel(s.b * kernel * s.b.transpose(), true);
    const Eigen::Matrix4cd q0_raw = raw_quadrature(v0, m1, m2);
    const Eigen::Matrix4d q0 = 2.0 * q0_raw.real();

    const Eigen::Vector3d ca =
        det_coeffs(q0.topLeftCorner<2, 2>(), q1.topLeftCorner<2, 2>());
    const Eigen::Vector3d cb =
        det_coeffs(q0.bottomRightCorner<2, 2>(), q1.bottomRightCorner<2, 2>());
    const Eigen::Vector3d cg =
        det_coeffs(q0.topRightCorner<2, 2>(), q1.topRightCorner<2, 2>());
    const Eigen::Vector3d ct = ca + cb - 2.0 * cg;

    // det(q0 + xi f sgn f^T) = det(q0) (1 + e1 xi + e2 xi^2)
    const double det_q0 = q0.determinant();
    double e1 = 0.0;
    double e2 = 0.0;
    if (rank > 0) {
      const Eigen::MatrixXd solved = q0.partialPivLu().solve(f);
      Eigen::MatrixXd growth_block = f.transpose() * solved;
      for (int c = 0; c < rank; ++c) growth_block.col(c) *= sgn[c];
      e1 = growth_block.trace();
      e2 = rank == 2 ? growth_block.determinant() : 0.0;
    }
    const Eigen::Vector3d cv(det_q0, det_q0 * e1, det_q0 * e2);

    const double ds =
        cv[2] + cv[1] * inv_growth + cv[0] * inv_growth * inv_growth;
    const double ts =
        ct[2] + ct[1] * inv_growth + ct[0] * inv_growth * inv_growth;
    double disc = ts * ts - 4.0 * ds * inv_growth * inv_growth;
    if (disc < -1e-9 * std::max(1.0, ts * ts))
      throw UnphysicalCovarianceError(
          "scaled partial-transpose discriminant went negative in the "
          "saturation limit");
    disc = std::max(disc, 0.0);
    const double denom = ts + std::sqrt(disc);
    if (denom <= 0.0 || ds <= 0.0)
      throw UnphysicalCovarianceError(
          "scaled partial-transpose invariants are not positive in the "
          "saturation limit");
    iterates.push_back(std::sqrt(2.0 * ds / denom));

    const size_t count = iterates.size();
    if (count >= 4) {
      bool settled = true;
      for (size_t d = count - 3; d < count; ++d)
        if (std::abs(iterates[d] - iterates[d - 1]) > kSaturationStepTol)
          settled = false;
      if (settled) {
        SaturationResult result;
        result.nu_minus = iterates.back();
        result.e_n = std::max(0.0, -std::log2(result.nu_minus));
        result.iterates = std::move(iterates);
        result.lambda_end = rate;
        return result;
      }
    }
  }
  throw ExtrapolationError(
      "saturation iterates did not settle within " +
      std::to_string(kSaturationMaxIterates) + " doubling times");
}

}  // namespace omtopo
