#include "omtopo/topology.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "omtopo/errors.hpp"
#include "omtopo/parallel.hpp"

namespace omtopo {

namespace {

using Matrix16cd = Eigen::Matrix<Complex, 16, 16>;
using Matrix16d = Eigen::Matrix<double, 16, 16>;
using Vector16d = Eigen::Matrix<double, 16, 1>;
using Band8 = Eigen::Matrix<Complex, 16, 8>;

constexpr double kChiralResidualTol = 1e-12;
constexpr double kHalfFillingGapTol = 1e-10;
constexpr double kIntegerTol = 1e-2;
constexpr double kBoundaryFluxTol = 1e-3;
constexpr int kMaxRefinements = 3;

Vector16d main_text_diag() {
  Vector16d d;
  const double s8[8] = {1, 1, 1, -1, -1, 1, -1, -1};
  for (int i = 0; i < 8; ++i) {
    d[i] = s8[i];
    d[8 + i] = s8[i];
  }
  return d;
}

Vector16d sigma_pi_diag() {
  Vector16d d;
  const double v[16] = {1, 1, 1,  1,  1,  -1, -1, 1,
                        -1, 1, 1, -1, -1, -1, -1, -1};
  for (int i = 0; i < 16; ++i) d[i] = v[i];
  return d;
}

// max |S H(k) S + H(k)^+| over four  representative momenta.
double chiral_residual(const Vector16d& s, const ChainParams& params) {
  constexpr double kPi = 3.14159265358979323846;
  double worst = 0.0;
  for (double k : {0.0, kPi / 2, kPi, 3 * kPi / 2}) {
    const Matrix16cd h = build_bloch(params, k).matrix;
    Matrix16cd r = h;
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j) r(i, j) = s[i] * h(i, j) * s[j];
    r += h.adjoint();
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  return worst;
}

// eta*S - i*S*H_NH(k) given the chiral diagonal.
Matrix16cd heff_matrix(const Vector16d& s, const ChainParams& params, double k,
                       double eta) {
  const Matrix16cd h = build_bloch(params, k).matrix;
  Matrix16cd m;
  const Complex mi(0.0, -1.0);
  for (int i = 0; i < 16; ++i) m.row(i) = (mi * s[i]) * h.row(i);
  for (int i = 0; i < 16; ++i) m(i, i) += eta * s[i];
  return m;
}

// Block anti-diagonal pairing: flavor block b <-> block 3-b, identity inside.
Matrix16d pairing_matrix() {
  Matrix16d g = Matrix16d::Zero();
  for (int blk = 0; blk < 4; ++blk)
    g.block<4, 4>(4 * blk, 4 * (3 - blk)) = Eigen::Matrix4d::Identity();
  return g;
}

Matrix16cd compactify(const Matrix16cd& m, const Matrix16d& g, double eta) {
  constexpr double kPi = 3.14159265358979323846;
  const double th = kPi / 4 * (1 + std::tanh(eta));
  const Matrix16cd r = std::cos(th) * Matrix16cd::Identity() +
                       Complex(0.0, 1.0) * std::sin(th) * g.cast<Complex>();
  return r * m * r.adjoint();
}

void check_hermitian(const Matrix16cd& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double res = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (res > 1e-12 * scale)
    throw SymmetryError("effective Hamiltonian is not Hermitian (residual " +
                        std::to_string(res) +
                        "); chiral-operator selection is inconsistent");
}

Complex band_link(const Band8& p, const Band8& q) {
  const Eigen::Matrix<Complex, 8, 8> overlap = p.adjoint() * q;
  return overlap.determinant();
}

struct GridRound {
  double chern = 0.0;
  double flux = 0.0;
  double min_gap = 0.0;
  double min_gap_k = 0.0;
  double min_gap_eta = 0.0;
  int grid_k = 0;
  int grid_eta = 0;
  double eta_window = 0.0;
  std::vector<CurvatureSample> samples;
};

GridRound plaquette_round(const Vector16d& s, const Matrix16d& g,
                          const ChainParams& params, int nk, int ne,
                          double eta_window, bool keep_samples, int threads) {
  constexpr double kPi = 3.14159265358979323846;
  const double dk = 2 * kPi / nk;
  const double de = 2 * eta_window / (ne - 1);
  std::vector<double> etas(static_cast<size_t>(ne));
  for (int j = 0; j < ne; ++j)
    etas[static_cast<size_t>(j)] = -eta_window + de * j;

  using Column = std::vector<Band8>;
  std::vector<double> gaps(static_cast<size_t>(ne));
  const auto solve_column = [&](double k, Column& out) {
    parallel_for(static_cast<size_t>(ne), threads, [&](size_t j) {
      const Matrix16cd m =
          compactify(heff_matrix(s, params, k, etas[j]), g, etas[j]);
      Eigen::SelfAdjointEigenSolver<Matrix16cd> solver(m);
      out[j] = solver.eigenvectors().leftCols<8>();
      gaps[j] = solver.eigenvalues()[8] - solver.eigenvalues()[7];
    });
  };

  GridRound round;
  round.grid_k = nk;
  round.grid_eta = ne;
  round.eta_window = eta_window;
  round.min_gap = std::numeric_limits<double>::infinity();
  if (keep_samples)
    round.samples.reserve(static_cast<size_t>(nk) * (static_cast<size_t>(ne) - 1));

  Column col_first(static_cast<size_t>(ne));
  Column col_prev(static_cast<size_t>(ne));
  Column col_cur(static_cast<size_t>(ne));
  const auto fold_gaps = [&](double k) {
    for (int j = 0; j < ne; ++j) {
      const double gj = gaps[static_cast<size_t>(j)];
      if (gj < round.min_gap) {
        round.min_gap = gj;
        round.min_gap_k = k;
        round.min_gap_eta = etas[static_cast<size_t>(j)];
      }
    }
  };

  solve_column(0.0, col_first);
  fold_gaps(0.0);
  col_prev = col_first;

  double total_angle = 0.0;
  Complex edge_low(1.0, 0.0);
  Complex edge_high(1.0, 0.0);
  for (int i = 0; i < nk; ++i) {
    const double k_here = dk * i;
    if (i + 1 < nk) {
      const double k_next = dk * (i + 1);
      solve_column(k_next, col_cur);
      fold_gaps(k_next);
    } else {
      col_cur = col_first;
    }
    // counterclockwise in (eta, k): eta-link first
    for (int j = 0; j + 1 < ne; ++j) {
      const size_t sj = static_cast<size_t>(j);
      const Complex u1 = band_link(col_prev[sj], col_prev[sj + 1]);
      const Complex u2 = band_link(col_prev[sj + 1], col_cur[sj + 1]);
      const Complex u3 = band_link(col_cur[sj], col_cur[sj + 1]);
      const Complex u4 = band_link(col_prev[sj], col_cur[sj]);
      const double angle = std::arg(u1 * u2 * std::conj(u3) * std::conj(u4));
      total_angle += angle;
      if (keep_samples) {
        CurvatureSample sample;
        sample.k = k_here + dk / 2;
        sample.eta = etas[sj] + de / 2;
        sample.omega = angle / (dk * de);
        round.samples.push_back(sample);
      }
    }
    edge_low *= band_link(col_prev[0], col_cur[0]);
    edge_high *=
        band_link(col_prev[static_cast<size_t>(ne) - 1],
                  col_cur[static_cast<size_t>(ne) - 1]);
    std::swap(col_prev, col_cur);
  }
  round.chern = total_angle / (2 * kPi);
  round.flux =
      (std::abs(std::arg(edge_low)) + std::abs(std::arg(edge_high))) / (2 * kPi);
  return round;
}

}  // namespace

ChiralOperator chiral_operator(const ChainParams& params) {
  params.validate();
  const Vector16d main_d = main_text_diag();
  const Vector16d sp_d = sigma_pi_diag();
  ChiralOperator out;
  out.residual_main_text = chiral_residual(main_d, params);
  out.residual_sigma_pi = chiral_residual(sp_d, params);
  if (out.residual_main_text < kChiralResidualTol) {
    out.diag = main_d;
    out.provenance = ChiralOperator::Provenance::MainTextForm;
  } else if (out.residual_sigma_pi < kChiralResidualTol) {
    out.diag = sp_d;
    out.provenance = ChiralOperator::Provenance::SigmaPiForm;
  } else {
    throw SymmetryError(
        "no chiral candidate satisfies S H(k) S = -H(k)^+ (residuals: "
        "main-text " +
        std::to_string(out.residual_main_text) + ", sigma-pi " +
        std::to_string(out.residual_sigma_pi) +
        "); basis ordering is inconsistent upstream");
  }
  return out;
}

Eigen::MatrixXcd effective_hamiltonian(const ChainParams& params, double k,
                                       double eta) {
  const ChiralOperator s = chiral_operator(params);
  const Matrix16cd m = heff_matrix(s.diag, params, k, eta);
  check_hermitian(m);
  return m;
}

Eigen::MatrixXcd compactified_hamiltonian(const ChainParams& params, double k,
                                          double eta) {
  const ChiralOperator s = chiral_operator(params);
  const Matrix16cd m = heff_matrix(s.diag, params, k, eta);
  check_hermitian(m);
  return compactify(m, pairing_matrix(), eta);
}

double berry_curvature(const ChainParams& params, double k, double eta) {
  const ChiralOperator s = chiral_operator(params);
  const Matrix16cd m = heff_matrix(s.diag, params, k, eta);
  Eigen::SelfAdjointEigenSolver<Matrix16cd> solver(m);
  const auto& w = solver.eigenvalues();
  const auto& v = solver.eigenvectors();
  if (w[8] - w[7] < kHalfFillingGapTol)
    throw DegeneratePointError("half-filling gap closed at k=" +
                               std::to_string(k) + ", eta=" +
                               std::to_string(eta) + " (gap " +
                               std::to_string(w[8] - w[7]) + ")");
  // d/deta of the effective Hamiltonian is S itself; d/dk acts through the
  // wrapped mechanical bond.
  const Eigen::MatrixXcd dk_nh = bloch_k_derivative(params, k);
  Matrix16cd dhk;
  const Complex mi(0.0, -1.0);
  for (int i = 0; i < 16; ++i) dhk.row(i) = (mi * s.diag[i]) * dk_nh.row(i);
  Matrix16cd dhe = Matrix16cd::Zero();
  for (int i = 0; i < 16; ++i) dhe(i, i) = s.diag[i];

  const Matrix16cd me_eta = v.adjoint() * dhe * v;
  const Matrix16cd me_k = v.adjoint() * dhk * v;
  // (eta, k) taken right-handed so the full integral returns +C.
  double om = 0.0;
  for (int n = 0; n < 8; ++n) {
    for (int mm = 8; mm < 16; ++mm) {
      const Complex num = me_eta(n, mm) * me_k(mm, n);
      const double dw = w[n] - w[mm];
      om += 2 * std::imag(num) / (dw * dw);
    }
  }
  return om;
}

TopologyReport chern_number(const ChainParams& params, int grid_k,
                            int grid_eta, double eta_max, bool keep_samples,
                            int threads) {
  params.validate();
  if (grid_k < 4 || grid_eta < 4)
    throw ValidationError("plaquette grid needs at least 4 points per axis");
  if (grid_k > 1024 || grid_eta > 1024)
    throw SizingError("initial plaquette grid above 1024 per axis");
  if (eta_max <= 0.0)
    eta_max = 10.0 * std::max({params.kappa, params.g_plus, params.g_minus,
                               params.j_hop});
  const int nthreads = resolve_threads(threads);
  const ChiralOperator s = chiral_operator(params);
  const Matrix16d g = pairing_matrix();

  std::ostringstream trace;
  std::optional<long> prev_round;
  for (int r = 0; r <= kMaxRefinements; ++r) {
    const int factor = 1 << r;
    GridRound round =
        plaquette_round(s.diag, g, params, grid_k * factor, grid_eta * factor,
                        eta_max * factor, keep_samples, nthreads);
    if (round.min_gap < kHalfFillingGapTol)
      throw PhaseBoundaryError(
          "half-filling gap closed on the plaquette grid at k=" +
          std::to_string(round.min_gap_k) + ", eta=" +
          std::to_string(round.min_gap_eta) + " (gap " +
          std::to_string(round.min_gap) + ")");
    const long rounded = std::lround(round.chern);
    const bool settled = std::abs(round.chern - static_cast<double>(rounded)) <
                             kIntegerTol &&
                         round.flux < kBoundaryFluxTol;
    trace << (r ? "; " : "") << round.grid_k << "x" << round.grid_eta
          << "@eta" << round.eta_window << ": C=" << round.chern
          << " flux=" << round.flux;
    if (settled && prev_round && *prev_round == rounded) {
      TopologyReport report;
      report.chern = round.chern;
      report.rounded = static_cast<int>(rounded);
      report.boundary_flux = round.flux;
      report.eta_window = round.eta_window;
      report.grid_k = round.grid_k;
      report.grid_eta = round.grid_eta;
      report.refinements = r;
      report.curvature_samples = std::move(round.samples);
      return report;
    }
    prev_round = rounded;
  }
  throw ConvergenceError(
      "plaquette sum did not settle after " +
      std::to_string(kMaxRefinements) + " refinements (" + trace.str() + ")");
}

}  // namespace omtopo
