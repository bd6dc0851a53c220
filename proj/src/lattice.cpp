#include "omtopo/lattice.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "omtopo/errors.hpp"
#include "omtopo/rng.hpp"

namespace omtopo {
namespace {

constexpr Complex kI{0.0, 1.0};

void require_finite(double x, const char* name) {
  if (!std::isfinite(x)) {
    throw ValidationError(std::string(name) + " must be finite");
  }
}

int bond_count(const ChainParams& p) {
  return p.boundary == Boundary::PBC ? p.sites() : p.sites() - 1;
}

// Per-row physical inputs after folding every disorder spec in.
struct SiteTables {
  std::vector<double> dj;      // additive hop offset per mechanical bond
  std::vector<double> domega;  // mechanical detuning per site
  std::vector<double> topt;    // optical hop strength per bond
  std::vector<double> gam;     // mechanical linewidth per site
};

SiteTables site_tables(const ChainParams& params,
                       const std::vector<DisorderSpec>& disorder) {
  SiteTables t;
  const int ns = params.sites();
  const int nb = bond_count(params);
  t.dj.assign(nb, 0.0);
  t.domega.assign(ns, 0.0);
  t.topt.assign(nb, 0.0);
  t.gam.assign(ns, params.gamma);
  for (const auto& spec : disorder) {
    const DisorderRealization r = sample_disorder(spec, params);
    switch (r.kind) {
      case DisorderKind::HoppingJ:
        for (int i = 0; i < nb; ++i) t.dj[i] += r.offsets[i];
        break;
      case DisorderKind::MechFrequency:
        for (int i = 0; i < ns; ++i) t.domega[i] += r.offsets[i];
        break;
      case DisorderKind::OpticalHopping:
        for (int i = 0; i < nb; ++i) t.topt[i] += r.offsets[i];
        break;
      case DisorderKind::EndGamma:
        t.gam.front() *= r.offsets[0];
        t.gam.back() *= r.offsets[0];
        break;
    }
  }
  return t;
}

}  // namespace

void ChainParams::validate() const {
  require_finite(g_plus, "g_plus");
  require_finite(g_minus, "g_minus");
  require_finite(j_hop, "j_hop");
  require_finite(kappa, "kappa");
  require_finite(gamma, "gamma");
  require_finite(n_c, "n_c");
  require_finite(n_m, "n_m");
  if (!(kappa > 0.0)) throw ValidationError("kappa must be > 0");
  if (!(gamma > 0.0)) throw ValidationError("gamma must be > 0");
  if (g_plus < 0.0) throw ValidationError("g_plus must be >= 0");
  if (g_minus < 0.0) throw ValidationError("g_minus must be >= 0");
  if (j_hop < 0.0) throw ValidationError("j_hop must be >= 0");
  if (n_c < 0.0) throw ValidationError("n_c must be >= 0");
  if (n_m < 0.0) throw ValidationError("n_m must be >= 0");
  if (n_cells < 1) throw ValidationError("n_cells must be >= 1");
  if (n_cells > kMaxCells) {
    throw SizingError("n_cells = " + std::to_string(n_cells) +
                      " exceeds the dense-solver budget of " +
                      std::to_string(kMaxCells) + " cells");
  }
}

void DisorderSpec::validate() const {
  require_finite(amplitude, "disorder amplitude");
  if (amplitude < 0.0) {
    throw ValidationError("disorder amplitude must be >= 0");
  }
  if (kind == DisorderKind::EndGamma && amplitude == 0.0) {
    throw ValidationError(
        "end-linewidth disorder is a multiplier on gamma; 0 would erase a "
        "strictly positive rate");
  }
}

void TwoSiteParams::validate() const {
  require_finite(g_plus, "g_plus");
  require_finite(g_minus, "g_minus");
  require_finite(j_hop, "j_hop");
  require_finite(kappa, "kappa");
  require_finite(gamma, "gamma");
  if (!(kappa > 0.0)) throw ValidationError("kappa must be > 0");
  if (!(gamma > 0.0)) throw ValidationError("gamma must be > 0");
  if (g_plus < 0.0) throw ValidationError("g_plus must be >= 0");
  if (g_minus < 0.0) throw ValidationError("g_minus must be >= 0");
  if (j_hop < 0.0) throw ValidationError("j_hop must be >= 0");
}

DisorderRealization sample_disorder(const DisorderSpec& spec,
                                    const ChainParams& params) {
  spec.validate();
  params.validate();
  DisorderRealization r;
  r.kind = spec.kind;
  switch (spec.kind) {
    case DisorderKind::HoppingJ: {
      const int nb = bond_count(params);
      const double hw = spec.amplitude * params.j_hop;
      r.offsets.resize(nb);
      for (int i = 0; i < nb; ++i) r.offsets[i] = uniform_sym(spec.seed, i, hw);
      break;
    }
    case DisorderKind::MechFrequency: {
      const int ns = params.sites();
      r.offsets.resize(ns);
      for (int i = 0; i < ns; ++i) {
        r.offsets[i] = uniform_sym(spec.seed, i, spec.amplitude);
      }
      break;
    }
    case DisorderKind::OpticalHopping: {
      const int nb = bond_count(params);
      r.offsets.resize(nb);
      for (int i = 0; i < nb; ++i) {
        r.offsets[i] = uniform_sym(spec.seed, i, spec.amplitude);
      }
      break;
    }
    case DisorderKind::EndGamma:
      r.offsets = {spec.amplitude};
      break;
  }
  return r;
}

NHOperator build_chain(const ChainParams& params,
                       const std::vector<DisorderSpec>& disorder) {
  params.validate();
  const int ns = params.sites();
  const int L = params.modes();
  const int dim = params.doubled_dim();
  const SiteTables t = site_tables(params, disorder);

  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim, dim);
  const auto a = [](int i) { return 2 * i; };
  const auto b = [](int i) { return 2 * i + 1; };
  const auto ad = [L](int i) { return L + 2 * i; };
  const auto bd = [L](int i) { return L + 2 * i + 1; };

  for (int i = 0; i < ns; ++i) {
    H(a(i), a(i)) += -kI * (params.kappa / 2);
    H(b(i), b(i)) += -kI * (t.gam[i] / 2) + t.domega[i];
    H(ad(i), ad(i)) += -kI * (params.kappa / 2);
    H(bd(i), bd(i)) += -kI * (t.gam[i] / 2) - t.domega[i];
    if (is_blue_site(i)) {
      H(a(i), bd(i)) += params.g_plus;
      H(b(i), ad(i)) += params.g_plus;
      H(ad(i), b(i)) += -params.g_plus;
      H(bd(i), a(i)) += -params.g_plus;
    } else {
      H(a(i), b(i)) += params.g_minus;
      H(b(i), a(i)) += params.g_minus;
      H(ad(i), bd(i)) += -params.g_minus;
      H(bd(i), ad(i)) += -params.g_minus;
    }
  }
  const int nb = bond_count(params);
  for (int i = 0; i < nb; ++i) {
    const int j = (i + 1) % ns;
    const double jb = params.j_hop + t.dj[i];
    H(b(i), b(j)) += -jb;
    H(b(j), b(i)) += -jb;
    H(bd(i), bd(j)) += jb;
    H(bd(j), bd(i)) += jb;
    const double tb = t.topt[i];
    H(a(i), a(j)) += tb;
    H(a(j), a(i)) += tb;
    H(ad(i), ad(j)) += -tb;
    H(ad(j), ad(i)) += -tb;
  }
  NHOperator op;
  op.matrix = std::move(H);
  op.basis = BasisKind::RealSpace;
  op.boundary = params.boundary;
  op.n_cells = params.n_cells;
  return op;
}

NHOperator build_bloch(const ChainParams& params, double k,
                       const std::vector<DisorderSpec>& disorder) {
  if (!disorder.empty()) {
    throw UnsupportedCombinationError(
        "Bloch operators require translation invariance; disorder only "
        "exists in real space");
  }
  params.validate();
  require_finite(k, "k");

  ChainParams cell = params;
  cell.n_cells = 1;
  cell.boundary = Boundary::OBC;
  NHOperator op = build_chain(cell);

  const double j = params.j_hop;
  const Complex eik = std::exp(kI * k);
  const Complex emk = std::conj(eik);
  // mechanical annihilation of sites 4 and 1, then their creation partners
  const int b4 = 7, b1 = 1, bd4 = 15, bd1 = 9;
  op.matrix(b4, b1) += -j * eik;
  op.matrix(b1, b4) += -j * emk;
  op.matrix(bd4, bd1) += j * eik;
  op.matrix(bd1, bd4) += j * emk;

  op.basis = BasisKind::Bloch;
  op.boundary = Boundary::PBC;
  op.n_cells = 1;
  return op;
}

Eigen::MatrixXcd bloch_k_derivative(const ChainParams& params, double k) {
  params.validate();
  require_finite(k, "k");
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(16, 16);
  const double j = params.j_hop;
  const Complex eik = std::exp(kI * k);
  const Complex emk = std::conj(eik);
  const int b4 = 7, b1 = 1, bd4 = 15, bd1 = 9;
  d(b4, b1) = -kI * j * eik;
  d(b1, b4) = kI * j * emk;
  d(bd4, bd1) = kI * j * eik;
  d(bd1, bd4) = -kI * j * emk;
  return d;
}

DissipationData dissipation_data(const ChainParams& params,
                                 const std::vector<DisorderSpec>& disorder) {
  params.validate();
  const int ns = params.sites();
  const int L = params.modes();
  const SiteTables t = site_tables(params, disorder);

  DissipationData d;
  d.eta_bar.resize(2 * L);
  d.d_diag.resize(2 * L);
  d.m_hat.resize(L);
  d.n_hat.resize(L);
  for (int i = 0; i < ns; ++i) {
    const double ko = params.kappa;
    const double gm = t.gam[i];
    d.eta_bar(2 * i) = ko;
    d.eta_bar(2 * i + 1) = gm;
    d.eta_bar(L + 2 * i) = ko;
    d.eta_bar(L + 2 * i + 1) = gm;
    d.m_hat(2 * i) = ko * (params.n_c + 1.0) / 2;
    d.m_hat(2 * i + 1) = gm * (params.n_m + 1.0) / 2;
    d.n_hat(2 * i) = ko * params.n_c / 2;
    d.n_hat(2 * i + 1) = gm * params.n_m / 2;
  }
  d.d_diag.head(L) = 2.0 * d.m_hat;
  d.d_diag.tail(L) = 2.0 * d.n_hat;
  return d;
}

}  // namespace omtopo
