#include "omtopo/twosite.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "omtopo/errors.hpp"

namespace omtopo {
namespace {

using Complex = std::complex<double>;
constexpr Complex kI{0.0, 1.0};

// Dynamical matrix of the end fragment in the (a1, b1^+, a2, b2) frame:
// site 1 is blue (pairing G+), site 2 red (beam splitter G-), the two
// mechanical modes share the hop J.  Poles are E = i * eig(M).
Eigen::Matrix4cd dynamical_matrix(const TwoSiteParams& p) {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = -p.kappa / 2;
  m(0, 1) = -kI * p.g_plus;
  m(1, 0) = kI * p.g_plus;
  m(1, 1) = -p.gamma / 2;
  m(1, 3) = kI * p.j_hop;
  m(2, 2) = -p.kappa / 2;
  m(2, 3) = kI * p.g_minus;
  m(3, 1) = kI * p.j_hop;
  m(3, 2) = kI * p.g_minus;
  m(3, 3) = -p.gamma / 2;
  return m;
}

}  // namespace

std::array<Complex, 4> twosite_poles(const TwoSiteParams& p) {
  p.validate();
  const Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(dynamical_matrix(p),
                                                       false);
  std::array<Complex, 4> poles;
  for (int i = 0; i < 4; ++i) poles[i] = kI * es.eigenvalues()(i);
  std::sort(poles.begin(), poles.end(), [](const Complex& a, const Complex& b) {
    if (a.imag() != b.imag()) return a.imag() > b.imag();
    return a.real() < b.real();
  });
  return poles;
}

double twosite_im_max(const TwoSiteParams& p) {
  return twosite_poles(p)[0].imag();
}

AsymptoteValue asymptote_small_gplus(const TwoSiteParams& p) {
  p.validate();
  if (p.g_minus <= 0.0) {
    throw ValidationError(
        "small-drive damping formula divides by g_minus; it must be > 0");
  }
  const double r2 = (p.j_hop * p.j_hop) / (p.g_minus * p.g_minus);
  AsymptoteValue out;
  out.value = -p.gamma / 2 - (p.kappa - p.gamma) * r2 * (1.0 - r2);
  out.in_regime = p.j_hop < p.g_minus;
  return out;
}

AsymptoteValue asymptote_large_gplus(const TwoSiteParams& p) {
  p.validate();
  AsymptoteValue out;
  out.value = -(p.kappa + p.gamma) / 2 +
              std::sqrt((p.kappa - p.gamma) * (p.kappa - p.gamma) / 4 +
                        4.0 * p.g_plus * p.g_plus);
  out.in_regime = p.g_plus >= p.kappa;
  return out;
}

}  // namespace omtopo
