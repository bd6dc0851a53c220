#pragma once

#include <array>
#include <complex>

#include "omtopo/params.hpp"

namespace omtopo {

// Reduced model of one chain end: a blue site (pairing G+) whose mechanical
// mode hops with J to a red site (beam-splitter G-).  Its four poles
// reproduce the end-state dissipation of the full chain; returned sorted by
// descending imaginary part.
std::array<std::complex<double>, 4> twosite_poles(const TwoSiteParams& p);

// Largest--imaginary-part pole, the quantity overlaid on chain sweeps.
double twosite_im_max(const TwoSiteParams& p);

struct AsymptoteValue {
  double value;
  bool in_regime;  // false => the expansion parameter is out of range
};

// Closed-form damping of the long-lived pole for vanishing G+:
//   -gamma/2 - (kappa - gamma) (J/G-)^2 (1 - (J/G-)^2).
// Meaningful for J < G-; carries an out-of-regime flag otherwise.  Note the
// unit tests record that at kappa ~ G- this expansion deviates strongly from
// the exact poles (see the acceptance summary).
AsymptoteValue asymptote_small_gplus(const TwoSiteParams& p);

// Growth-rate form for strong blue drive:
//   -(kappa + gamma)/2 + sqrt((kappa - gamma)^2/4 + 4 G+^2).
AsymptoteValue asymptote_large_gplus(const TwoSiteParams& p);

}  // namespace omtopo
