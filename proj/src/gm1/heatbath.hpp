#pragma once
// Exact heatbath updates. Every unfrozen variable v has a conditional density
// proportional to exp(-beta(L_bar e^v + L e^{-v})); the coefficients collect
// the action terms around the variable's local environment. A draw is made by
// sampling the symmetrized density exp(-2 beta sqrt(L L_bar) cosh(u)) and
// shifting by the centering 0.5 log(L / L_bar).

#include "gm1/lattice.hpp"
#include "gm1/rng.hpp"

namespace gm1 {

struct LocalCoefficients {
    double L;      // coefficient of e^{-v}
    double L_bar;  // coefficient of e^{+v}
};

// Coefficients for a gauge link theta_mu(x). Asset temporal links see one
// plaquette and one hop term; rungs see two plaquettes and one hop term.
LocalCoefficients local_coeffs_theta(const LadderLattice& lat, const Couplings& c,
                                     Site x, int mu);

// Coefficients for an asset matter field phi(1,j): three hop terms
// (incoming temporal, outgoing temporal, incoming rung).
LocalCoefficients local_coeffs_phi(const LadderLattice& lat, const Couplings& c, Site x);

// Draws u with density proportional to exp(-a cosh u) by exact rejection:
// zero-mean Gaussian proposal of variance 1/a, acceptance probability
// exp(-a(cosh u - 1 - u^2/2)) which is <= 1 since cosh u >= 1 + u^2/2.
// Throws domain_error unless a is finite and >= 1e-16 (rejection would
// stall outside that range, which only diverged fields can reach).
double sample_cosh(double a, Rng& rng);

struct Target {
    enum class Kind { Theta0, Theta1, Phi };
    Kind kind;
    int i;
    int j;
};

// Replaces the target variable with an exact conditional draw
// u + 0.5 log(L / L_bar), u ~ exp(-2 beta sqrt(L L_bar) cosh u).
void heatbath_update(LadderLattice& lat, const Couplings& c, Target t, Rng& rng);

// One heatbath_update of every unfrozen variable in fixed lexicographic
// order: rungs theta1(0,j), then asset temporal links theta0(1,j), then
// asset matter phi(1,j), each j ascending. Requires a frozen cash axis.
void heatbath_sweep(LadderLattice& lat, const Couplings& c, Rng& rng);

}  // namespace gm1
