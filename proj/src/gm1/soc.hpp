#pragma once
// Extremal "signal" dynamics: locate the site with the largest fitness
// |v_j| = |r_j (r_{j+1} - r_{j-1})| and renew its neighbourhood — fresh
// centered matter draws, a chi-damped shift of the three adjacent temporal
// links, and heatbath repair of the two touched rungs. Repeated steps drive
// the equilibrated lattice into a self-organized critical state.

#include <cstdint>
#include <functional>
#include <vector>

#include "gm1/heatbath.hpp"
#include "gm1/lattice.hpp"
#include "gm1/rng.hpp"

namespace gm1 {

struct UpdateParams {
    double chi = 1e-3;              // update-shift strength
    long long signal_updates = 0;   // total extremal steps to run
};

struct FitnessSignal {
    std::vector<double> v;  // v_j = r_j (r_{j+1} - r_{j-1})
    double V = 0.0;         // max_j |v_j|
    int j_s = 0;            // arg max, smallest j on ties
};

// Fitness of every site plus the extremal site. Requires a frozen cash axis.
FitnessSignal fitness(const LadderLattice& lat);

// One extremal update. Returns the fitness that selected the site (the
// pre-update signal). Steps, in order:
//   1. draw phi'(1,j), j in {j_s-1, j_s}, from the centered matter density
//      exp(-a cosh u), both coefficient pairs taken from the pre-step state;
//   2. a_theta = mean of the three current links theta0(1, j_s-2 .. j_s),
//      a_phi = mean of the two fresh draws;
//   3. theta0(1,j) -= chi * a_theta for the three links;
//   4. phi(1,j) = phi'(1,j) - a_phi for the pair (zero-mean by construction);
//   5. full heatbath redraw of rungs theta1(0, j_s-1) then theta1(0, j_s).
// Only returns r_{j_s-1}, r_{j_s}, r_{j_s+1} can change.
FitnessSignal signal_update_step(LadderLattice& lat, const Couplings& c,
                                 const UpdateParams& p, Rng& rng);

// Called after every step with (step index, selecting signal V, signal site,
// updated lattice).
using SocObserver = std::function<void(long long s, double V, int j_s, const LadderLattice&)>;

// Applies p.signal_updates extremal steps, invoking the observer (if set)
// after each. The per-step fitness scan reuses an internal returns buffer.
void run_soc(LadderLattice& lat, const Couplings& c, const UpdateParams& p, Rng& rng,
             const SocObserver& observer = {});

}  // namespace gm1
