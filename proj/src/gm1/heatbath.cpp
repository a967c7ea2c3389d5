#include "gm1/heatbath.hpp"

#include <cmath>
#include <stdexcept>

namespace gm1 {

LocalCoefficients local_coeffs_theta(const LadderLattice& lat, const Couplings& c,
                                     Site x, int mu) {
    const int j = lat.mod(x.j);
    const int jp = lat.mod(j + 1);
    if (mu == 0) {
        if (x.i != 1) throw std::invalid_argument("temporal heatbath targets the asset rail");
        // Plaquette j plus the asset temporal hop.
        const double q_env = lat.theta1(j) - lat.theta1(jp) - lat.theta0(0, j);
        LocalCoefficients lc;
        lc.L_bar = std::exp(q_env) + c.d_plus * std::exp(-lat.phi(1, j) + lat.phi(1, jp));
        lc.L = std::exp(-q_env) + c.d_bar_plus * std::exp(lat.phi(1, j) - lat.phi(1, jp));
        return lc;
    }
    if (mu == 1) {
        if (x.i != 0) throw std::invalid_argument("rungs run upward from the cash rail");
        // Plaquettes j and j-1 plus the rung hop.
        const int jm = lat.mod(j - 1);
        const double q_fwd = lat.theta0(1, j) - lat.theta1(jp) - lat.theta0(0, j);
        const double q_bwd = lat.theta1(jm) + lat.theta0(1, jm) - lat.theta0(0, jm);
        const double hop = -lat.phi(0, j) + lat.phi(1, j);
        LocalCoefficients lc;
        lc.L_bar = std::exp(q_fwd) + std::exp(-q_bwd) + c.d_plus * std::exp(hop);
        lc.L = std::exp(-q_fwd) + std::exp(q_bwd) + c.d_bar_plus * std::exp(-hop);
        return lc;
    }
    throw std::invalid_argument("link direction must be 0 (temporal) or 1 (rung)");
}

LocalCoefficients local_coeffs_phi(const LadderLattice& lat, const Couplings& c, Site x) {
    if (x.i != 1) throw std::invalid_argument("matter heatbath targets the asset rail");
    const int j = lat.mod(x.j);
    const int jm = lat.mod(j - 1);
    const int jp = lat.mod(j + 1);
    // Incoming temporal, outgoing temporal, incoming rung.
    LocalCoefficients lc;
    lc.L_bar = c.d_plus * std::exp(-lat.phi(1, jm) + lat.theta0(1, jm)) +
               c.d_bar_plus * std::exp(-lat.theta0(1, j) - lat.phi(1, jp)) +
               c.d_plus * std::exp(-lat.phi(0, j) + lat.theta1(j));
    lc.L = c.d_bar_plus * std::exp(lat.phi(1, jm) - lat.theta0(1, jm)) +
           c.d_plus * std::exp(lat.theta0(1, j) + lat.phi(1, jp)) +
           c.d_bar_plus * std::exp(lat.phi(0, j) - lat.theta1(j));
    return lc;
}

double sample_cosh(double a, Rng& rng) {
    // The envelope wastes ~1/sqrt(a) proposals as a -> 0 and the accept test
    // degenerates to NaN at a = inf, so refuse arguments where the loop below
    // could stall; values outside [1e-16, inf) only arise from diverged fields.
    if (!(a >= 1e-16) || !std::isfinite(a))
        throw std::domain_error("cosh sampler needs finite a >= 1e-16");
    const double width = 1.0 / std::sqrt(a);
    for (;;) {
        const double u = width * rng.gaussian();
        // cosh u - 1 - u^2/2 >= 0, so the ratio is a valid probability.
        const double log_accept = -a * (std::cosh(u) - 1.0 - 0.5 * u * u);
        if (rng.uniform() < std::exp(log_accept)) return u;
    }
}

void heatbath_update(LadderLattice& lat, const Couplings& c, Target t, Rng& rng) {
    LocalCoefficients lc;
    switch (t.kind) {
        case Target::Kind::Theta0:
            lc = local_coeffs_theta(lat, c, Site{t.i, t.j}, 0);
            break;
        case Target::Kind::Theta1:
            lc = local_coeffs_theta(lat, c, Site{t.i, t.j}, 1);
            break;
        case Target::Kind::Phi:
            lc = local_coeffs_phi(lat, c, Site{t.i, t.j});
            break;
        default:
            throw std::invalid_argument("unknown heatbath target");
    }
    const double a = 2.0 * c.beta * std::sqrt(lc.L * lc.L_bar);
    const double v = sample_cosh(a, rng) + 0.5 * std::log(lc.L / lc.L_bar);
    switch (t.kind) {
        case Target::Kind::Theta0:
            lat.set_theta0(t.i, t.j, v);
            break;
        case Target::Kind::Theta1:
            lat.set_theta1(t.j, v);
            break;
        case Target::Kind::Phi:
            lat.set_phi(t.i, t.j, v);
            break;
    }
}

void heatbath_sweep(LadderLattice& lat, const Couplings& c, Rng& rng) {
    if (!lat.axis_frozen()) throw std::logic_error("heatbath sweep needs a frozen cash axis");
    const int n = lat.n();
    for (int j = 0; j < n; ++j) heatbath_update(lat, c, Target{Target::Kind::Theta1, 0, j}, rng);
    for (int j = 0; j < n; ++j) heatbath_update(lat, c, Target{Target::Kind::Theta0, 1, j}, rng);
    for (int j = 0; j < n; ++j) heatbath_update(lat, c, Target{Target::Kind::Phi, 1, j}, rng);
}

}  // namespace gm1
