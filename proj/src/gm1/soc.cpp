#include "gm1/soc.hpp"

#include <cmath>
#include <stdexcept>

namespace gm1 {

namespace {

// Extremal scan over a returns buffer; strict > keeps the smallest j on ties.
void scan_signal(const std::vector<double>& r, double& V, int& j_s) {
    const int n = static_cast<int>(r.size());
    V = -1.0;
    j_s = 0;
    for (int j = 0; j < n; ++j) {
        const int jm = (j + n - 1) % n;
        const int jp = (j + 1) % n;
        const double a = std::fabs(r[j] * (r[jp] - r[jm]));
        if (a > V) {
            V = a;
            j_s = j;
        }
    }
}

// Steps 1-5 of the extremal update at a given signal site.
void apply_update(LadderLattice& lat, const Couplings& c, double chi, int j_s, Rng& rng) {
    if (!lat.axis_frozen()) throw std::logic_error("signal update needs a frozen cash axis");
    if (!(chi >= 0.0)) throw std::domain_error("chi must be non-negative");
    const int jm1 = lat.mod(j_s - 1);
    const int jm2 = lat.mod(j_s - 2);

    // 1. Centered matter draws; both coefficient pairs from the pre-step state.
    const LocalCoefficients lc1 = local_coeffs_phi(lat, c, Site{1, jm1});
    const LocalCoefficients lc2 = local_coeffs_phi(lat, c, Site{1, j_s});
    const double p1 = sample_cosh(2.0 * c.beta * std::sqrt(lc1.L * lc1.L_bar), rng);
    const double p2 = sample_cosh(2.0 * c.beta * std::sqrt(lc2.L * lc2.L_bar), rng);

    // 2. Shift means: links from current values, matter from the fresh draws.
    const double a_theta =
        (lat.theta0(1, jm2) + lat.theta0(1, jm1) + lat.theta0(1, j_s)) / 3.0;
    const double a_phi = 0.5 * (p1 + p2);

    // 3. Damp the three adjacent temporal links.
    lat.set_theta0(1, jm2, lat.theta0(1, jm2) - chi * a_theta);
    lat.set_theta0(1, jm1, lat.theta0(1, jm1) - chi * a_theta);
    lat.set_theta0(1, j_s, lat.theta0(1, j_s) - chi * a_theta);

    // 4. Store the recentered matter pair (mean exactly cancelled).
    lat.set_phi(1, jm1, p1 - a_phi);
    lat.set_phi(1, j_s, p2 - a_phi);

    // 5. Repair the two touched rungs with full heatbath draws, sequentially.
    heatbath_update(lat, c, Target{Target::Kind::Theta1, 0, jm1}, rng);
    heatbath_update(lat, c, Target{Target::Kind::Theta1, 0, j_s}, rng);
}

}  // namespace

FitnessSignal fitness(const LadderLattice& lat) {
    if (!lat.axis_frozen()) throw std::logic_error("fitness scan needs a frozen cash axis");
    const int n = lat.n();
    std::vector<double> r = lat.returns_series();
    FitnessSignal f;
    f.v.resize(n);
    f.V = -1.0;
    f.j_s = 0;
    for (int j = 0; j < n; ++j) {
        const int jm = (j + n - 1) % n;
        const int jp = (j + 1) % n;
        f.v[j] = r[j] * (r[jp] - r[jm]);
        const double a = std::fabs(f.v[j]);
        if (a > f.V) {
            f.V = a;
            f.j_s = j;
        }
    }
    return f;
}

FitnessSignal signal_update_step(LadderLattice& lat, const Couplings& c,
                                 const UpdateParams& p, Rng& rng) {
    FitnessSignal sig = fitness(lat);
    apply_update(lat, c, p.chi, sig.j_s, rng);
    return sig;
}

void run_soc(LadderLattice& lat, const Couplings& c, const UpdateParams& p, Rng& rng,
             const SocObserver& observer) {
    if (p.signal_updates < 0) throw std::invalid_argument("signal_updates must be non-negative");
    if (!lat.axis_frozen()) throw std::logic_error("signal updates need a frozen cash axis");
    std::vector<double> r = lat.returns_series();
    for (long long s = 0; s < p.signal_updates; ++s) {
        double V;
        int j_s;
        scan_signal(r, V, j_s);
        apply_update(lat, c, p.chi, j_s, rng);
        for (int d = -1; d <= 1; ++d) {
            const int j = lat.mod(j_s + d);
            r[j] = lat.log_return(j);
        }
        if (observer) observer(s, V, j_s, lat);
    }
}

}  // namespace gm1
