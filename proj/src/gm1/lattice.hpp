#pragma once
// The 2 x n ladder lattice of the one-asset gauge model of a market.
// Rail i=0 is cash, rail i=1 is the asset; time j is periodic mod n.
// Fields are stored in log representation: gauge transforms are additive
// and the multiplicative fields exp(theta), exp(phi) are derived.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "gm1/rng.hpp"

namespace gm1 {

struct Couplings {
    double beta = 1.0;
    // Forward / reverse hop couplings. The minus family is accepted for
    // completeness but enters no action term (all four equal 1 in practice).
    double d_plus = 1.0;
    double d_bar_plus = 1.0;
    double d_minus = 1.0;
    double d_bar_minus = 1.0;
};

// Additive gauge function h(i,j) on sites; phi'(x) = h(x) + phi(x),
// theta'_mu(x) = h(x) + theta_mu(x) - h(x + e_mu).
struct GaugeTransform {
    std::vector<double> h0;  // cash rail, size n
    std::vector<double> h1;  // asset rail, size n
};

struct Site {
    int i;  // rail: 0 cash, 1 asset
    int j;  // time slice
};

class LadderLattice {
public:
    // Every theta and phi i.i.d. uniform on [-spread, +spread]; axis unfrozen.
    static LadderLattice random_init(int n, double spread, Rng& rng);

    int n() const { return n_; }
    bool axis_frozen() const { return axis_frozen_; }
    double rho() const { return rho_; }

    int mod(int j) const {
        int m = j % n_;
        return m < 0 ? m + n_ : m;
    }

    // Temporal link theta0(i,j): from (i,j) to (i,j+1).
    double theta0(int i, int j) const { return theta0_[i][mod(j)]; }
    // Rung theta1(0,j): from (0,j) to (1,j).
    double theta1(int j) const { return theta1_[mod(j)]; }
    double phi(int i, int j) const { return phi_[i][mod(j)]; }

    void set_theta0(int i, int j, double v);
    void set_theta1(int j, double v) { theta1_[mod(j)] = v; }
    void set_phi(int i, int j, double v);

    // P10(0,j) = exp(theta1(0,j) + theta0(1,j) - theta1(0,j+1) - theta0(0,j)).
    double plaquette(int j) const;

    // R_mu(x) = exp(-phi(x) + theta_mu(x) + phi(x+e_mu)); rungs exist only
    // from the cash rail (i=0, mu=1).
    double gauge_link(Site x, int mu) const;

    // r_j = -phi(1,j-1) + theta0(1,j-1) + phi(1,j).
    double log_return(int j) const;
    std::vector<double> returns_series() const;

    // S = sum_j (P + 1/P - 2) + sum_links (d R + dbar / R - (d + dbar)),
    // over all n plaquettes, 2n temporal links and n rungs. Non-negative,
    // zero exactly on the zero-field configuration at default couplings.
    double action(const Couplings& c) const;

    void apply_gauge(const GaugeTransform& g);

    // Applies h(0,j) = -phi(0,j), then sets theta0(0,j) = log(rho) for all j
    // and freezes the cash axis. Thereafter phi(0,j) = 0 and R0(0,j) = rho.
    void fix_cash_axis(double rho);

    // Pure gauge transform h(1,j) = -phi(1,j) (identity on invariants):
    // re-anchors the asset rail so phi(1,.) = 0 and theta0(1,j) becomes the
    // log-return r_{j+1}. Local update prescriptions that recenter fields
    // assume this anchored frame; without periodic re-anchoring the fields
    // random-walk along the action's flat gauge directions.
    void anchor_asset_gauge();

    void save_snapshot(const std::string& path) const;
    std::string snapshot_text() const;
    static LadderLattice load_snapshot(const std::string& path);
    static LadderLattice parse_snapshot(const std::string& text);

private:
    LadderLattice() = default;
    int n_ = 0;
    bool axis_frozen_ = false;
    double rho_ = 1.0;
    std::vector<double> theta0_[2];
    std::vector<double> theta1_;
    std::vector<double> phi_[2];
};

}  // namespace gm1
