#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "dnls/paradiff.hpp"

namespace dnls {

/// d(d-1)/2 + d
int d_star(int d);

/// (g_11, ..., g_1d, g_22, ..., g_dd)
std::vector<double> omega_g(const RMatrix& G);

/// Lambda(xi + k) + sigma Lambda(xi) + sigma' Lambda(k), signs in {+1, -1}.
double three_wave(const GridSpec& grid, const Mode& xi, const Mode& k, int sigma, int sigma_p);

struct LowerBoundReport {
    double min_value = 0.0;  // min |phi| <xi>^tau <k>^tau
    Mode xi{};
    Mode k{};
    int sigma = 1;
    int sigma_p = 1;
    bool pass = false;
};

/// Exhaustive over all sign pairs and |xi_i|, |k_i| <= R, with the grid's
/// metric and mass m in place of the grid's own mass.
LowerBoundReport certify_lower_bound(const GridSpec& grid, double m, double gamma, double tau, int R);

/// Smallest tau (to 1e-3, bisection on [0, tau_hi]) at which
/// certify_lower_bound passes; +inf when it fails even at tau_hi.
double empirical_tau(const GridSpec& grid, double m, double gamma, int R, double tau_hi);

/// Default certification box radius: 32 (d = 1), 12 (d = 2), 4 (d = 3).
int default_certify_radius(int d);

struct DiophantineReport {
    bool pass = true;
    std::vector<int> worst_ell;
    double worst_value = 0.0;  // min |omega.l +- m| <l>^tau_star
};

/// |omega.l +- m| >= gamma <l>^-tau_star over |l_i| <= ell_cutoff.
DiophantineReport diophantine_check(double m, const std::vector<double>& omega, double gamma, double tau_star, int ell_cutoff);
bool diophantine_test(double m, const std::vector<double>& omega, double gamma, double tau_star, int ell_cutoff);

struct ScanConfig {
    double gamma = 1e-3;
    double tau_star = 0.0;  // 0 selects d_star + 1
    int ell_cutoff = 20;
    double mass_lo = 0.0;
    double mass_hi = 1.0;
    int mass_count = 10000;

    void validate(int d) const;
    double tau_for(int d) const { return tau_star > 0.0 ? tau_star : d_star(d) + 1.0; }
    /// Midpoints of mass_count equal cells of (mass_lo, mass_hi).
    double mass(int i) const { return mass_lo + (i + 0.5) * (mass_hi - mass_lo) / mass_count; }
};

struct MassScanRow {
    double m;
    DiophantineReport report;
};

/// Row per mass, in grid order.
std::vector<MassScanRow> mass_scan(const ScanConfig& cfg, const std::vector<double>& omega, int d);
double excluded_measure_scan(const ScanConfig& cfg, const std::vector<double>& omega, int d);

/// G = I + symmetric perturbation with entries uniform in [-amplitude, amplitude],
/// redrawn until positive definite and omega_g passes the Diophantine test at
/// the given mass.
RMatrix generic_metric(int d, double m, const ScanConfig& cfg, std::uint64_t seed, double amplitude = 0.1);

/// Raised by the Birkhoff solver on a vanishing divisor.
class ZeroDivisorError : public std::runtime_error {
  public:
    ZeroDivisorError(const Mode& k, const Mode& xi, int d);
    Mode k;
    Mode xi;
};

/// Tables t(k, xi) (output k, input xi, both box-indexed) acting bilinearly:
/// (T(v) w)^(k) = sum_xi t(k, xi) v^(k - xi) w^(xi). Entry (k, xi) of the
/// returned matrix is t(k, xi) v^(k - xi).
CMatrix bilinear_apply(const GridSpec& grid, const CMatrix& table, const Field& v);

/// f(k, xi) = -r(k, xi) / (i (Lambda(k) + sigma Lambda(k - xi) + sigma' Lambda(xi)))
/// on every (k, xi) with k - xi in the box. Throws ZeroDivisorError.
CMatrix birkhoff_F(const CMatrix& r, int sigma, int sigma_p, const GridSpec& grid);

/// Pair operator family linear in U: the upper block row is
///   A11(U) = T11u(u) + T11b(ubar),  A12(U) = T12u(u) + T12b(ubar)
/// with bilinear tables as in bilinear_apply.
struct LinearFamily {
    GridSpec grid;
    CMatrix t11_u, t11_ubar, t12_u, t12_ubar;

    explicit LinearFamily(GridSpec g);
    PairLinOp at(const PairField& U) const;
};

/// Solves -F(i E Lambda U) + [i E Lambda, F(U)] + R(U) = 0 componentwise.
LinearFamily birkhoff_matrix_solve(const LinearFamily& R);

/// max-abs of the left side above at U, relative to max-abs of R(U).
double birkhoff_residual(const LinearFamily& R, const LinearFamily& F, const PairField& U);

/// (i E Lambda U)
PairField linear_flow_field(const PairField& U);

/// CSV `gamma,excluded_fraction`.
void write_scan_summary_csv(std::ostream& os, double gamma, double excluded_fraction);
/// CSV `m,pass,worst_l_1..,worst_value`.
void write_mass_scan_csv(std::ostream& os, const std::vector<MassScanRow>& rows);

}  // namespace dnls
