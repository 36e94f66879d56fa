#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "dnls/nonlinearity.hpp"

namespace dnls {

struct SimConfig {
    double dt = 1e-2;
    double t_max = 1.0;
    double rho = 4.0;
    std::vector<double> s_high{8.0};
    double blowup_factor = 2.0;
    int record_stride = 10;

    /// dt > 0, t_max >= 0, rho >= 1, every s >= rho, blowup_factor > 1,
    /// record_stride >= 1.
    void validate() const;
};

class NumericalBlowup : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Strang splitting: half linear phase e^{-i Lambda dt/2}, one classical RK4
/// step of du/dt = -i Q(u, ubar), half linear phase.
class Integrator {
  public:
    Integrator(GridSpec grid, CubicDensity f);

    /// Throws NumericalBlowup on non-finite coefficients.
    Field step(const Field& u, double dt);
    NonlinearityEvaluator& evaluator() { return eval_; }

  private:
    Field half_linear(const Field& u, double dt) const;
    Field nonlinear_rhs(const Field& u);

    GridSpec grid_;
    bool linear_only_;
    NonlinearityEvaluator eval_;
};

Field step(const Field& u, const CubicDensity& f, double dt);

enum class ExitKind { completed, norm_exceeded, blowup };
std::string to_string(ExitKind e);

struct Trajectory {
    std::vector<double> times;
    std::vector<double> low_norms;
    std::vector<std::vector<double>> high_norms;  // [sample][index into s_high]
    std::vector<double> hamiltonian;
    ExitKind exit = ExitKind::completed;
    double exit_time = 0.0;  // first crossing (norm_exceeded) or last good time (blowup)
    double eps = 0.0;        // ||u0||_{H^rho}
};

Trajectory run(const Field& u0, const CubicDensity& f, const SimConfig& cfg);

/// Modes with |xi_i| <= K/4, seeded random phases, amplitude <xi>^{-rho-1},
/// rescaled to ||u||_{H^rho} = eps.
Field shaped_initial_data(const GridSpec& grid, double rho, double eps, std::uint64_t seed);

struct LifespanRow {
    double eps = 0.0;
    int seed_index = 0;
    double t_max = 0.0;
    double t_star = 0.0;  // exit time, or t_max when censored
    bool censored = true;
    double max_low_ratio = 0.0;   // max_t ||u||_{H^rho} / eps
    double max_high_ratio = 0.0;  // max_t, s ||u||_{H^s} / ||u0||_{H^s}
};

struct LifespanRatio {
    double eps = 0.0;  // the smaller amplitude
    int seed_index = 0;
    double ratio = 0.0;  // T*(eps) / T*(2 eps)
};

struct LifespanStudy {
    std::vector<LifespanRow> rows;
    std::vector<LifespanRatio> ratios;  // uncensored pairs only
    /// T* eps^2 over uncensored rows.
    std::vector<double> empirical_c;
};

/// t_max per amplitude is t_max_factor * eps^-2 (cfg.t_max is ignored).
/// Data shape depends on the seed index only, so amplitudes are comparable.
LifespanStudy lifespan_study(const GridSpec& grid, const CubicDensity& f, const SimConfig& cfg,
                             const std::vector<double>& eps_list, int seeds, std::uint64_t base_seed,
                             double t_max_factor);

/// `t,low_norm,high_norm_<s>...,H`
void write_trajectory_csv(std::ostream& os, const Trajectory& tr, const SimConfig& cfg);
/// `eps,seed,t_max,T_star,censored,max_low_ratio,max_high_ratio`
void write_study_csv(std::ostream& os, const LifespanStudy& st);

}  // namespace dnls
