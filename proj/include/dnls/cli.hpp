#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dnls/evolution.hpp"
#include "dnls/normal_form.hpp"
#include "dnls/small_divisors.hpp"

namespace dnls {

// ---- normal-form driver -----------------------------------------------------------

/// Linear-in-U part of the remainder after n_steps diag and n_steps nf
/// conjugations, probed mode by mode through the linearized pipeline.
LinearFamily linear_remainder_family(const CubicDensity& f, const GridSpec& grid, const NFParams& p, int n_steps);

/// The linearized pipeline itself (first-order part in U of each step).
OperatorDecomposition linearized_pipeline(const OperatorDecomposition& P, const NFParams& p, int n_steps);

struct NormalFormRun {
    StepNorms initial;
    std::vector<StepReport> steps;
    bool birkhoff_done = false;
    /// H^s -> H^{s+1} norms of the linear-in-U remainder around the Birkhoff step.
    double linear_remainder_before = 0.0;
    double linear_remainder_after = 0.0;
    double birkhoff_identity_residual = 0.0;
    std::string error;  // zero-divisor message, empty on success

    bool offdiag_monotone() const;     // across the diag steps
    bool non_normal_monotone() const;  // across the nf steps
    double linear_drop() const;
    std::string to_json() const;
};

NormalFormRun run_normal_form(const CubicDensity& f, const PairField& U, const NFParams& p, int n_steps, double s);

// ---- calculus self-checks --------------------------------------------------------

struct SuiteCheck {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass() const { return value <= threshold; }
};

/// Residual suite of the symbolic calculus at (d, K); `cutoff` replaces eta
/// in the quantization checks.
std::vector<SuiteCheck> calculus_suite(int d, int K, std::uint64_t seed, const Cutoff& cutoff = eta);

/// Real symbol with x-band `band`: c0 <xi>^order + c1 sin(xi_1) per row.
Symbol random_real_symbol(const GridSpec& g, int band, std::uint64_t seed, double order = 1.0);
/// Complex order -1 symbol, even in xi, supported on |k| <= 2.
Symbol random_even_symbol(const GridSpec& g, std::uint64_t seed, double size);
/// Hermitian real-to-real 2N x 2N matrix with Gaussian entries.
CMatrix random_pair_hermitian(const GridSpec& g, std::uint64_t seed);

// ---- configuration ----------------------------------------------------------------

/// Flat `section.key = value` file; `#` starts a comment.
class FlatConfig {
  public:
    static FlatConfig parse(std::istream& is);
    static FlatConfig load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::map<std::string, std::string>& values() const { return values_; }

    /// Throws std::invalid_argument naming every key outside `allowed`.
    void require_known(const std::vector<std::string>& allowed) const;

    std::string get(const std::string& key, const std::string& fallback) const;
    double get(const std::string& key, double fallback) const;
    int get(const std::string& key, int fallback) const;
    std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

  private:
    std::map<std::string, std::string> values_;
};

enum class Command { verify_calculus, scan_mass, normal_form, lifespan };
Command parse_command(const std::string& name);
std::string to_string(Command c);

/// Every setting a command may read, validated at load.
struct RunConfig {
    Command command = Command::verify_calculus;
    std::uint64_t seed = 1;
    int threads = 0;  // 0: library default
    std::filesystem::path output_dir = ".";

    // grid
    int d = 1;
    int K = 16;
    double m = 0.5;
    std::vector<double> metric;  // grid.G, row-major d x d; empty: identity
    double eps_q = GridSpec::kDefaultEpsQ;

    // normal form
    NFParams nf = NFParams::defaults(1);
    int n_steps = 2;
    double eps = 0.05;
    double s = 1.0;

    // scan
    ScanConfig scan;
    std::vector<double> omega;  // empty: seeded generic metric
    int certify_radius = 0;  // 0: default_certify_radius(d)

    // evolution
    SimConfig sim;
    std::vector<double> eps_list{0.1, 0.05, 0.025};
    int seeds = 1;
    double t_max_factor = 0.1;  // t_max = factor * eps^-2

    /// Test hook for verify-calculus: quantize with a broken cutoff.
    bool corrupt_eta = false;

    GridSpec grid() const;
    static RunConfig from_flat(Command c, const FlatConfig& cfg);
    /// The resolved configuration in FlatConfig syntax.
    std::string to_config() const;
};

struct CommandResult {
    int exit_code = 0;
    std::string report;  // JSON
};

CommandResult cmd_verify_calculus(const RunConfig& cfg);
CommandResult cmd_scan_mass(const RunConfig& cfg);
CommandResult cmd_normal_form(const RunConfig& cfg);
CommandResult cmd_lifespan(const RunConfig& cfg);
CommandResult run_command(const RunConfig& cfg);

}  // namespace dnls
