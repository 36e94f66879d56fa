#pragma once

#include <optional>
#include <string>

#include "dnls/nonlinearity.hpp"
#include "dnls/paradiff.hpp"

namespace dnls {

/// Cutoff exponents of the normal-form layer.
struct NFParams {
    double delta = 0.75;
    double tau = 1.0;
    double eps_nf = 0.3;

    static NFParams defaults(int d);
    /// 2/3 < delta < 1, tau > d - 1, 0 < eps_nf < delta / (tau + 1);
    /// throws std::invalid_argument otherwise.
    void validate(int d) const;
};

/// Even C^inf cutoff: 1 on [0, 1/2], 0 on [1, inf).
double chi(double y);

struct CutoffValues {
    double chi_k = 1.0;        // chi(2 |k|^tau (xi;k) / <xi>^delta)
    double chi_tilde_k = 1.0;  // chi(|k| / <xi>^eps_nf)
    double d_k = 0.0;          // (1 - chi_k) / (2 (xi;k)), 0 where chi_k = 1
};

/// Throws std::invalid_argument for k = 0.
CutoffValues cutoffs(const GridSpec& grid, const Mode& k, std::span<const double> xi, const NFParams& p);

struct SymbolParts {
    Symbol avg;     // k = 0 row
    Symbol nr;      // (1 - chi_k) chi~_k a^(k)
    Symbol res;     // chi_k chi~_k a^(k)
    Symbol smooth;  // (1 - chi~_k) a^(k)
};

SymbolParts decompose(const Symbol& a, const NFParams& p);

struct HomologicalSolution {
    Symbol g;
    /// max |{Lambda, g} + a^nr|
    double residual = 0.0;
};

/// g^(k) = -(1/i) d_k chi~_k a^(k), so that {Lambda, g} + a^nr = 0 with
/// {a, b} = d_xi a . d_x b - d_x a . d_xi b.
HomologicalSolution homological_g(const Symbol& a, const NFParams& p);

struct NormalFormCheck {
    bool ok = true;
    /// Entry with the largest violation (meaningful when !ok).
    Mode k{};
    std::array<double, kMaxDim> xi{};
    double violation = 0.0;
};

/// Support condition: z^(k, xi) != 0 (above threshold) implies
/// |(xi;k)| <= <xi>^delta |k|^-tau and |k| <= <xi>^eps_nf.
NormalFormCheck is_normal_form(const Symbol& z, const NFParams& p, double threshold = 1e-14);

/// b / (2 Lambda), two orders lower.
Symbol diag_step_psi(const Symbol& b);

/// min{delta, 3 delta - 2, 2 delta - 1}; throws for delta outside (2/3, 1).
double regularization_gain(double delta);

/// T = i E Op(Lambda) + i E Op([[a, b], [bar b, bar a]]) + R on the pair
/// space. The symbol part holds exactly the entries where the quantization
/// cutoff equals one; everything else lives in the remainder R, so
/// extraction is idempotent.
struct OperatorDecomposition {
    Symbol a;  // order 1
    Symbol b;  // order 0
    PairLinOp remainder;

    const GridSpec& grid() const { return a.grid(); }
    CMatrix dense() const;

    static OperatorDecomposition extract(const GridSpec& grid, const CMatrix& dense);

    /// The paralinearized operator at U: i E (Op(Lambda) + Op^bw(A(U)) + R(U))
    /// where R(U) collects the comparable-frequency interactions, so that
    /// the operator applied to U equals i E (Lambda U + Q(U)).
    static OperatorDecomposition paralinearized(const CubicDensity& f, const PairField& U);
};

enum class StepKind { diag, nf, birkhoff };
std::string to_string(StepKind k);

struct StepGenerator {
    StepKind kind;
    std::optional<Symbol> symbol;          // psi (diag) or g (nf)
    std::optional<PairLinOp> smoothing;    // F(U) (birkhoff)
    std::optional<PairLinOp> smoothing_dt; // F(dU/dt) (birkhoff)

    static StepGenerator diag(Symbol psi);
    static StepGenerator nf(Symbol g);
    static StepGenerator birkhoff(PairLinOp F, PairLinOp F_dt);

    /// Dense 2N x 2N generator X; the flow is exp(X).
    CMatrix dense() const;
};

struct StepNorms {
    double offdiag = 0.0;      // ||Op(b)||, H^s -> H^s
    double non_normal = 0.0;   // ||Op(a^nr)||, H^s -> H^{s-1}
    double remainder = 0.0;    // ||R||, H^s -> H^{s+1}
};

StepNorms measure(const OperatorDecomposition& P, const NFParams& p, double s);

struct StepReport {
    StepKind kind = StepKind::diag;
    double s = 0.0;
    StepNorms before;
    StepNorms after;
    double symplectic_residual = 0.0;
    /// Largest remaining entry of a^nr.
    Mode worst_k{};
    std::array<double, kMaxDim> worst_xi{};
    double worst_value = 0.0;

    std::string to_json() const;
};

struct StepResult {
    OperatorDecomposition P;
    StepReport report;
};

/// Generators from the structure-preserving parts of the current symbols:
/// psi = b_even / (2 Lambda) with b_even(x, xi) = (b(x, xi) + b(x, -xi)) / 2,
/// and g = homological_g(Re a). Their flows are symplectic.
StepGenerator diag_generator(const OperatorDecomposition& P);
StepGenerator nf_generator(const OperatorDecomposition& P, const NFParams& p);

/// exp(-X) T exp(X), plus exp(-X) d/dt exp(X) for the birkhoff kind, then
/// re-extraction of the block structure.
OperatorDecomposition conjugate(const OperatorDecomposition& P, const StepGenerator& gen);
/// The part of conjugate() that is first order in (T - i E Op(Lambda), X):
/// T + [i E Op(Lambda), X] (+ F(dU/dt) for birkhoff). Applied to an operator
/// linear in U with generators built from it, this is exactly the
/// linear-in-U part of the conjugated operator.
OperatorDecomposition conjugate_linearized(const OperatorDecomposition& P, const StepGenerator& gen);

/// conjugate() with the before/after report.
StepResult conjugation_step(const OperatorDecomposition& P, const StepGenerator& gen, const NFParams& p, double s);

}  // namespace dnls
