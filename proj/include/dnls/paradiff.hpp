#pragma once

#include <functional>
#include <iosfwd>
#include <span>

#include "dnls/torus_grid.hpp"

namespace dnls {

/// Symbol a(x, xi) on the truncated lattice, stored x-Fourier resolved:
///   a(x, xi) = sum_{|k_i| <= K} values(k, xi) e^{i k.x}
/// (plain Fourier series coefficients, i.e. (2 pi)^{-d/2} times the
/// normalized transform used for fields). The fiber variable runs over the half
/// lattice, so Weyl quantization never has to interpolate for symbols given in
/// closed form.
class Symbol {
  public:
    using FiberFn = std::function<cplx(std::span<const double> xi)>;
    using RowFn = std::function<cplx(const Mode& k, std::span<const double> xi)>;

    Symbol(GridSpec grid, double order);

    /// Closed form in xi, evaluated exactly on the half lattice.
    static Symbol from_function(const GridSpec& grid, double order, const RowFn& fn);
    /// x-independent symbol phi(xi).
    static Symbol multiplier(const GridSpec& grid, double order, const FiberFn& phi);
    static Symbol lambda(const GridSpec& grid);
    /// Table over (k, integer xi), both box-indexed; half-integer fiber points
    /// are filled by multilinear interpolation.
    static Symbol from_lattice_table(const GridSpec& grid, double order, const CMatrix& table);

    const GridSpec& grid() const { return grid_; }
    double order() const { return order_; }
    void set_order(double m) { order_ = m; }

    /// Rows: x-frequency (box index), columns: fiber (half-lattice index).
    const CMatrix& values() const { return values_; }
    CMatrix& values() { return values_; }
    cplx operator()(std::size_t k, std::size_t half) const { return values_(Eigen::Index(k), Eigen::Index(half)); }
    cplx& operator()(std::size_t k, std::size_t half) { return values_(Eigen::Index(k), Eigen::Index(half)); }
    /// Zero outside the tables.
    cplx at(const Mode& k, const Mode& doubled_xi) const;

    /// max_{k,xi} |a^(-k, xi) - conj(a^(k, xi))|; zero iff a(x, xi) is real.
    double reality_defect() const;
    bool is_real(double tol = 0.0) const { return reality_defect() <= tol; }
    /// max over k != 0 rows.
    double x_dependence() const;

    /// conj(a(x, xi))
    Symbol conj_x() const;
    /// a(x, -xi)
    Symbol reflect_xi() const;
    /// conj(a(x, -xi)), the symbol of the bar-conjugated operator.
    Symbol bar() const;
    /// d/dx_j (exact).
    Symbol dx(int j) const;
    /// d/dxi_j by central differences on the half lattice (step 1/2),
    /// second-order one-sided stencils at the boundary.
    Symbol dxi(int j) const;
    /// Pointwise division by a positive fiber function.
    Symbol divide_by(const FiberFn& w, double order_shift) const;

    Symbol& operator+=(const Symbol& o);
    Symbol& operator-=(const Symbol& o);
    Symbol& operator*=(cplx s);

  private:
    GridSpec grid_;
    double order_;
    CMatrix values_;
};

Symbol operator+(Symbol a, const Symbol& b);
Symbol operator-(Symbol a, const Symbol& b);
Symbol operator*(cplx s, Symbol a);

/// Pointwise product in (x, xi); x-frequencies outside the box are dropped.
Symbol product(const Symbol& a, const Symbol& b);

/// Entries of the real-to-real matrix symbol [[a, b], [bar b, bar a]].
struct MatrixSymbol {
    Symbol a;
    Symbol b;
};

/// Dense operator on the truncated coefficient space; entry (j, k) maps the
/// input mode k to the output mode j.
struct LinOp {
    GridSpec grid;
    CMatrix matrix;

    explicit LinOp(GridSpec g);
    LinOp(GridSpec g, CMatrix m);
    static LinOp identity(const GridSpec& g);

    Field apply(const Field& f) const { return Field(grid, matrix * f.coeffs); }
};

/// R-bar[h] := conj(R[conj h]); in coefficients (j, k) -> conj(R(-j, -k)).
CMatrix bar(const GridSpec& grid, const CMatrix& m);

/// [[A11, A12], [bar A12, bar A11]] acting on (u^, ubar^).
struct PairLinOp {
    GridSpec grid;
    CMatrix A11;
    CMatrix A12;

    explicit PairLinOp(GridSpec g);
    PairLinOp(GridSpec g, CMatrix a11, CMatrix a12);
    static PairLinOp identity(const GridSpec& g);
    /// Reads the upper block row of a 2N x 2N matrix.
    static PairLinOp from_dense(const GridSpec& g, const CMatrix& m);

    CMatrix dense() const;
    PairField apply(const PairField& U) const;
};

/// Lower block row minus the bar of the upper one (max-abs); zero for
/// real-to-real operators.
double real_to_real_defect(const GridSpec& grid, const CMatrix& dense);

/// Smooth even cutoff: 1 on [0, 5/4], 0 on [8/5, inf), C^inf and monotone in
/// between.
double eta(double y);
using Cutoff = std::function<double(double)>;

/// Op^bw(a): entry (j, k) = eta(|j-k| / (eps_q <j+k>)) a^(j-k, (j+k)/2).
LinOp quantize_bw(const Symbol& a, const Cutoff& cutoff = eta);
PairLinOp quantize_bw(const MatrixSymbol& A, const Cutoff& cutoff = eta);

/// The cutoff weight used by quantize_bw at entry (j, k).
double quantization_weight(const GridSpec& grid, const Mode& j, const Mode& k, const Cutoff& cutoff = eta);

/// |a|_{m,s}: discrete sup over x samples and fiber points of
/// |d_x^{a1} d_xi^{a2} a| <xi>^{-m + delta |a2|}, |a1| + |a2| <= s.
double seminorm(const Symbol& a, double m, int s, double delta);
inline constexpr int kMaxSeminormOrder = 4;

/// {a, b} = d_xi a . d_x b - d_x a . d_xi b
Symbol poisson_bracket(const Symbol& a, const Symbol& b);

/// a #_rho b: the Weyl composition expansion truncated after rho terms.
Symbol compose_expansion(const Symbol& a, const Symbol& b, int rho);

/// ||D_{s_out} M D_{s_in}^{-1}||_2 with D_s = diag(<xi>^s), by power
/// iteration (200 steps or relative change below 1e-10).
double operator_norm(const GridSpec& grid, const CMatrix& m, double s_in, double s_out);
/// The same for 2N x 2N pair operators (both components weighted alike).
double pair_operator_norm(const GridSpec& grid, const CMatrix& m, double s_in, double s_out);

/// Largest |k_i| over the nonzero x-frequency rows.
int x_band(const Symbol& a);

/// H^s -> H^{s_out} norm of Op(a) Op(b) - Op(a #_rho b), restricted to output
/// modes at least x_band(a) away from the box edge (elsewhere the truncated
/// product is missing intermediate modes).
double composition_residual(const Symbol& a, const Symbol& b, int rho, double s, double s_out);
/// With s_out = s - m_a - m_b + rho.
double composition_residual(const Symbol& a, const Symbol& b, int rho, double s);

LinOp adjoint(const LinOp& A);
/// ||A - A*||_{L^2}
double selfadjoint_residual(const LinOp& A);
/// ||X - X*|| for X = -iE M (Hamiltonian iff -iE M is self-adjoint).
double hamiltonian_residual(const PairLinOp& M);
double hamiltonian_residual(const GridSpec& grid, const CMatrix& dense);

/// E = diag(1, -1) on the pair space.
CMatrix pair_E(const GridSpec& grid);
/// i E Op^bw(Lambda)
CMatrix linear_pair_operator(const GridSpec& grid);

/// Phi = exp(i Op^bw(g)) for a real symbol g. Throws std::invalid_argument
/// when g is not real.
LinOp flow(const Symbol& g, double tau = 1.0);
/// exp(tau i Op^bw([[0, psi], [-conj psi(x,-xi), 0]])).
PairLinOp flow_offdiag(const Symbol& psi, double tau = 1.0);
/// exp(tau F).
PairLinOp flow_smoothing(const PairLinOp& F, double tau = 1.0);

/// ||Q* (-iE) Q + iE||
double symplectic_residual(const PairLinOp& Q);
double symplectic_residual(const GridSpec& grid, const CMatrix& dense);

CMatrix expm(const CMatrix& m);
/// Frechet derivative of exp at X in direction H.
CMatrix expm_frechet(const CMatrix& X, const CMatrix& H);

/// CSV dumps: `row,col,re,im` and `k_1..k_d,xi_1..xi_d,re,im`.
void write_linop_csv(std::ostream& os, const CMatrix& m);
void write_symbol_csv(std::ostream& os, const Symbol& a);

}  // namespace dnls
