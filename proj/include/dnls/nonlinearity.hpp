#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <utility>
#include <string>
#include <vector>

#include "dnls/torus_grid.hpp"

namespace dnls {

class Symbol;

/// Polynomial in the 2(d+1) slots (y_0..y_d, ybar_0..ybar_d), where y_0 stands
/// for u and y_j (j >= 1) for u_{x_j}. Like terms are merged; exact zeros are
/// dropped.
class Polynomial {
  public:
    using Exponents = std::vector<int>;

    explicit Polynomial(int d = 1) : d_(d) {}

    int dim() const { return d_; }
    int slot_count() const { return 2 * (d_ + 1); }
    /// Slot index for y_j (conjugated = false) or ybar_j.
    int slot(int j, bool conjugated) const { return conjugated ? d_ + 1 + j : j; }

    void add(Exponents e, cplx coeff);
    const std::map<Exponents, cplx>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    /// Formal partial derivative in one slot.
    Polynomial derivative(int slot) const;
    /// Wirtinger derivative in y_j or ybar_j.
    Polynomial wirtinger(int j, bool conjugated) const { return derivative(slot(j, conjugated)); }

    /// Value at y (length d+1); the conjugate slots take conj(y).
    cplx evaluate(std::span<const cplx> y) const;

    friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.d_ == b.d_ && a.terms_ == b.terms_; }

  private:
    int d_;
    std::map<Exponents, cplx> terms_;
};

/// Hamiltonian density f: a real homogeneous cubic polynomial in (u, grad u)
/// and conjugates.
class CubicDensity {
  public:
    explicit CubicDensity(int d = 1) : poly_(d) {}
    explicit CubicDensity(Polynomial p) : poly_(std::move(p)) {}

    /// (y_0^2 ybar_1 + ybar_0^2 y_1) / 2, the default test density.
    static CubicDensity canonical(int d);

    int dim() const { return poly_.dim(); }
    const Polynomial& polynomial() const { return poly_; }
    void add(Polynomial::Exponents e, cplx coeff) { poly_.add(std::move(e), coeff); }

    /// Empty when the density is homogeneous of degree 3, real, and satisfies
    /// d_{y_i} d_{ybar_j} f = d_{ybar_i} d_{ybar_j} f = 0 for i, j >= 1.
    std::vector<std::string> validate() const;
    /// Throws std::invalid_argument listing the violations.
    void require_valid() const;

  private:
    Polynomial poly_;
};

/// Lines `coeff_re coeff_im e0..ed ebar0..ebard`; '#' starts a comment.
CubicDensity read_density(std::istream& is, int d);
void write_density(std::ostream& os, const CubicDensity& f);

/// Formal Wirtinger derivative of f in y_slot or ybar_slot.
Polynomial wirtinger(const CubicDensity& f, int slot, bool conjugated);

/// Pseudo-spectral evaluator for f-derived quantities. Products are formed on
/// a 2(2K+1)-per-dimension sample grid, which is alias free for the quadratic
/// Q and exact for the cubic integral in H.
class NonlinearityEvaluator {
  public:
    NonlinearityEvaluator(GridSpec grid, CubicDensity f);

    const GridSpec& grid() const { return grid_; }
    const CubicDensity& density() const { return f_; }

    /// Q(u, ubar) = (d_{ubar} f)(u, grad u) - sum_i d_{x_i} (d_{ubar_{x_i}} f).
    Field eval_Q(const Field& u);
    /// H = sum Lambda |u^|^2 + integral of f. Throws InvariantViolation when
    /// the imaginary part exceeds 1e-12 relative.
    double hamiltonian(const Field& u);
    /// i (-Lambda(D) u - Q(u, ubar)).
    Field vector_field(const Field& u);

    /// Samples of the polynomial p at (u, grad u) on the product grid.
    std::vector<cplx> evaluate_on_grid(const Polynomial& p, const std::vector<std::vector<cplx>>& slots) const;
    /// Samples of u, u_{x_1}, ..., u_{x_d} on the product grid.
    std::vector<std::vector<cplx>> slot_samples(const Field& u);
    SpectralTransform& transform() { return transform_; }

  private:
    GridSpec grid_;
    CubicDensity f_;
    SpectralTransform transform_;
    Polynomial dQ0_;
    std::vector<Polynomial> dQj_;
};

Field eval_Q(const CubicDensity& f, const Field& u);
double hamiltonian(const CubicDensity& f, const Field& u);
Field vector_field(const CubicDensity& f, const Field& u);

/// Symbols a(U; x, xi) (order 1, affine in xi) and b(U; x, xi) (order 0,
/// xi-independent) with Q(u, ubar) = Op(a) u + Op(b) ubar up to a smoothing
/// remainder:
///   a = sum_j [ i (f_{ubar u_j} - f_{ubar_j u}) xi_j
///               - (1/2) d_j (f_{ubar_j u} + f_{ubar u_j}) ] + f_{u ubar}
///   b = - sum_j d_j (f_{ubar ubar_j}) + f_{ubar ubar}
/// where subscripts are second Wirtinger derivatives evaluated at (u, grad u).
/// Throws InvariantViolation when U breaks the reality coupling.
std::pair<Symbol, Symbol> paralinearize(const CubicDensity& f, const PairField& U);

/// ||Q(u, ubar) - (Op(a) u + Op(b) ubar)||_{H^s}, the size of the smoothing
/// remainder left by paralinearize.
double paralinearization_defect(const CubicDensity& f, const Field& u, double s);

}  // namespace dnls
