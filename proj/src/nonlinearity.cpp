#include "dnls/nonlinearity.hpp"

#include <algorithm>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "dnls/paradiff.hpp"

namespace dnls {

namespace {

cplx int_pow(cplx z, int e) {
    cplx r = 1.0;
    for (int i = 0; i < e; ++i) r *= z;
    return r;
}

std::string describe(const Polynomial::Exponents& e, int d) {
    std::ostringstream os;
    os << '(';
    for (int j = 0; j <= d; ++j) os << (j ? " " : "") << e[std::size_t(j)];
    os << " |";
    for (int j = 0; j <= d; ++j) os << ' ' << e[std::size_t(d + 1 + j)];
    os << ')';
    return os.str();
}

}  // namespace

// ---- Polynomial ------------------------------------------------------------

void Polynomial::add(Exponents e, cplx coeff) {
    if (int(e.size()) != slot_count()) throw std::invalid_argument("polynomial: exponent vector has the wrong length");
    for (int v : e)
        if (v < 0) throw std::invalid_argument("polynomial: negative exponent");
    auto [it, inserted] = terms_.try_emplace(std::move(e), coeff);
    if (!inserted) it->second += coeff;
    if (it->second == cplx(0.0)) terms_.erase(it);
}

Polynomial Polynomial::derivative(int s) const {
    Polynomial out(d_);
    for (const auto& [e, c] : terms_) {
        const int p = e[std::size_t(s)];
        if (p == 0) continue;
        Exponents e2 = e;
        e2[std::size_t(s)] -= 1;
        out.add(std::move(e2), c * double(p));
    }
    return out;
}

cplx Polynomial::evaluate(std::span<const cplx> y) const {
    cplx total = 0.0;
    for (const auto& [e, c] : terms_) {
        cplx term = c;
        for (int j = 0; j <= d_; ++j) {
            term *= int_pow(y[std::size_t(j)], e[std::size_t(j)]);
            term *= int_pow(std::conj(y[std::size_t(j)]), e[std::size_t(d_ + 1 + j)]);
        }
        total += term;
    }
    return total;
}

// ---- CubicDensity ----------------------------------------------------------

CubicDensity CubicDensity::canonical(int d) {
    CubicDensity f(d);
    const Polynomial& p = f.polynomial();
    Polynomial::Exponents a(std::size_t(p.slot_count()), 0), b(std::size_t(p.slot_count()), 0);
    a[std::size_t(p.slot(0, false))] = 2;
    a[std::size_t(p.slot(1, true))] = 1;
    b[std::size_t(p.slot(0, true))] = 2;
    b[std::size_t(p.slot(1, false))] = 1;
    f.add(a, 0.5);
    f.add(b, 0.5);
    return f;
}

std::vector<std::string> CubicDensity::validate() const {
    std::vector<std::string> issues;
    const int d = dim();
    for (const auto& [e, c] : poly_.terms()) {
        int deg = 0;
        for (int v : e) deg += v;
        if (deg != 3) issues.push_back("homogeneity: monomial " + describe(e, d) + " has degree " + std::to_string(deg));

        Polynomial::Exponents mirrored(e.size());
        for (int j = 0; j <= d; ++j) {
            mirrored[std::size_t(j)] = e[std::size_t(d + 1 + j)];
            mirrored[std::size_t(d + 1 + j)] = e[std::size_t(j)];
        }
        const auto it = poly_.terms().find(mirrored);
        const double tol = 1e-14 * std::max(1.0, std::abs(c));
        if (it == poly_.terms().end() || std::abs(it->second - std::conj(c)) > tol)
            issues.push_back("reality: monomial " + describe(e, d) + " lacks its conjugate partner");
    }
    for (int i = 1; i <= d; ++i)
        for (int j = 1; j <= d; ++j) {
            if (!poly_.wirtinger(i, false).wirtinger(j, true).is_zero())
                issues.push_back("gradient constraint: d_{y" + std::to_string(i) + "} d_{ybar" + std::to_string(j) +
                                 "} f is not zero");
            if (i <= j && !poly_.wirtinger(i, true).wirtinger(j, true).is_zero())
                issues.push_back("gradient constraint: d_{ybar" + std::to_string(i) + "} d_{ybar" + std::to_string(j) +
                                 "} f is not zero");
        }
    return issues;
}

void CubicDensity::require_valid() const {
    const auto issues = validate();
    if (issues.empty()) return;
    std::string msg = "invalid density:";
    for (const auto& s : issues) msg += "\n  " + s;
    throw std::invalid_argument(msg);
}

CubicDensity read_density(std::istream& is, int d) {
    CubicDensity f(d);
    const int slots = 2 * (d + 1);
    std::string line;
    while (std::getline(is, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double re = 0.0;
        if (!(ls >> re)) continue;
        double im = 0.0;
        if (!(ls >> im)) throw std::invalid_argument("density: missing imaginary part in: " + line);
        Polynomial::Exponents e(std::size_t(slots), 0);
        for (auto& v : e)
            if (!(ls >> v)) throw std::invalid_argument("density: expected " + std::to_string(slots) + " exponents in: " + line);
        std::string extra;
        if (ls >> extra) throw std::invalid_argument("density: trailing data in: " + line);
        f.add(std::move(e), {re, im});
    }
    return f;
}

void write_density(std::ostream& os, const CubicDensity& f) {
    const int d = f.dim();
    os << "# coeff_re coeff_im";
    for (int j = 0; j <= d; ++j) os << " e" << j;
    for (int j = 0; j <= d; ++j) os << " ebar" << j;
    os << '\n' << std::setprecision(17);
    for (const auto& [e, c] : f.polynomial().terms()) {
        os << c.real() << ' ' << c.imag();
        for (int v : e) os << ' ' << v;
        os << '\n';
    }
}

Polynomial wirtinger(const CubicDensity& f, int slot, bool conjugated) {
    return f.polynomial().wirtinger(slot, conjugated);
}

// ---- evaluator ---------------------------------------------------------------

NonlinearityEvaluator::NonlinearityEvaluator(GridSpec grid, CubicDensity f)
    : grid_(std::move(grid)), f_(std::move(f)), transform_(grid_, 2 * grid_.side()) {
    if (f_.dim() != grid_.dim()) throw std::invalid_argument("nonlinearity: density and grid dimensions differ");
    dQ0_ = f_.polynomial().wirtinger(0, true);
    for (int j = 1; j <= grid_.dim(); ++j) dQj_.push_back(f_.polynomial().wirtinger(j, true));
}

std::vector<std::vector<cplx>> NonlinearityEvaluator::slot_samples(const Field& u) {
    std::vector<std::vector<cplx>> slots;
    slots.push_back(transform_.to_samples(u));
    for (int j = 0; j < grid_.dim(); ++j) slots.push_back(transform_.to_samples(derivative(u, j)));
    return slots;
}

std::vector<cplx> NonlinearityEvaluator::evaluate_on_grid(const Polynomial& p,
                                                          const std::vector<std::vector<cplx>>& slots) const {
    const std::size_t n = slots.front().size();
    std::vector<cplx> out(n);
    std::vector<cplx> y(slots.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < slots.size(); ++j) y[j] = slots[j][i];
        out[i] = p.evaluate(y);
    }
    return out;
}

Field NonlinearityEvaluator::eval_Q(const Field& u) {
    const auto slots = slot_samples(u);
    Field q = transform_.from_samples(evaluate_on_grid(dQ0_, slots));
    for (int j = 0; j < grid_.dim(); ++j)
        q -= derivative(transform_.from_samples(evaluate_on_grid(dQj_[std::size_t(j)], slots)), j);
    return q;
}

double NonlinearityEvaluator::hamiltonian(const Field& u) {
    double quadratic = 0.0;
    for (std::size_t i = 0; i < grid_.size(); ++i) quadratic += grid_.lambda(grid_.mode(i)) * std::norm(u[i]);
    const auto samples = evaluate_on_grid(f_.polynomial(), slot_samples(u));
    const double cell = std::pow(2.0 * kPi / transform_.samples_per_dim(), grid_.dim());
    cplx cubic = 0.0;
    double scale = 0.0;
    for (const cplx& v : samples) {
        cubic += v;
        scale += std::abs(v);
    }
    cubic *= cell;
    scale *= cell;
    const double total = quadratic + cubic.real();
    if (std::abs(cubic.imag()) > 1e-12 * std::max({std::abs(total), scale, 1e-300}))
        throw InvariantViolation("hamiltonian: imaginary part " + std::to_string(cubic.imag()) +
                                 " exceeds tolerance; reality coupling broken");
    return total;
}

Field NonlinearityEvaluator::vector_field(const Field& u) {
    Field v = eval_Q(u);
    for (std::size_t i = 0; i < grid_.size(); ++i) v[i] = -kI * (grid_.lambda(grid_.mode(i)) * u[i] + v[i]);
    return v;
}

Field eval_Q(const CubicDensity& f, const Field& u) { return NonlinearityEvaluator(u.grid, f).eval_Q(u); }
double hamiltonian(const CubicDensity& f, const Field& u) { return NonlinearityEvaluator(u.grid, f).hamiltonian(u); }
Field vector_field(const CubicDensity& f, const Field& u) { return NonlinearityEvaluator(u.grid, f).vector_field(u); }

// ---- paralinearization ----------------------------------------------------------

std::pair<Symbol, Symbol> paralinearize(const CubicDensity& f, const PairField& U) {
    const GridSpec& g = U.u.grid;
    const double scale = 1.0 + U.u.coeffs.cwiseAbs().maxCoeff();
    if (U.coupling_defect() > 1e-12 * scale) throw InvariantViolation("paralinearize: U breaks the reality coupling");
    const int d = g.dim();
    const Polynomial& p = f.polynomial();
    NonlinearityEvaluator ev(g, f);
    const auto slots = ev.slot_samples(U.u);
    const double to_symbol = std::pow(2.0 * kPi, -0.5 * d);

    // Plain Fourier coefficients of a second Wirtinger derivative along u.
    auto coeffs = [&](int i, bool ci, int j, bool cj) {
        Field c = ev.transform().from_samples(ev.evaluate_on_grid(p.wirtinger(i, ci).wirtinger(j, cj), slots));
        c *= to_symbol;
        return c;
    };

    const Field f_u_ubar = coeffs(0, false, 0, true);
    const Field f_ubar_ubar = coeffs(0, true, 0, true);
    std::vector<Field> f_ubar_uj, f_ubarj_u, f_ubar_ubarj;
    for (int j = 1; j <= d; ++j) {
        f_ubar_uj.push_back(coeffs(0, true, j, false));
        f_ubarj_u.push_back(coeffs(j, true, 0, false));
        f_ubar_ubarj.push_back(coeffs(0, true, j, true));
    }

    auto row = [&](const Mode& k) { return *g.index_of(k); };
    Symbol a = Symbol::from_function(g, 1.0, [&](const Mode& k, std::span<const double> xi) {
        const std::size_t r = row(k);
        cplx v = f_u_ubar[r];
        for (int j = 0; j < d; ++j) {
            const cplx A = f_ubar_uj[std::size_t(j)][r];
            const cplx B = f_ubarj_u[std::size_t(j)][r];
            v += kI * (A - B) * xi[std::size_t(j)];
            v -= 0.5 * kI * double(k[std::size_t(j)]) * (A + B);
        }
        return v;
    });
    Symbol b = Symbol::from_function(g, 0.0, [&](const Mode& k, std::span<const double>) {
        const std::size_t r = row(k);
        cplx v = f_ubar_ubar[r];
        for (int j = 0; j < d; ++j) v -= kI * double(k[std::size_t(j)]) * f_ubar_ubarj[std::size_t(j)][r];
        return v;
    });
    return {std::move(a), std::move(b)};
}

double paralinearization_defect(const CubicDensity& f, const Field& u, double s) {
    const PairField U(u);
    const auto [a, b] = paralinearize(f, U);
    Field diff = eval_Q(f, u);
    diff -= quantize_bw(a).apply(U.u);
    diff -= quantize_bw(b).apply(U.ubar);
    return sobolev_norm(diff, s);
}

}  // namespace dnls
