#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dnls/types.hpp"

namespace dnls {

/// All points of {|p_i| <= radius} in Z^d, row-major, first component slowest.
std::vector<Mode> enumerate_box(int d, int radius);

/// Truncated Fourier lattice {xi in Z^d : |xi_i| <= K} together with the
/// metric G, the mass m and the quantization cutoff parameter.
///
/// Flat indices run row-major over the box, first component slowest. The
/// "half lattice" holds fiber points xi in (Z/2)^d, |xi_i| <= K, addressed
/// through doubled integer coordinates q = 2 xi with |q_i| <= 2K; it is where
/// Weyl quantization samples symbols ((j+k)/2 for j, k in the box).
///
/// Copies are cheap: the lookup tables are shared.
class GridSpec {
  public:
    static constexpr double kDefaultEpsQ = 0.25;

    /// Throws std::invalid_argument when G is not symmetric positive definite,
    /// m <= 0, eps_q outside (0, 1/2), d outside [1, 3] or K < 1.
    GridSpec(int d, int K, RMatrix G, double m, double eps_q = kDefaultEpsQ);

    /// Identity metric.
    static GridSpec flat(int d, int K, double m, double eps_q = kDefaultEpsQ);

    int dim() const { return impl_->d; }
    int K() const { return impl_->K; }
    int side() const { return 2 * impl_->K + 1; }
    std::size_t size() const { return impl_->modes.size(); }
    int half_side() const { return 4 * impl_->K + 1; }
    std::size_t half_size() const { return impl_->half_points.size(); }

    const RMatrix& metric() const { return impl_->G; }
    double mass() const { return impl_->m; }
    double eps_q() const { return impl_->eps_q; }
    /// Smallest eigenvalue of G.
    double c0() const { return impl_->c0; }

    const Mode& mode(std::size_t idx) const { return impl_->modes[idx]; }
    std::optional<std::size_t> index_of(const Mode& p) const;
    /// Index of -mode(idx).
    std::size_t neg_index(std::size_t idx) const { return impl_->neg[idx]; }
    bool in_box(const Mode& p) const;

    /// Doubled coordinates of the half-lattice point with index idx.
    const Mode& half_point(std::size_t idx) const { return impl_->half_points[idx]; }
    std::optional<std::size_t> half_index_of(const Mode& doubled) const;
    /// Half-lattice index of the integer point p (p must be in the box).
    std::size_t half_index_of_mode(const Mode& p) const;
    std::size_t neg_half_index(std::size_t idx) const { return impl_->neg_half[idx]; }

    /// Lambda(xi) = G xi . xi + m for any integer vector.
    double lambda(const Mode& xi) const;
    /// Lambda at a real fiber point.
    double lambda(std::span<const double> xi) const;
    /// Lambda(q / 2) for doubled coordinates q.
    double lambda_half(const Mode& doubled) const;
    /// (xi; k) := G xi . k for real xi and integer k.
    double metric_pairing(std::span<const double> xi, const Mode& k) const;

    /// Flat key-value lines `grid.key = value`.
    std::string to_config() const;

    friend bool operator==(const GridSpec& a, const GridSpec& b);

  private:
    struct Impl {
        int d = 1;
        int K = 1;
        RMatrix G;
        double m = 1.0;
        double eps_q = kDefaultEpsQ;
        double c0 = 1.0;
        std::vector<Mode> modes;
        std::vector<std::size_t> neg;
        std::vector<Mode> half_points;
        std::vector<std::size_t> neg_half;
    };
    std::shared_ptr<const Impl> impl_;
};

/// Real fiber coordinates of a doubled half-lattice point.
inline std::array<double, kMaxDim> half_to_real(const Mode& doubled) {
    return {0.5 * doubled[0], 0.5 * doubled[1], 0.5 * doubled[2]};
}

/// Fourier coefficients u^(xi) over the full box, with
/// u(x) = (2 pi)^{-d/2} sum u^(n) e^{i n.x}.
struct Field {
    GridSpec grid;
    CVector coeffs;

    explicit Field(GridSpec g);
    Field(GridSpec g, CVector c);

    static Field single_mode(const GridSpec& g, const Mode& n, cplx value = 1.0);

    cplx& operator[](std::size_t i) { return coeffs[Eigen::Index(i)]; }
    cplx operator[](std::size_t i) const { return coeffs[Eigen::Index(i)]; }

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(cplx s);
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(cplx s, Field a);

/// Coefficient table of conj(u): conj(u^(-xi)).
Field conjugate_field(const Field& u);

/// U = (u, ubar) with ubar^(k) = conj(u^(-k)).
struct PairField {
    Field u;
    Field ubar;

    explicit PairField(const Field& u_in);
    /// Checks the reality coupling; throws InvariantViolation when the defect
    /// exceeds tol (absolute, max-norm).
    PairField(Field u_in, Field ubar_in, double tol = 1e-12);

    /// max_k |ubar^(k) - conj(u^(-k))|
    double coupling_defect() const;
};

/// Lambda(xi) = G xi . xi + m.
double lambda_of(const GridSpec& grid, const Mode& xi);

/// (sum <xi>^{2s} |u^(xi)|^2)^{1/2}, Euclidean <xi>.
double sobolev_norm(const Field& f, double s);

/// u^(xi) -> phi(xi) u^(xi).
Field apply_multiplier(const Field& f, const std::function<cplx(const Mode&)>& phi);

/// Spectral derivative d/dx_j (j zero-based).
Field derivative(const Field& f, int j);

/// Sample/coefficient transform on a uniform grid of M^d points
/// x = 2 pi (i_1, ..., i_d) / M, backed by FFTW. M >= 2K+1; M = 2K+1 gives an
/// exact bijection, larger M is used for alias-free pointwise products.
///
/// Holds scratch buffers, so an instance must not be shared between threads.
class SpectralTransform {
  public:
    SpectralTransform(GridSpec grid, int samples_per_dim);
    ~SpectralTransform();
    SpectralTransform(const SpectralTransform&) = delete;
    SpectralTransform& operator=(const SpectralTransform&) = delete;
    SpectralTransform(SpectralTransform&&) noexcept;
    SpectralTransform& operator=(SpectralTransform&&) noexcept;

    const GridSpec& grid() const { return grid_; }
    int samples_per_dim() const { return M_; }
    std::size_t sample_count() const { return total_; }

    /// u(x_j) = (2 pi)^{-d/2} sum_n u^(n) e^{i n.x_j}
    std::vector<cplx> to_samples(const Field& f);
    /// Coefficients from samples, projected onto the box. Throws
    /// std::invalid_argument on a sample-count mismatch.
    Field from_samples(std::span<const cplx> samples);

  private:
    struct Plan;
    GridSpec grid_;
    int M_ = 0;
    std::size_t total_ = 0;
    std::vector<std::size_t> slot_;  // box index -> sample array index
    std::unique_ptr<Plan> plan_;
};

/// Samples on the (2K+1)^d grid -> Field.
Field transform_forward(const GridSpec& grid, std::span<const cplx> samples);
/// Field -> samples on the (2K+1)^d grid.
std::vector<cplx> transform_inverse(const Field& f);

/// CSV with columns xi_1..xi_d, re, im (header line included).
void write_field_csv(std::ostream& os, const Field& f);
/// Modes absent from the file are zero; modes outside the box are rejected.
Field read_field_csv(std::istream& is, const GridSpec& grid);

}  // namespace dnls
