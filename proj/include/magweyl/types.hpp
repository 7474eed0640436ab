#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace magweyl {

using Real = double;
using Complex = std::complex<Real>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using IndexVector = Eigen::VectorXi;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define MAGWEYL_ERROR_TYPE(Name)                  \
    class Name : public Error {                   \
    public:                                       \
        using Error::Error;                       \
    }

MAGWEYL_ERROR_TYPE(NotSkew);
MAGWEYL_ERROR_TYPE(RankAmbiguous);
MAGWEYL_ERROR_TYPE(Degenerate);
MAGWEYL_ERROR_TYPE(InvalidQ);
MAGWEYL_ERROR_TYPE(QuadratureDiverged);
MAGWEYL_ERROR_TYPE(EpsTooSmall);
MAGWEYL_ERROR_TYPE(Unbounded);
MAGWEYL_ERROR_TYPE(InsufficientData);
MAGWEYL_ERROR_TYPE(TruncationUnreliable);
MAGWEYL_ERROR_TYPE(DimensionOverflow);
MAGWEYL_ERROR_TYPE(NotHermitian);
MAGWEYL_ERROR_TYPE(EmptyEigenspace);
MAGWEYL_ERROR_TYPE(LPDegenerate);
MAGWEYL_ERROR_TYPE(FluxNotQuantized);
MAGWEYL_ERROR_TYPE(GridTooCoarse);
MAGWEYL_ERROR_TYPE(NoConvergence);
MAGWEYL_ERROR_TYPE(NotSeparable);
MAGWEYL_ERROR_TYPE(UncertifiedTau);
MAGWEYL_ERROR_TYPE(UnknownTheorem);
MAGWEYL_ERROR_TYPE(ConfigError);

#undef MAGWEYL_ERROR_TYPE

/// Sparse multivariate polynomial, one monomial per term.
struct Monomial {
    Real coeff = 0;
    std::vector<int> powers;  // exponent per coordinate, trailing zeros implied
};

class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(Real constant);
    explicit Polynomial(std::vector<Monomial> terms);

    static Polynomial coordinate(int axis, Real scale = 1.0);

    Real operator()(const Vector& x) const;
    Polynomial partial(int axis) const;
    Polynomial operator+(const Polynomial& other) const;
    Polynomial scaled(Real factor) const;

    bool is_zero() const;
    const std::vector<Monomial>& terms() const { return terms_; }

private:
    std::vector<Monomial> terms_;
};

/// Compactly supported cutoff (1 - |x-c|^2/R^2)_+^order.
struct Bump {
    Vector center;
    Real radius = 1.0;
    int order = 4;

    Real operator()(const Vector& x) const;
    bool is_trivial() const { return center.size() == 0 || radius <= 0; }
};

/// Smoothness tag (l, sigma), lexicographic order. Metadata only.
struct Smoothness {
    Real l = 2.0;
    Real sigma = 0.0;
};

/// Full problem description for the magnetic Schroedinger operator
///   A = sum P_j g^{jk} P_k + V,   P_j = h D_j - mu V_j(x).
/// The field is given either as a constant skew-symmetric matrix F or
/// through a polynomial vector potential (then F = curl of it).
struct OperatorSpec {
    int d = 3;
    Matrix metric;                             // g^{jk}, symmetric positive definite
    Matrix field;                              // constant F_{jk}; empty if derived
    std::vector<Polynomial> vector_potential;  // size d when present, else empty
    Polynomial potential;                      // V(x)
    Real mu = 1.0;
    Real h = 0.1;
    Smoothness smoothness;
    Bump cutoff;

    bool has_vector_potential() const { return !vector_potential.empty(); }
    bool has_constant_field() const { return field.size() > 0; }

    /// F_{jk} at a point: the constant matrix, or d_j V_k - d_k V_j.
    Matrix field_at(const Vector& x) const;

    /// sqrt(det(g^{jk})^{-1}), the Riemannian volume factor.
    Real sqrt_g() const;

    Real potential_at(const Vector& x) const { return potential(x); }

    /// Throws on violated invariants. The field-free mu = 0 configuration
    /// is accepted in any dimension as the semiclassical sanity model.
    void validate() const;
};

/// Scalar samples on a uniform tensor grid over a box.
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(Vector lo, Vector hi, std::vector<int> shape);

    static GridFunction sample(const Vector& lo, const Vector& hi,
                               const std::vector<int>& shape,
                               const std::function<Real(const Vector&)>& f);

    int dims() const { return static_cast<int>(shape_.size()); }
    const std::vector<int>& shape() const { return shape_; }
    std::size_t size() const { return values_.size(); }
    Real spacing(int axis) const { return spacing_[axis]; }
    Real min_spacing() const;

    Real& operator[](std::size_t flat) { return values_[flat]; }
    Real operator[](std::size_t flat) const { return values_[flat]; }
    const std::vector<Real>& values() const { return values_; }
    std::vector<Real>& values() { return values_; }

    Vector point(std::size_t flat) const;
    std::vector<int> unflatten(std::size_t flat) const;
    std::size_t flatten(const std::vector<int>& idx) const;

    /// Centered second-order differences inside, one-sided at the boundary.
    Vector gradient(std::size_t flat) const;

private:
    Vector lo_, hi_;
    std::vector<int> shape_;
    std::vector<Real> spacing_;
    std::vector<std::size_t> stride_;
    std::vector<Real> values_;
};

/// Least-squares fit of log(y) against log(x).
struct PowerLawFit {
    Real exponent = 0;
    Real intercept = 0;
    Real r_squared = 0;
    int points = 0;
};

PowerLawFit fit_power_law(const std::vector<Real>& x, const std::vector<Real>& y);

}  // namespace magweyl
