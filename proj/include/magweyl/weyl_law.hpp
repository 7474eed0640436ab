#pragma once

#include "magweyl/field_geometry.hpp"
#include "magweyl/types.hpp"

#include <optional>

namespace magweyl {

/// One evaluation of the Landau-level spectral density.
struct WeylEvaluation {
    Real value = 0;
    std::vector<int> alpha_max;  // realized componentwise index cap
    long terms_used = 0;
    Real tau = 0;
    Vector point;  // empty for integrated quantities
};

/// sum over alpha in Z_+^r of (rem - sum_j (2 alpha_j + 1) f_j muh)_+^{q/2}.
/// cap_slack extends every per-component enumeration bound past the positivity
/// cutoff; the result must not change (terms beyond it vanish identically).
Real landau_sum(const Vector& f, Real muh, Real rem, int q, int cap_slack = 0,
                long* terms_used = nullptr, std::vector<int>* alpha_max = nullptr);

/// Pointwise spectral density
///   omega_q (2 pi)^{r-d} mu^r h^{r-d} sqrt(g) prod f_p
///     * sum_alpha (tau - sum_j (2 alpha_j + 1) f_j mu h - V(x))_+^{q/2}
/// with omega_q = pi^{q/2} / Gamma(q/2 + 1).
WeylEvaluation weyl_density(const OperatorSpec& spec, const FieldEigenstructure& eig,
                            const Vector& x, Real tau, int cap_slack = 0);

struct UltrastrongDensity {
    WeylEvaluation eval;
    Real effective_potential = 0;  // W = V + mu h sum_j f_j
};

/// Single-term (alpha = 0) specialization for mu h above the ultrastrong cutoff.
UltrastrongDensity ultrastrong_density(const OperatorSpec& spec,
                                       const FieldEigenstructure& eig,
                                       const Vector& x, Real tau);

struct QuadratureConfig {
    int initial_points = 8;      // per axis
    int max_points = 256;        // per axis
    Real rel_tol = 1e-6;
    std::optional<Vector> lo;    // integration box; defaults to the cutoff ball
    std::optional<Vector> hi;
};

struct QuadratureResult {
    Real value = 0;
    Real error_estimate = 0;
    int points_per_axis = 0;
};

/// Adaptive tensor-product midpoint quadrature of weyl_density * psi.
/// psi defaults to the operator cutoff; an explicit weight overrides it.
QuadratureResult weyl_integral(const OperatorSpec& spec, Real tau,
                               const QuadratureConfig& cfg = {},
                               const std::function<Real(const Vector&)>& psi = {});

enum class MollifyRegime {
    weak_q2,               // two-branch rho schedule, wide inner value
    weak_q1,               // rho schedule with power tail
    intermediate_interior, // inner value 1/mu
    strong,                // rho-independent, sqrt scale
    ultrastrong            // h |log h|
};

struct ScheduleConstants {
    Real C = 1.0;
    Real s = 5.0;  // tail exponent where one appears
};

/// Mollification width for the given regime at frequency scale rho.
Real epsilon_schedule(Real mu, Real h, Real rho, MollifyRegime regime,
                      const ScheduleConstants& constants = {});

/// Convolution with a discretely normalized polynomial bump of width eps.
/// Constants are preserved exactly; throws EpsTooSmall if eps < 2 spacing.
GridFunction mollify(const GridFunction& samples, Real eps, int order = 4);

}  // namespace magweyl
