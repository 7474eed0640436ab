#pragma once

#include "magweyl/oscillator_algebra.hpp"
#include "magweyl/types.hpp"

namespace magweyl {

/// Point data for the Landau lattice count
///   n0 = #{ alpha in Z_+^r : sum_j (2 alpha_j + 1) f_j hbar + V < tau }.
struct CountingQuery {
    Vector f;
    Real V = 0;
    Real hbar = 0;  // mu h
    Real tau = 0;
};

long n0_count(const CountingQuery& q);

/// Potential (and optionally intensity) samples with quadrature weights
/// over a region, used by the integrated counting estimates.
struct CountingRegion {
    std::vector<Real> V;
    std::vector<Vector> f;       // one intensity vector per sample point
    std::vector<Real> weight;    // quadrature weights
    std::vector<Vector> points;  // sample locations (kept for diagnostics)

    static CountingRegion box(const Vector& lo, const Vector& hi, int points_per_axis,
                              const std::function<Real(const Vector&)>& V_fn,
                              const std::function<Vector(const Vector&)>& f_fn);
    static CountingRegion unit_ball(int dim, int points_per_axis,
                                    const std::function<Real(const Vector&)>& V_fn,
                                    const std::function<Vector(const Vector&)>& f_fn);

    /// Equal-weight Kronecker sampling. Irrational coordinates avoid the
    /// spurious exact level degeneracies a rational midpoint grid produces,
    /// which would otherwise dominate the counting fluctuations.
    static CountingRegion low_discrepancy(const Vector& lo, const Vector& hi, int n_points,
                                          const std::function<Real(const Vector&)>& V_fn,
                                          const std::function<Vector(const Vector&)>& f_fn);
};

/// Quadrature of n0(x, hbar, tau') - n0(x, hbar, tau) over the region.
Real n0_integrated_difference(const CountingRegion& region, Real hbar, Real tau, Real tau_prime);

struct NuEstimate {
    std::vector<Real> hbar;
    std::vector<Real> nu_hat;
    PowerLawFit kappa_fit;  // nu_hat ~ hbar^kappa
};

/// Empirical improvement function of the integrated counting difference:
/// for each hbar the best offset constant of the affine majorant
///   hbar^r * integral(n0(tau+lambda) - n0(tau)) <= C lambda + nu(hbar)
/// over a tau grid and lambda in {hbar^2, hbar^{3/2}, hbar}. The linear
/// coefficient is measured from the two larger lambdas, the offset at the
/// smallest. Requires at least 4 geometric hbar values.
NuEstimate estimate_nu(const CountingRegion& region, const std::vector<Real>& hbar_list,
                       Real tau_center, Real tau_halfwidth, int tau_points = 200);

/// Minimum over grid points of the numerical rank of
/// { grad(f_2/f_1), ..., grad(f_r/f_1) } from centered finite differences.
int diophantine_rank(const std::vector<GridFunction>& f_components);

/// Count of certified eigenvalues of a truncated operator strictly below tau.
long perturbed_count(const TruncatedSpectrum& spectrum, Real tau);

}  // namespace magweyl
