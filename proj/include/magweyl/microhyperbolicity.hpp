#pragma once

#include "magweyl/types.hpp"

#include <optional>
#include <string>

namespace magweyl {

/// Outcome of a non-degeneracy check over a sampled region.
struct MHReport {
    enum class Status { holds, fails, inconclusive };
    Status status = Status::inconclusive;
    Vector ell;                     // certifying direction, set when status == holds
    Real margin = 0;                // worst-case value of the defining inequality
    std::vector<Vector> witnesses;  // grid points achieving the margin / failure
    std::string note;
};

/// a(x, xi) = mu^2 sum g^{jk} (xi_j - V_j(x)) (xi_k - V_k(x)) + V(x).
Real symbol_value(const OperatorSpec& spec, const Vector& x, const Vector& xi);

/// Constant-field check: min |grad V| >= eps over the grid.
MHReport check_constant_field(const GridFunction& V, Real eps);

/// Landau-resolved variant: min over x and Landau values Lambda_alpha of
/// |Lambda_alpha + V| + |grad V| >= eps; only finitely many alpha can defeat it.
MHReport check_constant_field(const GridFunction& V, Real eps, Real mu_h, const Vector& f);

/// Constant-multiplicity check: with all ratios f_j/f_1 constant this is
/// min |grad(V/f_1)| >= eps; otherwise a per-point search for a direction ell
/// with <ell, grad(f_j/V)> > 0 for every nonconstant ratio, solved exactly as
/// the distance from the origin to the convex hull of the gradients.
MHReport check_constant_multiplicity(const std::vector<GridFunction>& f,
                                     const GridFunction& V, Real eps);

/// Ultrastrong check on W = V + mu h sum f_j: min (|W| + |grad W|) >= eps.
MHReport check_ultrastrong(const GridFunction& W, Real eps);

/// Distance from the origin to conv{g_1..g_m} together with the maximizing
/// direction: max_{|ell| <= 1} min_j <ell, g_j> equals that distance when the
/// origin lies outside the hull and is <= 0 otherwise.
struct HullMargin {
    Real margin = 0;
    Vector ell;
};
HullMargin hull_margin(const std::vector<Vector>& gradients);

}  // namespace magweyl
