#pragma once

#include "magweyl/types.hpp"

namespace magweyl {

/// Eigenstructure of the magnetic intensity matrix: the nonzero eigenvalues
/// of (g^{jk})(F_{kp}) are +-i f_p, the kernel has dimension q = d - 2r.
struct FieldEigenstructure {
    Vector f;                             // intensities, sorted descending
    int r = 0;                            // half rank
    int q = 0;                            // kernel dimension
    Matrix kernel_basis;                  // d x q, orthonormal columns
    std::vector<std::vector<int>> partition;  // disjoint groups over {0..r-1}
    Vector group_values;                  // representative f per group

    void validate(Real eps0, Real eps_group) const;
};

/// Result of reducing a constant field to block-canonical form:
/// transform^T (g^{1/2} F g^{1/2}) transform has 2x2 blocks [0, f_p; -f_p, 0]
/// followed by a q x q zero block.
struct CanonicalForm {
    Matrix transform;      // orthogonal d x d
    Vector f;
    Matrix gauge_coeffs;   // V_j(x) = sum_k gauge_coeffs(j,k) x_k in original coordinates
    Real residual = 0;

    /// Block-canonical skew matrix the transform maps onto.
    Matrix canonical_matrix() const;
};

FieldEigenstructure compute_eigenstructure(const OperatorSpec& spec,
                                           Real eps0 = 1e-8,
                                           Real eps_group = 1e-6);

/// Pointwise variant for variable fields.
FieldEigenstructure compute_eigenstructure_at(const OperatorSpec& spec, const Vector& x,
                                              Real eps0 = 1e-8, Real eps_group = 1e-6);

/// Whether rank and resonance grouping stay the same at every sample point of
/// a variable field. Reported, never enforced.
bool partition_consistent_on(const OperatorSpec& spec, const std::vector<Vector>& points,
                             Real eps0 = 1e-8, Real eps_group = 1e-6);

/// Greedy gap-based grouping of sorted intensities; groups are merged while
/// consecutive gaps stay within eps_group * max(f). Deterministic.
std::vector<std::vector<int>> resonance_partition(const Vector& f, Real eps_group);

struct Resonance {
    int order;                // 2 or 3
    std::vector<int> indices; // (j,k) with f_j = f_k, or (j;k,m) with f_j = f_k + f_m
};

/// All second-order pairs |f_j - f_k| <= tol (j != k, j < k) and third-order
/// triples |f_j - f_k - f_m| <= tol (k <= m, j distinct), lexicographic.
std::vector<Resonance> detect_resonances(const Vector& f, Real tol = 1e-9);

CanonicalForm canonical_reduce_constant(const OperatorSpec& spec,
                                        Real eps0 = 1e-8,
                                        Real eps_group = 1e-6);

}  // namespace magweyl
