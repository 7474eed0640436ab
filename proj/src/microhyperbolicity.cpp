#include "magweyl/microhyperbolicity.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace magweyl {

namespace {

/// crude bound on the centered-difference truncation error of the gradient,
/// from third differences of the samples
Real gradient_truncation_estimate(const GridFunction& g) {
    Real worst = 0;
    for (int axis = 0; axis < g.dims(); ++axis) {
        const Real sp = g.spacing(axis);
        for (std::size_t i = 0; i < g.size(); ++i) {
            auto idx = g.unflatten(i);
            if (idx[axis] < 2 || idx[axis] > g.shape()[axis] - 3) continue;
            auto at = [&](int shift) {
                auto j = idx;
                j[axis] += shift;
                return g[g.flatten(j)];
            };
            const Real d3 = (at(2) - 2 * at(1) + 2 * at(-1) - at(-2)) / (2 * sp * sp * sp);
            worst = std::max(worst, std::abs(d3) * sp * sp / 6.0);
        }
    }
    return worst;
}

MHReport pointwise_min_report(const GridFunction& field, Real eps,
                              const std::function<Real(std::size_t)>& quantity,
                              const std::function<Vector(std::size_t)>& direction) {
    MHReport rep;
    Real margin = std::numeric_limits<Real>::infinity();
    std::size_t argmin = 0;
    for (std::size_t i = 0; i < field.size(); ++i) {
        const Real v = quantity(i);
        if (v < margin) {
            margin = v;
            argmin = i;
        }
    }
    rep.margin = margin;
    rep.witnesses.push_back(field.point(argmin));
    const Real band = 10.0 * gradient_truncation_estimate(field);
    if (std::abs(margin - eps) <= band) {
        rep.status = MHReport::Status::inconclusive;
        rep.note = "margin within the finite-difference error band";
    } else if (margin >= eps) {
        rep.status = MHReport::Status::holds;
        rep.ell = direction(argmin);
    } else {
        rep.status = MHReport::Status::fails;
    }
    return rep;
}

}  // namespace

Real symbol_value(const OperatorSpec& spec, const Vector& x, const Vector& xi) {
    if (!spec.has_vector_potential())
        throw ConfigError("symbol evaluation needs a vector potential");
    Vector p(spec.d);
    for (int j = 0; j < spec.d; ++j) p[j] = xi[j] - spec.vector_potential[j](x);
    return spec.mu * spec.mu * p.dot(spec.metric * p) + spec.potential_at(x);
}

MHReport check_constant_field(const GridFunction& V, Real eps) {
    return pointwise_min_report(
        V, eps, [&](std::size_t i) { return V.gradient(i).norm(); },
        [&](std::size_t i) { return Vector(V.gradient(i).normalized()); });
}

MHReport check_constant_field(const GridFunction& V, Real eps, Real mu_h, const Vector& f) {
    // Landau values Lambda <= max(-V) + eps can defeat the inequality;
    // anything larger satisfies |Lambda + V| >= eps outright.
    Real v_min = std::numeric_limits<Real>::infinity();
    for (std::size_t i = 0; i < V.size(); ++i) v_min = std::min(v_min, V[i]);
    const Real cap = std::max(0.0, -v_min) + eps + 1.0;
    std::vector<Real> landau;
    std::vector<int> alpha(f.size(), 0);
    while (true) {
        Real value = 0;
        for (int j = 0; j < f.size(); ++j) value += (2.0 * alpha[j] + 1.0) * f[j] * mu_h;
        if (value <= cap) landau.push_back(value);
        // odometer with early cut: growing any component only increases value
        int a = static_cast<int>(f.size()) - 1;
        while (a >= 0) {
            ++alpha[a];
            Real base = 0;
            for (int j = 0; j < f.size(); ++j) base += (2.0 * alpha[j] + 1.0) * f[j] * mu_h;
            if (base <= cap) break;
            alpha[a] = 0;
            --a;
        }
        if (a < 0) break;
    }
    if (landau.empty()) landau.push_back(f.sum() * mu_h);

    return pointwise_min_report(
        V, eps,
        [&](std::size_t i) {
            const Real grad = V.gradient(i).norm();
            Real worst = std::numeric_limits<Real>::infinity();
            for (const Real lv : landau) worst = std::min(worst, std::abs(lv + V[i]) + grad);
            return worst;
        },
        [&](std::size_t i) { return Vector(V.gradient(i).normalized()); });
}

HullMargin hull_margin(const std::vector<Vector>& gradients) {
    const int m = static_cast<int>(gradients.size());
    const int n = static_cast<int>(gradients.front().size());

    // nearest point of conv{g_j} to the origin by face enumeration
    Vector best;
    Real best_norm = std::numeric_limits<Real>::infinity();
    for (int mask = 1; mask < (1 << m); ++mask) {
        std::vector<int> subset;
        for (int j = 0; j < m; ++j)
            if (mask & (1 << j)) subset.push_back(j);
        if (static_cast<int>(subset.size()) > n + 1) continue;

        // minimize |sum_k c_k g_k| with sum c = 1: solve the KKT system
        const int k = static_cast<int>(subset.size());
        Matrix G(k, k);
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b) G(a, b) = gradients[subset[a]].dot(gradients[subset[b]]);
        Matrix KKT = Matrix::Zero(k + 1, k + 1);
        KKT.topLeftCorner(k, k) = G;
        KKT.topRightCorner(k, 1).setOnes();
        KKT.bottomLeftCorner(1, k).setOnes();
        Vector rhs = Vector::Zero(k + 1);
        rhs[k] = 1.0;
        Vector sol = KKT.fullPivLu().solve(rhs);
        bool admissible = true;
        for (int a = 0; a < k; ++a)
            if (!(sol[a] >= -1e-12)) admissible = false;
        if (!admissible) continue;
        Vector point = Vector::Zero(n);
        for (int a = 0; a < k; ++a) point += sol[a] * gradients[subset[a]];
        if (point.norm() < best_norm) {
            best_norm = point.norm();
            best = point;
        }
    }

    HullMargin out;
    if (!(best_norm < std::numeric_limits<Real>::infinity()))
        throw LPDegenerate("hull projection failed");
    out.margin = best_norm;
    out.ell = best_norm > 1e-14 ? Vector(best / best_norm) : Vector(Vector::Zero(n));
    return out;
}

MHReport check_constant_multiplicity(const std::vector<GridFunction>& f,
                                     const GridFunction& V, Real eps) {
    const int r = static_cast<int>(f.size());
    const std::size_t n = V.size();

    // are all ratios f_j / f_1 constant?
    bool ratios_constant = true;
    Real ratio_scale = 0;
    std::vector<GridFunction> ratios;
    for (int j = 1; j < r; ++j) {
        GridFunction ratio = f[j];
        for (std::size_t i = 0; i < n; ++i) ratio[i] /= f[0][i];
        Real lo = ratio[0], hi = ratio[0];
        for (std::size_t i = 0; i < n; ++i) {
            lo = std::min(lo, ratio[i]);
            hi = std::max(hi, ratio[i]);
        }
        ratio_scale = std::max(ratio_scale, std::abs(hi));
        if (hi - lo > 1e-10 * std::max(1.0, ratio_scale)) ratios_constant = false;
        ratios.push_back(std::move(ratio));
    }

    if (ratios_constant) {
        GridFunction reduced = V;
        for (std::size_t i = 0; i < n; ++i) reduced[i] /= f[0][i];
        auto rep = pointwise_min_report(
            reduced, eps, [&](std::size_t i) { return reduced.gradient(i).norm(); },
            [&](std::size_t i) { return Vector(reduced.gradient(i).normalized()); });
        rep.note = "constant ratios: reduced to the gradient of V/f_1";
        return rep;
    }

    // general case: per-point direction search over grad(f_j / V)
    MHReport rep;
    Real margin = std::numeric_limits<Real>::infinity();
    std::size_t argmin = 0;
    Vector ell_at_min;
    long degenerate_points = 0;
    std::vector<GridFunction> quotients;
    for (int j = 0; j < r; ++j) {
        GridFunction q = f[j];
        for (std::size_t i = 0; i < n; ++i) q[i] /= V[i];
        quotients.push_back(std::move(q));
    }
    Real grad_scale = 0;
    for (int j = 0; j < r; ++j)
        for (std::size_t i = 0; i < n; ++i)
            grad_scale = std::max(grad_scale, quotients[j].gradient(i).norm());

    for (std::size_t i = 0; i < n; ++i) {
        std::vector<Vector> grads;
        for (int j = 0; j < r; ++j) {
            Vector g = quotients[j].gradient(i);
            if (g.norm() > 1e-10 * std::max(1.0, grad_scale)) grads.push_back(g);
        }
        if (grads.empty()) {
            ++degenerate_points;
            continue;
        }
        const HullMargin hm = hull_margin(grads);
        if (hm.margin < margin) {
            margin = hm.margin;
            argmin = i;
            ell_at_min = hm.ell;
        }
    }

    if (degenerate_points == static_cast<long>(n)) {
        rep.status = MHReport::Status::inconclusive;
        rep.note = "all quotient gradients numerically vanish";
        return rep;
    }
    rep.margin = margin;
    rep.witnesses.push_back(V.point(argmin));
    if (degenerate_points > 0) {
        rep.status = MHReport::Status::inconclusive;
        rep.note = std::to_string(degenerate_points) + " grid points with vanishing gradients";
        return rep;
    }
    if (margin >= eps) {
        rep.status = MHReport::Status::holds;
        rep.ell = ell_at_min;
    } else {
        rep.status = MHReport::Status::fails;
    }
    return rep;
}

MHReport check_ultrastrong(const GridFunction& W, Real eps) {
    return pointwise_min_report(
        W, eps, [&](std::size_t i) { return std::abs(W[i]) + W.gradient(i).norm(); },
        [&](std::size_t i) { return Vector(W.gradient(i).normalized()); });
}

}  // namespace magweyl
