#include "magweyl/weyl_law.hpp"

#include <cmath>

namespace magweyl {

namespace {

Real unit_ball_volume(int q) {
    return std::pow(M_PI, 0.5 * q) / std::tgamma(0.5 * q + 1.0);
}

void landau_recurse(const Vector& f, Real muh, int q, int cap_slack, int level,
                    Real rem, Real& sum, long& terms, std::vector<int>& alpha,
                    std::vector<int>& alpha_max) {
    const int r = static_cast<int>(f.size());
    if (level == r) {
        if (rem > 0) {
            sum += std::pow(rem, 0.5 * q);
            ++terms;
            for (int j = 0; j < r; ++j) alpha_max[j] = std::max(alpha_max[j], alpha[j]);
        }
        return;
    }
    // positivity bound: (2a+1) f muh < rem  =>  a < (rem/(f muh) - 1)/2
    long cap = -1;
    if (rem > f[level] * muh)
        cap = static_cast<long>(std::floor((rem / (f[level] * muh) - 1.0) / 2.0 + 1e-15));
    cap += cap_slack;
    for (long a = 0; a <= cap; ++a) {
        alpha[level] = static_cast<int>(a);
        landau_recurse(f, muh, q, cap_slack, level + 1,
                       rem - (2.0 * a + 1.0) * f[level] * muh, sum, terms, alpha, alpha_max);
    }
}

}  // namespace

Real landau_sum(const Vector& f, Real muh, Real rem, int q, int cap_slack,
                long* terms_used, std::vector<int>* alpha_max) {
    const int r = static_cast<int>(f.size());
    if (r > 0 && (muh <= 0 || f.minCoeff() <= 0))
        throw Unbounded("landau_sum needs positive intensities and mu h");
    Real sum = 0;
    long terms = 0;
    std::vector<int> alpha(r, 0), amax(r, -1);
    landau_recurse(f, muh, q, cap_slack, 0, rem, sum, terms, alpha, amax);
    if (terms_used) *terms_used = terms;
    if (alpha_max) *alpha_max = amax;
    return sum;
}

WeylEvaluation weyl_density(const OperatorSpec& spec, const FieldEigenstructure& eig,
                            const Vector& x, Real tau, int cap_slack) {
    if (eig.q <= 0) throw InvalidQ("spectral density requires q >= 1");
    WeylEvaluation ev;
    ev.tau = tau;
    ev.point = x;

    const Real rem = tau - spec.potential_at(x);
    const Real muh = spec.mu * spec.h;
    ev.alpha_max.assign(eig.r, -1);
    std::vector<int> amax;
    const Real sum = landau_sum(eig.f, muh, rem, eig.q, cap_slack, &ev.terms_used, &amax);
    ev.alpha_max = amax;

    Real prefactor = unit_ball_volume(eig.q) * std::pow(2.0 * M_PI, eig.r - spec.d) *
                     std::pow(spec.h, eig.r - spec.d) * spec.sqrt_g();
    if (eig.r > 0) prefactor *= std::pow(spec.mu, eig.r) * eig.f.prod();
    ev.value = prefactor * sum;
    return ev;
}

UltrastrongDensity ultrastrong_density(const OperatorSpec& spec,
                                       const FieldEigenstructure& eig,
                                       const Vector& x, Real tau) {
    if (eig.q <= 0) throw InvalidQ("spectral density requires q >= 1");
    UltrastrongDensity out;
    const Real muh = spec.mu * spec.h;
    const Real V = spec.potential_at(x);
    out.effective_potential = V + muh * eig.f.sum();

    WeylEvaluation& ev = out.eval;
    ev.tau = tau;
    ev.point = x;
    ev.alpha_max.assign(eig.r, 0);
    const Real rem = tau - out.effective_potential;
    Real prefactor = unit_ball_volume(eig.q) * std::pow(2.0 * M_PI, eig.r - spec.d) *
                     std::pow(spec.h, eig.r - spec.d) * spec.sqrt_g();
    if (eig.r > 0) prefactor *= std::pow(spec.mu, eig.r) * eig.f.prod();
    if (rem > 0) {
        ev.value = prefactor * std::pow(rem, 0.5 * eig.q);
        ev.terms_used = 1;
    }
    return out;
}

QuadratureResult weyl_integral(const OperatorSpec& spec, Real tau,
                               const QuadratureConfig& cfg,
                               const std::function<Real(const Vector&)>& psi) {
    const int d = spec.d;
    Vector lo, hi;
    if (cfg.lo && cfg.hi) {
        lo = *cfg.lo;
        hi = *cfg.hi;
    } else {
        if (spec.cutoff.is_trivial())
            throw QuadratureDiverged("no cutoff and no explicit integration box");
        lo = spec.cutoff.center.array() - spec.cutoff.radius;
        hi = spec.cutoff.center.array() + spec.cutoff.radius;
    }

    const bool constant_field = !spec.has_vector_potential();
    FieldEigenstructure eig_const;
    if (constant_field) eig_const = compute_eigenstructure(spec);

    auto weight = [&](const Vector& x) { return psi ? psi(x) : spec.cutoff(x); };
    auto integrand = [&](const Vector& x) {
        const Real w = weight(x);
        if (w == 0.0) return 0.0;
        const FieldEigenstructure& eig =
            constant_field ? eig_const : compute_eigenstructure_at(spec, x);
        return weyl_density(spec, constant_field ? eig_const : eig, x, tau).value * w;
    };

    auto midpoint = [&](int n) {
        Vector delta = (hi - lo) / n;
        const Real cell = delta.prod();
        std::vector<int> idx(d, 0);
        Real sum = 0;
        Vector x(d);
        while (true) {
            for (int a = 0; a < d; ++a) x[a] = lo[a] + (idx[a] + 0.5) * delta[a];
            sum += integrand(x);
            int a = d - 1;
            while (a >= 0 && ++idx[a] == n) idx[a--] = 0;
            if (a < 0) break;
        }
        return sum * cell;
    };

    int n = cfg.initial_points;
    Real prev = midpoint(n);
    while (true) {
        n *= 2;
        const Real cur = midpoint(n);
        const Real err = std::abs(cur - prev) / 3.0;  // midpoint is second order
        if (err <= cfg.rel_tol * std::max(std::abs(cur), 1e-300) || (cur == 0.0 && prev == 0.0))
            return {cur, err, n};
        if (n >= cfg.max_points)
            throw QuadratureDiverged("midpoint refinement did not stabilize at n = " +
                                     std::to_string(n));
        prev = cur;
    }
}

Real epsilon_schedule(Real mu, Real h, Real rho, MollifyRegime regime,
                      const ScheduleConstants& k) {
    const Real log_h = std::abs(std::log(h));
    const Real rho_bar = std::sqrt(mu * h * log_h);
    switch (regime) {
        case MollifyRegime::weak_q2: {
            const Real inner = std::max(1.0 / mu, rho_bar);
            if (rho >= inner) return k.C * h * log_h / rho;
            return k.C * mu * h * log_h;
        }
        case MollifyRegime::weak_q1: {
            if (rho >= rho_bar)
                return k.C * h * log_h / rho + std::pow(rho_bar / rho, k.s) / mu;
            return k.C / mu;
        }
        case MollifyRegime::intermediate_interior: {
            if (rho >= rho_bar)
                return k.C * std::pow(rho_bar / rho, k.s) / mu + k.C * h * log_h / rho;
            return k.C / mu;
        }
        case MollifyRegime::strong:
            return k.C * std::sqrt(h * log_h / mu) + k.C * h * log_h;
        case MollifyRegime::ultrastrong:
            return k.C * h * log_h;
    }
    throw Error("unreachable schedule branch");
}

GridFunction mollify(const GridFunction& samples, Real eps, int order) {
    if (eps < 2.0 * samples.min_spacing())
        throw EpsTooSmall("mollification width below twice the grid spacing");
    const int d = samples.dims();
    std::vector<int> reach(d);
    for (int a = 0; a < d; ++a)
        reach[a] = static_cast<int>(std::floor(eps / samples.spacing(a)));

    GridFunction out = samples;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto idx = samples.unflatten(i);
        const Real center = samples[i];
        Real acc = 0, wsum = 0;
        // iterate the offset box [-reach, reach]^d clipped to the grid
        std::vector<int> cur(d);
        for (int a = 0; a < d; ++a) cur[a] = -reach[a];
        while (true) {
            bool inside = true;
            Real dist2 = 0;
            std::vector<int> j(d);
            for (int a = 0; a < d; ++a) {
                j[a] = idx[a] + cur[a];
                if (j[a] < 0 || j[a] >= samples.shape()[a]) {
                    inside = false;
                    break;
                }
                const Real dxa = cur[a] * samples.spacing(a) / eps;
                dist2 += dxa * dxa;
            }
            if (inside && dist2 < 1.0) {
                const Real w = std::pow(1.0 - dist2, order);
                acc += w * (samples[samples.flatten(j)] - center);
                wsum += w;
            }
            int a = d - 1;
            while (a >= 0) {
                if (++cur[a] <= reach[a]) break;
                cur[a] = -reach[a];
                --a;
            }
            if (a < 0) break;
        }
        out[i] = center + acc / wsum;
    }
    return out;
}

}  // namespace magweyl
