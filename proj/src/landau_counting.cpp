#include "magweyl/landau_counting.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>

namespace magweyl {

namespace {

void count_recurse(const Vector& f, Real hbar, int level, Real rem, long& count) {
    const int r = static_cast<int>(f.size());
    if (level == r) {
        if (rem > 0) ++count;
        return;
    }
    const Real unit = f[level] * hbar;
    if (rem <= unit) return;
    const long cap = static_cast<long>(std::floor((rem / unit - 1.0) / 2.0 + 1e-15));
    for (long a = 0; a <= cap; ++a)
        count_recurse(f, hbar, level + 1, rem - (2.0 * a + 1.0) * unit, count);
}

/// ascending level values sum_j (2 alpha_j + 1) f_j hbar below the cutoff
void levels_below(const Vector& f, Real hbar, Real cutoff, int level, Real acc,
                  std::vector<Real>& out) {
    const int r = static_cast<int>(f.size());
    if (level == r) {
        out.push_back(acc);
        return;
    }
    const Real unit = f[level] * hbar;
    for (long a = 0;; ++a) {
        const Real next = acc + (2.0 * a + 1.0) * unit;
        if (next >= cutoff) break;
        levels_below(f, hbar, cutoff, level + 1, next, out);
    }
}

}  // namespace

long n0_count(const CountingQuery& q) {
    if (q.f.size() > 0 && (q.f.minCoeff() <= 0 || q.hbar <= 0))
        throw Unbounded("counting requires positive intensities and hbar");
    long count = 0;
    count_recurse(q.f, q.hbar, 0, q.tau - q.V, count);
    return count;
}

CountingRegion CountingRegion::box(const Vector& lo, const Vector& hi, int points_per_axis,
                                   const std::function<Real(const Vector&)>& V_fn,
                                   const std::function<Vector(const Vector&)>& f_fn) {
    const int dim = static_cast<int>(lo.size());
    CountingRegion region;
    Real cell = 1;
    for (int a = 0; a < dim; ++a) cell *= (hi[a] - lo[a]) / points_per_axis;
    std::vector<int> idx(dim, 0);
    Vector x(dim);
    while (true) {
        for (int a = 0; a < dim; ++a)
            x[a] = lo[a] + (idx[a] + 0.5) * (hi[a] - lo[a]) / points_per_axis;
        region.points.push_back(x);
        region.V.push_back(V_fn(x));
        region.f.push_back(f_fn(x));
        region.weight.push_back(cell);
        int a = dim - 1;
        while (a >= 0) {
            if (++idx[a] < points_per_axis) break;
            idx[a] = 0;
            --a;
        }
        if (a < 0) break;
    }
    return region;
}

CountingRegion CountingRegion::unit_ball(int dim, int points_per_axis,
                                         const std::function<Real(const Vector&)>& V_fn,
                                         const std::function<Vector(const Vector&)>& f_fn) {
    Vector lo = Vector::Constant(dim, -1.0), hi = Vector::Constant(dim, 1.0);
    CountingRegion full = box(lo, hi, points_per_axis, V_fn, f_fn);
    CountingRegion region;
    for (std::size_t i = 0; i < full.points.size(); ++i) {
        if (full.points[i].norm() >= 1.0) continue;
        region.points.push_back(full.points[i]);
        region.V.push_back(full.V[i]);
        region.f.push_back(full.f[i]);
        region.weight.push_back(full.weight[i]);
    }
    return region;
}

CountingRegion CountingRegion::low_discrepancy(const Vector& lo, const Vector& hi, int n_points,
                                               const std::function<Real(const Vector&)>& V_fn,
                                               const std::function<Vector(const Vector&)>& f_fn) {
    static constexpr std::array<Real, 4> alphas = {
        0.6180339887498949, 0.4142135623730951, 0.7320508075688772, 0.2360679774997896};
    const int dim = static_cast<int>(lo.size());
    CountingRegion region;
    Real cell = 1;
    for (int a = 0; a < dim; ++a) cell *= hi[a] - lo[a];
    cell /= n_points;
    Vector x(dim);
    for (int i = 0; i < n_points; ++i) {
        for (int a = 0; a < dim; ++a) {
            const Real t = std::fmod((i + 1) * alphas[a % alphas.size()], 1.0);
            x[a] = lo[a] + (hi[a] - lo[a]) * t;
        }
        region.points.push_back(x);
        region.V.push_back(V_fn(x));
        region.f.push_back(f_fn(x));
        region.weight.push_back(cell);
    }
    return region;
}

Real n0_integrated_difference(const CountingRegion& region, Real hbar, Real tau,
                              Real tau_prime) {
    Real acc = 0;
    for (std::size_t i = 0; i < region.V.size(); ++i) {
        CountingQuery hi{region.f[i], region.V[i], hbar, tau_prime};
        CountingQuery lo{region.f[i], region.V[i], hbar, tau};
        acc += region.weight[i] * static_cast<Real>(n0_count(hi) - n0_count(lo));
    }
    return acc;
}

NuEstimate estimate_nu(const CountingRegion& region, const std::vector<Real>& hbar_list,
                       Real tau_center, Real tau_halfwidth, int tau_points) {
    if (hbar_list.size() < 4)
        throw InsufficientData("nu estimation needs at least 4 hbar values");

    NuEstimate est;
    for (const Real hbar : hbar_list) {
        const int r = static_cast<int>(region.f.front().size());
        const Real hbar_r = std::pow(hbar, r);
        const std::array<Real, 3> lambdas = {hbar * hbar, std::pow(hbar, 1.5), hbar};

        // per-point sorted level values make the tau scan a pair of binary searches
        std::vector<std::vector<Real>> levels(region.V.size());
        const Real cutoff =
            tau_center + tau_halfwidth + lambdas.back() + 1e-12 -
            *std::min_element(region.V.begin(), region.V.end());
        for (std::size_t i = 0; i < region.V.size(); ++i) {
            levels_below(region.f[i], hbar, cutoff, 0, 0.0, levels[i]);
            std::sort(levels[i].begin(), levels[i].end());
        }
        auto integrated_diff = [&](Real tau, Real lambda) {
            Real acc = 0;
            for (std::size_t i = 0; i < region.V.size(); ++i) {
                const Real a = tau - region.V[i];
                const Real b = tau + lambda - region.V[i];
                const auto& L = levels[i];
                const auto n_lo = std::lower_bound(L.begin(), L.end(), a) - L.begin();
                const auto n_hi = std::lower_bound(L.begin(), L.end(), b) - L.begin();
                acc += region.weight[i] * static_cast<Real>(n_hi - n_lo);
            }
            return acc;
        };

        // tau candidates: a uniform grid plus exact jump locations taken from a
        // few sample points, so windows far below the grid spacing still land
        // on the atoms of the counting measure
        std::vector<Real> taus;
        for (int t = 0; t < tau_points; ++t)
            taus.push_back(tau_center - tau_halfwidth +
                           2.0 * tau_halfwidth * t / (tau_points - 1));
        const std::size_t stride = std::max<std::size_t>(1, region.V.size() / 4);
        for (std::size_t i = 0; i < region.V.size(); i += stride) {
            for (const Real lv : levels[i]) {
                const Real tau = lv + region.V[i];
                if (tau >= tau_center - tau_halfwidth && tau <= tau_center + tau_halfwidth)
                    taus.push_back(tau);
            }
        }

        std::array<Real, 3> D{0, 0, 0};
        for (const Real tau : taus)
            for (std::size_t li = 0; li < lambdas.size(); ++li)
                D[li] = std::max(D[li], hbar_r * integrated_diff(tau, lambdas[li]));
        const Real slope = std::max(0.0, (D[2] - D[1]) / (lambdas[2] - lambdas[1]));
        const Real nu = std::max(D[0] - slope * lambdas[0], 1e-300);
        est.hbar.push_back(hbar);
        est.nu_hat.push_back(nu);
    }
    est.kappa_fit = fit_power_law(est.hbar, est.nu_hat);
    return est;
}

int diophantine_rank(const std::vector<GridFunction>& f_components) {
    const int r = static_cast<int>(f_components.size());
    if (r < 1) return 0;
    const std::size_t n = f_components[0].size();
    const int dim = f_components[0].dims();

    // gradients of the ratios f_j / f_1, stacked per grid point
    std::vector<GridFunction> ratios;
    for (int j = 1; j < r; ++j) {
        GridFunction ratio = f_components[j];
        for (std::size_t i = 0; i < n; ++i) ratio[i] /= f_components[0][i];
        ratios.push_back(std::move(ratio));
    }
    if (ratios.empty()) return 0;

    // global scale for the rank threshold
    Real scale = 0;
    std::vector<Matrix> systems(n, Matrix(r - 1, dim));
    for (std::size_t i = 0; i < n; ++i) {
        for (int j = 0; j < r - 1; ++j) systems[i].row(j) = ratios[j].gradient(i).transpose();
        scale = std::max(scale, systems[i].cwiseAbs().maxCoeff());
    }
    const Real threshold = 1e-8 * std::max(scale, 1.0);

    int min_rank = r - 1 < dim ? r - 1 : dim;
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::JacobiSVD<Matrix> svd(systems[i]);
        int rank = 0;
        for (int s = 0; s < svd.singularValues().size(); ++s)
            if (svd.singularValues()[s] > threshold) ++rank;
        min_rank = std::min(min_rank, rank);
    }
    return min_rank;
}

long perturbed_count(const TruncatedSpectrum& spectrum, Real tau) {
    if (tau > spectrum.certified_max)
        throw TruncationUnreliable("tau exceeds the certified interior range");
    const auto begin = spectrum.eigenvalues.data();
    const auto end = begin + spectrum.eigenvalues.size();
    return std::lower_bound(begin, end, tau) - begin;
}

}  // namespace magweyl
