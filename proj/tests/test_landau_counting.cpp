#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "magweyl/landau_counting.hpp"

#include <cmath>
#include <random>

using namespace magweyl;

namespace {

// brute-force oracle over a generous alpha box
long brute_count(const Vector& f, Real V, Real hbar, Real tau, int box) {
    const int r = static_cast<int>(f.size());
    long count = 0;
    std::vector<int> alpha(r, 0);
    while (true) {
        Real level = V;
        for (int j = 0; j < r; ++j) level += (2.0 * alpha[j] + 1.0) * f[j] * hbar;
        if (level < tau) ++count;
        int a = r - 1;
        while (a >= 0) {
            if (++alpha[a] < box) break;
            alpha[a] = 0;
            --a;
        }
        if (a < 0) break;
    }
    return count;
}

Vector vec2(Real a, Real b) {
    Vector v(2);
    v << a, b;
    return v;
}

}  // namespace

TEST_CASE("simplex counts") {
    SUBCASE("f = (1,1): alpha_1 + alpha_2 < 4 has 10 points") {
        CHECK(n0_count({vec2(1, 1), 0.0, 0.1, 1.0}) == 10);
    }
    SUBCASE("f = (1,2), shifted potential") {
        CHECK(n0_count({vec2(1, 2), -2.0, 0.25, 0.0}) == 4);
    }
    SUBCASE("below the ground level") {
        CHECK(n0_count({vec2(1, 1), 0.0, 0.1, 0.2}) == 0);
    }
    SUBCASE("agrees with the brute-force oracle") {
        std::mt19937 rng(9);
        std::uniform_real_distribution<Real> uf(0.5, 2.5), utau(0.0, 3.0);
        for (int trial = 0; trial < 50; ++trial) {
            Vector f = vec2(uf(rng), uf(rng));
            const Real hbar = 0.05 + 0.2 * utau(rng) / 3.0;
            const Real tau = utau(rng);
            CHECK(n0_count({f, 0.0, hbar, tau}) == brute_count(f, 0.0, hbar, tau, 80));
        }
    }
    SUBCASE("nonpositive intensity is rejected") {
        CHECK_THROWS_AS(n0_count({vec2(1, -1), 0.0, 0.1, 1.0}), Unbounded);
    }
}

TEST_CASE("counting monotonicity") {
    std::mt19937 rng(21);
    std::uniform_real_distribution<Real> uni(0.5, 2.0);
    for (int trial = 0; trial < 30; ++trial) {
        Vector f = vec2(uni(rng), uni(rng));
        const Real hbar = 0.1, tau = uni(rng);
        const long base = n0_count({f, 0.0, hbar, tau});
        CHECK(n0_count({f, 0.0, hbar, tau + 0.1}) >= base);
        CHECK(n0_count({f, 0.0, 1.1 * hbar, tau}) <= base);
        Vector fup = f;
        fup[0] *= 1.2;
        CHECK(n0_count({fup, 0.0, hbar, tau}) <= base);
    }
}

TEST_CASE("semiclassical volume limit of the count") {
    // hbar^r n0 -> (tau - V)^r / (2^r r! prod f_j) at rate O(hbar)
    Vector f = vec2(1.0, 2.0);
    const Real tau = 1.0, V = 0.0;
    const Real limit = std::pow(tau - V, 2) / (4.0 * 2.0 * f.prod());
    Real prev_err = 1e9;
    for (Real hbar : {0.02, 0.01, 0.005, 0.0025}) {
        const Real scaled = hbar * hbar * static_cast<Real>(n0_count({f, V, hbar, tau}));
        const Real err = std::abs(scaled - limit) / limit;
        CHECK(err <= 4.0 * hbar / (tau - V));
        CHECK(err <= prev_err + 1e-9);
        prev_err = err;
    }
}

TEST_CASE("integrated difference") {
    auto region = CountingRegion::box(
        Vector::Zero(1), Vector::Ones(1), 64,
        [](const Vector& x) { return x[0]; },
        [](const Vector&) { return vec2(1.0, 1.0); });

    SUBCASE("tau' = tau gives zero, larger tau' is nonnegative") {
        CHECK(n0_integrated_difference(region, 0.1, 1.0, 1.0) == 0.0);
        CHECK(n0_integrated_difference(region, 0.1, 1.0, 1.05) >= 0.0);
    }
    SUBCASE("telescoping is exact on the shared grid") {
        const Real a = n0_integrated_difference(region, 0.1, 1.0, 1.02);
        const Real b = n0_integrated_difference(region, 0.1, 1.02, 1.07);
        const Real c = n0_integrated_difference(region, 0.1, 1.0, 1.07);
        CHECK(a + b == doctest::Approx(c).epsilon(1e-13));
    }
    SUBCASE("matches a dense tau-scan oracle") {
        // oracle: accumulate jumps of the integrated count over a fine tau scan
        const Real hbar = 0.1, tau0 = 1.0, tau1 = 1.05;
        Real oracle = 0;
        const int steps = 400;
        for (std::size_t i = 0; i < region.V.size(); ++i) {
            long prev = n0_count({region.f[i], region.V[i], hbar, tau0});
            long jumps = 0;
            for (int s = 1; s <= steps; ++s) {
                const Real tau = tau0 + (tau1 - tau0) * s / steps;
                const long cur = n0_count({region.f[i], region.V[i], hbar, tau});
                jumps += cur - prev;
                prev = cur;
            }
            oracle += region.weight[i] * static_cast<Real>(jumps);
        }
        CHECK(n0_integrated_difference(region, hbar, tau0, tau1) ==
              doctest::Approx(oracle).epsilon(1e-12));
    }
}

TEST_CASE("nu estimation separates the comeasurable and tilted cases") {
    std::vector<Real> hbars;
    for (int k = 4; k <= 9; ++k) hbars.push_back(std::pow(2.0, -k));

    SUBCASE("constant f = (1,1) gives kappa near 1") {
        auto region = CountingRegion::low_discrepancy(
            Vector::Zero(1), Vector::Ones(1), 16,
            [](const Vector&) { return -1.0; },
            [](const Vector&) { return vec2(1.0, 1.0); });
        auto est = estimate_nu(region, hbars, 0.0, 0.05, 120);
        CHECK(est.kappa_fit.exponent >= 0.8);
        CHECK(est.kappa_fit.exponent <= 1.2);
        // nu_hat / hbar stays bounded above and below
        for (std::size_t i = 0; i < est.hbar.size(); ++i) {
            const Real ratio = est.nu_hat[i] / est.hbar[i];
            CHECK(ratio >= 0.2);
            CHECK(ratio <= 5.0);
        }
    }
    SUBCASE("rank-one gradient f = (1, 1+x) gives kappa near 2") {
        auto region = CountingRegion::low_discrepancy(
            Vector::Zero(1), Vector::Ones(1), 48,
            [](const Vector&) { return -1.0; },
            [](const Vector& x) { return vec2(1.0, 1.0 + x[0]); });
        auto est = estimate_nu(region, hbars, 0.0, 0.05, 120);
        CHECK(est.kappa_fit.exponent >= 1.6);
        CHECK(est.kappa_fit.exponent <= 2.4);
    }
    SUBCASE("too few hbar values") {
        auto region = CountingRegion::box(
            Vector::Zero(1), Vector::Ones(1), 8,
            [](const Vector&) { return -1.0; },
            [](const Vector&) { return vec2(1.0, 1.0); });
        CHECK_THROWS_AS(estimate_nu(region, {0.1, 0.05, 0.025}, 0.0, 0.05), InsufficientData);
    }
}

TEST_CASE("diophantine rank of intensity ratios") {
    Vector lo = Vector::Zero(2), hi = Vector::Ones(2);
    auto sample = [&](const std::function<Real(const Vector&)>& f) {
        return GridFunction::sample(lo, hi, {17, 17}, f);
    };
    SUBCASE("constant intensities have rank 0") {
        std::vector<GridFunction> f = {sample([](const Vector&) { return 1.0; }),
                                       sample([](const Vector&) { return 2.0; })};
        CHECK(diophantine_rank(f) == 0);
    }
    SUBCASE("one tilted ratio has rank 1") {
        std::vector<GridFunction> f = {sample([](const Vector&) { return 1.0; }),
                                       sample([](const Vector& x) { return 1.0 + x[0]; })};
        CHECK(diophantine_rank(f) == 1);
    }
    SUBCASE("two independent ratios have rank 2") {
        std::vector<GridFunction> f = {
            sample([](const Vector&) { return 1.0; }),
            sample([](const Vector& x) { return 1.0 + x[0]; }),
            sample([](const Vector& x) { return 1.0 + x[1]; })};
        CHECK(diophantine_rank(f) == 2);
    }
}

TEST_CASE("perturbed count against the lattice count") {
    Vector f = vec2(2.0, 1.0);
    const Real mu = 30.0, h = 0.01, hbar = mu * h;

    SUBCASE("zero cubic reproduces n0 exactly across the certified range") {
        auto osc = build_perturbed(f, hbar, CubicCoefficients(4), mu, 10);
        auto spectrum = diagonalize_truncated(osc.matrix, osc.algebra);
        // levels sit at odd multiples of mu h; probe strictly between them
        for (Real tau = 2.0 * hbar; tau < spectrum.certified_max; tau += 2.0 * hbar) {
            CHECK(perturbed_count(spectrum, tau) == n0_count({f, 0.0, hbar, tau}));
        }
    }
    SUBCASE("tau below the ground state counts zero") {
        auto osc = build_perturbed(f, hbar, CubicCoefficients(4), mu, 8);
        auto spectrum = diagonalize_truncated(osc.matrix, osc.algebra);
        CHECK(perturbed_count(spectrum, 0.0) == 0);
    }
    SUBCASE("uncertified tau is rejected") {
        auto osc = build_perturbed(f, hbar, CubicCoefficients(4), mu, 4);
        auto spectrum = diagonalize_truncated(osc.matrix, osc.algebra);
        CHECK_THROWS_AS(perturbed_count(spectrum, 1e9), TruncationUnreliable);
    }
    SUBCASE("resonant splitting shifts counts by the coupling element") {
        const Real omega = 0.1;
        auto model = build_resonant_model(ResonantVariant::r2, omega, mu, h, 10);
        Matrix H = model.hamiltonian();
        Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
        // dense oracle: the degenerate pair {(1,1),(0,3)} at the target level
        // splits by +- (omega/mu) <(1,1)| a1^T a2^2 |(0,3)> (2 mu h)^{3/2}
        const Real elem = (omega / mu) * std::sqrt(6.0) * std::pow(2.0 * hbar, 1.5);
        Real nearest_neg = -1e9, nearest_pos = 1e9;
        for (int i = 0; i < es.eigenvalues().size(); ++i) {
            const Real e = es.eigenvalues()[i];
            if (e < 0) nearest_neg = std::max(nearest_neg, e);
            if (e >= 0) nearest_pos = std::min(nearest_pos, e);
        }
        CHECK(nearest_neg == doctest::Approx(-elem).epsilon(1e-10));
        CHECK(nearest_pos == doctest::Approx(elem).epsilon(1e-10));
        // the count below zero exceeds the count below the split by one branch
        long below = 0, at_zero = 0;
        for (int i = 0; i < es.eigenvalues().size(); ++i) {
            if (es.eigenvalues()[i] < -1.5 * elem) ++below;
            if (es.eigenvalues()[i] < 0.0) ++at_zero;
        }
        CHECK(at_zero == below + 1);
    }
}
