#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "magweyl/asymptotics_lab.hpp"

#include <cmath>
#include <fstream>

using namespace magweyl;

TEST_CASE("regime classification") {
    SUBCASE("weak bucket just below the first threshold") {
        auto lab = classify_regime(5.0, 1e-3, 1);
        CHECK(lab.mu1 == doctest::Approx(5.2477).epsilon(1e-3));
        CHECK(lab.name == Regime::weak);
    }
    SUBCASE("evaluated thresholds") {
        auto lab = classify_regime(5.0, 1e-3, 1);
        CHECK(lab.mu2 == doctest::Approx(12.031).epsilon(1e-3));
        CHECK(lab.mu_star_q == doctest::Approx(std::pow(1e-3, -1.0 / 3)).epsilon(1e-10));
    }
    SUBCASE("factor two above 1/h is ultrastrong") {
        auto lab = classify_regime(2.0 / 1e-2, 1e-2, 1);
        CHECK(lab.name == Regime::ultrastrong);
    }
    SUBCASE("monotone in mu") {
        const Real h = 1e-3;
        int last = -1;
        for (Real mu = 1.0; mu < 5.0 / h; mu *= 1.3) {
            auto lab = classify_regime(mu, h, 1);
            CHECK(static_cast<int>(lab.name) >= last);
            last = static_cast<int>(lab.name);
        }
    }
}

TEST_CASE("bound registry") {
    SUBCASE("ultrastrong value is exact arithmetic") {
        BoundParams p;
        p.mu = 20.0;
        p.h = 0.1;  // mu h = 2
        p.r = 1;
        p.d = 3;
        auto res = predicted_bound("ultrastrong", p);
        CHECK(res.value == doctest::Approx(2.0 * std::pow(0.1, -2)).epsilon(1e-14));
        CHECK(res.regime_ok);
    }
    SUBCASE("weak bound approaches h^{1-d} as mu h |log h| -> 0") {
        BoundParams p;
        p.mu = 1.0;
        p.q = 1;
        p.d = 3;
        Real prev_ratio = 1e9;
        for (Real h : {1e-2, 1e-3, 1e-4}) {
            p.h = h;
            const Real value = predicted_bound("weak", p).value;
            const Real leading = std::pow(h, 1 - p.d);
            const Real ratio = value / leading - 1.0;
            CHECK(ratio < prev_ratio);
            prev_ratio = ratio;
        }
        CHECK(prev_ratio < 0.05);
    }
    SUBCASE("guards flag out-of-regime parameters without blocking") {
        BoundParams p;
        p.mu = 1.5;
        p.h = 0.5;
        p.q = 2;
        auto res = predicted_bound("ultrastrong_q2", p);
        CHECK_FALSE(res.regime_ok);
        CHECK(res.value > 0);
    }
    SUBCASE("unknown ids are rejected") {
        CHECK_THROWS_AS(predicted_bound("no_such_bound", {}), UnknownTheorem);
    }
    SUBCASE("every bound is finite and positive over a parameter grid") {
        for (const auto& id : bound_ids()) {
            for (Real h : {0.5, 0.1, 0.01, 0.001}) {
                for (Real mu : {1.0, 10.0, 100.0, 2.0 / h}) {
                    for (int q : {1, 2, 3}) {
                        BoundParams p;
                        p.mu = mu;
                        p.h = h;
                        p.q = q;
                        p.r = (5 - q) / 2 > 0 ? (5 - q) / 2 : 1;
                        p.d = 2 * p.r + q;
                        const Real v = predicted_bound(id, p).value;
                        CHECK(std::isfinite(v));
                        CHECK(v > 0);
                    }
                }
            }
        }
    }
}

TEST_CASE("exponent fitting") {
    SUBCASE("exact power law is recovered to machine precision") {
        std::vector<SweepRow> rows;
        for (Real x : {1.0, 2.0, 4.0, 8.0, 16.0}) {
            SweepRow r;
            r.ok = true;
            r.h = x;
            r.remainder = x * x;
            rows.push_back(r);
        }
        auto fit = fit_exponent(rows, "h", "remainder");
        CHECK(fit.exponent == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("failed rows are skipped") {
        std::vector<SweepRow> rows;
        for (Real x : {1.0, 2.0, 4.0, 8.0, 16.0}) {
            SweepRow r;
            r.ok = x != 4.0;
            r.h = x;
            r.remainder = x;
            rows.push_back(r);
        }
        auto fit = fit_exponent(rows, "h", "remainder");
        CHECK(fit.points == 4);
        CHECK(fit.exponent == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("too few points") {
        std::vector<SweepRow> rows(2);
        CHECK_THROWS_AS(fit_exponent(rows, "h", "remainder"), InsufficientData);
    }
}

namespace {

ExperimentConfig classical_1d_config() {
    ExperimentConfig cfg;
    cfg.spec.d = 1;
    cfg.spec.metric = Matrix::Identity(1, 1);
    cfg.spec.field = Matrix::Zero(1, 1);
    cfg.spec.mu = 0.0;
    Monomial m2;
    m2.coeff = 1.0;
    m2.powers = {2};
    cfg.spec.potential = Polynomial({m2}) + Polynomial(-1.0);
    cfg.spec.cutoff.center = Vector::Zero(1);
    cfg.spec.cutoff.radius = 0.6;
    cfg.spec.cutoff.order = 4;
    cfg.tau = 0.0;
    cfg.route = OracleRoute::lattice_1d;
    cfg.grid.shape = {64};
    cfg.grid.lengths = Vector::Constant(1, 4.0);
    cfg.grid.origin = Vector::Constant(1, -2.0);
    cfg.bc = {BoundaryCondition::dirichlet};
    cfg.points_per_h = 6;
    cfg.bound_id = "weak";
    cfg.bound_base.q = 1;
    cfg.bound_base.r = 0;
    cfg.bound_base.d = 1;
    return cfg;
}

}  // namespace

TEST_CASE("classical 1d remainder row") {
    auto cfg = classical_1d_config();
    auto row = measure_remainder(cfg, 0.0, 0.02);
    REQUIRE(row.ok);
    CHECK(row.principal > 0);
    CHECK(row.oracle > 0);
    CHECK(row.remainder / row.principal < 0.1);
}

TEST_CASE("sweep aggregates rows and reports failures") {
    auto cfg = classical_1d_config();
    std::vector<std::pair<Real, Real>> points = {
        {0.0, 0.08}, {0.0, 0.04}, {0.0, 0.02}, {0.0, 0.01}};
    auto report = sweep(cfg, points, 1);
    REQUIRE(report.rows.size() == 4);
    int ok_count = 0;
    for (const auto& r : report.rows)
        if (r.ok) ++ok_count;
    CHECK(ok_count == 4);
    CHECK(report.fits.count("remainder_vs_h") == 1);

    SUBCASE("csv and json outputs") {
        write_csv(report, "/tmp/magweyl_report.csv");
        std::ifstream in("/tmp/magweyl_report.csv");
        std::string header;
        std::getline(in, header);
        CHECK(header == "mu,h,regime,principal,correction,oracle,remainder,bound,runtime_s");
        int lines = 0;
        std::string line;
        while (std::getline(in, line)) ++lines;
        CHECK(lines == 4);

        write_json_report(report, "/tmp/magweyl_report.json");
        std::ifstream jin("/tmp/magweyl_report.json");
        CHECK(jin.good());
    }
}

TEST_CASE("rows with impossible grids fail softly") {
    auto cfg = classical_1d_config();
    cfg.route = OracleRoute::lattice;
    cfg.spec.d = 2;
    cfg.spec.metric = Matrix::Identity(2, 2);
    cfg.spec.field = Matrix::Zero(2, 2);
    cfg.spec.field(0, 1) = 1.0;
    cfg.spec.field(1, 0) = -1.0;
    cfg.spec.cutoff.center = Vector::Zero(2);
    cfg.grid.shape = {4, 4};
    cfg.grid.lengths = Vector::Constant(2, 10.0);
    cfg.grid.origin = Vector::Constant(2, -5.0);
    cfg.bc = {BoundaryCondition::dirichlet, BoundaryCondition::dirichlet};
    cfg.points_per_h = 0;
    auto row = measure_remainder(cfg, 50.0, 0.01);
    CHECK_FALSE(row.ok);
    CHECK(row.error.find("magnetic length") != std::string::npos);
}
