#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "possim/im.hpp"
#include "possim/io.hpp"
#include "possim/special.hpp"

#include <cmath>

using namespace possim;

namespace {

Dataset darwin() { return read_csv(std::string(POSSIM_DATA_DIR) + "/darwin.csv"); }

std::vector<Vec> grid1d(double lo, double hi, double step) {
    std::vector<Vec> g;
    for (double x = lo; x <= hi + 1e-12; x += step) g.push_back(Vec::Constant(1, x));
    return g;
}

// Closed-form pivotal contour for normal mean with known sigma.
double pivotal_contour(double zbar, double mu, double sigma, int n) {
    return 2.0 * (1.0 - norm_cdf(std::sqrt(static_cast<double>(n)) *
                                 std::abs(zbar - mu) / sigma));
}

} // namespace

TEST_CASE("contour_mc is exactly 1 at the MLE") {
    auto model = make_normal_model();
    Dataset z = darwin();
    Vec hat = model->mle(z);
    MonteCarloConfig cfg;
    cfg.M = 500;
    cfg.seed = 11;
    CHECK(contour_mc(*model, z, hat, cfg) == 1.0);
}

TEST_CASE("contour_mc matches the pivotal oracle for known sigma") {
    auto model = make_normal_fixed_sigma_model(1.0);
    Dataset z = Dataset::from_column({0.0});
    MonteCarloConfig cfg;
    cfg.M = 1000000;
    cfg.seed = 17;
    double pl = contour_mc(*model, z, Vec::Constant(1, 1.96), cfg);
    CHECK(std::abs(pl - 0.05) < 0.001);
}

TEST_CASE("contour_mc determinism and tie reporting") {
    auto model = make_normal_model();
    Dataset z = darwin();
    Vec theta(2);
    theta << 10.0, 40.0;
    MonteCarloConfig cfg;
    cfg.M = 2000;
    cfg.seed = 5;
    McContourStats s1, s2;
    double a = contour_mc(*model, z, theta, cfg, &s1);
    double b = contour_mc(*model, z, theta, cfg, &s2);
    CHECK(a == b);
    CHECK(s1.ties == s2.ties);
    CHECK(s1.redraws == s2.redraws);
    CHECK(cfg.low_replicate_warning() == false);
}

TEST_CASE("contour_mc rejects tiny M and impossible parameters shortcut to 0") {
    auto model = make_normal_model();
    Dataset z = darwin();
    MonteCarloConfig cfg;
    cfg.M = 50;
    CHECK_THROWS_AS(contour_mc(*model, z, model->mle(z), cfg), Error);

    // parameter with zero mass on an observed cell: R = 0, contour 0
    auto multi = make_multinomial_model(2);
    Dataset obs;
    obs.columns = {"count"};
    obs.rows = {{2.0, 1.0}};
    Vec t(2);
    t << 0.0, 1.0;
    MonteCarloConfig ok;
    ok.M = 100;
    CHECK(contour_mc(*multi, obs, t, ok) == 0.0);
}

TEST_CASE("contour_wilks closed form") {
    auto model = make_normal_model();
    Dataset z = darwin();
    CHECK(contour_wilks(*model, z, model->mle(z)) == 1.0);

    // R = exp(-1.92075) in a 1-parameter model
    auto fixed = make_normal_fixed_sigma_model(1.0);
    Dataset one = Dataset::from_column({0.0});
    double mu = std::sqrt(3.8415);
    double w = contour_wilks(*fixed, one, Vec::Constant(1, mu));
    CHECK(std::abs(w - 0.05) < 1e-4);
}

TEST_CASE("Wilks merging: n = 400 normal sample") {
    auto model = make_normal_model();
    Vec truth(2);
    truth << 0.0, 1.0;
    Dataset like = Dataset::from_column(std::vector<double>(400, 0.0));
    Dataset z = model->simulate(truth, like, 404ULL);
    Vec hat = model->mle(z);

    MonteCarloConfig cfg;
    cfg.M = 100000;
    cfg.seed = 41;
    double worst = 0.0;
    for (int i = 0; i < 21; ++i) {
        Vec theta(2);
        theta << hat[0] + (i - 10) * 0.015, hat[1] * (1.0 + (i - 10) * 0.008);
        double diff = std::abs(contour_wilks(*model, z, theta) -
                               contour_mc(*model, z, theta, cfg));
        worst = std::max(worst, diff);
    }
    CHECK(worst <= 0.02);
}

TEST_CASE("confidence regions: trivial levels and pivotal endpoints") {
    auto model = make_normal_fixed_sigma_model(1.0);
    Dataset z = Dataset::from_column({0.0});

    PossibilityContour closed;
    closed.dimension = 1;
    closed.normalizer_hint = Vec::Zero(1);
    closed.evaluate = [](const Vec& t) { return pivotal_contour(0.0, t[0], 1.0, 1); };

    auto grid = grid1d(-4.0, 4.0, 0.01);
    grid.push_back(Vec::Zero(1));  // the MLE, exactly
    auto all = confidence_region(closed, 0.0, grid);
    CHECK(all.grid_members.size() == grid.size());

    auto top = confidence_region(closed, 1.0, grid);
    bool has_mle = false;
    for (const Vec& p : top.grid_members)
        if (std::abs(p[0]) < 1e-9) has_mle = true;
    CHECK(has_mle);

    auto r05 = confidence_region(closed, 0.05, grid);
    double lo = r05.grid_members.front()[0], hi = 0.0;
    for (const Vec& p : r05.grid_members) hi = std::max(hi, p[0]);
    CHECK(std::abs(lo + 1.96) <= 0.011);
    CHECK(std::abs(hi - 1.96) <= 0.011);

    CHECK_THROWS_AS(confidence_region(closed, 0.05, grid1d(2.0, 4.0, 0.01)), Error);
}

TEST_CASE("level sets are nested across alpha") {
    PossibilityContour closed;
    closed.dimension = 1;
    closed.normalizer_hint = Vec::Zero(1);
    closed.evaluate = [](const Vec& t) { return pivotal_contour(0.0, t[0], 1.0, 1); };
    auto grid = grid1d(-4.0, 4.0, 0.05);
    auto narrow = confidence_region(closed, 0.5, grid);
    auto wide = confidence_region(closed, 0.1, grid);
    CHECK(narrow.grid_members.size() <= wide.grid_members.size());
    for (const Vec& p : narrow.grid_members) CHECK(wide.member(p));
}

TEST_CASE("test_hypothesis boundary behavior and MLE containment") {
    PossibilityContour closed;
    closed.dimension = 1;
    closed.normalizer_hint = Vec::Zero(1);
    closed.evaluate = [](const Vec& t) { return pivotal_contour(0.0, t[0], 1.0, 1); };

    Vec at196 = Vec::Constant(1, norm_quantile(0.975));
    auto H = HypothesisSet::from_grid({at196}, [](const Vec&) { return true; });
    auto d = test_hypothesis(closed, H, 0.05);
    CHECK(d.plausibility == doctest::Approx(0.05).epsilon(1e-9));
    // the boundary counts as rejection (non-strict comparison)
    CHECK(test_hypothesis(closed, H, d.plausibility).rejected);
    CHECK(test_hypothesis(closed, H, 0.0500001).rejected);

    auto H0 = HypothesisSet::from_grid({Vec::Zero(1)}, [](const Vec&) { return true; });
    CHECK_FALSE(test_hypothesis(closed, H0, 0.99).rejected);
}

TEST_CASE("type I error rate is controlled under the null") {
    auto model = make_normal_fixed_sigma_model(1.0);
    Dataset like = Dataset::from_column(std::vector<double>(5, 0.0));
    Vec null_theta = Vec::Zero(1);
    MonteCarloConfig cfg;
    cfg.M = 500;
    cfg.seed = 27;
    cfg.parallel = false;
    const int reps = 2000;
    const double alpha = 0.2;
    int rejections = 0;
    for (int r = 0; r < reps; ++r) {
        Rng rng = Rng::substream(909ULL, static_cast<std::uint64_t>(r));
        Dataset data = model->simulate(null_theta, like, rng);
        MonteCarloConfig inner = cfg;
        inner.seed = cfg.seed + r;
        if (contour_mc(*model, data, null_theta, inner) <= alpha) ++rejections;
    }
    double rate = static_cast<double>(rejections) / reps;
    CHECK(rate <= alpha + 3.0 * std::sqrt(alpha * (1.0 - alpha) / reps));
}

TEST_CASE("im_from_test_family: oracle values and decision equivalence") {
    Box b;
    b.lower = Vec::Constant(1, -1.0);
    b.upper = Vec::Constant(1, 1.0);
    auto H0 = HypothesisSet::from_box(b, [](const Vec&) { return true; });

    // never rejected: contour is 1 on H0
    auto never = im_from_test_family([](double) { return false; }, H0);
    CHECK(never.evaluate(Vec::Zero(1)) == 1.0);

    // one-sided z test, observed z = 1.645
    double zobs = 1.645;
    auto in_reject = [zobs](double alpha) {
        if (alpha <= 0.0) return false;
        if (alpha >= 1.0) return true;
        return zobs > norm_quantile(1.0 - alpha);
    };
    auto contour = im_from_test_family(in_reject, H0);
    double on_h0 = contour.evaluate(Vec::Zero(1));
    CHECK(std::abs(on_h0 - (1.0 - norm_cdf(zobs))) < 1e-4);

    // decision equivalence on 100 random (z, alpha) pairs
    Rng rng(314);
    for (int i = 0; i < 100; ++i) {
        double z = rng.uniform(-3.0, 3.0);
        double alpha = rng.uniform(0.01, 0.99);
        auto rej = [z](double a) {
            if (a <= 0.0) return false;
            if (a >= 1.0) return true;
            return z > norm_quantile(1.0 - a);
        };
        auto c = im_from_test_family(rej, H0);
        bool im_rejects = c.evaluate(Vec::Zero(1)) <= alpha;
        bool test_rejects = rej(alpha);
        // the bisection introduces 1e-6 slack exactly at the boundary
        if (std::abs(c.evaluate(Vec::Zero(1)) - alpha) > 1e-5)
            CHECK(im_rejects == test_rejects);
    }

    auto not_nested = [](double alpha) { return alpha > 0.2 && alpha < 0.4; };
    CHECK_THROWS_AS(im_from_test_family(not_nested, H0), Error);
}

TEST_CASE("im_from_confidence_family: oracle value and round trip") {
    const double zbar = 0.4;
    const int n = 4;
    auto covers = [zbar, n](double alpha, const Vec& phi) {
        if (alpha <= 0.0) return true;
        if (alpha >= 1.0) return std::abs(phi[0] - zbar) <= 1e-12;
        double half = norm_quantile(1.0 - alpha / 2.0) / std::sqrt(static_cast<double>(n));
        return std::abs(phi[0] - zbar) <= half;
    };
    auto identity = [](const Vec& t) { return t; };
    auto contour = im_from_confidence_family(covers, identity, 1,
                                             Vec::Constant(1, zbar));

    CHECK(contour.evaluate(Vec::Constant(1, zbar)) >= 1.0 - 1e-5);

    double endpoint = zbar + norm_quantile(0.95) / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(contour.evaluate(Vec::Constant(1, endpoint)) - 0.10) < 1e-4);

    // round trip: the alpha level set reproduces C_alpha on a grid
    for (double theta = -1.0; theta <= 2.0; theta += 0.05) {
        Vec t = Vec::Constant(1, theta);
        bool in_region = contour.evaluate(t) >= 0.2;
        bool in_family = covers(0.2, t);
        if (std::abs(contour.evaluate(t) - 0.2) > 1e-5) CHECK(in_region == in_family);
    }
}

TEST_CASE("validity diagnostic: trivial alphas and normal passing run") {
    auto model = make_normal_model();
    Dataset like = Dataset::from_column(std::vector<double>(10, 0.0));
    Vec theta(2);
    theta << 0.0, 1.0;
    MonteCarloConfig cfg;
    cfg.M = 200;
    cfg.seed = 3;
    auto table = validity_diagnostic(*model, like, {theta}, {0.25, 1.0}, 500, cfg);
    REQUIRE(table.cells.size() == 2);
    CHECK(table.cells[1].frequency == 1.0);  // alpha = 1
    CHECK(table.all_pass);

    // alpha = 0: the M-replicate contour has an atom of size about 1/(M+1)
    // at zero, so the frequency is near zero but not exactly zero.
    auto zero = validity_diagnostic(*model, like, {theta}, {0.0}, 500, cfg);
    CHECK(zero.cells[0].frequency <= 0.03);

    CHECK_THROWS_AS(validity_diagnostic(*model, like, {theta}, {0.5}, 100, cfg), Error);
}

TEST_CASE("pivotal convergence rate of contour_mc in M") {
    auto model = make_normal_fixed_sigma_model(1.0);
    Dataset z = Dataset::from_column({0.3});
    Vec theta = Vec::Constant(1, 1.1);
    double truth = pivotal_contour(0.3, 1.1, 1.0, 1);
    for (std::size_t M : {1000ULL, 10000ULL, 100000ULL}) {
        MonteCarloConfig cfg;
        cfg.M = M;
        cfg.seed = 101;
        double err = std::abs(contour_mc(*model, z, theta, cfg) - truth);
        CHECK(err <= 3.0 / std::sqrt(static_cast<double>(M)));
    }
}
