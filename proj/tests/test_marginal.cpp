#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "possim/im.hpp"
#include "possim/io.hpp"
#include "possim/marginal.hpp"
#include "possim/special.hpp"

#include <cmath>

using namespace possim;

namespace {

Dataset darwin() { return read_csv(std::string(POSSIM_DATA_DIR) + "/darwin.csv"); }
Dataset counts() { return read_csv(std::string(POSSIM_DATA_DIR) + "/multinomial_counts.csv"); }

Box box2d(double l0, double u0, double l1, double u1) {
    Box b;
    b.lower = Vec(2);
    b.upper = Vec(2);
    b.lower << l0, l1;
    b.upper << u0, u1;
    return b;
}

PossibilityContour product_gaussian() {
    PossibilityContour c;
    c.dimension = 2;
    c.normalizer_hint = Vec::Zero(2);
    c.evaluate = [](const Vec& t) { return std::exp(-0.5 * t.squaredNorm()); };
    return c;
}

Vec phi1(double x) { return Vec::Constant(1, x); }

} // namespace

TEST_CASE("extension over a product Gaussian: closed-form supremum") {
    auto joint = product_gaussian();
    auto f = FeatureMap::coordinate(0, box2d(-6, 6, -6, 6));
    // sup over t1 of exp(-(1 + t1^2)/2) = exp(-1/2)
    CHECK(std::abs(extension_contour(joint, f, phi1(1.0)) - std::exp(-0.5)) < 1e-4);
    CHECK(std::abs(extension_contour(joint, f, phi1(0.0)) - 1.0) < 1e-6);
    // second coordinate behaves identically by symmetry
    auto f1 = FeatureMap::coordinate(1, box2d(-6, 6, -6, 6));
    CHECK(std::abs(extension_contour(joint, f1, phi1(2.0)) - std::exp(-2.0)) < 1e-4);
}

TEST_CASE("extension with an empty nuisance equals the joint contour") {
    PossibilityContour c;
    c.dimension = 1;
    c.normalizer_hint = Vec::Zero(1);
    c.evaluate = [](const Vec& t) { return std::exp(-std::abs(t[0])); };
    Box b;
    b.lower = Vec::Constant(1, -5.0);
    b.upper = Vec::Constant(1, 5.0);
    auto f = FeatureMap::coordinate(0, b);
    CHECK(f.nuisance_dim == 0);
    for (double x : {-2.0, -0.3, 0.0, 1.7})
        CHECK(extension_contour(c, f, phi1(x)) == c(phi1(x)));
}

TEST_CASE("extension errors on a feature dimension mismatch") {
    auto joint = product_gaussian();
    auto f = FeatureMap::coordinate(0, box2d(-6, 6, -6, 6));
    CHECK_THROWS_AS(extension_contour(joint, f, Vec::Zero(2)), Error);
}

TEST_CASE("linear feature map: lift lands on the level plane") {
    Vec coef(2);
    coef << 1.0, 2.0;
    auto f = FeatureMap::linear(coef, box2d(-10, 10, -10, 10));
    Vec lam = Vec::Constant(1, 3.0);
    Vec theta = f.lift(phi1(4.0), lam);
    CHECK(f.g(theta)[0] == doctest::Approx(4.0).epsilon(1e-12));
    CHECK_THROWS_AS(FeatureMap::linear(Vec::Zero(2), box2d(-1, 1, -1, 1)), Error);
}

TEST_CASE("profile relative likelihood is 1 at the observed feature value") {
    auto model = make_normal_model();
    Dataset z = darwin();
    Vec hat = model->mle(z);
    auto f = FeatureMap::coordinate(0, model->domain());
    CHECK(profile_relative_likelihood(*model, z, f, phi1(hat[0])) ==
          doctest::Approx(1.0).epsilon(1e-10));
    auto f1 = FeatureMap::coordinate(1, model->domain());
    CHECK(profile_relative_likelihood(*model, z, f1, phi1(hat[1])) ==
          doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("normal closed-form profiles match the generic fiber optimizer") {
    auto model = make_normal_model();
    Dataset z = darwin();
    Vec hat = model->mle(z);
    double n = z.n(), s2 = hat[1] * hat[1];

    auto f0 = FeatureMap::coordinate(0, model->domain());
    MaximizeOptions strong;
    strong.restarts = 24;
    for (double mu : {0.0, 10.0, 30.0, 45.0}) {
        double closed = profile_relative_likelihood(*model, z, f0, phi1(mu));
        double d2 = (hat[0] - mu) * (hat[0] - mu);
        CHECK(closed == doctest::Approx(std::pow(s2 / (s2 + d2), n / 2.0)).epsilon(1e-12));
        Vec lam;
        double generic = profile_relative_likelihood(*model, z, f0, phi1(mu), strong, &lam);
        CHECK(std::abs(generic - closed) < 1e-8);
        // the profiling sigma is sqrt(s2 + (zbar - mu)^2)
        CHECK(std::abs(lam[0] - std::sqrt(s2 + d2)) < 1e-3);
    }

    auto f1 = FeatureMap::coordinate(1, model->domain());
    for (double sigma : {25.0, 36.4645, 60.0}) {
        double closed = profile_relative_likelihood(*model, z, f1, phi1(sigma));
        double ratio = s2 / (sigma * sigma);
        double expect = std::pow(ratio, n / 2.0) * std::exp(-0.5 * n * (ratio - 1.0));
        CHECK(closed == doctest::Approx(expect).epsilon(1e-12));
        Vec lam;
        double generic = profile_relative_likelihood(*model, z, f1, phi1(sigma), strong, &lam);
        CHECK(std::abs(generic - closed) < 1e-8);
        CHECK(std::abs(lam[0] - hat[0]) < 1e-3);  // the profiling mean is zbar
    }
}

TEST_CASE("profile dominates the restriction of R to the fiber") {
    auto model = make_normal_model();
    Dataset z = darwin();
    auto f = FeatureMap::coordinate(0, model->domain());
    double pr = profile_relative_likelihood(*model, z, f, phi1(10.0));
    Rng rng(77);
    for (int i = 0; i < 20; ++i) {
        Vec lam = Vec::Constant(1, rng.uniform(5.0, 120.0));
        Vec theta = f.lift(phi1(10.0), lam);
        CHECK(relative_likelihood(*model, z, theta) <= pr + 1e-9);
    }
}

TEST_CASE("multinomial block-sums profile is 1 at the feature MLE") {
    auto model = make_multinomial_model(9);
    Dataset z = counts();
    auto f = FeatureMap::block_sums({3, 3, 3});
    Vec phi = f.g(model->mle(z));
    MaximizeOptions opts;
    opts.restarts = 8;
    CHECK(profile_relative_likelihood(*model, z, f, phi, opts) >= 1.0 - 1e-8);
}

TEST_CASE("extension is more conservative than the profile (Wilks joint)") {
    auto model = make_normal_model();
    Dataset z = darwin();
    auto joint = make_wilks_contour(*model, z);
    auto f = FeatureMap::coordinate(0, model->domain());
    for (double mu : {0.0, 5.0, 10.0, 15.0, 30.0, 40.0}) {
        double ext = extension_contour(joint, f, phi1(mu));
        double pr = profile_relative_likelihood(*model, z, f, phi1(mu));
        double dev = -2.0 * std::log(std::max(pr, 1e-300));
        // the fiber supremum of the joint is the 2-dof tail at the profiled
        // deviance, which dominates the 1-dof tail: wider marginal intervals
        CHECK(ext == doctest::Approx(chisq_tail(2, dev)).epsilon(1e-5));
        CHECK(ext >= chisq_tail(1, dev) - 1e-6);
    }
    double ext0 = extension_contour(joint, f, phi1(0.0));
    double pr0 = profile_relative_likelihood(*model, z, f, phi1(0.0));
    CHECK(ext0 > chisq_tail(1, -2.0 * std::log(pr0)) + 1e-4);
}

TEST_CASE("profile contour is exactly 1 at the observed feature value") {
    auto model = make_normal_model();
    Dataset z = darwin();
    Vec hat = model->mle(z);
    auto f = FeatureMap::coordinate(0, model->domain());
    ProfileContourConfig cfg;
    cfg.mc.M = 300;
    cfg.mc.seed = 11;
    CHECK(profile_contour(*model, z, f, phi1(hat[0]), cfg) == 1.0);
}

TEST_CASE("Darwin profile contour at zero matches the t-test p-value") {
    auto model = make_normal_model();
    Dataset z = darwin();
    auto f = FeatureMap::coordinate(0, model->domain());
    ProfileContourConfig cfg;
    cfg.mc.M = 10000;
    cfg.mc.seed = 5;
    double pi0 = profile_contour(*model, z, f, phi1(0.0), cfg);

    double sum = 0.0, sum2 = 0.0;
    for (const auto& row : z.rows) {
        sum += row[0];
        sum2 += row[0] * row[0];
    }
    double n = z.n();
    double zbar = sum / n;
    double sd = std::sqrt((sum2 - n * zbar * zbar) / (n - 1.0));
    double t = zbar / (sd / std::sqrt(n));
    double pval = student_t_two_sided_pvalue(t, n - 1.0);
    CHECK(std::abs(pval - 0.0497029) < 1e-4);

    double se = std::sqrt(pval * (1.0 - pval) / static_cast<double>(cfg.mc.M));
    CHECK(std::abs(pi0 - pval) <= 3.0 * se);
}

TEST_CASE("fixed-sigma profile contour matches the pivot oracle") {
    auto model = make_normal_fixed_sigma_model(1.0);
    Vec truth = Vec::Constant(1, 0.4);
    Dataset like = Dataset::from_column(std::vector<double>(25, 0.0));
    Dataset z = model->simulate(truth, like, 2718ULL);
    double zbar = 0.0;
    for (const auto& row : z.rows) zbar += row[0];
    zbar /= z.n();

    auto f = FeatureMap::coordinate(0, model->domain());
    ProfileContourConfig cfg;
    cfg.mc.M = 20000;
    cfg.mc.seed = 21;
    for (double phi : {zbar + 0.3, zbar - 0.55}) {
        double oracle = 2.0 * (1.0 - norm_cdf(std::sqrt(25.0) * std::abs(zbar - phi)));
        double got = profile_contour(*model, z, f, phi1(phi), cfg);
        double se = std::sqrt(std::max(oracle * (1.0 - oracle), 0.01) / 20000.0);
        CHECK(std::abs(got - oracle) <= 3.0 * se);
    }
}

TEST_CASE("generic profile is invariant to a monotone nuisance reparametrization") {
    auto model = make_normal_model();
    Dataset z = darwin();
    auto f = FeatureMap::coordinate(0, model->domain());

    FeatureMap g = f;  // same feature, nuisance searched on the log scale
    g.id = "coord:0-log-nuisance";
    g.lift = [f](const Vec& phi, const Vec& lambda) {
        return f.lift(phi, Vec::Constant(1, std::exp(lambda[0])));
    };
    g.nuisance_box.lower = Vec::Constant(1, std::log(1e-3));
    g.nuisance_box.upper = Vec::Constant(1, std::log(1e3));
    g.nuisance_of = [f](const Vec& theta) {
        Vec lam = f.nuisance_of(theta);
        lam[0] = std::log(std::max(lam[0], 1e-3));
        return lam;
    };

    MaximizeOptions strong;
    strong.restarts = 24;
    for (double mu : {0.0, 15.0, 35.0}) {
        double a = profile_relative_likelihood(*model, z, f, phi1(mu));
        Vec lam;
        double b = profile_relative_likelihood(*model, z, g, phi1(mu), strong, &lam);
        CHECK(std::abs(a - b) < 1e-6);
    }
}

TEST_CASE("plugin variants: normalization and pivotal agreement") {
    auto model = make_normal_fixed_sigma_model(1.0);
    Dataset like = Dataset::from_column(std::vector<double>(25, 0.0));
    Dataset z = model->simulate(Vec::Zero(1), like, 99ULL);
    double zbar = 0.0;
    for (const auto& row : z.rows) zbar += row[0];
    zbar /= z.n();

    auto f = FeatureMap::coordinate(0, model->domain());
    ProfileContourConfig cfg;
    cfg.mc.M = 5000;
    cfg.mc.seed = 31;

    // at the observed feature value every variant normalizes to 1
    CHECK(plugin_profile_contour(*model, z, f, phi1(zbar), cfg, PluginVariant::full_mle) == 1.0);
    CHECK(plugin_profile_contour(*model, z, f, phi1(zbar), cfg,
                                 PluginVariant::nuisance_mle) == 1.0);

    // pivotality: both plug-ins and the exact profile contour agree
    double phi = zbar + 0.3;
    double oracle = 2.0 * (1.0 - norm_cdf(std::sqrt(25.0) * 0.3));
    double tol = 3.0 / std::sqrt(5000.0);
    CHECK(std::abs(plugin_profile_contour(*model, z, f, phi1(phi), cfg,
                                          PluginVariant::full_mle) - oracle) <= tol);
    CHECK(std::abs(plugin_profile_contour(*model, z, f, phi1(phi), cfg,
                                          PluginVariant::nuisance_mle) - oracle) <= tol);
    CHECK(std::abs(profile_contour(*model, z, f, phi1(phi), cfg) - oracle) <= tol);
}

TEST_CASE("gamma product feature: plugin contour peaks at the observed product") {
    auto model = make_gamma_model();
    Vec truth(2);
    truth << 2.0, 3.0;
    Dataset like = Dataset::from_column(std::vector<double>(120, 1.0));
    Dataset z = model->simulate(truth, like, 4242ULL);
    Vec hat = model->mle(z);

    auto f = FeatureMap::product2(model->domain());
    ProfileContourConfig cfg;
    cfg.mc.M = 400;
    cfg.mc.seed = 13;

    double phi_hat = hat[0] * hat[1];
    CHECK(plugin_profile_contour(*model, z, f, phi1(phi_hat), cfg,
                                 PluginVariant::nuisance_mle) == 1.0);
    CHECK(plugin_profile_contour(*model, z, f, phi1(phi_hat), cfg,
                                 PluginVariant::full_mle) == 1.0);
    // far from the observed product the plausibility collapses
    double far = plugin_profile_contour(*model, z, f, phi1(2.0 * phi_hat), cfg,
                                        PluginVariant::nuisance_mle);
    CHECK(far < 0.2);
}

TEST_CASE("marginal strong validity for the pivotal location feature") {
    auto model = make_normal_fixed_sigma_model(1.0);
    Dataset like = Dataset::from_column(std::vector<double>(15, 0.0));
    auto f = FeatureMap::coordinate(0, model->domain());
    Vec truth = Vec::Zero(1);

    ProfileContourConfig cfg;
    cfg.mc.M = 500;
    const std::size_t reps = 2000;
    std::vector<double> alphas{0.05, 0.25};
    std::vector<std::size_t> hits(alphas.size(), 0);
    for (std::size_t r = 0; r < reps; ++r) {
        Dataset zr = model->simulate(truth, like, 100000ULL + r);
        cfg.mc.seed = 900000ULL + r;
        double pi = profile_contour(*model, zr, f, phi1(0.0), cfg);
        for (std::size_t a = 0; a < alphas.size(); ++a)
            if (pi <= alphas[a]) ++hits[a];
    }
    for (std::size_t a = 0; a < alphas.size(); ++a) {
        double freq = static_cast<double>(hits[a]) / reps;
        double bound = alphas[a] +
                       3.0 * std::sqrt(alphas[a] * (1.0 - alphas[a]) / static_cast<double>(reps));
        CHECK(freq <= bound);
    }
}
