#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "possim/io.hpp"
#include "possim/marginal.hpp"
#include "possim/model.hpp"

#include <cmath>

using namespace possim;

namespace {

Dataset darwin() { return read_csv(std::string(POSSIM_DATA_DIR) + "/darwin.csv"); }
Dataset orings() { return read_csv(std::string(POSSIM_DATA_DIR) + "/orings.csv"); }
Dataset counts() { return read_csv(std::string(POSSIM_DATA_DIR) + "/multinomial_counts.csv"); }

} // namespace

TEST_CASE("relative likelihood: multinomial corner case with a zero count") {
    auto model = make_multinomial_model(2);
    Dataset z;
    z.columns = {"count"};
    z.rows = {{2.0, 0.0}};
    Vec theta(2);
    theta << 0.5, 0.5;
    // (2 * 0.5 / 2)^2 * 1 with the 0^0 := 1 convention
    CHECK(relative_likelihood(*model, z, theta) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("relative likelihood is 1 at the MLE and near 1 at the rounded Darwin MLE") {
    auto model = make_normal_model();
    Dataset z = darwin();
    Vec hat = model->mle(z);
    CHECK(relative_likelihood(*model, z, hat) == 1.0);

    Vec rounded(2);
    rounded << 20.93, 36.46;
    CHECK(relative_likelihood(*model, z, rounded) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("relative likelihood rejects out-of-domain points") {
    auto model = make_normal_model();
    Vec bad(2);
    bad << 0.0, -1.0;
    CHECK_THROWS_AS(relative_likelihood(*model, darwin(), bad), Error);
}

TEST_CASE("builtin registry and factory") {
    auto names = builtin_model_names();
    CHECK(names.size() == 5);
    for (const auto& n : names) {
        std::map<std::string, double> hyper;
        if (n == "multinomial") hyper["k"] = 3;
        auto m = make_model(n, hyper);
        CHECK(m->name() == n);
        CHECK(m->dim() >= 1);
    }
    CHECK_THROWS_AS(make_model("no-such-model"), Error);
}

TEST_CASE("normal MLE on the Darwin fixture") {
    auto model = make_normal_model();
    Vec hat = model->mle(darwin());
    CHECK(std::abs(hat[0] - 20.93) < 0.01);
    CHECK(std::abs(hat[1] - 36.46) < 0.01);
}

TEST_CASE("o-rings logistic fit: 50% failure temperature") {
    auto model = make_binomial_logistic_model(6);
    MleReport rep;
    Vec hat = model->mle(orings(), &rep);
    CHECK(rep.converged);
    CHECK(std::abs(-hat[0] / hat[1] - 53.94) < 0.05);
}

TEST_CASE("multinomial MLE is exact and block sums match") {
    Dataset z = counts();
    auto model = make_multinomial_model(9);
    Vec hat = model->mle(z);
    double expected[] = {10, 8, 6, 34, 38, 26, 8, 15, 15};
    for (int i = 0; i < 9; ++i) CHECK(hat[i] == expected[i] / 160.0);

    auto f = FeatureMap::block_sums({3, 3, 3});
    Vec phi = f.g(hat);
    CHECK(phi[0] == doctest::Approx(0.1500).epsilon(1e-12));
    CHECK(phi[1] == doctest::Approx(0.6125).epsilon(1e-12));
    CHECK(phi[2] == doctest::Approx(0.2375).epsilon(1e-12));
}

TEST_CASE("degenerate samples hit the boundary error") {
    auto normal = make_normal_model();
    Dataset flat = Dataset::from_column({5.0, 5.0, 5.0, 5.0});
    CHECK_THROWS_AS(normal->mle(flat), Error);

    auto gamma = make_gamma_model();
    Dataset flat_pos = Dataset::from_column({2.0, 2.0, 2.0});
    CHECK_THROWS_AS(gamma->mle(flat_pos), Error);
}

TEST_CASE("gamma MLE consistency at (2, 3)") {
    auto model = make_gamma_model();
    Vec truth(2);
    truth << 2.0, 3.0;
    Dataset like = Dataset::from_column(std::vector<double>(10000, 1.0));
    Dataset z = model->simulate(truth, like, 99ULL);
    Vec hat = model->mle(z);
    CHECK(std::abs(hat[0] - 2.0) / 2.0 < 0.05);
    CHECK(std::abs(hat[1] - 3.0) / 3.0 < 0.05);
}

TEST_CASE("normal pivot closed form matches the generic relative likelihood") {
    auto model = make_normal_model();
    Dataset z = darwin();
    Vec hat = model->mle(z);
    double n = z.n();
    double s2 = hat[1] * hat[1];
    for (double mu : {0.0, 10.0, 30.0}) {
        for (double sigma : {20.0, 36.0, 60.0}) {
            Vec theta(2);
            theta << mu, sigma;
            double d2 = (hat[0] - mu) * (hat[0] - mu);
            double closed = std::pow(hat[1] / sigma, n) *
                            std::exp(0.5 * n - n * (s2 + d2) / (2.0 * sigma * sigma));
            CHECK(relative_likelihood(*model, z, theta) ==
                  doctest::Approx(closed).epsilon(1e-10));
        }
    }
}

TEST_CASE("MLE log-likelihood beats 64 random domain points") {
    auto model = make_normal_model();
    Dataset z = darwin();
    Vec hat = model->mle(z);
    double best = model->log_density(z, hat);
    Rng rng(2024);
    for (int i = 0; i < 64; ++i) {
        Vec t(2);
        t << rng.uniform(-100.0, 100.0), rng.uniform(0.5, 120.0);
        CHECK(model->log_density(z, t) <= best + 1e-9);
    }
}

TEST_CASE("simulate/MLE roundtrip within 3 standard errors for each builtin") {
    struct Case {
        std::unique_ptr<Model> model;
        Vec theta;
        Dataset like;
    };
    std::vector<Case> cases;

    {
        Vec t(2);
        t << 1.0, 2.0;
        cases.push_back({make_normal_model(), t,
                         Dataset::from_column(std::vector<double>(100000, 0.0))});
    }
    {
        Vec t(2);
        t << 2.0, 3.0;
        cases.push_back({make_gamma_model(), t,
                         Dataset::from_column(std::vector<double>(100000, 1.0))});
    }
    {
        Vec t(2);
        t << 1.0, -0.5;
        std::vector<std::pair<double, double>> xy;
        for (int i = 0; i < 100000; ++i) xy.push_back({-2.0 + 4.0 * (i % 101) / 100.0, 0.0});
        cases.push_back({make_binomial_logistic_model(6), t, Dataset::from_pairs(xy)});
    }
    {
        Vec t(3);
        t << 0.3, 0.1, 1.0;
        std::vector<std::pair<double, double>> xy;
        for (int i = 0; i < 100000; ++i) xy.push_back({-2.0 + 4.0 * (i % 101) / 100.0, 0.0});
        cases.push_back({make_linear_regression_model(), t, Dataset::from_pairs(xy)});
    }
    {
        Vec t(3);
        t << 0.2, 0.5, 0.3;
        Dataset like;
        like.columns = {"count"};
        like.rows = {{40000.0, 30000.0, 30000.0}};
        cases.push_back({make_multinomial_model(3), t, like});
    }

    for (auto& c : cases) {
        CAPTURE(c.model->name());
        Dataset z = c.model->simulate(c.theta, c.like, 31415ULL);
        Vec hat = c.model->mle(z);
        Mat info = c.model->obs_information(z, hat);
        Mat cov = info.llt().solve(Mat::Identity(info.rows(), info.cols()));
        for (int i = 0; i < hat.size(); ++i) {
            double se = std::sqrt(std::max(cov(i, i), 0.0));
            if (c.model->name() == "multinomial" && se == 0.0)
                se = std::sqrt(c.theta[i] * (1.0 - c.theta[i]) / 100000.0);
            CHECK(std::abs(hat[i] - c.theta[i]) <= 3.0 * se + 1e-9);
        }
    }
}

TEST_CASE("multinomial MLE permutation invariance") {
    auto model = make_multinomial_model(4);
    Dataset z;
    z.columns = {"count"};
    z.rows = {{7.0, 1.0, 9.0, 3.0}};
    Vec hat = model->mle(z);
    Dataset zp;
    zp.columns = {"count"};
    zp.rows = {{3.0, 9.0, 1.0, 7.0}};
    Vec hatp = model->mle(zp);
    for (int i = 0; i < 4; ++i) CHECK(hat[i] == hatp[3 - i]);
}

TEST_CASE("simulate is deterministic per seed and log-density finite at the truth") {
    for (const auto& name : builtin_model_names()) {
        std::map<std::string, double> hyper;
        if (name == "multinomial") hyper["k"] = 3;
        auto model = make_model(name, hyper);
        CAPTURE(name);

        Dataset like;
        Vec theta(model->dim());
        if (name == "normal") {
            like = Dataset::from_column({0, 0, 0, 0, 0, 0, 0, 0});
            theta << 0.0, 1.0;
        } else if (name == "gamma") {
            like = Dataset::from_column({1, 1, 1, 1, 1, 1, 1, 1});
            theta << 2.0, 3.0;
        } else if (name == "binomial-logistic") {
            like = Dataset::from_pairs({{50, 0}, {60, 0}, {70, 0}, {80, 0}});
            theta << 5.0, -0.1;
        } else if (name == "multinomial") {
            like.columns = {"count"};
            like.rows = {{40.0, 30.0, 30.0}};
            theta << 0.2, 0.5, 0.3;
        } else {
            like = Dataset::from_pairs({{-1, 0}, {0, 0}, {1, 0}, {2, 0}});
            theta << 0.3, 0.1, 1.0;
        }
        Dataset a = model->simulate(theta, like, 5ULL);
        Dataset b = model->simulate(theta, like, 5ULL);
        REQUIRE(a.n() == b.n());
        for (int i = 0; i < a.n(); ++i) CHECK(a.rows[i] == b.rows[i]);
        CHECK(std::isfinite(model->log_density(a, theta)));
    }
}
