#include "possim/diagnostics.hpp"

#include "possim/parallel.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace possim {

std::vector<Vec> bayes_regression_posterior(const Dataset& z, std::size_t draws,
                                            std::uint64_t seed) {
    require(z.width() >= 2, ErrorCode::invalid_argument,
            "bayes_regression_posterior: need (x, y) columns");
    const int n = z.n();
    require(n > 3, ErrorCode::invalid_argument, "bayes_regression_posterior: n > 3");

    Mat x(n, 2);
    Vec y(n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = z.rows[static_cast<std::size_t>(i)][0];
        y[i] = z.rows[static_cast<std::size_t>(i)][1];
    }
    Mat xtx = x.transpose() * x;
    Eigen::LLT<Mat> llt(xtx);
    require(llt.info() == Eigen::Success, ErrorCode::singular_matrix,
            "bayes_regression_posterior: singular design");
    Vec beta_hat = llt.solve(x.transpose() * y);
    double rss = (y - x * beta_hat).squaredNorm();
    double s2 = rss / (n - 2);
    Mat xtx_inv = llt.solve(Mat::Identity(2, 2));
    Mat chol = Mat(xtx_inv.llt().matrixL());

    std::vector<Vec> out(draws);
    parallel_for(draws, [&](std::size_t m) {
        Rng rng = Rng::substream(seed, m);
        double sigma2 = (n - 2) * s2 / rng.chisq(n - 2);
        Vec eps(2);
        eps[0] = rng.normal();
        eps[1] = rng.normal();
        Vec beta = beta_hat + std::sqrt(sigma2) * (chol * eps);
        Vec draw(3);
        draw[0] = beta[0];
        draw[1] = beta[1];
        draw[2] = sigma2;
        out[m] = draw;
    });
    return out;
}

PosteriorProcedure make_bayes_regression_procedure() {
    PosteriorProcedure p;
    p.label = "bayes-regression-flat-prior";
    p.sample_posterior = [](const Dataset& z, std::uint64_t seed, std::size_t draws) {
        return bayes_regression_posterior(z, draws, seed);
    };
    return p;
}

FcrCurve fcr_estimate(const Model& model, const Dataset& like,
                      const PosteriorProcedure& procedure, const HypothesisSet& H,
                      const Vec& theta_true, const std::vector<double>& alpha_grid,
                      const FcrConfig& cfg) {
    require(cfg.reps >= 200, ErrorCode::invalid_argument, "fcr_estimate: reps >= 200");
    require(H.contains && !H.contains(theta_true), ErrorCode::invalid_argument,
            "fcr_estimate: theta_true must lie outside H");

    std::vector<double> masses(cfg.reps);
    parallel_for(cfg.reps, [&](std::size_t r) {
        Rng rng = Rng::substream(cfg.seed, r);
        Dataset data = model.simulate(theta_true, like, rng);
        std::vector<Vec> draws =
            procedure.sample_posterior(data, cfg.seed ^ (0xFC1ULL + r * 2654435761ULL),
                                       cfg.posterior_draws);
        std::size_t in_h = 0;
        for (const Vec& d : draws)
            if (H.contains(d)) ++in_h;
        masses[r] = static_cast<double>(in_h) / static_cast<double>(draws.size());
    });

    FcrCurve curve;
    for (double alpha : alpha_grid) {
        std::size_t hits = 0;
        for (double m : masses)
            if (m > 1.0 - alpha) ++hits;
        curve.alphas.push_back(alpha);
        curve.rates.push_back(static_cast<double>(hits) / static_cast<double>(cfg.reps));
    }
    return curve;
}

FcrCurve im_fcr_estimate(const Model& model, const Dataset& like, const HypothesisSet& H,
                         const HypothesisSet& complement_search, const Vec& theta_true,
                         const std::vector<double>& alpha_grid, const ImFcrConfig& cfg) {
    require(cfg.reps >= 200, ErrorCode::invalid_argument, "im_fcr_estimate: reps >= 200");
    require(H.contains && !H.contains(theta_true), ErrorCode::invalid_argument,
            "im_fcr_estimate: theta_true must lie outside H");

    // Lower probability of H is 1 - sup over H^c of the contour. The contour
    // is a monotone transform of the relative likelihood, so the sup sits at
    // the constrained likelihood maximizer over H^c; one Monte Carlo contour
    // evaluation there suffices (any shortfall only inflates the estimate,
    // which is the conservative direction for an upper-bound check).
    std::vector<double> pi_sup(cfg.reps);
    parallel_for(cfg.reps, [&](std::size_t r) {
        Rng rng = Rng::substream(cfg.seed ^ 0x1Af0ULL, r);
        Dataset data = model.simulate(theta_true, like, rng);
        MleReport rep;
        Vec hat = model.mle(data, &rep);
        if (!rep.converged && !rep.boundary) {
            pi_sup[r] = 1.0;  // be conservative about failed fits
            return;
        }
        if (!H.contains(hat)) {
            pi_sup[r] = 1.0;  // MLE in H^c: plausibility of H^c is 1
            return;
        }
        double r_best = -1.0;
        Vec arg;
        if (!complement_search.grid.empty()) {
            for (const Vec& p : complement_search.grid) {
                if (H.contains(p) || !model.in_domain(p)) continue;
                double v = relative_likelihood(model, data, p, &hat);
                if (v > r_best) {
                    r_best = v;
                    arg = p;
                }
            }
        } else {
            require(complement_search.search_box.has_value(), ErrorCode::invalid_argument,
                    "im_fcr_estimate: complement search needs a grid or box");
            auto objective = [&](const Vec& theta) {
                if (H.contains(theta) || !model.in_domain(theta))
                    return -std::numeric_limits<double>::infinity();
                return relative_likelihood(model, data, theta, &hat);
            };
            // The likelihood peaks near the MLE, which sits in H; walk random
            // rays from it until they cross into H^c to seed the search there.
            Vec scale(hat.size());
            for (int i = 0; i < hat.size(); ++i) scale[i] = 0.1 * (std::abs(hat[i]) + 1.0);
            std::vector<Vec> starts;
            Rng dir_rng = Rng::substream(cfg.seed ^ 0xD1BULL, r);
            for (int k = 0; k < 16; ++k) {
                Vec dir(hat.size());
                for (int i = 0; i < hat.size(); ++i) dir[i] = scale[i] * dir_rng.normal();
                for (double t = 0.25; t <= 4096.0; t *= 2.0) {
                    Vec p = hat + t * dir;
                    if (!complement_search.search_box->contains(p)) break;
                    if (!H.contains(p) && model.in_domain(p)) {
                        starts.push_back(p);
                        break;
                    }
                }
            }
            MaximizeResult res = maximize(objective, *complement_search.search_box,
                                          cfg.search_opts, starts);
            if (res.found) {
                r_best = res.value;
                arg = res.argmax;
            }
        }
        if (r_best < 0.0) {
            pi_sup[r] = 0.0;  // no in-domain point of H^c found: empty complement
            return;
        }
        MonteCarloConfig inner = cfg.mc;
        inner.seed = cfg.mc.seed + 0x9e3779b9ULL * (r + 1);
        inner.parallel = false;
        pi_sup[r] = contour_mc(model, data, arg, inner);
    });

    FcrCurve curve;
    for (double alpha : alpha_grid) {
        std::size_t hits = 0;
        for (double p : pi_sup)
            if (p < alpha) ++hits;  // lower probability of H exceeds 1 - alpha
        curve.alphas.push_back(alpha);
        curve.rates.push_back(static_cast<double>(hits) / static_cast<double>(cfg.reps));
    }
    return curve;
}

} // namespace possim
