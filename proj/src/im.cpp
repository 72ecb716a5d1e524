#include "possim/im.hpp"

#include "possim/parallel.hpp"
#include "possim/special.hpp"

#include <atomic>
#include <cmath>

namespace possim {

double contour_mc(const Model& model, const Dataset& z, const Vec& theta,
                  const MonteCarloConfig& cfg, McContourStats* stats) {
    cfg.validate();
    MleReport rep;
    Vec hat = model.mle(z, &rep);
    require(rep.converged || rep.boundary, ErrorCode::nonconvergence,
            "contour_mc: MLE failed on observed data");
    double r_obs = relative_likelihood(model, z, theta, &hat);
    if (r_obs == 0.0) return 0.0;  // impossible parameter, no simulation needed

    std::atomic<std::size_t> count{0}, redraws{0}, ties{0};
    const std::size_t max_redraws = std::max<std::size_t>(1, cfg.M / 100);

    auto body = [&](std::size_t m) {
        // Up to 8 attempts per index, each on its own substream, so redraws
        // stay deterministic under any thread count.
        for (int attempt = 0; attempt < 8; ++attempt) {
            Rng rng = Rng::substream(cfg.seed, (m << 3) | static_cast<std::size_t>(attempt));
            try {
                Dataset rep_data = model.simulate(theta, z, rng);
                MleReport mrep;
                Vec rep_hat = model.mle(rep_data, &mrep);
                if (!mrep.converged && !mrep.boundary) throw Error(ErrorCode::nonconvergence, "");
                double r = relative_likelihood(model, rep_data, theta, &rep_hat);
                if (r <= r_obs) {
                    count.fetch_add(1, std::memory_order_relaxed);
                    if (r == r_obs) ties.fetch_add(1, std::memory_order_relaxed);
                }
                return;
            } catch (const Error&) {
                redraws.fetch_add(1, std::memory_order_relaxed);
            }
        }
        fail(ErrorCode::numeric_failure, "contour_mc: repeated MLE failures on replicates");
    };

    if (cfg.parallel) {
        parallel_for(cfg.M, body);
    } else {
        for (std::size_t m = 0; m < cfg.M; ++m) body(m);
    }

    require(redraws.load() <= max_redraws, ErrorCode::numeric_failure,
            "contour_mc: more than 1% of replicates required re-drawing");
    if (stats) {
        stats->redraws = redraws.load();
        stats->ties = ties.load();
    }
    return static_cast<double>(count.load()) / static_cast<double>(cfg.M);
}

double contour_wilks(const Model& model, const Dataset& z, const Vec& theta) {
    double r = relative_likelihood(model, z, theta);
    if (r == 0.0) return 0.0;
    return chisq_tail(model.dim(), -2.0 * std::log(r));
}

PossibilityContour make_mc_contour(const Model& model, const Dataset& z,
                                   MonteCarloConfig cfg) {
    cfg.validate();
    PossibilityContour c;
    c.dimension = model.dim();
    c.normalizer_hint = model.mle(z);
    c.evaluate = [&model, z, cfg](const Vec& theta) {
        if (!model.in_domain(theta)) return 0.0;
        return contour_mc(model, z, theta, cfg);
    };
    return c;
}

PossibilityContour make_wilks_contour(const Model& model, const Dataset& z) {
    PossibilityContour c;
    c.dimension = model.dim();
    c.normalizer_hint = model.mle(z);
    c.evaluate = [&model, z](const Vec& theta) {
        if (!model.in_domain(theta)) return 0.0;
        return contour_wilks(model, z, theta);
    };
    return c;
}

ConfidenceRegion confidence_region(const PossibilityContour& contour, double alpha,
                                   const std::vector<Vec>& grid) {
    require(!grid.empty(), ErrorCode::invalid_argument, "confidence_region: empty grid");
    require(alpha >= 0.0 && alpha <= 1.0, ErrorCode::invalid_argument,
            "confidence_region: alpha outside [0,1]");
    if (contour.normalizer_hint) {
        // The grid's bounding box must cover the contour's peak.
        const Vec& hat = *contour.normalizer_hint;
        Vec lo = grid.front(), hi = grid.front();
        for (const Vec& p : grid) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        for (int i = 0; i < hat.size(); ++i)
            require(hat[i] >= lo[i] - 1e-12 && hat[i] <= hi[i] + 1e-12,
                    ErrorCode::invalid_argument,
                    "confidence_region: grid excludes the MLE; extend the grid");
    }
    ConfidenceRegion region;
    region.alpha = alpha;
    region.member = [eval = contour.evaluate, alpha](const Vec& t) {
        return eval(t) >= alpha;
    };
    for (const Vec& p : grid)
        if (contour.evaluate(p) >= alpha) region.grid_members.push_back(p);
    return region;
}

TestDecision test_hypothesis(const PossibilityContour& contour, const HypothesisSet& H,
                             double alpha) {
    double pl = possibility_of(contour, H);
    return {pl <= alpha, pl};
}

PossibilityContour im_from_test_family(const std::function<bool(double)>& in_rejection,
                                       const HypothesisSet& H0, double bisect_tol) {
    // Nestedness probe: once the observed data enters a rejection region it
    // must stay in for all larger alpha.
    bool seen_in = false;
    for (int i = 0; i <= 40; ++i) {
        bool in = in_rejection(i / 40.0);
        if (seen_in && !in)
            fail(ErrorCode::not_nested, "im_from_test_family: rejection family not nested");
        seen_in = seen_in || in;
    }
    double value_on_h0 =
        bisect_sup([&](double beta) { return !in_rejection(beta); }, 0.0, 1.0, bisect_tol);
    if (!in_rejection(1.0)) value_on_h0 = 1.0;

    PossibilityContour c;
    c.dimension = H0.dimension;
    c.evaluate = [pred = H0.contains, value_on_h0](const Vec& theta) {
        return (pred && pred(theta)) ? value_on_h0 : 1.0;
    };
    return c;
}

PossibilityContour im_from_confidence_family(
    const std::function<bool(double, const Vec&)>& covers,
    const std::function<Vec(const Vec&)>& f, int theta_dim, std::optional<Vec> witness_phi,
    double bisect_tol) {
    if (witness_phi)
        require(covers(1.0 - bisect_tol, *witness_phi), ErrorCode::normalization_failure,
                "im_from_confidence_family: witness not in every region "
                "(empty intersection)");
    PossibilityContour c;
    c.dimension = theta_dim;
    c.evaluate = [covers, f, bisect_tol](const Vec& theta) {
        Vec phi = f(theta);
        if (!covers(0.0, phi)) return 0.0;
        // Nestedness check along this fiber value.
        bool seen_out = false;
        for (int i = 0; i <= 20; ++i) {
            bool in = covers(i / 20.0, phi);
            if (seen_out && in)
                fail(ErrorCode::not_nested,
                     "im_from_confidence_family: confidence family not nested");
            seen_out = seen_out || !in;
        }
        return bisect_sup([&](double beta) { return covers(beta, phi); }, 0.0, 1.0,
                          bisect_tol);
    };
    return c;
}

ValidityTable validity_diagnostic(const Model& model, const Dataset& like,
                                  const std::vector<Vec>& theta_list,
                                  const std::vector<double>& alpha_grid, std::size_t reps,
                                  const MonteCarloConfig& cfg) {
    require(reps >= 500, ErrorCode::invalid_argument, "validity_diagnostic: reps >= 500");
    ValidityTable table;
    table.all_pass = true;
    for (std::size_t ti = 0; ti < theta_list.size(); ++ti) {
        const Vec& theta = theta_list[ti];
        std::vector<double> pis(reps);
        parallel_for(reps, [&](std::size_t r) {
            Rng rng = Rng::substream(cfg.seed ^ 0x5eedDA7AULL, (ti << 32) | r);
            Dataset data = model.simulate(theta, like, rng);
            MonteCarloConfig inner = cfg;
            inner.seed = cfg.seed + 0x9e3779b9ULL * (r + 1) + ti;
            inner.parallel = false;  // outer loop already parallel
            pis[r] = contour_mc(model, data, theta, inner);
        });
        for (double alpha : alpha_grid) {
            std::size_t hits = 0;
            for (double p : pis)
                if (p <= alpha) ++hits;
            double freq = static_cast<double>(hits) / static_cast<double>(reps);
            double bound =
                alpha + 3.0 * std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(reps));
            bool pass = freq <= bound;
            table.cells.push_back({ti, alpha, freq, bound, pass});
            table.all_pass = table.all_pass && pass;
        }
    }
    return table;
}

} // namespace possim
