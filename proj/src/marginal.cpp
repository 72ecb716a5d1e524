#include "possim/marginal.hpp"

#include "possim/parallel.hpp"

#include <atomic>
#include <cmath>

namespace possim {

namespace {

Vec drop_coordinate(const Vec& x, int index) {
    Vec y(x.size() - 1);
    int j = 0;
    for (int i = 0; i < x.size(); ++i)
        if (i != index) y[j++] = x[i];
    return y;
}

Vec insert_coordinate(const Vec& lambda, int index, double value) {
    Vec y(lambda.size() + 1);
    int j = 0;
    for (int i = 0; i < y.size(); ++i)
        y[i] = (i == index) ? value : lambda[j++];
    return y;
}

} // namespace

FeatureMap FeatureMap::coordinate(int index, const Box& domain) {
    require(index >= 0 && index < domain.dim(), ErrorCode::invalid_argument,
            "FeatureMap::coordinate: index outside parameter dimension");
    FeatureMap f;
    f.id = "coord:" + std::to_string(index);
    f.feature_dim = 1;
    f.nuisance_dim = domain.dim() - 1;
    f.g = [index](const Vec& theta) {
        Vec phi(1);
        phi[0] = theta[index];
        return phi;
    };
    f.lift = [index](const Vec& phi, const Vec& lambda) {
        return insert_coordinate(lambda, index, phi[0]);
    };
    f.nuisance_box = {drop_coordinate(domain.lower, index),
                      drop_coordinate(domain.upper, index)};
    f.nuisance_of = [index](const Vec& theta) { return drop_coordinate(theta, index); };
    return f;
}

FeatureMap FeatureMap::linear(const Vec& coefficients, const Box& domain) {
    require(coefficients.size() == domain.dim(), ErrorCode::dimension_mismatch,
            "FeatureMap::linear: coefficient dimension");
    int pivot = 0;
    for (int i = 1; i < coefficients.size(); ++i)
        if (std::abs(coefficients[i]) > std::abs(coefficients[pivot])) pivot = i;
    require(coefficients[pivot] != 0.0, ErrorCode::invalid_argument,
            "FeatureMap::linear: all coefficients zero");
    FeatureMap f;
    f.id = "linear";
    f.feature_dim = 1;
    f.nuisance_dim = domain.dim() - 1;
    f.g = [coefficients](const Vec& theta) {
        Vec phi(1);
        phi[0] = coefficients.dot(theta);
        return phi;
    };
    f.lift = [coefficients, pivot](const Vec& phi, const Vec& lambda) {
        Vec theta = insert_coordinate(lambda, pivot, 0.0);
        theta[pivot] = (phi[0] - coefficients.dot(theta)) / coefficients[pivot];
        return theta;
    };
    f.nuisance_box = {drop_coordinate(domain.lower, pivot),
                      drop_coordinate(domain.upper, pivot)};
    f.nuisance_of = [pivot](const Vec& theta) { return drop_coordinate(theta, pivot); };
    return f;
}

FeatureMap FeatureMap::product2(const Box& domain) {
    require(domain.dim() == 2, ErrorCode::dimension_mismatch,
            "FeatureMap::product2: two-dimensional parameter required");
    require(domain.lower[0] >= 0.0 && domain.lower[1] >= 0.0, ErrorCode::invalid_argument,
            "FeatureMap::product2: positive parameters required");
    FeatureMap f;
    f.id = "product2";
    f.feature_dim = 1;
    f.nuisance_dim = 1;
    f.g = [](const Vec& theta) {
        Vec phi(1);
        phi[0] = theta[0] * theta[1];
        return phi;
    };
    f.lift = [](const Vec& phi, const Vec& lambda) {
        Vec theta(2);
        theta[0] = lambda[0];
        theta[1] = phi[0] / lambda[0];
        return theta;
    };
    Vec lo(1), hi(1);
    lo[0] = std::max(domain.lower[0], 1e-8);
    hi[0] = domain.upper[0];
    f.nuisance_box = {lo, hi};
    f.nuisance_of = [](const Vec& theta) {
        Vec lambda(1);
        lambda[0] = theta[0];
        return lambda;
    };
    return f;
}

FeatureMap FeatureMap::block_sums(const std::vector<int>& block_sizes) {
    int k = 0, nd = 0;
    for (int s : block_sizes) {
        require(s >= 1, ErrorCode::invalid_argument, "FeatureMap::block_sums: block size >= 1");
        k += s;
        nd += s - 1;
    }
    require(k >= 2, ErrorCode::invalid_argument, "FeatureMap::block_sums: need >= 2 cells");
    FeatureMap f;
    f.id = "block-sums";
    f.feature_dim = static_cast<int>(block_sizes.size());
    f.nuisance_dim = nd;
    f.g = [block_sizes](const Vec& theta) {
        Vec phi(block_sizes.size());
        int pos = 0;
        for (std::size_t b = 0; b < block_sizes.size(); ++b) {
            double s = 0.0;
            for (int i = 0; i < block_sizes[b]; ++i) s += theta[pos++];
            phi[static_cast<int>(b)] = s;
        }
        return phi;
    };
    // Within-block weights via stick breaking: block of size s consumes s-1
    // lambda entries in (0,1).
    f.lift = [block_sizes, k](const Vec& phi, const Vec& lambda) {
        Vec theta(k);
        int pos = 0, lpos = 0;
        for (std::size_t b = 0; b < block_sizes.size(); ++b) {
            int s = block_sizes[b];
            double remaining = 1.0;
            for (int i = 0; i < s - 1; ++i) {
                double w = remaining * lambda[lpos++];
                theta[pos++] = phi[static_cast<int>(b)] * w;
                remaining -= w;
            }
            theta[pos++] = phi[static_cast<int>(b)] * remaining;
        }
        return theta;
    };
    Vec lo = Vec::Constant(nd, 1e-7);
    Vec hi = Vec::Constant(nd, 1.0 - 1e-7);
    f.nuisance_box = {lo, hi};
    f.nuisance_of = [block_sizes, nd](const Vec& theta) {
        Vec lambda(nd);
        int pos = 0, lpos = 0;
        for (std::size_t b = 0; b < block_sizes.size(); ++b) {
            int s = block_sizes[b];
            double total = 0.0;
            for (int i = 0; i < s; ++i) total += theta[pos + i];
            double remaining = total;
            for (int i = 0; i < s - 1; ++i) {
                double frac = remaining > 0.0 ? theta[pos + i] / remaining : 0.5;
                lambda[lpos++] = std::min(std::max(frac, 1e-7), 1.0 - 1e-7);
                remaining -= theta[pos + i];
            }
            pos += s;
        }
        return lambda;
    };
    return f;
}

double extension_contour(const PossibilityContour& joint, const FeatureMap& f,
                         const Vec& phi, const MaximizeOptions& opts) {
    require(phi.size() == f.feature_dim, ErrorCode::dimension_mismatch,
            "extension_contour: feature dimension");
    if (f.nuisance_dim == 0) return joint(f.lift(phi, Vec(0)));
    auto objective = [&](const Vec& lambda) { return joint(f.lift(phi, lambda)); };
    std::vector<Vec> starts;
    if (f.nuisance_of && joint.normalizer_hint)
        starts.push_back(f.nuisance_box.clamp(f.nuisance_of(*joint.normalizer_hint)));
    MaximizeResult res = maximize(objective, f.nuisance_box, opts, starts);
    require(res.found, ErrorCode::empty_fiber,
            "extension_contour: no fiber point with finite plausibility");
    return std::min(std::max(res.value, 0.0), 1.0);
}

double profile_relative_likelihood(const Model& model, const Dataset& z,
                                   const FeatureMap& f, const Vec& phi,
                                   const MaximizeOptions& opts, Vec* arg_lambda) {
    require(phi.size() == f.feature_dim, ErrorCode::dimension_mismatch,
            "profile_relative_likelihood: feature dimension");
    if (!arg_lambda) {
        if (auto closed = model.closed_profile_relative_likelihood(z, f.id, phi))
            return std::min(std::max(*closed, 0.0), 1.0);
    }
    MleReport rep;
    Vec hat = model.mle(z, &rep);
    require(rep.converged || rep.boundary, ErrorCode::nonconvergence,
            "profile_relative_likelihood: MLE failed");
    if (f.nuisance_dim == 0) {
        Vec theta = f.lift(phi, Vec(0));
        if (arg_lambda) *arg_lambda = Vec(0);
        if (!model.in_domain(theta)) return 0.0;
        return relative_likelihood(model, z, theta, &hat);
    }
    auto objective = [&](const Vec& lambda) {
        Vec theta = f.lift(phi, lambda);
        if (!model.in_domain(theta)) return -std::numeric_limits<double>::infinity();
        return relative_likelihood(model, z, theta, &hat);
    };
    std::vector<Vec> starts;
    if (f.nuisance_of) starts.push_back(f.nuisance_box.clamp(f.nuisance_of(hat)));
    MaximizeResult res = maximize(objective, f.nuisance_box, opts, starts);
    require(res.found, ErrorCode::empty_fiber,
            "profile_relative_likelihood: no in-domain fiber point found");
    if (arg_lambda) *arg_lambda = res.argmax;
    return std::min(std::max(res.value, 0.0), 1.0);
}

namespace {

// (1/M) #{m : R^pr(Z_m, stat_phi) <= r_obs} with Z_m drawn at theta_sim.
double mc_profile_count(const Model& model, const Dataset& like, const FeatureMap& f,
                        const Vec& theta_sim, const Vec& stat_phi, double r_obs,
                        const ProfileContourConfig& cfg, std::uint64_t stream_hi) {
    std::atomic<std::size_t> count{0}, redraws{0};
    const std::size_t max_redraws = std::max<std::size_t>(1, cfg.mc.M / 100);
    auto body = [&](std::size_t m) {
        for (int attempt = 0; attempt < 8; ++attempt) {
            std::uint64_t key = (stream_hi << 44) | (m << 3) | static_cast<std::size_t>(attempt);
            Rng rng = Rng::substream(cfg.mc.seed, key);
            try {
                Dataset rep = model.simulate(theta_sim, like, rng);
                double r = profile_relative_likelihood(model, rep, f, stat_phi,
                                                       cfg.replicate_opts);
                if (r <= r_obs) count.fetch_add(1, std::memory_order_relaxed);
                return;
            } catch (const Error&) {
                redraws.fetch_add(1, std::memory_order_relaxed);
            }
        }
        fail(ErrorCode::numeric_failure,
             "profile contour: repeated failures on simulated replicates");
    };
    if (cfg.mc.parallel) {
        parallel_for(cfg.mc.M, body);
    } else {
        for (std::size_t m = 0; m < cfg.mc.M; ++m) body(m);
    }
    require(redraws.load() <= max_redraws, ErrorCode::numeric_failure,
            "profile contour: more than 1% of replicates required re-drawing");
    return static_cast<double>(count.load()) / static_cast<double>(cfg.mc.M);
}

} // namespace

double profile_contour(const Model& model, const Dataset& z, const FeatureMap& f,
                       const Vec& phi, const ProfileContourConfig& cfg) {
    cfg.mc.validate();
    Vec lambda_star;
    double r_obs = profile_relative_likelihood(model, z, f, phi, cfg.outer_opts,
                                               &lambda_star);
    if (r_obs == 0.0) return 0.0;
    Vec theta_star = f.lift(phi, lambda_star);
    require(model.in_domain(theta_star), ErrorCode::empty_fiber,
            "profile_contour: constrained maximizer left the domain");

    std::vector<Vec> probes{theta_star};
    if (!model.profile_pivotal(f.id) && f.nuisance_dim > 0) {
        // Perturb the constrained MLE along nuisance directions; scale relative
        // to the point itself since the nuisance box may be unbounded.
        Rng rng = Rng::substream(cfg.mc.seed ^ 0x9B0BE5ULL, 0);
        for (int j = 1; j < cfg.fiber_probe_count; ++j) {
            Vec lambda = lambda_star;
            for (int i = 0; i < lambda.size(); ++i)
                lambda[i] += 0.25 * (std::abs(lambda[i]) + 1.0) * rng.normal();
            lambda = f.nuisance_box.clamp(lambda);
            Vec theta = f.lift(phi, lambda);
            if (model.in_domain(theta)) probes.push_back(theta);
        }
    }

    double best = 0.0;
    for (std::size_t j = 0; j < probes.size(); ++j)
        best = std::max(best, mc_profile_count(model, z, f, probes[j], phi, r_obs, cfg, j));
    return best;
}

double plugin_profile_contour(const Model& model, const Dataset& z, const FeatureMap& f,
                              const Vec& phi, const ProfileContourConfig& cfg,
                              PluginVariant variant) {
    cfg.mc.validate();
    double r_obs = profile_relative_likelihood(model, z, f, phi, cfg.outer_opts);
    if (variant == PluginVariant::full_mle) {
        MleReport rep;
        Vec hat = model.mle(z, &rep);
        require(rep.converged || rep.boundary, ErrorCode::nonconvergence,
                "plugin_profile_contour: MLE failed");
        return mc_profile_count(model, z, f, hat, f.g(hat), r_obs, cfg, 0);
    }
    Vec lambda_hat;
    profile_relative_likelihood(model, z, f, phi, cfg.outer_opts, &lambda_hat);
    Vec theta_sim = f.lift(phi, lambda_hat);
    require(model.in_domain(theta_sim), ErrorCode::nonconvergence,
            "plugin_profile_contour: constrained nuisance MLE left the domain");
    return mc_profile_count(model, z, f, theta_sim, phi, r_obs, cfg, 0);
}

} // namespace possim
