#pragma once

#include "possim/contour.hpp"
#include "possim/im.hpp"
#include "possim/model.hpp"

#include <functional>
#include <string>
#include <vector>

namespace possim {

/// Data-dependent probability over parameters, represented by its sampler.
struct PosteriorProcedure {
    std::function<std::vector<Vec>(const Dataset&, std::uint64_t, std::size_t)>
        sample_posterior;
    std::string label;
};

/// Draws (beta0, beta1, sigma^2) from the conjugate posterior of simple
/// linear regression under the flat noninformative prior on
/// (beta0, beta1, log sigma): sigma^2 | z is (n-2) s^2 / chisq(n-2) and
/// beta | sigma^2 is bivariate normal around the least-squares fit.
std::vector<Vec> bayes_regression_posterior(const Dataset& z, std::size_t draws,
                                            std::uint64_t seed);

PosteriorProcedure make_bayes_regression_procedure();

struct FcrCurve {
    std::vector<double> alphas;
    std::vector<double> rates;
};

struct FcrConfig {
    std::size_t reps = 1000;
    std::size_t posterior_draws = 5000;
    std::uint64_t seed = 1;
};

/// Lower bound on the false confidence rate at theta_true: the fraction of
/// datasets (simulated at theta_true with like's design) whose posterior
/// puts mass > 1 - alpha on H. Requires theta_true outside H.
FcrCurve fcr_estimate(const Model& model, const Dataset& like,
                      const PosteriorProcedure& procedure, const HypothesisSet& H,
                      const Vec& theta_true, const std::vector<double>& alpha_grid,
                      const FcrConfig& cfg);

struct ImFcrConfig {
    std::size_t reps = 1000;
    MonteCarloConfig mc{};
    MaximizeOptions search_opts{};
    std::uint64_t seed = 1;
};

/// Same rate for the possibilistic IM's lower probability of H, which is
/// 1 - sup of the contour over the complement. complement_search must cover
/// H^c. Counts reps where that lower probability exceeds 1 - alpha.
FcrCurve im_fcr_estimate(const Model& model, const Dataset& like, const HypothesisSet& H,
                         const HypothesisSet& complement_search, const Vec& theta_true,
                         const std::vector<double>& alpha_grid, const ImFcrConfig& cfg);

} // namespace possim
