#pragma once

#include "possim/contour.hpp"
#include "possim/im.hpp"
#include "possim/model.hpp"

#include <functional>
#include <string>

namespace possim {

/// A feature Phi = g(Theta) together with a parametrized fiber: lift(phi,
/// lambda) produces points with g = phi as lambda ranges over nuisance_box.
struct FeatureMap {
    std::string id;  // models key pivotality declarations off this
    int feature_dim = 1;
    int nuisance_dim = 0;
    std::function<Vec(const Vec&)> g;
    std::function<Vec(const Vec&, const Vec&)> lift;  // (phi, lambda) -> theta
    Box nuisance_box;
    std::function<Vec(const Vec&)> nuisance_of;  // optional: lambda from theta

    /// g(theta) = theta[index]; nuisance = the remaining coordinates.
    static FeatureMap coordinate(int index, const Box& domain);
    /// g(theta) = c . theta (scalar); the pivot coordinate absorbs phi.
    static FeatureMap linear(const Vec& coefficients, const Box& domain);
    /// g(theta) = theta[0] * theta[1] for positive 2-d parameters.
    static FeatureMap product2(const Box& domain);
    /// Block sums of a simplex parameter; nuisance = within-block weights.
    static FeatureMap block_sums(const std::vector<int>& block_sizes);
};

/// Extension-based marginal contour: sup of the joint over the fiber.
double extension_contour(const PossibilityContour& joint, const FeatureMap& f,
                         const Vec& phi, const MaximizeOptions& opts = {});

/// Relative profile likelihood R^pr(z, phi) = sup over the fiber of R(z, .).
/// Uses the model's closed form when it has one unless arg_lambda is
/// requested (the closed forms do not report the fiber argmax).
double profile_relative_likelihood(const Model& model, const Dataset& z,
                                   const FeatureMap& f, const Vec& phi,
                                   const MaximizeOptions& opts = {},
                                   Vec* arg_lambda = nullptr);

struct ProfileContourConfig {
    MonteCarloConfig mc;
    int fiber_probe_count = 8;
    MaximizeOptions outer_opts{};       // fiber search for the observed data
    MaximizeOptions replicate_opts{4};  // cheaper fiber search per replicate
};

/// Profile-based marginal contour: max over fiber probes theta_j of
/// (1/M) #{R^pr(Z_m, phi) <= R^pr(z, phi)}, Z_m from the model at theta_j.
/// Models declaring the feature pivotal get a single probe.
double profile_contour(const Model& model, const Dataset& z, const FeatureMap& f,
                       const Vec& phi, const ProfileContourConfig& cfg);

enum class PluginVariant { full_mle, nuisance_mle };

/// Bootstrap-flavored plug-in approximations that skip the outer supremum:
/// full-mle simulates at theta-hat and compares R^pr(Z, g(theta-hat)); the
/// nuisance-mle variant simulates at (phi, lambda-hat) and compares
/// R^pr(Z, phi).
double plugin_profile_contour(const Model& model, const Dataset& z, const FeatureMap& f,
                              const Vec& phi, const ProfileContourConfig& cfg,
                              PluginVariant variant);

} // namespace possim
