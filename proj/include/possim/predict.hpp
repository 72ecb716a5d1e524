#pragma once

#include "possim/model.hpp"
#include "possim/optim.hpp"

#include <functional>
#include <string>
#include <vector>

namespace possim {

/// Conformity ranking rho(bag, candidate); rho must not depend on the order
/// of the bag's rows.
struct ConformityRanking {
    std::function<double(const Dataset&, const std::vector<double>&)> rho;
    std::string description;

    /// rho(bag, y) = -|y - mean(bag column)|: closer to the bag mean is more
    /// conforming.
    static ConformityRanking mean_distance(int column = 0);
};

/// Rank plausibility of the candidate as the next observation:
/// (1/(n+1)) #{i : rho(bag minus i, i) <= rho(z, candidate)} over the
/// augmented bag; ties counted.
double conformal_transducer(const Dataset& z, const std::vector<double>& candidate,
                            const ConformityRanking& rho);

struct ConformalRegion {
    double alpha;
    std::vector<std::vector<double>> members;
    bool empty() const { return members.empty(); }
};

ConformalRegion conformal_region(const Dataset& z,
                                 const std::vector<std::vector<double>>& grid,
                                 double alpha, const ConformityRanking& rho);

enum class LossKind { squared_error, zero_one, check };

struct LossFunction {
    LossKind kind = LossKind::squared_error;
    double quantile_level = 0.5;  // check loss only
    std::function<double(const std::vector<double>&, const Vec&)> loss;
    bool location_closed_form = false;  // scalar location, minimizer = mean

    /// (z0 - theta0)^2 for scalar location.
    static LossFunction squared_error_location();
    /// Pinball loss at level u for scalar location.
    static LossFunction check_location(double u);
    /// Rows (x_1..x_k, label in {-1,+1}); theta = (weights, bias);
    /// loss = 1{label * (w.x + b) <= 0}.
    static LossFunction zero_one_linear_classifier();
};

double empirical_risk(const Dataset& z, const LossFunction& loss, const Vec& theta);

struct ErmResult {
    Vec theta;
    double risk = 0.0;
    bool converged = false;
};

/// Minimizes the empirical risk over the box; multi-start, with rows of z
/// reused as extra starts when the dimensions line up.
ErmResult empirical_risk_minimize(const Dataset& z, const LossFunction& loss,
                                  const Box& domain, const MaximizeOptions& opts = {});

struct RiskImConfig {
    std::size_t B = 1000;
    std::uint64_t seed = 1;
    MaximizeOptions erm_opts{};
    MaximizeOptions resample_erm_opts{8};
};

/// Bootstrap possibilistic contour for the risk minimizer: resamples z with
/// replacement and ranks by the empirical-risk regret, with each resample's
/// own minimizer playing the role of the truth. Returns
/// (1/B) #{b : -(r_b(theta_hat_z) - r_b(theta_hat_b)) <= -(r_z(theta) - r_z(theta_hat_z))}.
double risk_im_contour(const Dataset& z, const LossFunction& loss, const Vec& theta,
                       const Box& domain, const RiskImConfig& cfg);

} // namespace possim
