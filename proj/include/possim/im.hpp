#pragma once

#include "possim/contour.hpp"
#include "possim/model.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace possim {

struct MonteCarloConfig {
    std::size_t M = 1000;
    std::uint64_t seed = 1;
    bool parallel = true;

    void validate() const {
        require(M >= 100, ErrorCode::invalid_argument,
                "MonteCarloConfig: M >= 100 required for calibrated output");
    }
    bool low_replicate_warning() const { return M < 1000; }
};

struct McContourStats {
    std::size_t redraws = 0;   // replicates redrawn after MLE failure
    std::size_t ties = 0;      // exact ranking ties, counted as <=
};

/// Monte Carlo contour: (1/M) #{m : R(Z_m, theta) <= R(z, theta)} with
/// replicates drawn from the model at theta, matching z's design.
double contour_mc(const Model& model, const Dataset& z, const Vec& theta,
                  const MonteCarloConfig& cfg, McContourStats* stats = nullptr);

/// Wilks chi-square approximation 1 - F_d(-2 log R(z, theta)).
double contour_wilks(const Model& model, const Dataset& z, const Vec& theta);

PossibilityContour make_mc_contour(const Model& model, const Dataset& z,
                                   MonteCarloConfig cfg);
PossibilityContour make_wilks_contour(const Model& model, const Dataset& z);

struct ConfidenceRegion {
    double alpha = 0.0;
    std::function<bool(const Vec&)> member;
    std::vector<Vec> grid_members;
};

/// Level set {theta in grid : contour(theta) >= alpha}. The grid must cover
/// the MLE (the contour's normalizer); otherwise an error asks for a wider
/// grid.
ConfidenceRegion confidence_region(const PossibilityContour& contour, double alpha,
                                   const std::vector<Vec>& grid);

struct TestDecision {
    bool rejected;
    double plausibility;
};

/// Reject H iff possibility_of(contour, H) <= alpha.
TestDecision test_hypothesis(const PossibilityContour& contour, const HypothesisSet& H,
                             double alpha);

/// Rebuilds a possibility contour from a nested family of rejection regions:
/// in_rejection(alpha) says whether the observed data falls in R_alpha.
/// contour(theta) = sup{beta : z not in R_beta} on H0, 1 elsewhere.
PossibilityContour im_from_test_family(const std::function<bool(double)>& in_rejection,
                                       const HypothesisSet& H0, double bisect_tol = 1e-6);

/// Rebuilds a contour for Theta from a nested confidence family for
/// Phi = f(Theta): covers(alpha, phi) says whether phi lies in C_alpha(z).
/// witness_phi, when given, must lie in every C_beta (normalization check).
PossibilityContour im_from_confidence_family(
    const std::function<bool(double, const Vec&)>& covers,
    const std::function<Vec(const Vec&)>& f, int theta_dim,
    std::optional<Vec> witness_phi = std::nullopt, double bisect_tol = 1e-6);

struct ValidityCell {
    std::size_t theta_index;
    double alpha;
    double frequency;  // empirical P{pi_Z(theta) <= alpha}
    double bound;      // alpha + 3 sqrt(alpha (1-alpha) / reps)
    bool pass;
};

struct ValidityTable {
    std::vector<ValidityCell> cells;
    bool all_pass;
};

/// Strong-validity diagnostic: fresh datasets at each theta (same design as
/// `like`), contour evaluated at the generating theta.
ValidityTable validity_diagnostic(const Model& model, const Dataset& like,
                                  const std::vector<Vec>& theta_list,
                                  const std::vector<double>& alpha_grid, std::size_t reps,
                                  const MonteCarloConfig& cfg);

} // namespace possim
