#pragma once

#include "possim/common.hpp"
#include "possim/optim.hpp"
#include "possim/rng.hpp"
#include "possim/special.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace possim {

/// Evaluable plausibility map over the parameter space. Values lie in [0,1]
/// and the supremum 1 is attained somewhere; normalizer_hint records such a
/// point when the constructor knows one (the MLE, for likelihood contours).
struct PossibilityContour {
    std::function<double(const Vec&)> evaluate;
    int dimension = 0;
    std::optional<Vec> normalizer_hint;

    double operator()(const Vec& theta) const { return evaluate(theta); }
};

/// A hypothesis "Theta in H" given by a predicate, together with the search
/// strategy used to take suprema over it: an explicit finite grid, or a
/// box-constrained multi-start maximizer.
struct HypothesisSet {
    std::function<bool(const Vec&)> contains;
    std::vector<Vec> grid;          // finite-grid search when non-empty
    std::optional<Box> search_box;  // otherwise box search over this box
    MaximizeOptions search_opts;
    std::string description;
    int dimension = 0;

    static HypothesisSet from_grid(std::vector<Vec> points,
                                   std::function<bool(const Vec&)> pred,
                                   std::string label = "");
    static HypothesisSet from_box(Box box, std::function<bool(const Vec&)> pred,
                                  std::string label = "");
    static HypothesisSet full_space(int dim, Box box, std::string label = "full space");
};

struct GaussianPossibilityParams {
    Vec mean;
    Mat covariance;

    int dim() const { return static_cast<int>(mean.size()); }
    void validate() const;  // symmetric within 1e-10 relative, eigenvalues > 0
};

/// Sup of the contour over H via H's search strategy. Errors if the search
/// finds no member of H or the dimensions disagree.
double possibility_of(const PossibilityContour& contour, const HypothesisSet& H);

/// 1 - possibility over the complement; complement_search must cover H^c.
/// Sup over an empty complement is 0, so necessity of the full space is 1.
double necessity_of(const PossibilityContour& contour, const HypothesisSet& H,
                    const HypothesisSet& complement_search);

/// Probability-to-possibility transform of the law with the given density:
/// (1/M) #{m : density(Y_m) <= density(y)}, ties counted. Deterministic per
/// seed via per-index substreams.
double prob_to_poss(const std::function<double(const Vec&)>& density,
                    const std::function<Vec(Rng&)>& sampler, const Vec& y,
                    std::size_t M, std::uint64_t seed);

/// Closed-form Gaussian possibility contour 1 - F_d(Mahalanobis^2).
double gaussian_contour(const GaussianPossibilityParams& params, const Vec& y);

/// Builds the PossibilityContour for a Gaussian possibility measure.
PossibilityContour make_gaussian_contour(GaussianPossibilityParams params);

struct WeightedPoint {
    double weight;
    Vec point;
};

struct CredalLevelReport {
    double alpha;
    double mass;      // empirical mass of {theta : contour(theta) > alpha}
    bool satisfied;   // mass >= 1 - alpha - slack
};

struct CredalMembershipReport {
    std::vector<CredalLevelReport> levels;
    bool accepted;
};

/// Checks the level-set characterization of credal membership: the candidate
/// probability (given as a weighted sample) must put mass >= 1 - alpha on
/// every upper level set {contour > alpha}.
CredalMembershipReport credal_membership(const std::vector<WeightedPoint>& sample,
                                         const PossibilityContour& contour,
                                         const std::vector<double>& alpha_grid,
                                         double mc_slack = 0.0);

} // namespace possim
