#pragma once

#include "possim/contour.hpp"
#include "possim/model.hpp"

#include <functional>
#include <vector>

namespace possim {

/// Ellipsoidal surrogate for the contour's level sets, centered at the MLE
/// with shape = inverse observed information. boundary_radius is the fitted
/// radius of the alpha level-set boundary; radius adds the safety inflation
/// and is what enclosure guarantees refer to.
struct EllipsoidApprox {
    Vec center;
    Mat shape;
    Mat shape_sqrt;
    std::vector<double> alpha_grid;  // increasing
    std::vector<double> r_fit;       // fitted radii, non-increasing in alpha
    double safety = 1.1;

    int dim() const { return static_cast<int>(center.size()); }
    double boundary_radius(double alpha) const;  // interpolated, r(1) = 0
    double radius(double alpha) const { return safety * boundary_radius(alpha); }
    Vec boundary_point(double alpha, const Vec& unit) const {
        return center + boundary_radius(alpha) * (shape_sqrt * unit);
    }
};

/// Fits r(alpha) by bisection (1e-4 relative) along whitened probe rays.
/// Errors if the contour fails to stay below alpha beyond the fitted radius
/// on any ray (multimodality); use a grid-based region in that case.
EllipsoidApprox calibrate_ellipsoid(const PossibilityContour& contour, const Model& model,
                                    const Dataset& z, std::vector<double> alpha_grid,
                                    int probes_per_alpha = 16,
                                    std::uint64_t seed = 71001ULL);

/// Same fit with the center and shape supplied directly (e.g. for contours
/// that do not come from a model).
EllipsoidApprox calibrate_ellipsoid(const PossibilityContour& contour, Vec center,
                                    Mat shape, std::vector<double> alpha_grid,
                                    int probes_per_alpha = 16,
                                    std::uint64_t seed = 71001ULL);

struct CredalDraw {
    double alpha;
    Vec point;
};

struct CredalSampleSet {
    std::vector<CredalDraw> draws;
    std::uint64_t seed = 0;
    std::size_t M = 0;
};

/// Two-step sampler for the inner probabilistic approximation: level A
/// uniform on (0,1), then a point on the fitted A-boundary as the
/// push-forward of the uniform sphere measure through the ellipsoid map.
/// The fitted (uninflated) radius is used so the level-set masses match
/// 1 - alpha; the inflated radius is for enclosure statements only.
CredalSampleSet sample_inner_approx(const EllipsoidApprox& ellipsoid, std::size_t M,
                                    std::uint64_t seed);

/// Empirical probability-to-possibility transform over the draws:
/// (1/M) #{m : ranking(theta_m) <= ranking(theta)} with ranking bound to z.
double contour_from_samples(const CredalSampleSet& samples,
                            const std::function<double(const Vec&)>& ranking,
                            const Vec& theta);

} // namespace possim
