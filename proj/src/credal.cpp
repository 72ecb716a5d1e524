#include "possim/credal.hpp"

#include "possim/optim.hpp"
#include "possim/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace possim {

double EllipsoidApprox::boundary_radius(double alpha) const {
    require(!alpha_grid.empty(), ErrorCode::invalid_argument,
            "EllipsoidApprox: not calibrated");
    if (alpha >= 1.0) return 0.0;
    if (alpha <= alpha_grid.front()) return r_fit.front();
    auto it = std::upper_bound(alpha_grid.begin(), alpha_grid.end(), alpha);
    if (it == alpha_grid.end()) {
        // Between the last grid level and 1, shrink linearly to 0.
        double a0 = alpha_grid.back();
        double t = (alpha - a0) / (1.0 - a0);
        return r_fit.back() * (1.0 - t);
    }
    std::size_t i = static_cast<std::size_t>(it - alpha_grid.begin());
    double a0 = alpha_grid[i - 1], a1 = alpha_grid[i];
    double t = (alpha - a0) / (a1 - a0);
    return r_fit[i - 1] * (1.0 - t) + r_fit[i] * t;
}

namespace {

Vec unit_sphere(Rng& rng, int d) {
    Vec u(d);
    double norm = 0.0;
    do {
        for (int i = 0; i < d; ++i) u[i] = rng.normal();
        norm = u.norm();
    } while (norm < 1e-12);
    return u / norm;
}

Mat spd_sqrt(const Mat& s) {
    Eigen::SelfAdjointEigenSolver<Mat> es(s);
    require(es.info() == Eigen::Success && es.eigenvalues().minCoeff() > 0.0,
            ErrorCode::singular_matrix, "ellipsoid shape matrix is not positive definite");
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
           es.eigenvectors().transpose();
}

} // namespace

EllipsoidApprox calibrate_ellipsoid(const PossibilityContour& contour, const Model& model,
                                    const Dataset& z, std::vector<double> alpha_grid,
                                    int probes_per_alpha, std::uint64_t seed) {
    Vec center = model.mle(z);
    Mat info = model.obs_information(z, center);
    Eigen::LLT<Mat> llt(info);
    require(llt.info() == Eigen::Success, ErrorCode::singular_matrix,
            "calibrate_ellipsoid: observed information not positive definite");
    Mat shape = llt.solve(Mat::Identity(info.rows(), info.cols()));
    shape = 0.5 * (shape + shape.transpose().eval());
    return calibrate_ellipsoid(contour, std::move(center), std::move(shape),
                               std::move(alpha_grid), probes_per_alpha, seed);
}

EllipsoidApprox calibrate_ellipsoid(const PossibilityContour& contour, Vec center,
                                    Mat shape, std::vector<double> alpha_grid,
                                    int probes_per_alpha, std::uint64_t seed) {
    require(!alpha_grid.empty(), ErrorCode::invalid_argument,
            "calibrate_ellipsoid: empty alpha grid");
    require(probes_per_alpha >= 1, ErrorCode::invalid_argument,
            "calibrate_ellipsoid: probes_per_alpha >= 1");
    std::sort(alpha_grid.begin(), alpha_grid.end());
    require(alpha_grid.front() > 0.0 && alpha_grid.back() <= 1.0,
            ErrorCode::invalid_argument, "calibrate_ellipsoid: alpha levels in (0,1]");

    EllipsoidApprox e;
    e.center = std::move(center);
    e.shape = std::move(shape);
    e.shape_sqrt = spd_sqrt(e.shape);
    e.alpha_grid = alpha_grid;
    e.r_fit.assign(alpha_grid.size(), 0.0);

    const int d = e.dim();
    std::vector<Vec> directions;
    for (int k = 0; k < probes_per_alpha; ++k) {
        Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(k));
        directions.push_back(unit_sphere(rng, d));
    }

    for (std::size_t ai = 0; ai < alpha_grid.size(); ++ai) {
        double alpha = alpha_grid[ai];
        std::vector<double> radii(directions.size(), 0.0);
        parallel_for(directions.size(), [&](std::size_t k) {
            auto along = [&](double r) {
                return contour(e.center + r * (e.shape_sqrt * directions[k]));
            };
            if (along(0.0) < alpha) return;  // level set does not reach the center ray
            // Bracket the crossing, then bisect to 1e-4 relative.
            double hi = 1.0;
            int doublings = 0;
            while (along(hi) >= alpha) {
                hi *= 2.0;
                require(++doublings <= 60, ErrorCode::numeric_failure,
                        "calibrate_ellipsoid: level set appears unbounded along a ray");
            }
            double lo = 0.0;
            while (hi - lo > 1e-4 * std::max(1.0, hi)) {
                double mid = 0.5 * (lo + hi);
                (along(mid) >= alpha ? lo : hi) = mid;
            }
            double r = hi;
            // Multimodality guard: the contour must stay below alpha beyond
            // the fitted radius.
            for (double s : {1.25, 1.5, 2.0, 4.0})
                require(along(r * s) < alpha, ErrorCode::not_nested,
                        "calibrate_ellipsoid: contour rises again beyond the fitted "
                        "radius; use a grid-based region instead");
            radii[k] = r;
        });
        e.r_fit[ai] = *std::max_element(radii.begin(), radii.end());
    }

    // Enforce monotonicity: radii cannot grow as alpha grows.
    for (std::size_t i = e.r_fit.size(); i-- > 1;)
        e.r_fit[i - 1] = std::max(e.r_fit[i - 1], e.r_fit[i]);
    return e;
}

CredalSampleSet sample_inner_approx(const EllipsoidApprox& ellipsoid, std::size_t M,
                                    std::uint64_t seed) {
    require(M >= 1, ErrorCode::invalid_argument, "sample_inner_approx: M >= 1");
    CredalSampleSet out;
    out.seed = seed;
    out.M = M;
    out.draws.resize(M);
    const int d = ellipsoid.dim();
    parallel_for(M, [&](std::size_t m) {
        Rng rng = Rng::substream(seed, m);
        double alpha = rng.uniform();
        while (alpha <= 0.0 || alpha >= 1.0) alpha = rng.uniform();
        Vec u = unit_sphere(rng, d);
        out.draws[m] = {alpha, ellipsoid.boundary_point(alpha, u)};
    });
    return out;
}

double contour_from_samples(const CredalSampleSet& samples,
                            const std::function<double(const Vec&)>& ranking,
                            const Vec& theta) {
    require(!samples.draws.empty(), ErrorCode::invalid_argument,
            "contour_from_samples: empty sample set");
    double r_obs = ranking(theta);
    std::size_t count = 0;
    for (const CredalDraw& d : samples.draws)
        if (ranking(d.point) <= r_obs) ++count;
    return static_cast<double>(count) / static_cast<double>(samples.draws.size());
}

} // namespace possim
