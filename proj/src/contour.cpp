#include "possim/contour.hpp"

#include "possim/parallel.hpp"

#include <atomic>
#include <cmath>

namespace possim {

HypothesisSet HypothesisSet::from_grid(std::vector<Vec> points,
                                       std::function<bool(const Vec&)> pred,
                                       std::string label) {
    require(!points.empty(), ErrorCode::invalid_argument, "hypothesis grid is empty");
    HypothesisSet h;
    h.dimension = static_cast<int>(points.front().size());
    h.grid = std::move(points);
    h.contains = std::move(pred);
    h.description = std::move(label);
    return h;
}

HypothesisSet HypothesisSet::from_box(Box box, std::function<bool(const Vec&)> pred,
                                      std::string label) {
    HypothesisSet h;
    h.dimension = box.dim();
    h.search_box = std::move(box);
    h.contains = std::move(pred);
    h.description = std::move(label);
    return h;
}

HypothesisSet HypothesisSet::full_space(int dim, Box box, std::string label) {
    auto h = from_box(std::move(box), [](const Vec&) { return true; }, std::move(label));
    h.dimension = dim;
    return h;
}

void GaussianPossibilityParams::validate() const {
    require(mean.size() > 0, ErrorCode::invalid_argument, "gaussian possibility: empty mean");
    require(covariance.rows() == mean.size() && covariance.cols() == mean.size(),
            ErrorCode::dimension_mismatch, "gaussian possibility: covariance shape");
    double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
    require((covariance - covariance.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale,
            ErrorCode::invalid_argument, "gaussian possibility: covariance not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(covariance);
    require(es.eigenvalues().minCoeff() > 0.0, ErrorCode::singular_matrix,
            "gaussian possibility: covariance not positive definite");
}

namespace {

// Sup over H following its search strategy; empty optional when the search
// finds no member.
std::optional<double> sup_over(const PossibilityContour& contour, const HypothesisSet& H) {
    require(contour.dimension == H.dimension, ErrorCode::dimension_mismatch,
            "contour and hypothesis dimensions differ");
    if (!H.grid.empty()) {
        bool any = false;
        double best = 0.0;
        for (const Vec& p : H.grid) {
            if (H.contains && !H.contains(p)) continue;
            any = true;
            best = std::max(best, contour.evaluate(p));
        }
        if (!any) return std::nullopt;
        return best;
    }
    require(H.search_box.has_value(), ErrorCode::invalid_argument,
            "hypothesis has neither grid nor search box");
    auto gated = [&](const Vec& x) -> double {
        if (H.contains && !H.contains(x)) return -std::numeric_limits<double>::infinity();
        return contour.evaluate(x);
    };
    std::vector<Vec> starts;
    if (contour.normalizer_hint && H.search_box->contains(*contour.normalizer_hint) &&
        (!H.contains || H.contains(*contour.normalizer_hint)))
        starts.push_back(*contour.normalizer_hint);
    MaximizeResult r = maximize(gated, *H.search_box, H.search_opts, starts);
    if (!r.found) return std::nullopt;
    return std::min(1.0, std::max(0.0, r.value));
}

} // namespace

double possibility_of(const PossibilityContour& contour, const HypothesisSet& H) {
    auto s = sup_over(contour, H);
    require(s.has_value(), ErrorCode::empty_hypothesis,
            "hypothesis search found no member: " + H.description);
    return *s;
}

double necessity_of(const PossibilityContour& contour, const HypothesisSet& H,
                    const HypothesisSet& complement_search) {
    require(contour.dimension == H.dimension, ErrorCode::dimension_mismatch,
            "contour and hypothesis dimensions differ");
    auto s = sup_over(contour, complement_search);
    return 1.0 - s.value_or(0.0);  // sup over empty complement is 0
}

double prob_to_poss(const std::function<double(const Vec&)>& density,
                    const std::function<Vec(Rng&)>& sampler, const Vec& y,
                    std::size_t M, std::uint64_t seed) {
    require(M >= 1, ErrorCode::invalid_argument, "prob_to_poss: M must be >= 1");
    double dy = density(y);
    require(std::isfinite(dy), ErrorCode::numeric_failure,
            "prob_to_poss: density non-finite at evaluation point");
    std::atomic<std::size_t> count{0};
    parallel_for(M, [&](std::size_t m) {
        Rng rng = Rng::substream(seed, m);
        Vec draw = sampler(rng);
        if (density(draw) <= dy) count.fetch_add(1, std::memory_order_relaxed);
    });
    return static_cast<double>(count.load()) / static_cast<double>(M);
}

double gaussian_contour(const GaussianPossibilityParams& params, const Vec& y) {
    params.validate();
    require(y.size() == params.mean.size(), ErrorCode::dimension_mismatch,
            "gaussian_contour: point dimension");
    Eigen::LLT<Mat> llt(params.covariance);
    require(llt.info() == Eigen::Success, ErrorCode::singular_matrix,
            "gaussian_contour: covariance factorization failed");
    Vec diff = y - params.mean;
    double q = diff.dot(llt.solve(diff));
    return chisq_tail(params.dim(), q);
}

PossibilityContour make_gaussian_contour(GaussianPossibilityParams params) {
    params.validate();
    PossibilityContour c;
    c.dimension = params.dim();
    c.normalizer_hint = params.mean;
    c.evaluate = [params = std::move(params)](const Vec& y) {
        return gaussian_contour(params, y);
    };
    return c;
}

CredalMembershipReport credal_membership(const std::vector<WeightedPoint>& sample,
                                         const PossibilityContour& contour,
                                         const std::vector<double>& alpha_grid,
                                         double mc_slack) {
    require(!sample.empty(), ErrorCode::invalid_argument, "credal_membership: empty sample");
    double total = 0.0;
    for (const auto& wp : sample) total += wp.weight;
    require(total > 0.0, ErrorCode::invalid_argument, "credal_membership: zero total weight");

    std::vector<double> values(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) values[i] = contour.evaluate(sample[i].point);

    CredalMembershipReport report;
    report.accepted = true;
    for (double alpha : alpha_grid) {
        require(alpha >= 0.0 && alpha <= 1.0, ErrorCode::invalid_argument,
                "credal_membership: alpha outside [0,1]");
        double mass = 0.0;
        for (std::size_t i = 0; i < sample.size(); ++i)
            if (values[i] > alpha) mass += sample[i].weight;
        mass /= total;
        bool ok = mass >= 1.0 - alpha - mc_slack;
        report.levels.push_back({alpha, mass, ok});
        report.accepted = report.accepted && ok;
    }
    return report;
}

} // namespace possim
