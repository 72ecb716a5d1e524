#include "possim/predict.hpp"

#include "possim/parallel.hpp"

#include <atomic>
#include <cmath>
#include <numeric>

namespace possim {

ConformityRanking ConformityRanking::mean_distance(int column) {
    ConformityRanking r;
    r.description = "negative distance to bag mean, column " + std::to_string(column);
    r.rho = [column](const Dataset& bag, const std::vector<double>& y) {
        require(bag.n() >= 1, ErrorCode::invalid_argument, "mean_distance: empty bag");
        double sum = 0.0;
        for (const auto& row : bag.rows) sum += row.at(static_cast<std::size_t>(column));
        double mean = sum / bag.n();
        return -std::abs(y.at(static_cast<std::size_t>(column)) - mean);
    };
    return r;
}

double conformal_transducer(const Dataset& z, const std::vector<double>& candidate,
                            const ConformityRanking& rho) {
    require(z.n() >= 1, ErrorCode::invalid_argument, "conformal_transducer: n >= 1");
    require(static_cast<int>(candidate.size()) == z.width(), ErrorCode::dimension_mismatch,
            "conformal_transducer: candidate width");
    Dataset augmented = z;
    augmented.rows.push_back(candidate);
    const int n1 = augmented.n();
    std::vector<double> scores(static_cast<std::size_t>(n1));
    for (int i = 0; i < n1; ++i) {
        Dataset bag;
        bag.columns = z.columns;
        bag.rows.reserve(static_cast<std::size_t>(n1 - 1));
        for (int j = 0; j < n1; ++j)
            if (j != i) bag.rows.push_back(augmented.rows[static_cast<std::size_t>(j)]);
        scores[static_cast<std::size_t>(i)] = rho.rho(bag, augmented.rows[static_cast<std::size_t>(i)]);
    }
    double observed = scores.back();
    int count = 0;
    for (double s : scores)
        if (s <= observed) ++count;
    return static_cast<double>(count) / static_cast<double>(n1);
}

ConformalRegion conformal_region(const Dataset& z,
                                 const std::vector<std::vector<double>>& grid,
                                 double alpha, const ConformityRanking& rho) {
    require(!grid.empty(), ErrorCode::invalid_argument, "conformal_region: empty grid");
    ConformalRegion region;
    region.alpha = alpha;
    for (const auto& y : grid)
        if (conformal_transducer(z, y, rho) >= alpha) region.members.push_back(y);
    return region;
}

LossFunction LossFunction::squared_error_location() {
    LossFunction f;
    f.kind = LossKind::squared_error;
    f.location_closed_form = true;
    f.loss = [](const std::vector<double>& row, const Vec& theta) {
        double d = row.at(0) - theta[0];
        return d * d;
    };
    return f;
}

LossFunction LossFunction::check_location(double u) {
    require(u > 0.0 && u < 1.0, ErrorCode::invalid_argument,
            "check_location: level in (0,1)");
    LossFunction f;
    f.kind = LossKind::check;
    f.quantile_level = u;
    f.loss = [u](const std::vector<double>& row, const Vec& theta) {
        double d = row.at(0) - theta[0];
        return d >= 0.0 ? u * d : (u - 1.0) * d;
    };
    return f;
}

LossFunction LossFunction::zero_one_linear_classifier() {
    LossFunction f;
    f.kind = LossKind::zero_one;
    f.loss = [](const std::vector<double>& row, const Vec& theta) {
        require(static_cast<int>(row.size()) == theta.size(), ErrorCode::dimension_mismatch,
                "zero_one_linear_classifier: row width vs theta (weights, bias)");
        double eta = theta[theta.size() - 1];
        for (int i = 0; i + 1 < theta.size(); ++i) eta += theta[i] * row[static_cast<std::size_t>(i)];
        double label = row.back();
        return label * eta <= 0.0 ? 1.0 : 0.0;
    };
    return f;
}

double empirical_risk(const Dataset& z, const LossFunction& loss, const Vec& theta) {
    require(z.n() >= 1, ErrorCode::invalid_argument, "empirical_risk: empty dataset");
    double total = 0.0;
    for (const auto& row : z.rows) {
        double l = loss.loss(row, theta);
        require(l >= 0.0 && std::isfinite(l), ErrorCode::numeric_failure,
                "empirical_risk: loss must be finite and nonnegative");
        total += l;
    }
    return total / z.n();
}

ErmResult empirical_risk_minimize(const Dataset& z, const LossFunction& loss,
                                  const Box& domain, const MaximizeOptions& opts) {
    ErmResult out;
    if (loss.location_closed_form && domain.dim() == 1) {
        double sum = 0.0;
        for (const auto& row : z.rows) sum += row.at(0);
        Vec theta(1);
        theta[0] = sum / z.n();
        theta = domain.clamp(theta);
        out.theta = theta;
        out.risk = empirical_risk(z, loss, theta);
        out.converged = true;
        return out;
    }
    std::vector<Vec> starts;
    if (z.width() == domain.dim()) {
        std::size_t stride = std::max<std::size_t>(1, z.rows.size() / 8);
        for (std::size_t i = 0; i < z.rows.size(); i += stride) {
            Vec s(domain.dim());
            for (int j = 0; j < domain.dim(); ++j) s[j] = z.rows[i][static_cast<std::size_t>(j)];
            starts.push_back(domain.clamp(s));
        }
    }
    MaximizeResult res = maximize(
        [&](const Vec& theta) { return -empirical_risk(z, loss, theta); }, domain, opts,
        starts);
    out.converged = res.found;
    require(res.found, ErrorCode::nonconvergence,
            "empirical_risk_minimize: no finite risk value found");
    out.theta = res.argmax;
    out.risk = -res.value;
    return out;
}

double risk_im_contour(const Dataset& z, const LossFunction& loss, const Vec& theta,
                       const Box& domain, const RiskImConfig& cfg) {
    require(cfg.B >= 500, ErrorCode::invalid_argument, "risk_im_contour: B >= 500");
    ErmResult fit = empirical_risk_minimize(z, loss, domain, cfg.erm_opts);
    double rho_obs = -(empirical_risk(z, loss, theta) - fit.risk);

    const std::size_t n = static_cast<std::size_t>(z.n());
    std::atomic<std::size_t> count{0}, redraws{0};
    const std::size_t max_redraws = std::max<std::size_t>(1, cfg.B / 100);

    auto body = [&](std::size_t b) {
        for (int attempt = 0; attempt < 8; ++attempt) {
            Rng rng = Rng::substream(cfg.seed, (b << 3) | static_cast<std::size_t>(attempt));
            Dataset boot;
            boot.columns = z.columns;
            boot.rows.reserve(n);
            for (std::size_t i = 0; i < n; ++i)
                boot.rows.push_back(z.rows[rng.integer(n)]);
            try {
                ErmResult bfit = empirical_risk_minimize(boot, loss, domain,
                                                         cfg.resample_erm_opts);
                double risk_at_fit = empirical_risk(boot, loss, fit.theta);
                // theta_hat_z is itself feasible, so the resample minimum can
                // never exceed the risk there; guards against optimizer slack.
                double rho_b = -(risk_at_fit - std::min(bfit.risk, risk_at_fit));
                if (rho_b <= rho_obs) count.fetch_add(1, std::memory_order_relaxed);
                return;
            } catch (const Error&) {
                redraws.fetch_add(1, std::memory_order_relaxed);
            }
        }
        fail(ErrorCode::numeric_failure,
             "risk_im_contour: repeated resample minimization failures");
    };
    parallel_for(cfg.B, body);

    require(redraws.load() <= max_redraws, ErrorCode::numeric_failure,
            "risk_im_contour: more than 1% of resamples required re-drawing");
    return static_cast<double>(count.load()) / static_cast<double>(cfg.B);
}

} // namespace possim
