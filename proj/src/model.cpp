#include "possim/model.hpp"

#include "possim/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace possim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;
}

void Dataset::validate() const {
    require(n() >= 1, ErrorCode::invalid_argument, "dataset is empty");
    std::size_t w = rows.front().size();
    for (const auto& r : rows)
        require(r.size() == w, ErrorCode::invalid_argument, "dataset rows are ragged");
}

Dataset Dataset::from_column(std::vector<double> values, std::string column, std::string label) {
    Dataset d;
    d.columns = {std::move(column)};
    d.label = std::move(label);
    d.rows.reserve(values.size());
    for (double v : values) d.rows.push_back({v});
    d.validate();
    return d;
}

Dataset Dataset::from_pairs(const std::vector<std::pair<double, double>>& xy, std::string xcol,
                            std::string ycol, std::string label) {
    Dataset d;
    d.columns = {std::move(xcol), std::move(ycol)};
    d.label = std::move(label);
    for (auto [x, y] : xy) d.rows.push_back({x, y});
    d.validate();
    return d;
}

Mat Model::obs_information(const Dataset& z, const Vec& theta_hat) const {
    const int d = dim();
    Mat H = Mat::Zero(d, d);
    auto nll = [&](const Vec& t) { return -log_density(z, t); };
    Vec h(d);
    for (int i = 0; i < d; ++i) h[i] = std::max(1e-5, 1e-5 * std::abs(theta_hat[i]));
    double f0 = nll(theta_hat);
    for (int i = 0; i < d; ++i) {
        Vec tp = theta_hat, tm = theta_hat;
        tp[i] += h[i];
        tm[i] -= h[i];
        H(i, i) = (nll(tp) - 2.0 * f0 + nll(tm)) / (h[i] * h[i]);
        for (int j = i + 1; j < d; ++j) {
            Vec tpp = theta_hat, tpm = theta_hat, tmp = theta_hat, tmm = theta_hat;
            tpp[i] += h[i]; tpp[j] += h[j];
            tpm[i] += h[i]; tpm[j] -= h[j];
            tmp[i] -= h[i]; tmp[j] += h[j];
            tmm[i] -= h[i]; tmm[j] -= h[j];
            H(i, j) = H(j, i) = (nll(tpp) - nll(tpm) - nll(tmp) + nll(tmm)) / (4.0 * h[i] * h[j]);
        }
    }
    return H;
}

double relative_likelihood(const Model& model, const Dataset& z, const Vec& theta,
                           const Vec* theta_hat) {
    require(theta.size() == model.dim(), ErrorCode::dimension_mismatch,
            "relative_likelihood: parameter dimension");
    require(model.in_domain(theta), ErrorCode::invalid_argument,
            "relative_likelihood: parameter outside model domain");
    Vec hat;
    if (theta_hat) {
        hat = *theta_hat;
    } else {
        MleReport rep;
        hat = model.mle(z, &rep);
        require(rep.converged, ErrorCode::nonconvergence,
                "relative_likelihood: MLE did not converge");
    }
    double lhat = model.log_density(z, hat);
    require(std::isfinite(lhat), ErrorCode::numeric_failure,
            "relative_likelihood: log-likelihood non-finite at the MLE");
    double l = model.log_density(z, theta);
    if (l == -kInf) return 0.0;
    return std::min(1.0, std::exp(l - lhat));
}

// ---------------------------------------------------------------------------
// Normal(mu, sigma)

namespace {

class NormalModel final : public Model {
public:
    std::string name() const override { return "normal"; }
    int dim() const override { return 2; }
    Box domain() const override {
        Box b;
        b.lower = Vec(2); b.upper = Vec(2);
        b.lower << -kInf, 0.0;
        b.upper << kInf, kInf;
        return b;
    }
    bool in_domain(const Vec& t) const override { return t[1] > 0.0; }

    double log_density(const Dataset& z, const Vec& t) const override {
        double mu = t[0], sigma = t[1];
        if (sigma <= 0.0) return -kInf;
        double ss = 0.0;
        for (const auto& r : z.rows) ss += (r[0] - mu) * (r[0] - mu);
        double n = z.n();
        return -0.5 * n * (kLog2Pi + 2.0 * std::log(sigma)) - ss / (2.0 * sigma * sigma);
    }

    Dataset simulate(const Vec& t, const Dataset& like, Rng& rng) const override {
        Dataset out;
        out.columns = like.columns;
        out.rows.reserve(like.n());
        for (int i = 0; i < like.n(); ++i) out.rows.push_back({t[0] + t[1] * rng.normal()});
        return out;
    }

    Vec mle(const Dataset& z, MleReport* report, const Vec*) const override {
        z.validate();
        double n = z.n();
        double mean = 0.0;
        for (const auto& r : z.rows) mean += r[0];
        mean /= n;
        double ss = 0.0;
        for (const auto& r : z.rows) ss += (r[0] - mean) * (r[0] - mean);
        double sigma = std::sqrt(ss / n);
        if (sigma <= 0.0)
            fail(ErrorCode::boundary_mle, "normal MLE: degenerate sample, sigma-hat = 0");
        if (report) *report = MleReport{};
        Vec t(2);
        t << mean, sigma;
        return t;
    }

    bool profile_pivotal(const std::string& feature_id) const override {
        return feature_id == "coord:0" || feature_id == "coord:1";
    }

    std::optional<double> closed_profile_relative_likelihood(
        const Dataset& z, const std::string& feature_id, const Vec& phi) const override {
        MleReport rep;
        Vec hat = mle(z, &rep, nullptr);
        double s2 = hat[1] * hat[1];
        double n = z.n();
        if (feature_id == "coord:0") {
            // Profile over sigma at fixed mean: sigma^2(phi) = s2 + (zbar-phi)^2.
            double d = hat[0] - phi[0];
            return std::pow(s2 / (s2 + d * d), 0.5 * n);
        }
        if (feature_id == "coord:1") {
            // Profile over mean at fixed sigma: mean stays at zbar.
            double sig2 = phi[0] * phi[0];
            if (phi[0] <= 0.0) return 0.0;
            double ratio = s2 / sig2;
            return std::pow(ratio, 0.5 * n) * std::exp(-0.5 * n * (ratio - 1.0));
        }
        return std::nullopt;
    }
};

// ---------------------------------------------------------------------------
// Normal(mu) with fixed sigma

class NormalFixedSigmaModel final : public Model {
public:
    explicit NormalFixedSigmaModel(double sigma) : sigma_(sigma) {
        require(sigma > 0.0, ErrorCode::invalid_argument, "fixed sigma must be positive");
    }
    std::string name() const override { return "normal-fixed-sigma"; }
    int dim() const override { return 1; }
    Box domain() const override {
        Box b;
        b.lower = Vec::Constant(1, -kInf);
        b.upper = Vec::Constant(1, kInf);
        return b;
    }
    double log_density(const Dataset& z, const Vec& t) const override {
        double ss = 0.0;
        for (const auto& r : z.rows) ss += (r[0] - t[0]) * (r[0] - t[0]);
        double n = z.n();
        return -0.5 * n * (kLog2Pi + 2.0 * std::log(sigma_)) - ss / (2.0 * sigma_ * sigma_);
    }
    Dataset simulate(const Vec& t, const Dataset& like, Rng& rng) const override {
        Dataset out;
        out.columns = like.columns;
        for (int i = 0; i < like.n(); ++i) out.rows.push_back({t[0] + sigma_ * rng.normal()});
        return out;
    }
    Vec mle(const Dataset& z, MleReport* report, const Vec*) const override {
        z.validate();
        double mean = 0.0;
        for (const auto& r : z.rows) mean += r[0];
        mean /= z.n();
        if (report) *report = MleReport{};
        return Vec::Constant(1, mean);
    }
    bool profile_pivotal(const std::string& feature_id) const override {
        return feature_id == "identity" || feature_id == "coord:0";
    }

private:
    double sigma_;
};

// ---------------------------------------------------------------------------
// Gamma(shape, scale)

class GammaModel final : public Model {
public:
    std::string name() const override { return "gamma"; }
    int dim() const override { return 2; }
    Box domain() const override {
        Box b;
        b.lower = Vec::Constant(2, 0.0);
        b.upper = Vec::Constant(2, kInf);
        return b;
    }
    bool in_domain(const Vec& t) const override { return t[0] > 0.0 && t[1] > 0.0; }

    double log_density(const Dataset& z, const Vec& t) const override {
        double k = t[0], s = t[1];
        if (k <= 0.0 || s <= 0.0) return -kInf;
        double out = 0.0;
        for (const auto& r : z.rows) {
            double x = r[0];
            if (x <= 0.0) return -kInf;
            out += (k - 1.0) * std::log(x) - x / s;
        }
        out -= z.n() * (k * std::log(s) + lgamma_fn(k));
        return out;
    }

    Dataset simulate(const Vec& t, const Dataset& like, Rng& rng) const override {
        Dataset out;
        out.columns = like.columns;
        for (int i = 0; i < like.n(); ++i) out.rows.push_back({rng.gamma(t[0], t[1])});
        return out;
    }

    // Newton on the digamma equation for the shape; scale = mean / shape.
    Vec mle(const Dataset& z, MleReport* report, const Vec* init) const override {
        z.validate();
        double n = z.n();
        double mean = 0.0, meanlog = 0.0;
        for (const auto& r : z.rows) {
            require(r[0] > 0.0, ErrorCode::invalid_argument, "gamma MLE: nonpositive datum");
            mean += r[0];
            meanlog += std::log(r[0]);
        }
        mean /= n;
        meanlog /= n;
        double gap = std::log(mean) - meanlog;  // > 0 unless all values equal
        if (gap <= 1e-13)
            fail(ErrorCode::boundary_mle, "gamma MLE: degenerate sample (all values equal)");
        double k = init ? (*init)[0]
                        : (3.0 - gap + std::sqrt((gap - 3.0) * (gap - 3.0) + 24.0 * gap)) /
                              (12.0 * gap);
        MleReport rep;
        bool ok = false;
        for (int it = 0; it < 500; ++it) {
            double g = std::log(k) - digamma(k) - gap;
            double dg = 1.0 / k - trigamma(k);
            double step = g / dg;
            double knew = k - step;
            if (knew <= 0.0) knew = k / 2.0;
            rep.iterations = it + 1;
            if (std::abs(knew - k) <= 1e-12 * std::max(1.0, k)) {
                k = knew;
                ok = true;
                break;
            }
            k = knew;
        }
        rep.converged = ok;
        if (!ok) fail(ErrorCode::nonconvergence, "gamma MLE: shape iteration did not converge");
        if (report) *report = rep;
        Vec t(2);
        t << k, mean / k;
        return t;
    }
};

// ---------------------------------------------------------------------------
// Binomial regression with logistic link, fixed trial size

class BinomialLogisticModel final : public Model {
public:
    explicit BinomialLogisticModel(int trials) : trials_(trials) {
        require(trials >= 1, ErrorCode::invalid_argument, "trial size must be >= 1");
    }
    std::string name() const override { return "binomial-logistic"; }
    int dim() const override { return 2; }
    Box domain() const override {
        Box b;
        b.lower = Vec::Constant(2, -kInf);
        b.upper = Vec::Constant(2, kInf);
        return b;
    }

    double log_density(const Dataset& z, const Vec& t) const override {
        double out = 0.0;
        for (const auto& r : z.rows) {
            double eta = t[0] + t[1] * r[0];
            double y = r[1];
            double log1pe = std::max(eta, 0.0) + std::log1p(std::exp(-std::abs(eta)));
            out += std::lgamma(trials_ + 1.0) - std::lgamma(y + 1.0) -
                   std::lgamma(trials_ - y + 1.0) + y * eta - trials_ * log1pe;
        }
        return out;
    }

    Dataset simulate(const Vec& t, const Dataset& like, Rng& rng) const override {
        Dataset out;
        out.columns = like.columns;
        for (const auto& r : like.rows) {
            double p = 1.0 / (1.0 + std::exp(-(t[0] + t[1] * r[0])));
            out.rows.push_back({r[0], static_cast<double>(rng.binomial(trials_, p))});
        }
        return out;
    }

    Vec mle(const Dataset& z, MleReport* report, const Vec* init) const override {
        z.validate();
        require(z.width() == 2, ErrorCode::invalid_argument,
                "binomial-logistic expects (x, y) rows");
        Vec t = init ? *init : Vec::Zero(2);
        MleReport rep;
        double ll = log_density(z, t);
        bool ok = false;
        for (int it = 0; it < 500; ++it) {
            Vec grad = Vec::Zero(2);
            Mat hess = Mat::Zero(2, 2);
            for (const auto& r : z.rows) {
                double eta = t[0] + t[1] * r[0];
                double p = 1.0 / (1.0 + std::exp(-eta));
                double w = trials_ * p * (1.0 - p);
                Vec xi(2);
                xi << 1.0, r[0];
                grad += (r[1] - trials_ * p) * xi;
                hess += w * xi * xi.transpose();
            }
            rep.iterations = it + 1;
            if (grad.norm() <= 1e-6 * std::max(1.0, std::abs(ll))) {
                ok = true;
                break;
            }
            Eigen::LDLT<Mat> ldlt(hess);
            if (ldlt.info() != Eigen::Success || hess.determinant() < 1e-12) {
                rep.boundary = true;
                rep.message = "separation: information matrix near-singular";
                break;
            }
            Vec step = ldlt.solve(grad);
            // step halving
            double scale = 1.0;
            for (int h = 0; h < 30; ++h) {
                double llnew = log_density(z, t + scale * step);
                if (llnew >= ll) {
                    t += scale * step;
                    ll = llnew;
                    break;
                }
                scale *= 0.5;
            }
            if (t.cwiseAbs().maxCoeff() > 1e3) {
                rep.boundary = true;
                rep.message = "separation: estimate diverging";
                break;
            }
        }
        rep.converged = ok;
        if (!ok && !rep.boundary)
            fail(ErrorCode::nonconvergence, "binomial-logistic MLE did not converge");
        if (report) *report = rep;
        return t;
    }

private:
    int trials_;
};

// ---------------------------------------------------------------------------
// Multinomial(K): dataset is a single row of K counts

class MultinomialModel final : public Model {
public:
    explicit MultinomialModel(int k) : k_(k) {
        require(k >= 2, ErrorCode::invalid_argument, "multinomial needs k >= 2");
    }
    std::string name() const override { return "multinomial"; }
    int dim() const override { return k_; }
    Box domain() const override {
        Box b;
        b.lower = Vec::Constant(k_, 0.0);
        b.upper = Vec::Constant(k_, 1.0);
        return b;
    }
    bool in_domain(const Vec& t) const override {
        if (t.minCoeff() < 0.0) return false;
        return std::abs(t.sum() - 1.0) <= 1e-9;
    }

    static std::vector<double> counts_of(const Dataset& z) {
        z.validate();
        if (z.n() == 1) return z.rows.front();
        // one count per row also accepted (CSV fixture layout)
        std::vector<double> c;
        for (const auto& r : z.rows) c.push_back(r[0]);
        return c;
    }

    double log_density(const Dataset& z, const Vec& t) const override {
        auto counts = counts_of(z);
        require(static_cast<int>(counts.size()) == k_, ErrorCode::dimension_mismatch,
                "multinomial: count vector length");
        double n = std::accumulate(counts.begin(), counts.end(), 0.0);
        double out = std::lgamma(n + 1.0);
        for (int i = 0; i < k_; ++i) {
            double zk = counts[i];
            out -= std::lgamma(zk + 1.0);
            if (zk > 0.0) {
                if (t[i] <= 0.0) return -kInf;
                out += zk * std::log(t[i]);
            }
            // zk == 0 contributes 0 (the 0^0 := 1 convention)
        }
        return out;
    }

    Dataset simulate(const Vec& t, const Dataset& like, Rng& rng) const override {
        auto counts = counts_of(like);
        int n = static_cast<int>(std::llround(std::accumulate(counts.begin(), counts.end(), 0.0)));
        std::vector<double> draw(k_, 0.0);
        double rest = 1.0;
        int remaining = n;
        for (int i = 0; i < k_ - 1 && remaining > 0; ++i) {
            double p = std::min(1.0, std::max(0.0, t[i] / rest));
            int c = rng.binomial(remaining, p);
            draw[i] = c;
            remaining -= c;
            rest -= t[i];
            if (rest <= 0.0) break;
        }
        draw[k_ - 1] = remaining;
        Dataset out;
        out.columns = like.columns;
        out.rows.push_back(draw);
        return out;
    }

    Vec mle(const Dataset& z, MleReport* report, const Vec*) const override {
        auto counts = counts_of(z);
        require(static_cast<int>(counts.size()) == k_, ErrorCode::dimension_mismatch,
                "multinomial: count vector length");
        double n = std::accumulate(counts.begin(), counts.end(), 0.0);
        require(n > 0.0, ErrorCode::invalid_argument, "multinomial: zero total count");
        Vec t(k_);
        for (int i = 0; i < k_; ++i) t[i] = counts[i] / n;
        if (report) *report = MleReport{};
        return t;
    }

private:
    int k_;
};

// ---------------------------------------------------------------------------
// Simple linear regression (beta0, beta1, sigma^2), fixed covariates

class LinearRegressionModel final : public Model {
public:
    std::string name() const override { return "linear-regression"; }
    int dim() const override { return 3; }
    Box domain() const override {
        Box b;
        b.lower = Vec(3); b.upper = Vec(3);
        b.lower << -kInf, -kInf, 0.0;
        b.upper << kInf, kInf, kInf;
        return b;
    }
    bool in_domain(const Vec& t) const override { return t[2] > 0.0; }

    double log_density(const Dataset& z, const Vec& t) const override {
        double s2 = t[2];
        if (s2 <= 0.0) return -kInf;
        double rss = 0.0;
        for (const auto& r : z.rows) {
            double e = r[1] - t[0] - t[1] * r[0];
            rss += e * e;
        }
        double n = z.n();
        return -0.5 * n * (kLog2Pi + std::log(s2)) - rss / (2.0 * s2);
    }

    Dataset simulate(const Vec& t, const Dataset& like, Rng& rng) const override {
        Dataset out;
        out.columns = like.columns;
        double sd = std::sqrt(t[2]);
        for (const auto& r : like.rows)
            out.rows.push_back({r[0], t[0] + t[1] * r[0] + sd * rng.normal()});
        return out;
    }

    Vec mle(const Dataset& z, MleReport* report, const Vec*) const override {
        z.validate();
        require(z.width() == 2, ErrorCode::invalid_argument,
                "linear-regression expects (x, y) rows");
        double n = z.n();
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (const auto& r : z.rows) {
            sx += r[0];
            sy += r[1];
            sxx += r[0] * r[0];
            sxy += r[0] * r[1];
        }
        double det = n * sxx - sx * sx;
        require(std::abs(det) > 1e-12 * std::max(1.0, n * sxx), ErrorCode::singular_matrix,
                "linear-regression MLE: singular design");
        double b1 = (n * sxy - sx * sy) / det;
        double b0 = (sy - b1 * sx) / n;
        double rss = 0.0;
        for (const auto& r : z.rows) {
            double e = r[1] - b0 - b1 * r[0];
            rss += e * e;
        }
        double s2 = rss / n;
        if (s2 <= 0.0)
            fail(ErrorCode::boundary_mle, "linear-regression MLE: zero residual variance");
        if (report) *report = MleReport{};
        Vec t(3);
        t << b0, b1, s2;
        return t;
    }
};

} // namespace

std::vector<std::string> builtin_model_names() {
    return {"normal", "gamma", "binomial-logistic", "multinomial", "linear-regression"};
}

std::unique_ptr<Model> make_normal_model() { return std::make_unique<NormalModel>(); }
std::unique_ptr<Model> make_normal_fixed_sigma_model(double sigma) {
    return std::make_unique<NormalFixedSigmaModel>(sigma);
}
std::unique_ptr<Model> make_gamma_model() { return std::make_unique<GammaModel>(); }
std::unique_ptr<Model> make_binomial_logistic_model(int trials) {
    return std::make_unique<BinomialLogisticModel>(trials);
}
std::unique_ptr<Model> make_multinomial_model(int k) {
    return std::make_unique<MultinomialModel>(k);
}
std::unique_ptr<Model> make_linear_regression_model() {
    return std::make_unique<LinearRegressionModel>();
}

std::unique_ptr<Model> make_model(const std::string& name,
                                  const std::map<std::string, double>& hyper) {
    auto get = [&](const std::string& key, double fallback) {
        auto it = hyper.find(key);
        return it == hyper.end() ? fallback : it->second;
    };
    if (name == "normal") return make_normal_model();
    if (name == "normal-fixed-sigma") return make_normal_fixed_sigma_model(get("sigma", 1.0));
    if (name == "gamma") return make_gamma_model();
    if (name == "binomial-logistic")
        return make_binomial_logistic_model(static_cast<int>(get("trials", 6)));
    if (name == "multinomial") {
        auto it = hyper.find("k");
        require(it != hyper.end(), ErrorCode::invalid_argument,
                "multinomial model needs hyperparameter k");
        return make_multinomial_model(static_cast<int>(it->second));
    }
    if (name == "linear-regression") return make_linear_regression_model();
    fail(ErrorCode::invalid_argument, "unknown model: " + name);
}

} // namespace possim
