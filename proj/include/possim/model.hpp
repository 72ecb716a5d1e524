#pragma once

#include "possim/common.hpp"
#include "possim/optim.hpp"
#include "possim/rng.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace possim {

struct Dataset {
    std::vector<std::vector<double>> rows;
    std::vector<std::string> columns;
    std::string label;

    int n() const { return static_cast<int>(rows.size()); }
    int width() const { return rows.empty() ? 0 : static_cast<int>(rows.front().size()); }
    void validate() const;

    static Dataset from_column(std::vector<double> values, std::string column = "value",
                               std::string label = "");
    static Dataset from_pairs(const std::vector<std::pair<double, double>>& xy,
                              std::string xcol = "x", std::string ycol = "y",
                              std::string label = "");
};

struct MleReport {
    bool converged = true;
    bool boundary = false;  // estimate on (or diverging toward) the domain boundary
    int iterations = 0;
    std::string message;
};

class Model {
public:
    virtual ~Model() = default;

    virtual std::string name() const = 0;
    virtual int dim() const = 0;
    virtual Box domain() const = 0;
    virtual bool in_domain(const Vec& theta) const { return domain().contains(theta, 1e-12); }

    virtual double log_density(const Dataset& z, const Vec& theta) const = 0;

    /// Draws a dataset with the same design (size, covariates) as `like`.
    virtual Dataset simulate(const Vec& theta, const Dataset& like, Rng& rng) const = 0;
    Dataset simulate(const Vec& theta, const Dataset& like, std::uint64_t seed) const {
        Rng rng(seed);
        return simulate(theta, like, rng);
    }

    virtual Vec mle(const Dataset& z, MleReport* report = nullptr,
                    const Vec* init = nullptr) const = 0;

    /// Observed information J at theta_hat; default is a central-difference
    /// Hessian of the negative log-likelihood.
    virtual Mat obs_information(const Dataset& z, const Vec& theta_hat) const;

    /// Whether the relative profile likelihood for the named feature is a
    /// pivot under every P_theta on the fiber (lets profile contours skip
    /// the outer supremum).
    virtual bool profile_pivotal(const std::string& feature_id) const {
        (void)feature_id;
        return false;
    }

    /// Closed-form relative profile likelihood for the named feature, when
    /// the model has one; empty otherwise (caller falls back to the generic
    /// fiber optimizer).
    virtual std::optional<double> closed_profile_relative_likelihood(
        const Dataset& z, const std::string& feature_id, const Vec& phi) const {
        (void)z;
        (void)feature_id;
        (void)phi;
        return std::nullopt;
    }
};

/// exp(log L_z(theta) - log L_z(theta_hat)); pass the MLE when already known
/// to avoid refitting.
double relative_likelihood(const Model& model, const Dataset& z, const Vec& theta,
                           const Vec* theta_hat = nullptr);

std::vector<std::string> builtin_model_names();

/// Factory for the builtin models. Hyperparameters: "trials" for
/// binomial-logistic (default 6), "k" for multinomial (required), "sigma"
/// for normal-fixed-sigma (default 1).
std::unique_ptr<Model> make_model(const std::string& name,
                                  const std::map<std::string, double>& hyper = {});

std::unique_ptr<Model> make_normal_model();
std::unique_ptr<Model> make_normal_fixed_sigma_model(double sigma);
std::unique_ptr<Model> make_gamma_model();
std::unique_ptr<Model> make_binomial_logistic_model(int trials = 6);
std::unique_ptr<Model> make_multinomial_model(int k);
std::unique_ptr<Model> make_linear_regression_model();

} // namespace possim
