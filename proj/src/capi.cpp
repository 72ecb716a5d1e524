#include "possim/possim.h"

#include "possim/contour.hpp"
#include "possim/im.hpp"
#include "possim/io.hpp"
#include "possim/model.hpp"
#include "possim/parallel.hpp"
#include "possim/runner.hpp"

#include <json.hpp>

#include <cstring>
#include <string>

namespace {

thread_local std::string g_last_error;

possim_status status_of(const possim::Error& e) {
    switch (e.code()) {
        case possim::ErrorCode::io_failure:
            return POSSIM_ERR_IO;
        case possim::ErrorCode::fixture_mismatch:
            return POSSIM_ERR_FIXTURE;
        case possim::ErrorCode::invalid_argument:
        case possim::ErrorCode::dimension_mismatch:
            return POSSIM_ERR_ARGUMENT;
        default:
            return POSSIM_ERR_NUMERIC;
    }
}

template <typename Fn>
possim_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return POSSIM_OK;
    } catch (const possim::Error& e) {
        g_last_error = e.what();
        return status_of(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return POSSIM_ERR_NUMERIC;
    }
}

possim::Vec to_vec(const double* p, int n) {
    possim::Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = p[i];
    return v;
}

} // namespace

struct possim_dataset {
    possim::Dataset data;
};

struct possim_model {
    std::unique_ptr<possim::Model> model;
};

extern "C" {

const char* possim_last_error(void) { return g_last_error.c_str(); }

void possim_set_threads(int n) { possim::set_thread_count(n); }

possim_status possim_dataset_read_csv(const char* path, possim_dataset** out) {
    return guarded([&] {
        possim::require(path && out, possim::ErrorCode::invalid_argument,
                        "possim_dataset_read_csv: null argument");
        auto* d = new possim_dataset{possim::read_csv(path)};
        *out = d;
    });
}

possim_status possim_dataset_create(const double* values, size_t n, size_t width,
                                    possim_dataset** out) {
    return guarded([&] {
        possim::require(values && out && n > 0 && width > 0,
                        possim::ErrorCode::invalid_argument,
                        "possim_dataset_create: null or empty input");
        possim::Dataset d;
        for (size_t j = 0; j < width; ++j) d.columns.push_back("c" + std::to_string(j));
        d.rows.assign(n, std::vector<double>(width));
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < width; ++j) d.rows[i][j] = values[i * width + j];
        d.validate();
        *out = new possim_dataset{std::move(d)};
    });
}

void possim_dataset_free(possim_dataset* d) { delete d; }

size_t possim_dataset_rows(const possim_dataset* d) {
    return d ? static_cast<size_t>(d->data.n()) : 0;
}

size_t possim_dataset_cols(const possim_dataset* d) {
    return d ? static_cast<size_t>(d->data.width()) : 0;
}

possim_status possim_model_create(const char* name, const char* hyper_json,
                                  possim_model** out) {
    return guarded([&] {
        possim::require(name && out, possim::ErrorCode::invalid_argument,
                        "possim_model_create: null argument");
        std::map<std::string, double> hyper;
        if (hyper_json && std::strlen(hyper_json) > 0) {
            auto j = nlohmann::json::parse(hyper_json, nullptr, false);
            possim::require(j.is_object(), possim::ErrorCode::invalid_argument,
                            "possim_model_create: hyper_json must be a JSON object");
            for (auto it = j.begin(); it != j.end(); ++it)
                hyper[it.key()] = it.value().get<double>();
        }
        *out = new possim_model{possim::make_model(name, hyper)};
    });
}

void possim_model_free(possim_model* m) { delete m; }

int possim_model_dim(const possim_model* m) { return m ? m->model->dim() : 0; }

possim_status possim_mle(const possim_model* m, const possim_dataset* z,
                         double* theta_out) {
    return guarded([&] {
        possim::require(m && z && theta_out, possim::ErrorCode::invalid_argument,
                        "possim_mle: null argument");
        possim::Vec hat = m->model->mle(z->data);
        for (int i = 0; i < hat.size(); ++i) theta_out[i] = hat[i];
    });
}

possim_status possim_relative_likelihood(const possim_model* m, const possim_dataset* z,
                                         const double* theta, double* out) {
    return guarded([&] {
        possim::require(m && z && theta && out, possim::ErrorCode::invalid_argument,
                        "possim_relative_likelihood: null argument");
        *out = possim::relative_likelihood(*m->model, z->data,
                                           to_vec(theta, m->model->dim()));
    });
}

possim_status possim_contour_mc(const possim_model* m, const possim_dataset* z,
                                const double* theta, size_t M, uint64_t seed,
                                double* out) {
    return guarded([&] {
        possim::require(m && z && theta && out, possim::ErrorCode::invalid_argument,
                        "possim_contour_mc: null argument");
        possim::MonteCarloConfig cfg;
        cfg.M = M;
        cfg.seed = seed;
        possim::Vec t = to_vec(theta, m->model->dim());
        *out = m->model->in_domain(t) ? possim::contour_mc(*m->model, z->data, t, cfg)
                                      : 0.0;
    });
}

possim_status possim_contour_wilks(const possim_model* m, const possim_dataset* z,
                                   const double* theta, double* out) {
    return guarded([&] {
        possim::require(m && z && theta && out, possim::ErrorCode::invalid_argument,
                        "possim_contour_wilks: null argument");
        possim::Vec t = to_vec(theta, m->model->dim());
        *out = m->model->in_domain(t) ? possim::contour_wilks(*m->model, z->data, t)
                                      : 0.0;
    });
}

possim_status possim_gaussian_contour(const double* mean, const double* cov, int d,
                                      const double* y, double* out) {
    return guarded([&] {
        possim::require(mean && cov && y && out && d > 0,
                        possim::ErrorCode::invalid_argument,
                        "possim_gaussian_contour: null or empty input");
        possim::GaussianPossibilityParams p;
        p.mean = to_vec(mean, d);
        p.covariance = possim::Mat(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) p.covariance(i, j) = cov[i * d + j];
        *out = possim::gaussian_contour(p, to_vec(y, d));
    });
}

int possim_run_json(const char* config_json, const char* out_path, int threads,
                    int verbose, const char* seed_override) {
    if (!config_json) {
        g_last_error = "possim_run_json: null config";
        return 2;
    }
    std::string override_text;
    const std::string* override_ptr = nullptr;
    if (seed_override) {
        override_text = seed_override;
        override_ptr = &override_text;
    }
    possim::RunResult result = possim::run_config_json(
        config_json, out_path ? out_path : "", threads, verbose != 0, override_ptr);
    g_last_error = result.message;
    return result.status;
}

} // extern "C"
