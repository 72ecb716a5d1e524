#include "possim/runner.hpp"

#include "possim/credal.hpp"
#include "possim/diagnostics.hpp"
#include "possim/im.hpp"
#include "possim/io.hpp"
#include "possim/marginal.hpp"
#include "possim/parallel.hpp"
#include "possim/predict.hpp"

#include <json.hpp>

#include <cstdio>
#include <iostream>

namespace possim {

namespace {

using nlohmann::json;

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

[[noreturn]] void bad_config(const std::string& what) { throw SchemaError(what); }

const json& need(const json& j, const char* key) {
    if (!j.contains(key)) bad_config(std::string("config missing field '") + key + "'");
    return j.at(key);
}

std::vector<Vec> make_grid(const json& axes_json, int expected_dim) {
    if (!axes_json.is_array() || axes_json.empty())
        bad_config("grid must be a non-empty array");
    if (expected_dim > 0 && static_cast<int>(axes_json.size()) != expected_dim)
        bad_config("grid dimension does not match the parameter dimension");
    std::vector<std::vector<double>> axes;
    for (const auto& dim : axes_json) {
        double lo = need(dim, "min").get<double>();
        double hi = need(dim, "max").get<double>();
        int steps = need(dim, "steps").get<int>();
        if (steps < 2) bad_config("grid steps must be >= 2");
        if (!(hi > lo)) bad_config("grid max must exceed min");
        std::vector<double> axis(static_cast<std::size_t>(steps));
        for (int i = 0; i < steps; ++i)
            axis[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (steps - 1);
        axes.push_back(std::move(axis));
    }
    std::size_t total = 1;
    for (const auto& a : axes) {
        total *= a.size();
        if (total > 2000000) bad_config("grid has more than 2e6 points");
    }
    std::vector<Vec> out;
    out.reserve(total);
    std::vector<std::size_t> idx(axes.size(), 0);
    for (std::size_t k = 0; k < total; ++k) {
        Vec p(static_cast<int>(axes.size()));
        std::size_t rem = k;
        for (std::size_t d = axes.size(); d-- > 0;) {
            p[static_cast<int>(d)] = axes[d][rem % axes[d].size()];
            rem /= axes[d].size();
        }
        out.push_back(p);
    }
    return out;
}

MonteCarloConfig parse_mc(const json& cfg, const std::string* seed_override) {
    const json& mc = need(cfg, "mc");
    MonteCarloConfig out;
    out.M = need(mc, "M").get<std::size_t>();
    if (!mc.contains("seed")) bad_config("mc.seed is required for stochastic commands");
    out.seed = mc.at("seed").get<std::uint64_t>();
    if (mc.contains("parallel")) out.parallel = mc.at("parallel").get<bool>();
    if (seed_override) {
        try {
            out.seed = std::stoull(*seed_override);
        } catch (const std::exception&) {
            bad_config("POSSIM_SEED must be a decimal integer");
        }
    }
    if (out.M < 100) bad_config("mc.M must be >= 100");
    return out;
}

std::unique_ptr<Model> parse_model(const json& cfg) {
    const json& m = need(cfg, "model");
    std::string name = need(m, "name").get<std::string>();
    std::map<std::string, double> hyper;
    if (m.contains("hyper"))
        for (auto it = m.at("hyper").begin(); it != m.at("hyper").end(); ++it)
            hyper[it.key()] = it.value().get<double>();
    try {
        return make_model(name, hyper);
    } catch (const Error& e) {
        bad_config(e.what());
    }
}

FeatureMap parse_feature(const json& cfg, const Model& model) {
    const json& f = need(cfg, "feature");
    std::string type = need(f, "type").get<std::string>();
    if (type == "coordinate")
        return FeatureMap::coordinate(need(f, "index").get<int>(), model.domain());
    if (type == "linear") {
        auto coeffs = need(f, "coefficients").get<std::vector<double>>();
        Vec c(static_cast<int>(coeffs.size()));
        for (std::size_t i = 0; i < coeffs.size(); ++i) c[static_cast<int>(i)] = coeffs[i];
        return FeatureMap::linear(c, model.domain());
    }
    if (type == "product2") return FeatureMap::product2(model.domain());
    if (type == "block-sums")
        return FeatureMap::block_sums(need(f, "blocks").get<std::vector<int>>());
    bad_config("unknown feature type '" + type + "'");
}

void check_expected_mle(const json& cfg, const Model& model, const Dataset& z) {
    if (!cfg.contains("expect_mle")) return;
    const json& e = cfg.at("expect_mle");
    auto values = need(e, "values").get<std::vector<double>>();
    double tol = e.contains("tol") ? e.at("tol").get<double>() : 0.02;
    Vec hat = model.mle(z);
    require(static_cast<int>(values.size()) == hat.size(), ErrorCode::fixture_mismatch,
            "expect_mle: dimension mismatch");
    for (std::size_t i = 0; i < values.size(); ++i)
        require(std::abs(hat[static_cast<int>(i)] - values[i]) <= tol,
                ErrorCode::fixture_mismatch,
                "expect_mle: fitted value differs from the recorded fixture statistic");
}

std::vector<std::string> meta_lines(const std::string& config_text, std::uint64_t seed) {
    return {"# possim config_hash=" + config_hash_hex(config_text) +
            " seed=" + std::to_string(seed)};
}

std::vector<double> parse_alphas(const json& cfg) {
    auto alphas = need(cfg, "alphas").get<std::vector<double>>();
    if (alphas.empty()) bad_config("alphas must be non-empty");
    for (double a : alphas)
        if (a < 0.0 || a > 1.0) bad_config("alphas must lie in [0,1]");
    return alphas;
}

std::string out_file(const json& cfg, const std::string& out_path) {
    if (!out_path.empty()) return out_path;
    if (cfg.contains("out")) return cfg.at("out").get<std::string>();
    bad_config("no output path: pass --out or set \"out\" in the config");
}

std::vector<std::string> theta_columns(int dim) {
    std::vector<std::string> cols;
    for (int i = 0; i < dim; ++i) cols.push_back("theta_" + std::to_string(i));
    return cols;
}

void cmd_contour(const json& cfg, const std::string& config_text,
                 const std::string& out_path, const std::string* seed_override,
                 RunResult& result) {
    auto model = parse_model(cfg);
    Dataset z = read_csv(need(cfg, "dataset").get<std::string>());
    check_expected_mle(cfg, *model, z);
    MonteCarloConfig mc = parse_mc(cfg, seed_override);
    std::vector<Vec> grid = make_grid(need(cfg, "grid"), model->dim());

    std::vector<std::string> cols = theta_columns(model->dim());
    cols.push_back("plausibility");
    std::vector<std::vector<double>> rows;
    for (const Vec& theta : grid) {
        double pl = model->in_domain(theta) ? contour_mc(*model, z, theta, mc) : 0.0;
        std::vector<double> row(theta.data(), theta.data() + theta.size());
        row.push_back(pl);
        rows.push_back(std::move(row));
    }
    std::string path = out_file(cfg, out_path);
    write_csv(path, cols, rows, meta_lines(config_text, mc.seed));
    result.artifacts.push_back(path);
}

void cmd_region(const json& cfg, const std::string& config_text,
                const std::string& out_path, const std::string* seed_override,
                RunResult& result) {
    auto model = parse_model(cfg);
    Dataset z = read_csv(need(cfg, "dataset").get<std::string>());
    check_expected_mle(cfg, *model, z);
    MonteCarloConfig mc = parse_mc(cfg, seed_override);
    std::vector<Vec> grid = make_grid(need(cfg, "grid"), model->dim());
    std::vector<double> alphas = parse_alphas(cfg);

    std::vector<std::string> cols = theta_columns(model->dim());
    cols.push_back("alpha");
    cols.push_back("member");
    std::vector<std::vector<double>> rows;
    for (const Vec& theta : grid) {
        double pl = model->in_domain(theta) ? contour_mc(*model, z, theta, mc) : 0.0;
        for (double alpha : alphas) {
            std::vector<double> row(theta.data(), theta.data() + theta.size());
            row.push_back(alpha);
            row.push_back(pl >= alpha ? 1.0 : 0.0);
            rows.push_back(std::move(row));
        }
    }
    std::string path = out_file(cfg, out_path);
    write_csv(path, cols, rows, meta_lines(config_text, mc.seed));
    result.artifacts.push_back(path);
}

void cmd_marginal(const json& cfg, const std::string& config_text,
                  const std::string& out_path, const std::string* seed_override,
                  RunResult& result) {
    auto model = parse_model(cfg);
    Dataset z = read_csv(need(cfg, "dataset").get<std::string>());
    check_expected_mle(cfg, *model, z);
    MonteCarloConfig mc = parse_mc(cfg, seed_override);
    FeatureMap feature = parse_feature(cfg, *model);
    std::vector<Vec> grid = make_grid(need(cfg, "grid"), feature.feature_dim);

    ProfileContourConfig pcfg;
    pcfg.mc = mc;
    if (cfg.contains("fiber_probes"))
        pcfg.fiber_probe_count = cfg.at("fiber_probes").get<int>();

    std::vector<std::string> cols;
    for (int i = 0; i < feature.feature_dim; ++i) cols.push_back("phi_" + std::to_string(i));
    cols.push_back("extension");
    cols.push_back("profile");
    std::vector<std::vector<double>> rows;
    for (const Vec& phi : grid) {
        // Extension: the joint contour is a monotone transform of the
        // relative likelihood, so its fiber supremum sits at the fiber's
        // likelihood maximizer.
        double ext = 0.0;
        try {
            Vec lambda;
            double rpr = profile_relative_likelihood(*model, z, feature, phi,
                                                     pcfg.outer_opts, &lambda);
            if (rpr > 0.0) {
                Vec theta = feature.lift(phi, lambda);
                if (model->in_domain(theta)) ext = contour_mc(*model, z, theta, mc);
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::empty_fiber) throw;
        }
        double prof = profile_contour(*model, z, feature, phi, pcfg);
        std::vector<double> row(phi.data(), phi.data() + phi.size());
        row.push_back(ext);
        row.push_back(prof);
        rows.push_back(std::move(row));
    }
    std::string path = out_file(cfg, out_path);
    write_csv(path, cols, rows, meta_lines(config_text, mc.seed));
    result.artifacts.push_back(path);
}

void cmd_sample(const json& cfg, const std::string& config_text,
                const std::string& out_path, const std::string* seed_override,
                RunResult& result) {
    auto model = parse_model(cfg);
    Dataset z = read_csv(need(cfg, "dataset").get<std::string>());
    check_expected_mle(cfg, *model, z);
    MonteCarloConfig mc = parse_mc(cfg, seed_override);

    std::string which = cfg.contains("contour")
                            ? cfg.at("contour").get<std::string>()
                            : std::string("wilks");
    PossibilityContour contour;
    if (which == "wilks") {
        contour = make_wilks_contour(*model, z);
    } else if (which == "mc") {
        contour = make_mc_contour(*model, z, mc);
    } else {
        bad_config("contour must be 'wilks' or 'mc'");
    }

    std::vector<double> levels;
    if (cfg.contains("levels")) {
        levels = cfg.at("levels").get<std::vector<double>>();
    } else {
        for (int i = 1; i <= 19; ++i) levels.push_back(i / 20.0);
    }
    int probes = cfg.contains("probes") ? cfg.at("probes").get<int>() : 16;
    std::size_t draws = cfg.contains("draws") ? cfg.at("draws").get<std::size_t>() : mc.M;

    EllipsoidApprox e = calibrate_ellipsoid(contour, *model, z, levels, probes, mc.seed);
    CredalSampleSet samples = sample_inner_approx(e, draws, mc.seed);

    std::vector<std::string> cols{"alpha"};
    for (const auto& c : theta_columns(model->dim())) cols.push_back(c);
    std::vector<std::vector<double>> rows;
    for (const CredalDraw& d : samples.draws) {
        std::vector<double> row{d.alpha};
        for (int i = 0; i < d.point.size(); ++i) row.push_back(d.point[i]);
        rows.push_back(std::move(row));
    }
    std::string path = out_file(cfg, out_path);
    write_csv(path, cols, rows, meta_lines(config_text, mc.seed));
    result.artifacts.push_back(path);
}

void cmd_predict(const json& cfg, const std::string& config_text,
                 const std::string& out_path, RunResult& result) {
    Dataset z = read_csv(need(cfg, "dataset").get<std::string>());
    std::vector<Vec> grid = make_grid(need(cfg, "grid"), 0);
    int column = 0;
    if (cfg.contains("rho")) {
        const json& r = cfg.at("rho");
        std::string type = need(r, "type").get<std::string>();
        if (type != "mean-distance") bad_config("unknown rho type '" + type + "'");
        if (r.contains("column")) column = r.at("column").get<int>();
    }
    ConformityRanking rho = ConformityRanking::mean_distance(column);
    double alpha = cfg.contains("alpha") ? cfg.at("alpha").get<double>() : -1.0;

    std::vector<std::string> cols{"candidate", "transducer"};
    if (alpha >= 0.0) cols.push_back("member");
    std::vector<std::vector<double>> rows;
    for (const Vec& p : grid) {
        std::vector<double> candidate(z.width(), 0.0);
        if (p.size() != 1 || z.width() < 1) bad_config("predict expects a 1-d grid");
        candidate[static_cast<std::size_t>(column)] = p[0];
        double t = conformal_transducer(z, candidate, rho);
        std::vector<double> row{p[0], t};
        if (alpha >= 0.0) row.push_back(t >= alpha ? 1.0 : 0.0);
        rows.push_back(std::move(row));
    }
    std::string path = out_file(cfg, out_path);
    write_csv(path, cols, rows, meta_lines(config_text, 0));
    result.artifacts.push_back(path);
}

void cmd_riskim(const json& cfg, const std::string& config_text,
                const std::string& out_path, const std::string* seed_override,
                RunResult& result) {
    Dataset z = read_csv(need(cfg, "dataset").get<std::string>());
    const json& lj = need(cfg, "loss");
    std::string kind = need(lj, "kind").get<std::string>();
    LossFunction loss;
    if (kind == "squared-error") {
        loss = LossFunction::squared_error_location();
    } else if (kind == "check") {
        loss = LossFunction::check_location(need(lj, "u").get<double>());
    } else if (kind == "zero-one") {
        loss = LossFunction::zero_one_linear_classifier();
    } else {
        bad_config("unknown loss kind '" + kind + "'");
    }

    const json& dj = need(cfg, "domain");
    if (!dj.is_array() || dj.empty()) bad_config("domain must be a non-empty array");
    Box domain{Vec(dj.size()), Vec(dj.size())};
    for (std::size_t i = 0; i < dj.size(); ++i) {
        domain.lower[static_cast<int>(i)] = need(dj[i], "min").get<double>();
        domain.upper[static_cast<int>(i)] = need(dj[i], "max").get<double>();
    }

    RiskImConfig rcfg;
    MonteCarloConfig mc = parse_mc(cfg, seed_override);
    rcfg.B = cfg.contains("B") ? cfg.at("B").get<std::size_t>() : mc.M;
    rcfg.seed = mc.seed;

    std::vector<Vec> grid = make_grid(need(cfg, "grid"), domain.dim());
    std::vector<std::string> cols = theta_columns(domain.dim());
    cols.push_back("plausibility");
    std::vector<std::vector<double>> rows;
    for (const Vec& theta : grid) {
        double pl = risk_im_contour(z, loss, theta, domain, rcfg);
        std::vector<double> row(theta.data(), theta.data() + theta.size());
        row.push_back(pl);
        rows.push_back(std::move(row));
    }
    std::string path = out_file(cfg, out_path);
    write_csv(path, cols, rows, meta_lines(config_text, rcfg.seed));
    result.artifacts.push_back(path);
}

void cmd_diagnose_validity(const json& cfg, const std::string& config_text,
                           const std::string& out_path, const std::string* seed_override,
                           RunResult& result) {
    auto model = parse_model(cfg);
    Dataset z = read_csv(need(cfg, "dataset").get<std::string>());
    MonteCarloConfig mc = parse_mc(cfg, seed_override);
    std::vector<double> alphas = parse_alphas(cfg);
    std::size_t reps = cfg.contains("reps") ? cfg.at("reps").get<std::size_t>() : 500;

    std::vector<Vec> thetas;
    for (const auto& tj : need(cfg, "theta")) {
        auto v = tj.get<std::vector<double>>();
        if (static_cast<int>(v.size()) != model->dim())
            bad_config("theta entries must match the model dimension");
        Vec t(model->dim());
        for (std::size_t i = 0; i < v.size(); ++i) t[static_cast<int>(i)] = v[i];
        thetas.push_back(t);
    }
    if (thetas.empty()) bad_config("theta list must be non-empty");

    ValidityTable table = validity_diagnostic(*model, z, thetas, alphas, reps, mc);
    std::vector<std::string> cols{"theta_index", "alpha", "frequency", "bound", "pass"};
    std::vector<std::vector<double>> rows;
    for (const ValidityCell& c : table.cells)
        rows.push_back({static_cast<double>(c.theta_index), c.alpha, c.frequency, c.bound,
                        c.pass ? 1.0 : 0.0});
    std::string path = out_file(cfg, out_path);
    write_csv(path, cols, rows, meta_lines(config_text, mc.seed));
    result.artifacts.push_back(path);
    if (!table.all_pass) result.message = "validity diagnostic found exceedances";
}

void cmd_diagnose_fcr(const json& cfg, const std::string& config_text,
                      const std::string& out_path, const std::string* seed_override,
                      RunResult& result) {
    auto model = parse_model(cfg);
    Dataset like = read_csv(need(cfg, "dataset").get<std::string>());
    MonteCarloConfig mc = parse_mc(cfg, seed_override);
    std::vector<double> alphas = parse_alphas(cfg);

    auto tv = need(cfg, "theta_true").get<std::vector<double>>();
    if (static_cast<int>(tv.size()) != model->dim())
        bad_config("theta_true must match the model dimension");
    Vec theta_true(model->dim());
    for (std::size_t i = 0; i < tv.size(); ++i) theta_true[static_cast<int>(i)] = tv[i];

    const json& hj = need(cfg, "hypothesis");
    std::string type = need(hj, "type").get<std::string>();
    if (type != "root-gt") bad_config("unknown hypothesis type '" + type + "'");
    double c = need(hj, "c").get<double>();
    auto in_h = [c](const Vec& theta) {
        if (theta[1] == 0.0) return false;
        return -theta[0] / theta[1] > c;
    };
    HypothesisSet H;
    H.contains = in_h;
    H.dimension = model->dim();
    H.description = "root of the regression line greater than " + std::to_string(c);
    HypothesisSet complement = HypothesisSet::from_box(
        model->domain(), [in_h](const Vec& t) { return !in_h(t); }, "complement");

    FcrConfig fcfg;
    fcfg.seed = mc.seed;
    if (cfg.contains("reps")) fcfg.reps = cfg.at("reps").get<std::size_t>();
    if (cfg.contains("posterior_draws"))
        fcfg.posterior_draws = cfg.at("posterior_draws").get<std::size_t>();
    FcrCurve bayes = fcr_estimate(*model, like, make_bayes_regression_procedure(), H,
                                  theta_true, alphas, fcfg);

    ImFcrConfig icfg;
    icfg.reps = fcfg.reps;
    icfg.mc = mc;
    icfg.seed = mc.seed;
    FcrCurve im = im_fcr_estimate(*model, like, H, complement, theta_true, alphas, icfg);

    std::vector<std::string> cols{"alpha", "bayes_fcr", "im_fcr"};
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < alphas.size(); ++i)
        rows.push_back({alphas[i], bayes.rates[i], im.rates[i]});
    std::string path = out_file(cfg, out_path);
    write_csv(path, cols, rows, meta_lines(config_text, mc.seed));
    result.artifacts.push_back(path);
}

} // namespace

RunResult run_config_json(const std::string& config_text, const std::string& out_path,
                          int threads, bool verbose,
                          const std::string* seed_override) {
    RunResult result;
    if (threads > 0) set_thread_count(threads);
    try {
        json cfg = json::parse(config_text);
        if (!cfg.is_object()) bad_config("config must be a JSON object");
        std::string command = need(cfg, "command").get<std::string>();
        if (verbose) std::cerr << "possim: running '" << command << "'\n";

        if (command == "contour") {
            cmd_contour(cfg, config_text, out_path, seed_override, result);
        } else if (command == "region") {
            cmd_region(cfg, config_text, out_path, seed_override, result);
        } else if (command == "marginal") {
            cmd_marginal(cfg, config_text, out_path, seed_override, result);
        } else if (command == "sample") {
            cmd_sample(cfg, config_text, out_path, seed_override, result);
        } else if (command == "predict") {
            cmd_predict(cfg, config_text, out_path, result);
        } else if (command == "riskim") {
            cmd_riskim(cfg, config_text, out_path, seed_override, result);
        } else if (command == "diagnose-validity") {
            cmd_diagnose_validity(cfg, config_text, out_path, seed_override, result);
        } else if (command == "diagnose-fcr") {
            cmd_diagnose_fcr(cfg, config_text, out_path, seed_override, result);
        } else {
            bad_config("unknown command '" + command + "'");
        }
    } catch (const json::exception& e) {
        result.status = 2;
        result.message = std::string("config parse error: ") + e.what();
    } catch (const SchemaError& e) {
        result.status = 2;
        result.message = e.what();
    } catch (const Error& e) {
        switch (e.code()) {
            case ErrorCode::fixture_mismatch:
                result.status = 3;
                break;
            case ErrorCode::invalid_argument:
            case ErrorCode::dimension_mismatch:
            case ErrorCode::io_failure:
                result.status = 2;
                break;
            default:
                result.status = 4;
        }
        result.message = e.what();
    } catch (const std::exception& e) {
        result.status = 4;
        result.message = e.what();
    }
    return result;
}

} // namespace possim
