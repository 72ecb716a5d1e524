#include "possim/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace possim {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_eval(const std::function<double(const Vec&)>& f, const Box& box, const Vec& x) {
    if (!box.contains(x)) return kNegInf;
    double v = f(x);
    return std::isfinite(v) ? v : kNegInf;
}

// One Nelder-Mead run from a given start; maximization.
void nelder_mead(const std::function<double(const Vec&)>& f, const Box& box, Vec start,
                 double tol, int max_iter, MaximizeResult& best) {
    const int d = box.dim();
    start = box.clamp(start);

    std::vector<Vec> simplex;
    std::vector<double> fv;
    simplex.push_back(start);
    fv.push_back(safe_eval(f, box, start));
    for (int i = 0; i < d; ++i) {
        Vec p = start;
        double span = box.upper[i] - box.lower[i];
        double step = std::isfinite(span) ? 0.05 * span : std::max(0.05 * std::abs(p[i]), 0.1);
        p[i] += step;
        if (!box.contains(p)) p[i] = start[i] - step;
        simplex.push_back(box.clamp(p));
        fv.push_back(safe_eval(f, box, simplex.back()));
    }

    auto order = [&] {
        std::vector<int> idx(simplex.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] > fv[b]; });
        std::vector<Vec> s2;
        std::vector<double> f2;
        for (int i : idx) {
            s2.push_back(simplex[i]);
            f2.push_back(fv[i]);
        }
        simplex.swap(s2);
        fv.swap(f2);
    };

    order();
    for (int iter = 0; iter < max_iter; ++iter) {
        if (std::isfinite(fv[0]) && std::isfinite(fv[d]) && fv[0] - fv[d] < tol) break;

        Vec centroid = Vec::Zero(d);
        for (int i = 0; i < d; ++i) centroid += simplex[i];
        centroid /= d;

        Vec worst = simplex[d];
        Vec refl = box.clamp(centroid + (centroid - worst));
        double fr = safe_eval(f, box, refl);
        if (fr > fv[0]) {
            Vec exp_ = box.clamp(centroid + 2.0 * (centroid - worst));
            double fe = safe_eval(f, box, exp_);
            if (fe > fr) {
                simplex[d] = exp_;
                fv[d] = fe;
            } else {
                simplex[d] = refl;
                fv[d] = fr;
            }
        } else if (fr > fv[d - 1]) {
            simplex[d] = refl;
            fv[d] = fr;
        } else {
            Vec contr = box.clamp(centroid + 0.5 * (worst - centroid));
            double fc = safe_eval(f, box, contr);
            if (fc > fv[d]) {
                simplex[d] = contr;
                fv[d] = fc;
            } else {
                for (int i = 1; i <= d; ++i) {
                    simplex[i] = box.clamp(simplex[0] + 0.5 * (simplex[i] - simplex[0]));
                    fv[i] = safe_eval(f, box, simplex[i]);
                }
            }
        }
        order();
    }

    if (fv[0] > best.value || !best.found) {
        best.value = fv[0];
        best.argmax = simplex[0];
        best.found = std::isfinite(fv[0]);
    }
}

} // namespace

MaximizeResult maximize(const std::function<double(const Vec&)>& f, const Box& box,
                        const MaximizeOptions& opts, const std::vector<Vec>& extra_starts) {
    require(box.lower.size() == box.upper.size(), ErrorCode::invalid_argument,
            "maximize: box bounds disagree in dimension");
    MaximizeResult best;
    Rng rng(opts.seed);

    // Unbounded coordinates get a finite sampling window around 0.
    Box sampling = box;
    for (int i = 0; i < box.dim(); ++i) {
        if (!std::isfinite(sampling.lower[i])) sampling.lower[i] = std::max(box.lower[i], -50.0);
        if (!std::isfinite(sampling.upper[i])) sampling.upper[i] = std::min(box.upper[i], 50.0);
    }

    for (const Vec& s : extra_starts) nelder_mead(f, box, s, opts.tol, opts.max_iter, best);
    for (int r = 0; r < opts.restarts; ++r)
        nelder_mead(f, box, sampling.sample(rng), opts.tol, opts.max_iter, best);
    return best;
}

double bisect_sup(const std::function<bool(double)>& pred, double lo, double hi, double tol) {
    if (!pred(lo)) return lo;
    if (pred(hi)) return hi;
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        (pred(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace possim
