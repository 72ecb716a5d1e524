#pragma once

#include "possim/common.hpp"
#include "possim/rng.hpp"

#include <functional>
#include <optional>

namespace possim {

struct Box {
    Vec lower;
    Vec upper;

    int dim() const { return static_cast<int>(lower.size()); }
    bool contains(const Vec& x, double slack = 0.0) const {
        for (int i = 0; i < dim(); ++i)
            if (x[i] < lower[i] - slack || x[i] > upper[i] + slack) return false;
        return true;
    }
    Vec clamp(const Vec& x) const {
        Vec y = x;
        for (int i = 0; i < dim(); ++i)
            y[i] = std::min(std::max(y[i], lower[i]), upper[i]);
        return y;
    }
    Vec sample(Rng& rng) const {
        Vec x(dim());
        for (int i = 0; i < dim(); ++i) x[i] = rng.uniform(lower[i], upper[i]);
        return x;
    }
};

struct MaximizeResult {
    Vec argmax;
    double value = -std::numeric_limits<double>::infinity();
    bool found = false;
};

struct MaximizeOptions {
    int restarts = 16;
    double tol = 1e-8;
    int max_iter = 2000;
    std::uint64_t seed = 20240915ULL;
};

// Box-constrained multi-start Nelder-Mead. Points outside the box (or where
// the objective is non-finite) score -inf, which the simplex walks away from.
MaximizeResult maximize(const std::function<double(const Vec&)>& f, const Box& box,
                        const MaximizeOptions& opts = {},
                        const std::vector<Vec>& extra_starts = {});

// Largest t in [lo, hi] with pred(t) true, assuming pred is true on [lo, t*]
// and false after; returns lo if pred(lo) is false.
double bisect_sup(const std::function<bool(double)>& pred, double lo, double hi,
                  double tol = 1e-6);

} // namespace possim
