#pragma once

// Thin wrappers around Boost.Math so callers never touch boost types directly.

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace possim {

// Regularized lower incomplete gamma route; relative error well below 1e-12.
inline double chisq_cdf(int dof, double x) {
    if (x <= 0.0) return 0.0;
    return boost::math::gamma_p(dof / 2.0, x / 2.0);
}

inline double chisq_tail(int dof, double x) {
    if (x <= 0.0) return 1.0;
    return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

inline double chisq_quantile(int dof, double p) {
    return boost::math::quantile(boost::math::chi_squared(dof), p);
}

inline double norm_cdf(double z) { return boost::math::cdf(boost::math::normal(), z); }
inline double norm_quantile(double p) {
    return boost::math::quantile(boost::math::normal(), p);
}

inline double student_t_two_sided_pvalue(double t, double dof) {
    return 2.0 * boost::math::cdf(boost::math::students_t(dof), -std::abs(t));
}

inline double digamma(double x) { return boost::math::digamma(x); }
inline double trigamma(double x) { return boost::math::trigamma(x); }
inline double lgamma_fn(double x) { return boost::math::lgamma(x); }

} // namespace possim
