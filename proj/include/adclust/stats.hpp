#pragma once

#include <boost/math/special_functions/gamma.hpp>

#include "error.hpp"

namespace adclust {

/// alpha-quantile of chi-square with `dof` degrees of freedom, by inverting the
/// regularized lower incomplete gamma function.
inline double chi2_quantile(int dof, double alpha) {
    if (dof < 1) throw validation_error("chi2_quantile: dof must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("chi2_quantile: alpha must lie in (0, 1)");
    return 2.0 * boost::math::gamma_p_inv(0.5 * dof, alpha);
}

}  // namespace adclust
