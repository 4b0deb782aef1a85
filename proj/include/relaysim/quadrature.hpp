#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <string>

#include "relaysim/errors.hpp"

namespace relaysim {

/// Adaptive Gauss-Kronrod integration with an absolute error target.
/// Throws QuadratureError (carrying the achieved error estimate) when the
/// refinement budget is exhausted before the target is met.
template <typename F>
double integrate(F&& f, double a, double b, double abs_tol,
                 const char* what = "integral") {
    if (!(b > a)) return 0.0;
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    double err = 0.0;
    // Boost's tol is relative to the L1 norm; our integrands are bounded by 1
    // on bounded ranges, so pass the absolute target and check the estimate.
    double value = GK::integrate(f, a, b, 15, abs_tol, &err);
    if (std::isnan(value) || err > 64.0 * abs_tol + 1e-300) {
        throw QuadratureError(std::string(what) +
                                  ": quadrature did not converge (residual " +
                                  std::to_string(err) + ")",
                              err);
    }
    return value;
}

}  // namespace relaysim
