#include "ekmonoid/numeric.hpp"

#include "ekmonoid/errors.hpp"

namespace ekmonoid {

std::uint64_t integer_root(std::uint64_t x, unsigned k) {
    require(k >= 1, ErrorCode::InvalidArgument, "integer_root requires k >= 1");
    if (k == 1 || x < 2) return x;
    auto r = static_cast<std::uint64_t>(std::pow(static_cast<Real>(x), 1.0L / k));
    // Correct the floating estimate in both directions.
    while (r > 0 && !checked_pow(r, k, x)) --r;
    while (checked_pow(r + 1, k, x)) ++r;
    return r;
}

LineFit fit_line(std::span<const Real> t, std::span<const Real> y) {
    require(t.size() == y.size() && t.size() >= 2, ErrorCode::InvalidArgument,
            "fit_line needs at least two paired points");
    const Real n = static_cast<Real>(t.size());
    Real mt = 0, my = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        mt += t[i];
        my += y[i];
    }
    mt /= n;
    my /= n;
    Real sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        sxx += (t[i] - mt) * (t[i] - mt);
        sxy += (t[i] - mt) * (y[i] - my);
    }
    require(sxx > 0, ErrorCode::InvalidArgument, "fit_line needs distinct abscissae");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mt;
    for (std::size_t i = 0; i < t.size(); ++i)
        fit.max_abs_residual =
            std::max(fit.max_abs_residual, std::fabs(y[i] - fit.intercept - fit.slope * t[i]));
    return fit;
}

}  // namespace ekmonoid
