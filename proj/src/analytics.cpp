#include "grsnet/analytics.hpp"

#include <cmath>
#include <stdexcept>

#include "grsnet/io.hpp"

namespace grsnet {

namespace {

void check_p(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("analytics: p must lie in (0, 1)");
}

}  // namespace

double increment_pmf(double p, std::int64_t k) {
    check_p(p);
    if (k == 0) return p;
    const double q = 1.0 - p;
    const double d = static_cast<double>(k < 0 ? -k : k);
    return std::pow(q, 2.0 * d - 1.0) * p * (q + p / 2.0);
}

BigRat increment_pmf_exact(const RationalP& rp, std::int64_t k) {
    const BigRat p = rp.p();
    if (k == 0) return p;
    const BigRat q = rp.q();
    const std::int64_t d = k < 0 ? -k : k;
    return rat_pow(q, 2 * d - 1) * p * (q + p / 2);
}

double sigma2(double p) {
    check_p(p);
    const double q = 1.0 - p;
    return q * (1.0 + q * q) / (p * p * (1.0 + q) * (1.0 + q));
}

BigRat sigma2_exact(const RationalP& rp) {
    const BigRat p = rp.p();
    const BigRat q = rp.q();
    return q * (1 + q * q) / (p * p * (1 + q) * (1 + q));
}

double increment_fourth_moment(double p) {
    check_p(p);
    // sum 2 k^4 q^(2k-1) p (q + p/2); converges geometrically.
    const double q = 1.0 - p;
    const double coeff = 2.0 * p * (q + p / 2.0) / q;
    double sum = 0.0;
    const double r = q * q;
    double rk = r;
    for (std::int64_t k = 1; k < 100000; ++k) {
        const double term = coeff * std::pow(static_cast<double>(k), 4.0) * rk;
        sum += term;
        rk *= r;
        if (term < 1e-18 * (sum + 1e-300) && k > 8) break;
    }
    return sum;
}

double c1_bound(double p) {
    check_p(p);
    const double q = 1.0 - p;
    return p * p + (1.0 - q * q) / (2.0 * (1.0 + q * q)) * q * q;
}

BigRat c1_bound_exact(const RationalP& rp) {
    const BigRat p = rp.p();
    const BigRat q = rp.q();
    return p * p + (1 - q * q) / (2 * (1 + q * q)) * q * q;
}

ModelConstants model_constants(double p) {
    check_p(p);
    return {p, 1.0 - p, sigma2(p), c1_bound(p), p / (2.0 - p)};
}

std::vector<double> increment_pmf_by_window_enumeration(double p, std::int64_t k_max) {
    check_p(p);
    if (k_max < 1 || k_max > 12)
        throw std::invalid_argument("window enumeration: k_max must be in [1, 12]");
    const std::int64_t width = 2 * k_max + 1;
    const double q = 1.0 - p;
    // weight lookup by open-site count
    std::vector<double> weight(static_cast<std::size_t>(width) + 1);
    for (std::int64_t n_open = 0; n_open <= width; ++n_open)
        weight[static_cast<std::size_t>(n_open)] =
            std::pow(p, static_cast<double>(n_open)) *
            std::pow(q, static_cast<double>(width - n_open));

    std::vector<KahanSum> acc(static_cast<std::size_t>(width));
    const std::uint64_t n_configs = std::uint64_t{1} << width;
    for (std::uint64_t mask = 0; mask < n_configs; ++mask) {
        const double w = weight[static_cast<std::size_t>(__builtin_popcountll(mask))];
        const auto open = [&](std::int64_t k) {
            return (mask >> static_cast<std::uint64_t>(k + k_max)) & 1u;
        };
        for (std::int64_t d = 0; d <= k_max; ++d) {
            if (d == 0) {
                if (open(0)) {
                    acc[static_cast<std::size_t>(k_max)].add(w);
                    break;
                }
                continue;
            }
            const bool left = open(-d);
            const bool right = open(d);
            if (left && right) {
                acc[static_cast<std::size_t>(k_max - d)].add(0.5 * w);
                acc[static_cast<std::size_t>(k_max + d)].add(0.5 * w);
                break;
            }
            if (left) {
                acc[static_cast<std::size_t>(k_max - d)].add(w);
                break;
            }
            if (right) {
                acc[static_cast<std::size_t>(k_max + d)].add(w);
                break;
            }
        }
    }
    std::vector<double> pmf(static_cast<std::size_t>(width));
    for (std::size_t i = 0; i < pmf.size(); ++i) pmf[i] = acc[i].value();
    return pmf;
}

TailExponentReport tail_exponent_check(const std::vector<TailPoint>& series) {
    if (series.size() < 5)
        throw std::invalid_argument("tail_exponent_check: need >= 5 horizons");
    if (!(series.back().t >= 100.0 * series.front().t))
        throw std::invalid_argument("tail_exponent_check: horizons must span >= 2 decades");

    TailExponentReport r;
    bool all_one = true, any_zero = false;
    for (const auto& pt : series) {
        const double s = std::sqrt(pt.t) * pt.survival;
        if (s > r.max_sqrt_t_survival) r.max_sqrt_t_survival = s;
        if (pt.survival < 1.0) all_one = false;
        if (pt.survival <= 0.0) any_zero = true;
    }
    if (all_one || any_zero) {
        r.degenerate = true;
        r.pass = false;
        return r;
    }

    // OLS fit of log survival against log t.
    const std::size_t n = series.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& pt : series) {
        const double x = std::log(pt.t);
        const double y = std::log(pt.survival);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double dn = static_cast<double>(n);
    const double denom = dn * sxx - sx * sx;
    r.slope = (dn * sxy - sx * sy) / denom;
    double ss_res = 0;
    const double intercept = (sy - r.slope * sx) / dn;
    for (const auto& pt : series) {
        const double x = std::log(pt.t);
        const double e = std::log(pt.survival) - (intercept + r.slope * x);
        ss_res += e * e;
    }
    r.slope_stderr = n > 2 ? std::sqrt(ss_res / (dn - 2.0) / (sxx - sx * sx / dn)) : 0.0;

    // Trend check on sqrt(t) * survival: flag a rise beyond 3 combined sigmas
    // relative to the first horizon.
    const double s0 = std::sqrt(series.front().t) * series.front().survival;
    const double v0 = series.front().t * series.front().stderr_ * series.front().stderr_;
    for (std::size_t i = 1; i < n; ++i) {
        const double si = std::sqrt(series[i].t) * series[i].survival;
        const double vi = series[i].t * series[i].stderr_ * series[i].stderr_;
        if (si - s0 > 3.0 * std::sqrt(vi + v0)) r.upward_trend = true;
    }

    r.slope_in_window = r.slope >= -0.65 && r.slope <= -0.35;
    r.steeper_than_bound = r.slope < -0.65;
    r.pass = !r.upward_trend && r.slope_in_window;
    return r;
}

}  // namespace grsnet
