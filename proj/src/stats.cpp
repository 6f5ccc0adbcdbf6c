#include "ftl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ftl {

double tv_lower_bound(double mean_a, double mean_b, double var_a, double var_b)
{
    if (!(var_a >= 0.0) || !(var_b >= 0.0)) throw std::invalid_argument("variances must be >= 0");
    const double gap = std::abs(mean_a - mean_b);
    if (gap == 0.0) return 0.0;
    const double pooled = 0.5 * (var_a + var_b);
    if (pooled == 0.0) return 1.0;
    const double r2 = gap * gap / pooled;
    return 1.0 - 4.0 / (4.0 + r2);
}

TailEstimate wilson_interval(std::size_t successes, std::size_t trials)
{
    if (trials == 0) throw std::invalid_argument("Wilson interval needs at least one trial");
    if (successes > trials) throw std::invalid_argument("more successes than trials");
    constexpr double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    TailEstimate t;
    t.p_hat = p;
    t.ci_low = std::clamp(std::min(center - half, p), 0.0, 1.0);
    t.ci_high = std::clamp(std::max(center + half, p), 0.0, 1.0);
    t.replicas = trials;
    return t;
}

double kolmogorov_survival(double lambda)
{
    if (lambda <= 0.0) return 1.0;
    if (lambda < 1.18) {
        // P(K <= lambda) via the Jacobi theta form, accurate for small lambda.
        const double c = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
        double cdf = 0.0;
        for (int j = 1; j <= 16; ++j) {
            const double odd = 2.0 * j - 1.0;
            cdf += std::exp(-odd * odd * c);
        }
        cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    double q = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        q += (j % 2 == 1 ? term : -term);
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * q, 0.0, 1.0);
}

namespace {

void require_finite(std::span<const double> xs)
{
    for (double v : xs)
        if (!std::isfinite(v)) throw std::invalid_argument("samples must be finite");
}

double asymptotic_p(double d, double effective_n)
{
    const double root = std::sqrt(effective_n);
    return kolmogorov_survival((root + 0.12 + 0.11 / root) * d);
}

} // namespace

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf)
{
    if (samples.empty()) throw std::invalid_argument("KS statistic needs at least one sample");
    require_finite(samples);
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf)
{
    if (samples.size() < 8) throw std::invalid_argument("KS test needs at least 8 samples");
    KsResult r;
    r.d = ks_statistic(samples, cdf);
    r.p = asymptotic_p(r.d, static_cast<double>(samples.size()));
    return r;
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b)
{
    if (a.size() < 8 || b.size() < 8) throw std::invalid_argument("KS test needs at least 8 samples");
    require_finite(a);
    require_finite(b);
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return {d, asymptotic_p(d, na * nb / (na + nb))};
}

HillEstimate hill_estimator(std::span<const double> samples, std::size_t k)
{
    if (k < 1 || k >= samples.size())
        throw std::invalid_argument("Hill estimator needs 1 <= k < sample count");
    for (double v : samples)
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("samples must be positive");
    std::vector<double> x(samples.begin(), samples.end());
    std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(k), x.end(),
                     std::greater<>());
    const double threshold = x[k]; // X_(k+1)
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += std::log(x[i] / threshold);
    HillEstimate h;
    h.k = k;
    if (!(sum > 0.0)) {
        h.unbounded = true;
        h.alpha = std::numeric_limits<double>::infinity();
    } else {
        h.alpha = static_cast<double>(k) / sum;
    }
    return h;
}

double hill_lower_bound(const HillEstimate& h, double z)
{
    if (h.unbounded) return std::numeric_limits<double>::infinity();
    return h.alpha * (1.0 - z / std::sqrt(static_cast<double>(h.k)));
}

std::vector<double> fclt_profile(std::span<const double> gaps, std::span<const double> x_grid)
{
    if (gaps.empty()) throw std::invalid_argument("empty gap vector");
    const std::size_t n = gaps.size() + 1;
    const double nd = static_cast<double>(n);
    std::vector<double> prefix(n, 0.0); // prefix[j] = sum of the first j gaps
    for (std::size_t i = 0; i < gaps.size(); ++i) prefix[i + 1] = prefix[i] + gaps[i];
    std::vector<double> u;
    u.reserve(x_grid.size());
    for (double x : x_grid) {
        if (!(x > 0.0 && x <= 1.0)) throw std::invalid_argument("profile grid must lie in (0, 1]");
        const auto label = static_cast<std::size_t>(std::floor(nd * x));
        if (label < 1) throw std::invalid_argument("grid point with floor(n x) < 1");
        u.push_back((prefix[label - 1] - nd * x) / std::sqrt(nd));
    }
    return u;
}

PowerLawFit fit_power_law(std::span<const double> xs, std::span<const double> ys)
{
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("power-law fit needs matching samples, at least two");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0) || !std::isfinite(xs[i]) || !std::isfinite(ys[i]))
            throw std::invalid_argument("power-law fit needs positive data");
        mx += std::log(xs[i]);
        my += std::log(ys[i]);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = std::log(xs[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(ys[i]) - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("power-law fit needs two distinct x values");
    PowerLawFit fit;
    fit.exponent = sxy / sxx;
    fit.prefactor = std::exp(my - fit.exponent * mx);
    return fit;
}

double MeanVar::std_error() const
{
    return count > 0 ? std::sqrt(variance / static_cast<double>(count)) : 0.0;
}

MeanVar mean_var(std::span<const double> xs)
{
    MeanVar mv;
    mv.count = xs.size();
    if (xs.empty()) return mv;
    // Welford
    double mean = 0.0, m2 = 0.0;
    std::size_t k = 0;
    for (double v : xs) {
        ++k;
        const double d = v - mean;
        mean += d / static_cast<double>(k);
        m2 += d * (v - mean);
    }
    mv.mean = mean;
    mv.variance = xs.size() > 1 ? m2 / static_cast<double>(xs.size() - 1) : 0.0;
    return mv;
}

MomentCi moment_ci(std::span<const double> samples, double p)
{
    if (samples.size() < 2) throw std::invalid_argument("moment interval needs at least 2 samples");
    if (!(p > 0.0)) throw std::invalid_argument("moment order must be positive");
    std::vector<double> powered(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        powered[i] = std::pow(samples[i], p);
        if (!std::isfinite(powered[i]))
            throw std::invalid_argument("p-th power of a sample is not finite");
    }
    const MeanVar mv = mean_var(powered);
    MomentCi ci;
    ci.estimate = mv.mean;
    ci.half_width = 1.959963984540054 * mv.std_error();
    ci.normal_approx = samples.size() >= 30;
    return ci;
}

double normal_cdf(double x, double mean, double sd)
{
    return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

} // namespace ftl
