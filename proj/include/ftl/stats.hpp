#pragma once

// Statistical primitives used to turn simulation output into estimates.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace ftl {

/// TV lower bound 1 - 4/(4 + r^2) from separation of means in units of the pooled
/// standard deviation. Returns 0 for equal means and 1 for a zero-variance separation.
double tv_lower_bound(double mean_a, double mean_b, double var_a, double var_b);

struct TailEstimate {
    double p_hat = 0.0;
    double ci_low = 0.0;
    double ci_high = 1.0;
    std::size_t replicas = 0;
};

/// Wilson score interval at 95%.
TailEstimate wilson_interval(std::size_t successes, std::size_t trials);

struct KsResult {
    double d = 0.0;
    double p = 1.0;
};

/// Kolmogorov distribution survival function Q(lambda) = P(K > lambda).
double kolmogorov_survival(double lambda);

/// sup_x |F_n(x) - F(x)| for any sample size >= 1.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);

/// Two-sided one-sample KS test with the asymptotic p-value (needs >= 8 samples).
KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf);

/// Two-sided two-sample KS test (each sample >= 8).
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

struct HillEstimate {
    double alpha = 0.0; // +inf when unbounded
    bool unbounded = false;
    std::size_t k = 0;
};

/// k / sum_{i<=k} ln(X_(i) / X_(k+1)) over descending order statistics.
HillEstimate hill_estimator(std::span<const double> samples, std::size_t k);

/// One-sided lower confidence bound alpha (1 - z / sqrt(k)); z = 1.645 for 95%.
double hill_lower_bound(const HillEstimate& h, double z = 1.6448536269514722);

/// U(x) = (sum_{i < floor(n x)} y_i - n x) / sqrt(n), with n = gaps.size() + 1.
std::vector<double> fclt_profile(std::span<const double> gaps, std::span<const double> x_grid);

struct PowerLawFit {
    double exponent = 0.0;
    double prefactor = 0.0;
};

/// Least-squares line through (ln x, ln y).
PowerLawFit fit_power_law(std::span<const double> xs, std::span<const double> ys);

struct MomentCi {
    double estimate = 0.0;
    double half_width = 0.0;
    /// The normal approximation behind the interval is trusted from 30 samples on.
    bool normal_approx = false;
};

/// Mean of X^p with a 95% normal-approximation half width.
MomentCi moment_ci(std::span<const double> samples, double p);

struct MeanVar {
    double mean = 0.0;
    double variance = 0.0; // unbiased
    std::size_t count = 0;

    double std_error() const;
};

MeanVar mean_var(std::span<const double> xs);

/// Normal CDF.
double normal_cdf(double x, double mean = 0.0, double sd = 1.0);

} // namespace ftl
