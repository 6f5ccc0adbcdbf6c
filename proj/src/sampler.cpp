#include "ftl/sampler.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ftl {

namespace {

void check_weight(double w)
{
    if (!(w >= 0.0) || !std::isfinite(w))
        throw std::invalid_argument("sampler weights must be finite and nonnegative");
}

} // namespace

WeightedSampler::WeightedSampler(std::span<const double> weights, std::uint64_t rebuild_period)
    : weights_(weights.begin(), weights.end()),
      rebuild_period_(rebuild_period == 0 ? kDefaultRebuildPeriod : rebuild_period)
{
    for (double w : weights_) check_weight(w);
    rebuild();
    rebuilds_ = 0;
}

void WeightedSampler::rebuild()
{
    const std::size_t n = weights_.size();
    tree_.assign(n + 1, 0.0);
    for (std::size_t i = 1; i <= n; ++i) {
        tree_[i] += weights_[i - 1];
        const std::size_t parent = i + (i & (~i + 1));
        if (parent <= n) tree_[parent] += tree_[i];
    }
    // Left-to-right summation is the reference total.
    double sum = 0.0;
    for (double w : weights_) sum += w;
    total_ = sum;
    top_bit_ = n == 0 ? 0 : std::bit_floor(n);
    updates_since_rebuild_ = 0;
    ++rebuilds_;
}

void WeightedSampler::update(std::size_t i, double w)
{
    if (i >= weights_.size())
        throw std::out_of_range("sampler index " + std::to_string(i) + " out of range");
    check_weight(w);
    const double delta = w - weights_[i];
    weights_[i] = w;
    if (delta != 0.0) {
        for (std::size_t j = i + 1; j < tree_.size(); j += j & (~j + 1)) tree_[j] += delta;
        total_ += delta;
    }
    if (++updates_since_rebuild_ >= rebuild_period_) rebuild();
}

double WeightedSampler::prefix(std::size_t i) const
{
    if (i > weights_.size()) throw std::out_of_range("prefix index out of range");
    double s = 0.0;
    for (std::size_t j = i; j > 0; j -= j & (~j + 1)) s += tree_[j];
    return s;
}

std::size_t WeightedSampler::pick(double target) const
{
    if (!(total_ > 0.0)) throw std::domain_error("cannot sample from an all-zero distribution");
    const std::size_t n = weights_.size();
    std::size_t pos = 0;
    double remaining = target;
    for (std::size_t step = top_bit_; step > 0; step >>= 1) {
        const std::size_t next = pos + step;
        if (next <= n && tree_[next] <= remaining) {
            pos = next;
            remaining -= tree_[next];
        }
    }
    // pos is the 0-based answer; rounding can land past the end or on an empty bucket.
    std::size_t idx = pos < n ? pos : n - 1;
    if (weights_[idx] > 0.0) return idx;
    for (std::size_t j = idx; j-- > 0;)
        if (weights_[j] > 0.0) return j;
    for (std::size_t j = idx + 1; j < n; ++j)
        if (weights_[j] > 0.0) return j;
    throw std::domain_error("cannot sample from an all-zero distribution");
}

double WeightedSampler::verify()
{
    double exact = 0.0;
    for (double w : weights_) exact += w;
    const double drift = std::abs(total_ - exact);
    if (drift > kDriftTolerance * exact) rebuild();
    return drift;
}

} // namespace ftl
