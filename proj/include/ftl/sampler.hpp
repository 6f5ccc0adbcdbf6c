#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ftl {

/**
 * Weighted index sampler over a binary-indexed (Fenwick) tree.
 *
 * update() and pick() cost O(log n). The cached total is maintained
 * incrementally and replaced by an exact O(n) rebuild every `rebuild_period`
 * updates, or when verify() detects drift above 1e-9 relative.
 */
class WeightedSampler {
public:
    static constexpr std::uint64_t kDefaultRebuildPeriod = std::uint64_t{1} << 16;
    static constexpr double kDriftTolerance = 1e-9;

    WeightedSampler() = default;
    explicit WeightedSampler(std::span<const double> weights,
                             std::uint64_t rebuild_period = kDefaultRebuildPeriod);

    std::size_t size() const noexcept { return weights_.size(); }
    double total() const noexcept { return total_; }
    double weight(std::size_t i) const { return weights_.at(i); }
    std::span<const double> weights() const noexcept { return weights_; }

    /// Replaces weight i. Throws std::out_of_range / std::invalid_argument.
    void update(std::size_t i, double w);

    /// Sum of weights [0, i) as stored in the tree.
    double prefix(std::size_t i) const;

    /// Index i with prefix(i) <= target < prefix(i + 1); never a zero-weight index.
    /// Throws std::domain_error when the total is zero.
    std::size_t pick(double target) const;

    /// Recomputes the exact total; rebuilds the tree when the cache drifted. Returns the drift.
    double verify();

    /// Exact O(n) reconstruction of the tree and total from the stored weights.
    void rebuild();

    std::uint64_t rebuilds() const noexcept { return rebuilds_; }

private:
    std::vector<double> weights_;
    std::vector<double> tree_; // 1-based Fenwick array
    double total_ = 0.0;
    std::size_t top_bit_ = 0;
    std::uint64_t rebuild_period_ = kDefaultRebuildPeriod;
    std::uint64_t updates_since_rebuild_ = 0;
    std::uint64_t rebuilds_ = 0;
};

} // namespace ftl
