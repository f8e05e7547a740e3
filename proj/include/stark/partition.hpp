// Set partitions of the particle labels and integer partitions of N.

#pragma once

#include <string>
#include <vector>

namespace stark {

// A partition of the particles {0..N-1} into disjoint clusters.
// Blocks are kept canonical: each block sorted, blocks ordered by first element.
class ClusterDecomposition {
public:
    ClusterDecomposition() = default;
    explicit ClusterDecomposition(std::vector<std::vector<int>> blocks);

    static ClusterDecomposition finest(int n);
    static ClusterDecomposition coarsest(int n);

    const std::vector<std::vector<int>>& blocks() const noexcept { return blocks_; }
    int particle_count() const noexcept { return n_; }
    int block_count() const noexcept { return static_cast<int>(blocks_.size()); }

    // Block label of every particle.
    std::vector<int> labels() const;
    bool same_cluster(int i, int j) const;
    // Every block of *this lies inside a block of `coarser`.
    bool refines(const ClusterDecomposition& coarser) const;
    bool strictly_refines(const ClusterDecomposition& coarser) const;

    // Intra-cluster particle pairs (i < j).
    std::vector<std::pair<int, int>> internal_pairs() const;

    // One-based text form, e.g. "(12)(3)".
    std::string to_string() const;

    bool operator==(const ClusterDecomposition& other) const { return blocks_ == other.blocks_; }
    bool operator<(const ClusterDecomposition& other) const;

private:
    std::vector<std::vector<int>> blocks_;
    int n_ = 0;
};

// All set partitions of {0..n-1}, ordered by block count and then lexicographically.
std::vector<ClusterDecomposition> enumerate_set_partitions(int n);

// All integer partitions of n as non-increasing part lists, largest first part first.
std::vector<std::vector<int>> enumerate_integer_partitions(int n);

}  // namespace stark
