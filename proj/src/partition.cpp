#include "stark/partition.hpp"

#include <algorithm>
#include <stdexcept>

namespace stark {

ClusterDecomposition::ClusterDecomposition(std::vector<std::vector<int>> blocks) : blocks_(std::move(blocks)) {
    for (auto& b : blocks_) {
        if (b.empty()) throw std::invalid_argument("ClusterDecomposition: empty block");
        std::sort(b.begin(), b.end());
        n_ += static_cast<int>(b.size());
    }
    std::sort(blocks_.begin(), blocks_.end());
    std::vector<char> seen(static_cast<std::size_t>(n_), 0);
    for (const auto& b : blocks_) {
        for (int p : b) {
            if (p < 0 || p >= n_) throw std::invalid_argument("ClusterDecomposition: labels must cover 0..N-1");
            if (seen[static_cast<std::size_t>(p)]) throw std::invalid_argument("ClusterDecomposition: blocks overlap");
            seen[static_cast<std::size_t>(p)] = 1;
        }
    }
}

ClusterDecomposition ClusterDecomposition::finest(int n) {
    std::vector<std::vector<int>> blocks;
    for (int i = 0; i < n; ++i) blocks.push_back({i});
    return ClusterDecomposition(std::move(blocks));
}

ClusterDecomposition ClusterDecomposition::coarsest(int n) {
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    return ClusterDecomposition({all});
}

std::vector<int> ClusterDecomposition::labels() const {
    std::vector<int> out(static_cast<std::size_t>(n_), -1);
    for (std::size_t b = 0; b < blocks_.size(); ++b)
        for (int p : blocks_[b]) out[static_cast<std::size_t>(p)] = static_cast<int>(b);
    return out;
}

bool ClusterDecomposition::same_cluster(int i, int j) const {
    for (const auto& b : blocks_) {
        const bool hi = std::binary_search(b.begin(), b.end(), i);
        const bool hj = std::binary_search(b.begin(), b.end(), j);
        if (hi || hj) return hi && hj;
    }
    return false;
}

bool ClusterDecomposition::refines(const ClusterDecomposition& coarser) const {
    if (coarser.n_ != n_) return false;
    const std::vector<int> lab = coarser.labels();
    for (const auto& b : blocks_)
        for (int p : b)
            if (lab[static_cast<std::size_t>(p)] != lab[static_cast<std::size_t>(b.front())]) return false;
    return true;
}

bool ClusterDecomposition::strictly_refines(const ClusterDecomposition& coarser) const {
    return refines(coarser) && coarser.block_count() < block_count();
}

std::vector<std::pair<int, int>> ClusterDecomposition::internal_pairs() const {
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j)
            if (same_cluster(i, j)) pairs.emplace_back(i, j);
    return pairs;
}

std::string ClusterDecomposition::to_string() const {
    std::string s;
    for (const auto& b : blocks_) {
        s += '(';
        for (std::size_t k = 0; k < b.size(); ++k) {
            if (k > 0 && n_ >= 10) s += ',';
            s += std::to_string(b[k] + 1);
        }
        s += ')';
    }
    return s;
}

bool ClusterDecomposition::operator<(const ClusterDecomposition& other) const {
    if (block_count() != other.block_count()) return block_count() < other.block_count();
    return blocks_ < other.blocks_;
}

namespace {

void grow(int n, std::vector<int>& rgs, int next, int max_label, std::vector<ClusterDecomposition>& out) {
    if (next == n) {
        std::vector<std::vector<int>> blocks(static_cast<std::size_t>(max_label + 1));
        for (int i = 0; i < n; ++i) blocks[static_cast<std::size_t>(rgs[static_cast<std::size_t>(i)])].push_back(i);
        out.emplace_back(std::move(blocks));
        return;
    }
    for (int label = 0; label <= max_label + 1; ++label) {
        rgs[static_cast<std::size_t>(next)] = label;
        grow(n, rgs, next + 1, std::max(max_label, label), out);
    }
}

void integer_parts(int remaining, int max_part, std::vector<int>& current, std::vector<std::vector<int>>& out) {
    if (remaining == 0) {
        out.push_back(current);
        return;
    }
    for (int part = std::min(remaining, max_part); part >= 1; --part) {
        current.push_back(part);
        integer_parts(remaining - part, part, current, out);
        current.pop_back();
    }
}

}  // namespace

std::vector<ClusterDecomposition> enumerate_set_partitions(int n) {
    if (n < 1 || n > 8) throw std::invalid_argument("enumerate_set_partitions: need 1 <= N <= 8");
    std::vector<ClusterDecomposition> out;
    std::vector<int> rgs(static_cast<std::size_t>(n), 0);
    grow(n, rgs, 1, 0, out);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::vector<int>> enumerate_integer_partitions(int n) {
    if (n < 1 || n > 12) throw std::invalid_argument("enumerate_integer_partitions: need 1 <= N <= 12");
    std::vector<std::vector<int>> out;
    std::vector<int> current;
    integer_parts(n, n, current, out);
    return out;
}

}  // namespace stark
