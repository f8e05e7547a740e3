#include <set>
#include <stdexcept>

#include "../oracle/combinatorics_oracle.hpp"
#include "doctest.h"
#include "stark/partition.hpp"

using namespace stark;

TEST_SUITE("partition") {

TEST_CASE("canonical form and text") {
    const ClusterDecomposition d({{2, 0}, {1}});
    CHECK(d.blocks() == std::vector<std::vector<int>>{{0, 2}, {1}});
    CHECK(d.to_string() == "(13)(2)");
    CHECK(d.particle_count() == 3);
    CHECK(d.block_count() == 2);
    CHECK(d.labels() == std::vector<int>{0, 1, 0});
    CHECK(d.same_cluster(0, 2));
    CHECK_FALSE(d.same_cluster(0, 1));
    CHECK(d.internal_pairs() == std::vector<std::pair<int, int>>{{0, 2}});
}

TEST_CASE("invalid decompositions") {
    CHECK_THROWS_AS(ClusterDecomposition({{0, 1}, {1}}), std::invalid_argument);
    CHECK_THROWS_AS(ClusterDecomposition({{0}, {2}}), std::invalid_argument);
    CHECK_THROWS_AS(ClusterDecomposition({{0}, {}}), std::invalid_argument);
}

TEST_CASE("refinement order") {
    const auto fine = ClusterDecomposition::finest(3);
    const auto mid = ClusterDecomposition({{0, 1}, {2}});
    const auto coarse = ClusterDecomposition::coarsest(3);
    CHECK(fine.refines(mid));
    CHECK(fine.strictly_refines(coarse));
    CHECK(mid.strictly_refines(coarse));
    CHECK(mid.refines(mid));
    CHECK_FALSE(mid.strictly_refines(mid));
    CHECK_FALSE(coarse.refines(mid));
    CHECK_FALSE(ClusterDecomposition({{0, 2}, {1}}).refines(mid));
}

TEST_CASE("set partition counts and ordering") {
    CHECK(enumerate_set_partitions(3).size() == 5);
    CHECK(enumerate_set_partitions(4).size() == 15);
    const auto p3 = enumerate_set_partitions(3);
    int nontrivial = 0;
    for (const auto& d : p3) nontrivial += d.block_count() > 1 ? 1 : 0;
    CHECK(nontrivial == 4);
    for (int n = 1; n <= 7; ++n) {
        const auto ps = enumerate_set_partitions(n);
        for (std::size_t i = 1; i < ps.size(); ++i) {
            CHECK(ps[i - 1].block_count() <= ps[i].block_count());
            CHECK(ps[i - 1] < ps[i]);
        }
    }
    CHECK_THROWS_AS(enumerate_set_partitions(0), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_set_partitions(9), std::invalid_argument);
}

TEST_CASE("set partitions match brute force") {
    for (int n = 1; n <= 6; ++n) {
        std::set<oracle::Blocks> mine;
        for (const auto& d : enumerate_set_partitions(n)) mine.insert(d.blocks());
        CHECK(mine == oracle::set_partitions(n));
    }
}

TEST_CASE("integer partitions") {
    CHECK(enumerate_integer_partitions(1) == std::vector<std::vector<int>>{{1}});
    CHECK(enumerate_integer_partitions(4).size() == 5);
    CHECK(enumerate_integer_partitions(5).size() == 7);
    CHECK(enumerate_integer_partitions(4).front() == std::vector<int>{4});
    for (int n = 1; n <= 12; ++n) {
        const auto mine = enumerate_integer_partitions(n);
        CHECK(mine == oracle::integer_partitions(n));
        for (const auto& part : mine) {
            int s = 0;
            for (std::size_t i = 0; i < part.size(); ++i) {
                s += part[i];
                if (i) CHECK(part[i] <= part[i - 1]);
            }
            CHECK(s == n);
        }
    }
    CHECK_THROWS_AS(enumerate_integer_partitions(13), std::invalid_argument);
}

}  // TEST_SUITE
