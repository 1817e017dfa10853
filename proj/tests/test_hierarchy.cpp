#include <catch2/catch_amalgamated.hpp>

#include "qtherm/hierarchy.hpp"

using namespace qtherm::heom;

TEST_CASE("hierarchy enumeration counts", "[hierarchy]") {
    CHECK(enumerate_hierarchy(2, 2).size() == 6);  // C(4, 2)
    CHECK(enumerate_hierarchy(1, 0).size() == 1);
    CHECK(enumerate_hierarchy(3, 1).size() == 4);
    CHECK(enumerate_hierarchy(4, 8).size() == 495);  // C(12, 8)
    CHECK(hierarchy_count(4, 8) == 495);
}

TEST_CASE("hierarchy order is graded lexicographic", "[hierarchy]") {
    const auto idx = enumerate_hierarchy(2, 2);
    REQUIRE(idx.size() == 6);
    CHECK(idx[0].counts == std::vector<int>{0, 0});
    CHECK(idx[1].counts == std::vector<int>{0, 1});
    CHECK(idx[2].counts == std::vector<int>{1, 0});
    CHECK(idx[3].counts == std::vector<int>{0, 2});
    CHECK(idx[4].counts == std::vector<int>{1, 1});
    CHECK(idx[5].counts == std::vector<int>{2, 0});

    // depth never decreases along the enumeration
    const auto big = enumerate_hierarchy(3, 4);
    for (std::size_t i = 1; i < big.size(); ++i) {
        CHECK(big[i].depth() >= big[i - 1].depth());
    }
}

TEST_CASE("single exponential at depth zero", "[hierarchy]") {
    const auto idx = enumerate_hierarchy(1, 0);
    REQUIRE(idx.size() == 1);
    CHECK(idx[0].counts == std::vector<int>{0});
}

TEST_CASE("hierarchy cap guards runaway sizes", "[hierarchy]") {
    CHECK_THROWS_AS(enumerate_hierarchy(12, 12, 200000), std::runtime_error);
    CHECK_NOTHROW(enumerate_hierarchy(4, 8, 200000));
}

TEST_CASE("neighbor tables are mutually inverse", "[hierarchy]") {
    HierarchyTable table(3, 4);
    for (std::size_t i = 0; i < table.size(); ++i) {
        for (int k = 0; k < 3; ++k) {
            const int up = table.raise_index[i][static_cast<std::size_t>(k)];
            if (up >= 0) {
                CHECK(table.lower_index[static_cast<std::size_t>(up)][static_cast<std::size_t>(k)] ==
                      static_cast<int>(i));
                CHECK(table.indices[static_cast<std::size_t>(up)].depth() ==
                      table.indices[i].depth() + 1);
            } else {
                CHECK(table.indices[i].depth() == 4);
            }
            const int down = table.lower_index[i][static_cast<std::size_t>(k)];
            if (table.indices[i].counts[static_cast<std::size_t>(k)] > 0) {
                REQUIRE(down >= 0);
                CHECK(table.raise_index[static_cast<std::size_t>(down)][static_cast<std::size_t>(k)] ==
                      static_cast<int>(i));
            } else {
                CHECK(down == -1);
            }
        }
    }
}
