#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "smc/rng.hpp"

#include <cmath>
#include <set>
#include <vector>

using smc::RngStream;

TEST_CASE("same seed reproduces the same sequence") {
    RngStream a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge") {
    RngStream a(1), b(2);
    int same = 0;
    for (int i = 0; i < 64; ++i) same += a.next_u64() == b.next_u64();
    CHECK(same == 0);
}

TEST_CASE("derive is independent of parent consumption") {
    RngStream parent(7);
    RngStream child_before = parent.derive("worker");
    for (int i = 0; i < 10; ++i) parent.next_u64();
    RngStream child_after = parent.derive("worker");
    for (int i = 0; i < 20; ++i) CHECK(child_before.next_u64() == child_after.next_u64());
}

TEST_CASE("derived streams with different names or indices do not collide") {
    RngStream root(11);
    std::vector<RngStream> streams;
    streams.push_back(root.derive("a"));
    streams.push_back(root.derive("b"));
    streams.push_back(root.derive("a", 0));
    streams.push_back(root.derive("a", 1));
    std::set<std::uint64_t> first;
    for (auto& s : streams) first.insert(s.next_u64());
    CHECK(first.size() == streams.size());
}

TEST_CASE("uniform lies in [0,1) and has plausible mean") {
    RngStream rng(3);
    double sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    // mean 0.5, std of the mean = 1/sqrt(12 n) ~ 0.002; allow 5 sigma
    CHECK(std::abs(sum / n - 0.5) < 0.011);
}

TEST_CASE("normal has plausible first two moments") {
    RngStream rng(5);
    const int n = 20000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        s1 += x;
        s2 += x * x;
    }
    const double mean = s1 / n;
    const double var = s2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.04);       // ~5.6 sigma of the mean
    CHECK(std::abs(var - 1.0) < 0.06);  // ~6 sigma of the variance estimate
}

TEST_CASE("uniform_int covers its range and nothing else") {
    RngStream rng(9);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 7000; ++i) {
        const int k = rng.uniform_int(7);
        REQUIRE(k >= 0);
        REQUIRE(k < 7);
        ++counts[static_cast<size_t>(k)];
    }
    for (int c : counts) CHECK(c > 700);  // expectation 1000, generous floor
}

TEST_CASE("bernoulli respects extreme probabilities") {
    RngStream rng(13);
    for (int i = 0; i < 100; ++i) {
        CHECK_FALSE(rng.bernoulli(0.0));
        CHECK(rng.bernoulli(1.0));
    }
}
