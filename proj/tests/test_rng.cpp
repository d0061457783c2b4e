#include "doctest.h"

#include <stdexcept>

#include <cmath>

#include "nae/rng.hpp"

using namespace nae;

TEST_CASE("same seed and call sequence give identical streams") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    const Vector va = sample_gaussian(a, 0.0, 2.0, 50);
    const Vector vb = sample_gaussian(b, 0.0, 2.0, 50);
    CHECK(va == vb);
}

TEST_CASE("different seeds diverge") {
    Rng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 64; ++i)
        if (a.next_u64() == b.next_u64()) ++same;
    CHECK(same == 0);
}

TEST_CASE("split streams are independent of the parent's position") {
    Rng a(9);
    const Rng child1 = a.split(5);
    a.next_u64();
    a.next_u64();
    const Rng child2 = a.split(5);
    Rng c1 = child1, c2 = child2;
    for (int i = 0; i < 10; ++i) CHECK(c1.next_u64() == c2.next_u64());

    Rng other = Rng(9).split(6);
    Rng base = Rng(9).split(5);
    int same = 0;
    for (int i = 0; i < 64; ++i)
        if (base.next_u64() == other.next_u64()) ++same;
    CHECK(same == 0);
}

TEST_CASE("sample_gaussian: var=0 returns the constant mean") {
    Rng rng(3);
    const Vector v = sample_gaussian(rng, 1.0, 0.0, 4);
    CHECK(v == Vector{1.0, 1.0, 1.0, 1.0});
}

TEST_CASE("sample_gaussian: empirical moments at n=1e5") {
    Rng rng(4);
    const std::size_t n = 100000;
    const Vector v = sample_gaussian(rng, 0.5, 1.0, n);
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= n - 1;
    CHECK(std::abs(mean - 0.5) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("sample_gaussian: negative variance throws") {
    Rng rng(5);
    CHECK_THROWS_AS(sample_gaussian(rng, 0.0, -0.1, 3), std::invalid_argument);
}

TEST_CASE("sample_bernoulli: edge probabilities and moments") {
    Rng rng(6);
    const Vector ones = sample_bernoulli(rng, 1.0, 100);
    for (double x : ones) CHECK(x == 1.0);
    const Vector zeros = sample_bernoulli(rng, 0.0, 100);
    for (double x : zeros) CHECK(x == 0.0);

    const std::size_t n = 100000;
    const Vector v = sample_bernoulli(rng, 0.5, n);
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    CHECK(std::abs(mean - 0.5) < 0.01);

    CHECK_THROWS_AS(sample_bernoulli(rng, 1.5, 3), std::invalid_argument);
    CHECK_THROWS_AS(sample_bernoulli(rng, -0.1, 3), std::invalid_argument);
}

TEST_CASE("uniform_index stays in range and covers values") {
    Rng rng(7);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 7000; ++i) ++counts[rng.uniform_index(7)];
    for (int c : counts) CHECK(c > 700);  // crude uniformity
    CHECK_THROWS_AS(rng.uniform_index(0), std::invalid_argument);
}

TEST_CASE("uniform doubles stay in [0,1)") {
    Rng rng(8);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}
