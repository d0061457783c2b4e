#include "doctest.h"

#include <stdexcept>

#include "nae/verify.hpp"

using namespace nae;

// The heavy Monte Carlo / finite-difference content of the suites runs in
// the acceptance binary; here we pin the plumbing and the fast suites.

TEST_CASE("verify: noise suite passes") {
    const auto results = verify_noise(12345);
    for (const CheckResult &r : results) {
        INFO(r.name, " max_err=", r.max_err, " ", r.detail);
        CHECK(r.pass);
    }
}

TEST_CASE("verify: unknown suite name throws") {
    CHECK_THROWS_AS(run_verify_suite("nonsense", 1), std::invalid_argument);
}

TEST_CASE("verify: dispatcher finds the named suites") {
    // The taylor/penalties/gradients suites are exercised end to end by the
    // acceptance binary; here only the fast one runs.
    const auto results = run_verify_suite("noise", 7);
    CHECK(!results.empty());
}
