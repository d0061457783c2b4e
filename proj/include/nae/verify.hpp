#ifndef NAE_VERIFY_HPP
#define NAE_VERIFY_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace nae {

/// One oracle check: brute-force / Monte Carlo / finite-difference evidence
/// against the analytic implementation.
struct CheckResult {
    std::string name;
    bool pass = false;
    double max_err = 0.0;
    std::string detail;
};

/// Sampler moments, mean preservation, dropout expectation.
std::vector<CheckResult> verify_noise(std::uint64_t seed);

/// Noise-site equivalence transforms vs Monte Carlo, including the
/// small-variance error ordering.
std::vector<CheckResult> verify_taylor(std::uint64_t seed);

/// Marginalized penalties: exhaustive dropout-mask enumeration, Monte Carlo
/// excess-loss oracles, substitution and tied-specialization identities,
/// finite-difference Jacobian for the contractive penalty.
std::vector<CheckResult> verify_penalties(std::uint64_t seed);

/// Central finite differences against every analytic gradient (autoencoder
/// stochastic/penalty objectives, supervised nets, all noise kinds and
/// nonlinearity/loss combinations).
std::vector<CheckResult> verify_gradients(std::uint64_t seed);

/// Dispatch by suite name: noise | taylor | penalties | gradients.
/// Unknown names throw std::invalid_argument.
std::vector<CheckResult> run_verify_suite(const std::string &suite,
                                          std::uint64_t seed);

bool all_passed(const std::vector<CheckResult> &results);

}  // namespace nae

#endif
