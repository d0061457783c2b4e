#include "nae/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nae {

namespace {

// SplitMix64 finalizer; used to derive Philox keys from seeds and salts.
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t &hi, std::uint32_t &lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    const std::uint64_t k = mix64(seed);
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

Rng Rng::split(std::uint64_t salt) const {
    const std::uint64_t parent =
        (static_cast<std::uint64_t>(key_[1]) << 32) | key_[0];
    Rng child(0);
    const std::uint64_t k = mix64(parent ^ mix64(salt ^ 0xA5A5A5A5A5A5A5A5ULL));
    child.seed_ = k;
    child.key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    return child;
}

void Rng::refill() {
    std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(counter_),
        static_cast<std::uint32_t>(counter_ >> 32), 0u, 0u};
    std::uint32_t k0 = key_[0], k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
        k0 += kPhiloxW0;
        k1 += kPhiloxW1;
    }
    block_ = ctr;
    pos_ = 0;
    ++counter_;
}

std::uint32_t Rng::next_u32() {
    if (pos_ >= 4) refill();
    return block_[pos_++];
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
}

double Rng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // 1 - u lies in (0, 1], keeping the log argument positive.
    const double u1 = 1.0 - next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::size_t Rng::uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    const std::uint64_t nn = n;
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % nn;
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return static_cast<std::size_t>(v % nn);
}

Vector sample_gaussian(Rng &rng, double mean, double var, std::size_t n) {
    if (var < 0.0)
        throw std::invalid_argument("sample_gaussian: negative variance " +
                                    std::to_string(var));
    const double sd = std::sqrt(var);
    Vector out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = mean + sd * rng.gaussian();
    return out;
}

Vector sample_bernoulli(Rng &rng, double p, std::size_t n) {
    if (p < 0.0 || p > 1.0)
        throw std::invalid_argument("sample_bernoulli: p outside [0,1]: " +
                                    std::to_string(p));
    Vector out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = rng.next_double() < p ? 1.0 : 0.0;
    return out;
}

}  // namespace nae
