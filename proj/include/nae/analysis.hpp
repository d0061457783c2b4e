#ifndef NAE_ANALYSIS_HPP
#define NAE_ANALYSIS_HPP

#include <optional>
#include <string>

#include "nae/data_io.hpp"
#include "nae/mlp.hpp"
#include "nae/model.hpp"

namespace nae {

/// Representation statistics for one layer of activations.
struct LayerStats {
    Vector lifetime_sparsity;    // per unit, across samples
    Vector population_sparsity;  // per sample, across units
    Matrix correlation;          // Pearson, units x units
    Vector cum_variance;         // nondecreasing, ends at 1
};

struct MetricsReport {
    std::optional<double> denoise_error;
    std::optional<std::size_t> test_errors;
    std::vector<LayerStats> layers;

    /// One row per layer: layer, mean lifetime/population sparsity, mean
    /// absolute off-diagonal correlation, components to reach 90% variance.
    void to_csv(const std::string &path) const;
};

/// Normalized (Hoyer) sparseness of a non-negative vector:
///   s(v) = (sqrt(n) - ||v||_1 / ||v||_2) / (sqrt(n) - 1),
/// scale-invariant, 0 for a constant vector, 1 for a one-hot vector.
/// An all-zero vector is defined to have sparseness 1.
double sparseness(const Vector &v);

/// Lifetime (per-unit, over the N rows) and population (per-sample, over
/// the d columns) sparseness of an N x d activation matrix.
std::pair<Vector, Vector> sparsity_metrics(const Matrix &activations);

/// Pearson correlation matrix (zero-variance units get unit diagonal and
/// zero off-diagonals) and the cumulative normalized eigenspectrum of the
/// activation covariance, eigenvalues sorted descending. Needs N >= 2.
std::pair<Matrix, Vector> correlation_and_spectrum(const Matrix &activations);

/// Mean absolute off-diagonal entry of a correlation matrix.
double mean_abs_offdiag(const Matrix &correlation);

/// Mean over samples and draws of ||x - r(x~)||^2 with x~ = x + N(0, var I)
/// and r computed through the deterministic (expectation-scaled) encoder.
double denoise_eval(const NaeParams &params, const Dataset &clean,
                    const NoiseSpec &train_spec, double noise_var,
                    std::size_t draws, Rng &rng);

/// Number of argmax-misclassified samples (ties break to the lowest class
/// index); prediction uses expectation scaling for `spec`.
std::size_t classification_error(const MlpParams &model, const Dataset &data,
                                 const NoiseSpec &spec);

/// Post-nonlinearity activations of hidden layer `layer` on `x`, computed
/// with expectation scaling (the test-time representation Fig.-3-style
/// statistics are taken over).
Matrix hidden_activations(const MlpParams &model, const Matrix &x,
                          const NoiseSpec &spec, std::size_t layer);

/// Raw float64 container for correlation matrices: "NAECORR1", u32 rows,
/// u32 cols, f64 data (little-endian).
void save_matrix_raw(const std::string &path, const Matrix &m);
Matrix load_matrix_raw(const std::string &path);

}  // namespace nae

#endif
