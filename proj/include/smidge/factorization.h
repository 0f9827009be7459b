#ifndef SMIDGE_FACTORIZATION_H_
#define SMIDGE_FACTORIZATION_H_

#include <Eigen/Dense>
#include <cstdint>

#include "smidge/weighting.h"

namespace smidge {

struct FactorizationConfig {
    uint32_t k = 100;           // embedding dimension
    uint32_t oversampling = 10; // extra random probe columns
    uint32_t power_iterations = 4;
    uint64_t seed = 42;
    double sigma_power = 0.0;   // 0 keeps U_k alone, 1 gives U_k * Sigma_k

    void validate() const;
};

struct SvdResult {
    Eigen::MatrixXd u;                // n_rows x k, orthonormal columns
    Eigen::VectorXd singular_values;  // descending, >= 0
    Eigen::MatrixXd v;                // n_cols x k, kept for diagnostics
    bool rank_deficient = false;      // trailing singular values zeroed
};

// Randomized range-finder SVD (Gaussian probe, QR-stabilized power
// iterations, dense SVD of the projected core). The probe matrix is drawn
// from a counter-based generator keyed on (seed, row, column), and every
// parallel stage partitions output rows, so the result is bitwise identical
// for any thread count.
SvdResult truncated_svd(const WeightedMatrix& matrix,
                        const FactorizationConfig& config,
                        uint32_t threads = 0);

// Row i of the result is row i of U_k, entrywise scaled by
// singular_values^sigma_power.
Eigen::MatrixXd embeddings_from_svd(const SvdResult& result,
                                    const FactorizationConfig& config);

}  // namespace smidge

#endif  // SMIDGE_FACTORIZATION_H_
