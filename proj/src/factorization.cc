#include "smidge/factorization.h"

#include <omp.h>

#include <cmath>
#include <numbers>

#include "smidge/error.h"
#include "smidge/threading.h"

namespace smidge {

namespace {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline double unit_interval(uint64_t bits) {
    // (0, 1]: Box-Muller needs log() of a nonzero argument
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

// Standard normal draw addressed by (seed, i, j); order-independent.
double gaussian_at(uint64_t seed, uint64_t i, uint64_t j) {
    const uint64_t base = splitmix64(seed ^ splitmix64((i << 32) | j));
    const double u1 = unit_interval(splitmix64(base));
    const double u2 = unit_interval(splitmix64(base ^ 0xD6E8FEB86659FD93ULL));
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

// Read-only CSR view; either borrows a WeightedMatrix or owns a transpose.
struct CsrView {
    uint32_t n_rows = 0;
    uint32_t n_cols = 0;
    const uint64_t* row_ptr = nullptr;
    const uint32_t* col_idx = nullptr;
    const double* values = nullptr;
};

CsrView view_of(const WeightedMatrix& m) {
    return {m.n_rows(), m.n_cols(), m.row_ptr().data(), m.col_idx().data(),
            m.values().data()};
}

struct OwnedCsr {
    uint32_t n_rows = 0;
    uint32_t n_cols = 0;
    std::vector<uint64_t> row_ptr;
    std::vector<uint32_t> col_idx;
    std::vector<double> values;
    CsrView view() const {
        return {n_rows, n_cols, row_ptr.data(), col_idx.data(), values.data()};
    }
};

OwnedCsr transpose_of(const WeightedMatrix& m) {
    OwnedCsr t;
    t.n_rows = m.n_cols();
    t.n_cols = m.n_rows();
    t.row_ptr.assign(static_cast<size_t>(t.n_rows) + 1, 0);
    t.col_idx.resize(m.nnz());
    t.values.resize(m.nnz());
    for (uint64_t i = 0; i < m.nnz(); ++i) t.row_ptr[m.col_idx()[i] + 1]++;
    for (uint32_t r = 0; r < t.n_rows; ++r) t.row_ptr[r + 1] += t.row_ptr[r];
    std::vector<uint64_t> cursor(t.row_ptr.begin(), t.row_ptr.end() - 1);
    for (uint32_t r = 0; r < m.n_rows(); ++r) {
        for (uint64_t i = m.row_ptr()[r]; i < m.row_ptr()[r + 1]; ++i) {
            const uint64_t at = cursor[m.col_idx()[i]]++;
            t.col_idx[at] = r;
            t.values[at] = m.values()[i];
        }
    }
    return t;
}

// out = A * y. Each output row is owned by one thread and accumulated in
// CSR order, so the result does not depend on the thread count.
void spmm(const CsrView& a, const RowMajorMatrix& y, RowMajorMatrix& out,
          uint32_t nt) {
    const Eigen::Index ell = y.cols();
    out.resize(a.n_rows, ell);
#pragma omp parallel for schedule(dynamic, 256) num_threads(nt)
    for (uint32_t r = 0; r < a.n_rows; ++r) {
        auto acc = out.row(r);
        acc.setZero();
        for (uint64_t i = a.row_ptr[r]; i < a.row_ptr[r + 1]; ++i) {
            acc += a.values[i] * y.row(a.col_idx[i]);
        }
    }
}

// Thin orthonormal basis of the columns of y.
RowMajorMatrix thin_q(const RowMajorMatrix& y) {
    const Eigen::MatrixXd ycm = y;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(ycm);
    Eigen::MatrixXd q = qr.householderQ() *
                        Eigen::MatrixXd::Identity(y.rows(), y.cols());
    return q;
}

}  // namespace

void FactorizationConfig::validate() const {
    if (k < 1) throw ConfigError("svd.k must be >= 1");
    if (sigma_power < 0 || sigma_power > 1) {
        throw ConfigError("svd.sigma_power must be in [0, 1]");
    }
}

SvdResult truncated_svd(const WeightedMatrix& matrix,
                        const FactorizationConfig& config, uint32_t threads) {
    config.validate();
    const uint32_t n_rows = matrix.n_rows();
    const uint32_t n_cols = matrix.n_cols();
    const uint32_t min_dim = std::min(n_rows, n_cols);
    if (config.k > min_dim) {
        throw ConfigError("svd.k = " + std::to_string(config.k) +
                          " exceeds the smaller matrix dimension " +
                          std::to_string(min_dim));
    }
    if (matrix.nnz() == 0) throw DataError("cannot factorize an empty matrix");
    const uint32_t nt = resolve_threads(threads);
    const uint32_t ell = static_cast<uint32_t>(
        std::min<uint64_t>(static_cast<uint64_t>(config.k) +
                               config.oversampling,
                           min_dim));

    const CsrView a = view_of(matrix);
    OwnedCsr at_store;
    CsrView at = a;
    if (!matrix.symmetric()) {
        at_store = transpose_of(matrix);
        at = at_store.view();
    }

    // Probe the range of A, then sharpen it with QR-stabilized power
    // iterations: the spectrum of a PPMI matrix decays slowly.
    RowMajorMatrix omega(n_cols, ell);
#pragma omp parallel for schedule(static) num_threads(nt)
    for (uint32_t i = 0; i < n_cols; ++i) {
        for (uint32_t j = 0; j < ell; ++j) {
            omega(i, j) = gaussian_at(config.seed, i, j);
        }
    }
    RowMajorMatrix y;
    spmm(a, omega, y, nt);
    RowMajorMatrix q = thin_q(y);
    for (uint32_t it = 0; it < config.power_iterations; ++it) {
        RowMajorMatrix z;
        spmm(at, q, z, nt);
        const RowMajorMatrix qz = thin_q(z);
        spmm(a, qz, y, nt);
        q = thin_q(y);
    }

    // Project: B = Q^T A, decomposed through the QR of B^T so the dense SVD
    // runs on an ell x ell core.
    RowMajorMatrix bt;
    spmm(at, q, bt, nt);
    const Eigen::MatrixXd btcm = bt;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(btcm);
    const Eigen::MatrixXd q2 =
        qr.householderQ() * Eigen::MatrixXd::Identity(n_cols, ell);
    const Eigen::MatrixXd r2 = qr.matrixQR()
                                   .topRows(ell)
                                   .triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<Eigen::MatrixXd> core(
        r2.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);

    SvdResult result;
    const Eigen::MatrixXd qcm = q;
    result.u = qcm * core.matrixU().leftCols(config.k);
    result.v = q2 * core.matrixV().leftCols(config.k);
    result.singular_values = core.singularValues().head(config.k);

    // Zero out spurious tail values when the matrix rank falls short of k.
    const double floor = result.singular_values(0) * 1e-12;
    for (uint32_t j = 0; j < config.k; ++j) {
        if (result.singular_values(j) <= floor) {
            result.singular_values(j) = 0.0;
            result.rank_deficient = true;
        }
    }

    // Sign canonicalization: the largest-magnitude entry of each U column is
    // made positive (ties: lowest row index), which pins down the SVD's sign
    // freedom for the determinism guarantees.
    for (uint32_t j = 0; j < config.k; ++j) {
        uint32_t arg = 0;
        double best = -1.0;
        for (uint32_t i = 0; i < n_rows; ++i) {
            const double mag = std::abs(result.u(i, j));
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        if (result.u(arg, j) < 0) {
            result.u.col(j) = -result.u.col(j);
            result.v.col(j) = -result.v.col(j);
        }
    }
    return result;
}

Eigen::MatrixXd embeddings_from_svd(const SvdResult& result,
                                    const FactorizationConfig& config) {
    config.validate();
    Eigen::MatrixXd embeddings = result.u;
    if (config.sigma_power != 0.0) {
        for (Eigen::Index j = 0; j < embeddings.cols(); ++j) {
            embeddings.col(j) *=
                std::pow(result.singular_values(j), config.sigma_power);
        }
    }
    return embeddings;
}

}  // namespace smidge
