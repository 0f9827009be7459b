#ifndef SMIDGE_WEIGHTING_H_
#define SMIDGE_WEIGHTING_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "smidge/cooccurrence.h"

namespace smidge {

enum class WeightingMode : uint8_t {
    ppmi = 0,
    ppmi_lambda = 1,
    ppmi_cds = 2,
    ppmi_discount = 3,
};

const char* to_string(WeightingMode mode);
WeightingMode weighting_mode_from_string(const std::string& name);

struct WeightingConfig {
    WeightingMode mode = WeightingMode::ppmi_lambda;
    double lambda = 0.01;  // add-lambda pseudo-count (ppmi_lambda)
    double alpha = 0.75;   // context distribution exponent (ppmi_cds)
    bool clip_negative = true;

    void validate() const;
};

// Pointwise mutual information of one nonzero co-occurrence cell, natural
// log. All probability estimates are maximum likelihood from the counts.
double pmi(double f_wc, double row_marginal, double col_marginal,
           double total);

// Dirichlet-smoothed PMI: every cell of the (virtual) dense count table gets
// a pseudo-count of lambda, so marginals grow by lambda * dim and the grand
// total by lambda * n_rows * n_cols. Computed for nonzero cells only.
double pmi_lambda(double f_wc, double row_marginal, double col_marginal,
                  double total, double lambda, double n_rows, double n_cols);

// Sum over context marginals raised to alpha; the normalizer of the smoothed
// context distribution. Computed once per matrix.
double cds_normalizer(std::span<const uint64_t> col_marginals, double alpha);

// Context-distribution-smoothed PMI: the context probability uses marginal
// counts raised to alpha over the precomputed normalizer.
double pmi_cds(double f_wc, double row_marginal, double col_marginal,
               double total, double alpha, double normalizer);

// Scales a signed PMI value by a discount that shrinks toward zero for rare
// pairs and rare words.
double pmi_discount(double pmi_value, double f_wc, double row_marginal,
                    double col_marginal);

// Sparse nonnegative association matrix; same CSR layout as its source
// counts, real-valued entries. Immutable after construction.
class WeightedMatrix {
   public:
    uint32_t n_rows() const { return n_rows_; }
    uint32_t n_cols() const { return n_cols_; }
    uint32_t window() const { return window_; }
    uint64_t vocab_ref() const { return vocab_ref_; }
    uint64_t nnz() const { return col_idx_.size(); }
    const WeightingConfig& config() const { return config_; }
    bool symmetric() const { return symmetric_; }

    const std::vector<uint64_t>& row_ptr() const { return row_ptr_; }
    const std::vector<uint32_t>& col_idx() const { return col_idx_; }
    const std::vector<double>& values() const { return values_; }

    // Value at (row, col), zero when the entry is implicit.
    double value_at(uint32_t row, uint32_t col) const;

    void save(const std::string& path) const;
    static WeightedMatrix load(const std::string& path);

    static WeightedMatrix from_parts(uint32_t n_rows, uint32_t n_cols,
                                     uint32_t window, uint64_t vocab_ref,
                                     WeightingConfig config,
                                     std::vector<uint64_t> row_ptr,
                                     std::vector<uint32_t> col_idx,
                                     std::vector<double> values);

   private:
    bool check_symmetric() const;

    uint32_t n_rows_ = 0;
    uint32_t n_cols_ = 0;
    uint32_t window_ = 0;
    uint64_t vocab_ref_ = 0;
    WeightingConfig config_;
    bool symmetric_ = false;
    std::vector<uint64_t> row_ptr_;
    std::vector<uint32_t> col_idx_;
    std::vector<double> values_;
};

// Applies the configured association measure to every stored entry. With
// clip_negative, entries <= 0 are dropped from storage, so the output
// pattern is a subset of the input pattern. Never materializes zeros.
WeightedMatrix weight_matrix(const CoocMatrix& cooc,
                             const WeightingConfig& config,
                             uint32_t threads = 0);

}  // namespace smidge

#endif  // SMIDGE_WEIGHTING_H_
