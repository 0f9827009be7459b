#ifndef SMIDGE_COOCCURRENCE_H_
#define SMIDGE_COOCCURRENCE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "smidge/corpus.h"

namespace smidge {

struct WindowConfig {
    uint32_t size = 5;  // symmetric span, uniform weighting, clipped at ends
};

// Sparse middle-word x context-word counts in CSR order, with cached
// marginals. Immutable after construction.
class CoocMatrix {
   public:
    uint32_t n_rows() const { return n_rows_; }
    uint32_t n_cols() const { return n_cols_; }
    uint32_t window() const { return window_; }
    uint64_t vocab_ref() const { return vocab_ref_; }
    uint64_t nnz() const { return col_idx_.size(); }
    uint64_t total() const { return total_; }

    const std::vector<uint64_t>& row_ptr() const { return row_ptr_; }
    const std::vector<uint32_t>& col_idx() const { return col_idx_; }
    const std::vector<uint64_t>& counts() const { return counts_; }
    const std::vector<uint64_t>& row_marginals() const {
        return row_marginals_;
    }
    const std::vector<uint64_t>& col_marginals() const {
        return col_marginals_;
    }

    // Count at (row, col), zero when the entry is implicit.
    uint64_t count_at(uint32_t row, uint32_t col) const;

    bool is_symmetric() const;

    void save(const std::string& path) const;
    static CoocMatrix load(const std::string& path);

    // Builds from (row<<32|col) keys with positive counts, sorted ascending.
    static CoocMatrix from_sorted_entries(uint32_t n_rows, uint32_t n_cols,
                                          uint32_t window, uint64_t vocab_ref,
                                          std::vector<uint64_t> keys,
                                          std::vector<uint64_t> counts);

   private:
    void compute_marginals();

    uint32_t n_rows_ = 0;
    uint32_t n_cols_ = 0;
    uint32_t window_ = 0;
    uint64_t vocab_ref_ = 0;
    uint64_t total_ = 0;
    std::vector<uint64_t> row_ptr_;
    std::vector<uint32_t> col_idx_;
    std::vector<uint64_t> counts_;
    std::vector<uint64_t> row_marginals_;
    std::vector<uint64_t> col_marginals_;
};

// Scans the id sequence with a symmetric window of `window.size` and counts
// every (middle, context) pair whose words are both in vocabulary. OOV
// positions are skipped as pair members but still occupy window slots.
// Counting is parallel over corpus chunks; the result is identical for any
// thread count.
CoocMatrix count_cooccurrences(std::span<const uint32_t> ids,
                               uint32_t vocab_size, WindowConfig window,
                               uint64_t vocab_ref, uint32_t threads = 0);

// Convenience overload: tokenize + map to ids, then count.
CoocMatrix count_cooccurrences(const std::string& corpus_path,
                               TokenizerOptions opts, const CorpusSlice& slice,
                               const Vocabulary& vocab, WindowConfig window,
                               uint32_t threads = 0);

// Entry-wise sum of compatible matrices; the result does not depend on part
// order.
CoocMatrix merge(const std::vector<CoocMatrix>& parts);

}  // namespace smidge

#endif  // SMIDGE_COOCCURRENCE_H_
