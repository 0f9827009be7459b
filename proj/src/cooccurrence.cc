#include "smidge/cooccurrence.h"

#include <omp.h>

#include <algorithm>
#include <queue>

#include "smidge/binary_io.h"
#include "smidge/error.h"
#include "smidge/threading.h"

namespace smidge {

uint32_t resolve_threads(uint32_t requested) {
    if (requested > 0) return requested;
    const int n = omp_get_max_threads();
    return n > 0 ? static_cast<uint32_t>(n) : 1;
}

namespace {

inline uint64_t pack_key(uint32_t row, uint32_t col) {
    return (static_cast<uint64_t>(row) << 32) | col;
}

// A sorted, collapsed slice of pair counts. Counts fit u32 because one run
// never aggregates more keys than the emit buffer holds.
struct Run {
    std::vector<uint64_t> keys;
    std::vector<uint32_t> counts;
};

void collapse_into_run(std::vector<uint64_t>& buf, std::vector<Run>& runs) {
    if (buf.empty()) return;
    std::sort(buf.begin(), buf.end());
    Run run;
    run.keys.reserve(buf.size() / 2);
    run.counts.reserve(buf.size() / 2);
    size_t i = 0;
    while (i < buf.size()) {
        size_t j = i + 1;
        while (j < buf.size() && buf[j] == buf[i]) ++j;
        run.keys.push_back(buf[i]);
        run.counts.push_back(static_cast<uint32_t>(j - i));
        i = j;
    }
    buf.clear();
    runs.push_back(std::move(run));
}

// Counts pairs whose middle position lies in [begin, end). Only left
// contexts are enumerated; incrementing both directions reproduces the
// symmetric window exactly while chunks need no right extension.
void count_chunk(std::span<const uint32_t> ids, size_t begin, size_t end,
                 uint32_t window, size_t buf_cap, std::vector<Run>& runs) {
    std::vector<uint64_t> buf;
    buf.reserve(std::min(buf_cap, 2 * static_cast<size_t>(window) *
                                          (end - begin) +
                                      2));
    for (size_t i = begin; i < end; ++i) {
        const uint32_t middle = ids[i];
        if (middle == kOovId) continue;
        const size_t reach = std::min<size_t>(window, i);
        for (size_t d = 1; d <= reach; ++d) {
            const uint32_t context = ids[i - d];
            if (context == kOovId) continue;
            buf.push_back(pack_key(middle, context));
            buf.push_back(pack_key(context, middle));
            if (buf.size() + 2 > buf_cap) collapse_into_run(buf, runs);
        }
    }
    collapse_into_run(buf, runs);
}

// K-way merge of key-sorted cursors, summing counts per key.
template <typename Cursor>
void kway_sum(std::vector<Cursor>& cursors, std::vector<uint64_t>& out_keys,
              std::vector<uint64_t>& out_counts) {
    using Item = std::pair<uint64_t, size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (size_t i = 0; i < cursors.size(); ++i) {
        if (!cursors[i].done()) heap.emplace(cursors[i].key(), i);
    }
    while (!heap.empty()) {
        const uint64_t key = heap.top().first;
        uint64_t sum = 0;
        while (!heap.empty() && heap.top().first == key) {
            const size_t i = heap.top().second;
            heap.pop();
            sum += cursors[i].count();
            cursors[i].advance();
            if (!cursors[i].done()) heap.emplace(cursors[i].key(), i);
        }
        out_keys.push_back(key);
        out_counts.push_back(sum);
    }
}

struct RunCursor {
    const Run* run;
    size_t pos = 0;
    bool done() const { return pos >= run->keys.size(); }
    uint64_t key() const { return run->keys[pos]; }
    uint64_t count() const { return run->counts[pos]; }
    void advance() { ++pos; }
};

struct MatrixCursor {
    const CoocMatrix* m;
    uint32_t row = 0;
    uint64_t idx = 0;
    MatrixCursor(const CoocMatrix* matrix) : m(matrix) { settle(); }
    void settle() {
        while (row < m->n_rows() && idx >= m->row_ptr()[row + 1]) ++row;
    }
    bool done() const { return idx >= m->nnz(); }
    uint64_t key() const { return pack_key(row, m->col_idx()[idx]); }
    uint64_t count() const { return m->counts()[idx]; }
    void advance() {
        ++idx;
        settle();
    }
};

}  // namespace

uint64_t CoocMatrix::count_at(uint32_t row, uint32_t col) const {
    if (row >= n_rows_) return 0;
    const auto begin = col_idx_.begin() + static_cast<ptrdiff_t>(row_ptr_[row]);
    const auto end =
        col_idx_.begin() + static_cast<ptrdiff_t>(row_ptr_[row + 1]);
    const auto it = std::lower_bound(begin, end, col);
    if (it == end || *it != col) return 0;
    return counts_[static_cast<size_t>(it - col_idx_.begin())];
}

bool CoocMatrix::is_symmetric() const {
    if (n_rows_ != n_cols_) return false;
    for (uint32_t r = 0; r < n_rows_; ++r) {
        for (uint64_t i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i) {
            if (count_at(col_idx_[i], r) != counts_[i]) return false;
        }
    }
    return true;
}

void CoocMatrix::compute_marginals() {
    row_marginals_.assign(n_rows_, 0);
    col_marginals_.assign(n_cols_, 0);
    total_ = 0;
    for (uint32_t r = 0; r < n_rows_; ++r) {
        for (uint64_t i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i) {
            const uint64_t c = counts_[i];
            row_marginals_[r] += c;
            col_marginals_[col_idx_[i]] += c;
            total_ += c;
        }
    }
}

CoocMatrix CoocMatrix::from_sorted_entries(uint32_t n_rows, uint32_t n_cols,
                                           uint32_t window, uint64_t vocab_ref,
                                           std::vector<uint64_t> keys,
                                           std::vector<uint64_t> counts) {
    CoocMatrix m;
    m.n_rows_ = n_rows;
    m.n_cols_ = n_cols;
    m.window_ = window;
    m.vocab_ref_ = vocab_ref;
    m.row_ptr_.assign(static_cast<size_t>(n_rows) + 1, 0);
    m.col_idx_.resize(keys.size());
    for (size_t i = 0; i < keys.size(); ++i) {
        const uint32_t row = static_cast<uint32_t>(keys[i] >> 32);
        m.row_ptr_[row + 1]++;
        m.col_idx_[i] = static_cast<uint32_t>(keys[i] & 0xFFFFFFFFu);
    }
    for (uint32_t r = 0; r < n_rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
    m.counts_ = std::move(counts);
    m.compute_marginals();
    return m;
}

void CoocMatrix::save(const std::string& path) const {
    ByteWriter w(path);
    w.bytes("COOC", 4);
    w.u32(1);
    w.u32(n_rows_);
    w.u32(n_cols_);
    w.u64(nnz());
    w.u32(window_);
    for (uint32_t r = 0; r < n_rows_; ++r) {
        for (uint64_t i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i) {
            w.u32(r);
            w.u32(col_idx_[i]);
            w.u64(counts_[i]);
        }
    }
    w.finish();
}

CoocMatrix CoocMatrix::load(const std::string& path) {
    ByteReader r(path);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, "COOC", 4) != 0) {
        throw DataError("not a COOC file: " + path);
    }
    const uint32_t version = r.u32();
    if (version != 1) {
        throw DataError("unsupported COOC version " + std::to_string(version) +
                        " in " + path);
    }
    const uint32_t n_rows = r.u32();
    const uint32_t n_cols = r.u32();
    const uint64_t nnz = r.u64();
    const uint32_t window = r.u32();
    std::vector<uint64_t> keys;
    std::vector<uint64_t> counts;
    keys.reserve(nnz);
    counts.reserve(nnz);
    uint64_t prev_key = 0;
    for (uint64_t i = 0; i < nnz; ++i) {
        const uint32_t row = r.u32();
        const uint32_t col = r.u32();
        const uint64_t count = r.u64();
        const std::string where =
            path + " record " + std::to_string(i) + ": ";
        if (row >= n_rows || col >= n_cols) {
            throw DataError(where + "index out of range");
        }
        if (count == 0) throw DataError(where + "zero count");
        const uint64_t key = pack_key(row, col);
        if (i > 0 && key <= prev_key) {
            throw DataError(where + "records not sorted by (row, col)");
        }
        prev_key = key;
        keys.push_back(key);
        counts.push_back(count);
    }
    if (!r.at_eof()) {
        throw DataError("trailing bytes after " + std::to_string(nnz) +
                        " records in " + path);
    }
    return from_sorted_entries(n_rows, n_cols, window, 0, std::move(keys),
                               std::move(counts));
}

CoocMatrix count_cooccurrences(std::span<const uint32_t> ids,
                               uint32_t vocab_size, WindowConfig window,
                               uint64_t vocab_ref, uint32_t threads) {
    if (window.size < 1) throw ConfigError("window size must be >= 1");
    const uint32_t nt = resolve_threads(threads);
    const size_t total = ids.size();

    // Chunks own disjoint middle positions; left contexts may reach into the
    // previous chunk, so every pair is counted exactly once.
    constexpr size_t kMinChunk = 1 << 16;
    constexpr size_t kBufCap = 8u << 20;
    size_t n_chunks = std::max<size_t>(1, std::min<size_t>(
                                              4 * nt, total / kMinChunk));
    const size_t chunk_len = (total + n_chunks - 1) / std::max<size_t>(
                                                          n_chunks, 1);
    std::vector<std::vector<Run>> chunk_runs(n_chunks);

#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
    for (size_t c = 0; c < n_chunks; ++c) {
        const size_t begin = c * chunk_len;
        const size_t end = std::min(total, begin + chunk_len);
        if (begin < end) {
            count_chunk(ids, begin, end, window.size, kBufCap, chunk_runs[c]);
        }
    }

    std::vector<RunCursor> cursors;
    for (const auto& runs : chunk_runs) {
        for (const auto& run : runs) cursors.push_back(RunCursor{&run});
    }
    std::vector<uint64_t> keys;
    std::vector<uint64_t> counts;
    kway_sum(cursors, keys, counts);
    return CoocMatrix::from_sorted_entries(vocab_size, vocab_size, window.size,
                                           vocab_ref, std::move(keys),
                                           std::move(counts));
}

CoocMatrix count_cooccurrences(const std::string& corpus_path,
                               TokenizerOptions opts, const CorpusSlice& slice,
                               const Vocabulary& vocab, WindowConfig window,
                               uint32_t threads) {
    const std::vector<uint32_t> ids =
        ids_from_corpus(corpus_path, opts, slice, vocab);
    return count_cooccurrences(ids, vocab.size(), window, vocab.fingerprint(),
                               threads);
}

CoocMatrix merge(const std::vector<CoocMatrix>& parts) {
    if (parts.empty()) throw UsageError("merge needs at least one part");
    const CoocMatrix& first = parts.front();
    for (const CoocMatrix& p : parts) {
        if (p.n_rows() != first.n_rows() || p.n_cols() != first.n_cols()) {
            throw ConfigError("merge: mismatched dimensions");
        }
        if (p.window() != first.window()) {
            throw ConfigError("merge: mismatched window size");
        }
        if (p.vocab_ref() != first.vocab_ref()) {
            throw ConfigError("merge: mismatched vocabulary reference");
        }
    }
    std::vector<MatrixCursor> cursors;
    cursors.reserve(parts.size());
    for (const CoocMatrix& p : parts) cursors.emplace_back(&p);
    std::vector<uint64_t> keys;
    std::vector<uint64_t> counts;
    kway_sum(cursors, keys, counts);
    return CoocMatrix::from_sorted_entries(first.n_rows(), first.n_cols(),
                                           first.window(), first.vocab_ref(),
                                           std::move(keys), std::move(counts));
}

}  // namespace smidge
