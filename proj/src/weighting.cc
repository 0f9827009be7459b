#include "smidge/weighting.h"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "smidge/binary_io.h"
#include "smidge/error.h"
#include "smidge/threading.h"

namespace smidge {

const char* to_string(WeightingMode mode) {
    switch (mode) {
        case WeightingMode::ppmi: return "ppmi";
        case WeightingMode::ppmi_lambda: return "ppmi_lambda";
        case WeightingMode::ppmi_cds: return "ppmi_cds";
        case WeightingMode::ppmi_discount: return "ppmi_discount";
    }
    return "?";
}

WeightingMode weighting_mode_from_string(const std::string& name) {
    if (name == "ppmi") return WeightingMode::ppmi;
    if (name == "ppmi_lambda") return WeightingMode::ppmi_lambda;
    if (name == "ppmi_cds") return WeightingMode::ppmi_cds;
    if (name == "ppmi_discount") return WeightingMode::ppmi_discount;
    throw ConfigError("unknown weighting mode '" + name +
                      "' (expected ppmi, ppmi_lambda, ppmi_cds, or "
                      "ppmi_discount)");
}

void WeightingConfig::validate() const {
    if (lambda < 0 || !std::isfinite(lambda)) {
        throw ConfigError("weighting.lambda must be >= 0");
    }
    if (!(alpha > 0) || alpha > 1) {
        throw ConfigError("weighting.alpha must be in (0, 1]");
    }
}

// The (joint + total) - (marginal + marginal) grouping keeps the value
// bitwise symmetric under (w,c) swap when the counts are symmetric.
double pmi(double f_wc, double row_marginal, double col_marginal,
           double total) {
    return (std::log(f_wc) + std::log(total)) -
           (std::log(row_marginal) + std::log(col_marginal));
}

double pmi_lambda(double f_wc, double row_marginal, double col_marginal,
                  double total, double lambda, double n_rows, double n_cols) {
    const double grand = total + lambda * n_rows * n_cols;
    return (std::log(f_wc + lambda) + std::log(grand)) -
           (std::log(row_marginal + lambda * n_cols) +
            std::log(col_marginal + lambda * n_rows));
}

double cds_normalizer(std::span<const uint64_t> col_marginals, double alpha) {
    double sum = 0.0;
    for (const uint64_t c : col_marginals) {
        if (c > 0) sum += std::pow(static_cast<double>(c), alpha);
    }
    return sum;
}

double pmi_cds(double f_wc, double row_marginal, double col_marginal,
               double total, double alpha, double normalizer) {
    // log( (f_wc/T) / ((f_w/T) * (f_c^a / Z)) )
    return (std::log(f_wc) + std::log(normalizer)) -
           (std::log(row_marginal) + alpha * std::log(col_marginal));
}

double pmi_discount(double pmi_value, double f_wc, double row_marginal,
                    double col_marginal) {
    const double m = std::min(row_marginal, col_marginal);
    const double delta = (f_wc / (f_wc + 1.0)) * (m / (m + 1.0));
    return pmi_value * delta;
}

double WeightedMatrix::value_at(uint32_t row, uint32_t col) const {
    if (row >= n_rows_) return 0.0;
    const auto begin = col_idx_.begin() + static_cast<ptrdiff_t>(row_ptr_[row]);
    const auto end =
        col_idx_.begin() + static_cast<ptrdiff_t>(row_ptr_[row + 1]);
    const auto it = std::lower_bound(begin, end, col);
    if (it == end || *it != col) return 0.0;
    return values_[static_cast<size_t>(it - col_idx_.begin())];
}

bool WeightedMatrix::check_symmetric() const {
    if (n_rows_ != n_cols_) return false;
    for (uint32_t r = 0; r < n_rows_; ++r) {
        for (uint64_t i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i) {
            if (value_at(col_idx_[i], r) != values_[i]) return false;
        }
    }
    return true;
}

WeightedMatrix WeightedMatrix::from_parts(
    uint32_t n_rows, uint32_t n_cols, uint32_t window, uint64_t vocab_ref,
    WeightingConfig config, std::vector<uint64_t> row_ptr,
    std::vector<uint32_t> col_idx, std::vector<double> values) {
    WeightedMatrix m;
    m.n_rows_ = n_rows;
    m.n_cols_ = n_cols;
    m.window_ = window;
    m.vocab_ref_ = vocab_ref;
    m.config_ = config;
    m.row_ptr_ = std::move(row_ptr);
    m.col_idx_ = std::move(col_idx);
    m.values_ = std::move(values);
    m.symmetric_ = m.check_symmetric();
    return m;
}

void WeightedMatrix::save(const std::string& path) const {
    ByteWriter w(path);
    w.bytes("WGHT", 4);
    w.u32(1);
    w.u32(n_rows_);
    w.u32(n_cols_);
    w.u64(nnz());
    w.u32(window_);
    w.u8(static_cast<uint8_t>(config_.mode));
    w.f64(config_.lambda);
    w.f64(config_.alpha);
    for (uint32_t r = 0; r < n_rows_; ++r) {
        for (uint64_t i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i) {
            w.u32(r);
            w.u32(col_idx_[i]);
            w.f64(values_[i]);
        }
    }
    w.finish();
}

WeightedMatrix WeightedMatrix::load(const std::string& path) {
    ByteReader r(path);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, "WGHT", 4) != 0) {
        throw DataError("not a WGHT file: " + path);
    }
    const uint32_t version = r.u32();
    if (version != 1) {
        throw DataError("unsupported WGHT version " + std::to_string(version) +
                        " in " + path);
    }
    const uint32_t n_rows = r.u32();
    const uint32_t n_cols = r.u32();
    const uint64_t nnz = r.u64();
    const uint32_t window = r.u32();
    const uint8_t mode_byte = r.u8();
    if (mode_byte > static_cast<uint8_t>(WeightingMode::ppmi_discount)) {
        throw DataError("unknown weighting mode byte " +
                        std::to_string(mode_byte) + " in " + path);
    }
    WeightingConfig config;
    config.mode = static_cast<WeightingMode>(mode_byte);
    config.lambda = r.f64();
    config.alpha = r.f64();

    std::vector<uint64_t> row_ptr(static_cast<size_t>(n_rows) + 1, 0);
    std::vector<uint32_t> col_idx;
    std::vector<double> values;
    col_idx.reserve(nnz);
    values.reserve(nnz);
    uint64_t prev_key = 0;
    bool all_positive = true;
    for (uint64_t i = 0; i < nnz; ++i) {
        const uint32_t row = r.u32();
        const uint32_t col = r.u32();
        const double value = r.f64();
        const std::string where =
            path + " record " + std::to_string(i) + ": ";
        if (row >= n_rows || col >= n_cols) {
            throw DataError(where + "index out of range");
        }
        if (!std::isfinite(value)) {
            throw DataError(where + "non-finite value");
        }
        const uint64_t key = (static_cast<uint64_t>(row) << 32) | col;
        if (i > 0 && key <= prev_key) {
            throw DataError(where + "records not sorted by (row, col)");
        }
        prev_key = key;
        row_ptr[row + 1]++;
        col_idx.push_back(col);
        values.push_back(value);
        if (value <= 0) all_positive = false;
    }
    if (!r.at_eof()) {
        throw DataError("trailing bytes after " + std::to_string(nnz) +
                        " records in " + path);
    }
    for (uint32_t row = 0; row < n_rows; ++row) row_ptr[row + 1] += row_ptr[row];
    config.clip_negative = all_positive;
    return from_parts(n_rows, n_cols, window, 0, config, std::move(row_ptr),
                      std::move(col_idx), std::move(values));
}

WeightedMatrix weight_matrix(const CoocMatrix& cooc,
                             const WeightingConfig& config, uint32_t threads) {
    config.validate();
    const uint32_t nt = resolve_threads(threads);
    const uint32_t n_rows = cooc.n_rows();
    const uint32_t n_cols = cooc.n_cols();
    const double total = static_cast<double>(cooc.total());
    const uint64_t nnz = cooc.nnz();

    // Marginal-dependent terms are hoisted into per-row/column tables so the
    // per-entry work is one log plus adds.
    std::vector<double> row_term(n_rows, 0.0);
    std::vector<double> col_term(n_cols, 0.0);
    double const_term = 0.0;
    const double lambda = config.lambda;
    switch (config.mode) {
        case WeightingMode::ppmi:
        case WeightingMode::ppmi_discount:
            const_term = std::log(total);
            for (uint32_t r = 0; r < n_rows; ++r) {
                const uint64_t m = cooc.row_marginals()[r];
                row_term[r] = m > 0 ? std::log(static_cast<double>(m)) : 0.0;
            }
            for (uint32_t c = 0; c < n_cols; ++c) {
                const uint64_t m = cooc.col_marginals()[c];
                col_term[c] = m > 0 ? std::log(static_cast<double>(m)) : 0.0;
            }
            break;
        case WeightingMode::ppmi_lambda:
            const_term = std::log(total + lambda * static_cast<double>(n_rows) *
                                              static_cast<double>(n_cols));
            for (uint32_t r = 0; r < n_rows; ++r) {
                row_term[r] =
                    std::log(static_cast<double>(cooc.row_marginals()[r]) +
                             lambda * static_cast<double>(n_cols));
            }
            for (uint32_t c = 0; c < n_cols; ++c) {
                col_term[c] =
                    std::log(static_cast<double>(cooc.col_marginals()[c]) +
                             lambda * static_cast<double>(n_rows));
            }
            break;
        case WeightingMode::ppmi_cds: {
            const double z = cds_normalizer(cooc.col_marginals(), config.alpha);
            const_term = std::log(z);
            for (uint32_t r = 0; r < n_rows; ++r) {
                const uint64_t m = cooc.row_marginals()[r];
                row_term[r] = m > 0 ? std::log(static_cast<double>(m)) : 0.0;
            }
            for (uint32_t c = 0; c < n_cols; ++c) {
                const uint64_t m = cooc.col_marginals()[c];
                col_term[c] = m > 0 ? config.alpha *
                                          std::log(static_cast<double>(m))
                                    : 0.0;
            }
            break;
        }
    }

    // Pass 1: per-entry values aligned with the source pattern.
    std::vector<double> raw(nnz);
    const auto& row_ptr_in = cooc.row_ptr();
    const auto& col_idx_in = cooc.col_idx();
    const auto& counts_in = cooc.counts();
#pragma omp parallel for schedule(static) num_threads(nt)
    for (uint32_t r = 0; r < n_rows; ++r) {
        for (uint64_t i = row_ptr_in[r]; i < row_ptr_in[r + 1]; ++i) {
            const double f = static_cast<double>(counts_in[i]);
            const uint32_t c = col_idx_in[i];
            double v;
            if (config.mode == WeightingMode::ppmi_lambda) {
                v = (std::log(f + lambda) + const_term) -
                    (row_term[r] + col_term[c]);
            } else {
                v = (std::log(f) + const_term) -
                    (row_term[r] + col_term[c]);
                if (config.mode == WeightingMode::ppmi_discount) {
                    v = pmi_discount(
                        v, f, static_cast<double>(cooc.row_marginals()[r]),
                        static_cast<double>(cooc.col_marginals()[c]));
                }
            }
            raw[i] = v;
        }
    }

    // Pass 2: compact, dropping clipped entries.
    const bool clip = config.clip_negative;
    std::vector<uint64_t> row_ptr_out(static_cast<size_t>(n_rows) + 1, 0);
    for (uint32_t r = 0; r < n_rows; ++r) {
        uint64_t kept = 0;
        for (uint64_t i = row_ptr_in[r]; i < row_ptr_in[r + 1]; ++i) {
            if (!clip || raw[i] > 0) ++kept;
        }
        row_ptr_out[r + 1] = row_ptr_out[r] + kept;
    }
    std::vector<uint32_t> col_idx_out(row_ptr_out[n_rows]);
    std::vector<double> values_out(row_ptr_out[n_rows]);
#pragma omp parallel for schedule(static) num_threads(nt)
    for (uint32_t r = 0; r < n_rows; ++r) {
        uint64_t at = row_ptr_out[r];
        for (uint64_t i = row_ptr_in[r]; i < row_ptr_in[r + 1]; ++i) {
            if (!clip || raw[i] > 0) {
                col_idx_out[at] = col_idx_in[i];
                values_out[at] = raw[i];
                ++at;
            }
        }
    }

    return WeightedMatrix::from_parts(n_rows, n_cols, cooc.window(),
                                      cooc.vocab_ref(), config,
                                      std::move(row_ptr_out),
                                      std::move(col_idx_out),
                                      std::move(values_out));
}

}  // namespace smidge
