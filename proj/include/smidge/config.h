#ifndef SMIDGE_CONFIG_H_
#define SMIDGE_CONFIG_H_

#include <iosfwd>
#include <string>

#include "smidge/cooccurrence.h"
#include "smidge/corpus.h"
#include "smidge/factorization.h"
#include "smidge/weighting.h"

namespace smidge {

// Hyperparameters of the whole pipeline with their conventional defaults:
// window 5, min_count 1, embedding dimension 100.
struct PipelineConfig {
    WindowConfig window;
    uint32_t min_count = 1;
    WeightingConfig weighting;
    FactorizationConfig svd;
    bool lowercase = true;
    CorpusSlice slice;
    uint32_t threads = 0;  // 0 = all available cores

    TokenizerOptions tokenizer() const { return {lowercase}; }

    void validate() const;

    // Applies one `key = value` assignment; unknown keys or out-of-range
    // values raise a ConfigError naming the key.
    void set(const std::string& key, const std::string& value);

    // Canonical flat key = value rendering; reloading it reproduces the
    // config exactly.
    std::string serialize() const;

    // Serialization prefixed per line (comment headers in report outputs).
    std::string serialize_commented(const std::string& prefix) const;
};

// Parses a flat key = value file over the defaults. Blank lines and `#`
// comments are allowed.
PipelineConfig load_config(const std::string& path);
PipelineConfig parse_config(std::istream& in, const std::string& origin);

}  // namespace smidge

#endif  // SMIDGE_CONFIG_H_
