#ifndef SMIDGE_CORPUS_H_
#define SMIDGE_CORPUS_H_

#include <cstdint>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace smidge {

struct TokenizerOptions {
    bool lowercase = true;  // ASCII A-Z only; corpora are pre-cleaned upstream
};

enum class SliceMode { all, first_n, last_n };

struct CorpusSlice {
    SliceMode mode = SliceMode::all;
    uint64_t n = 0;  // token count, required when mode != all
};

// Streams whitespace-separated tokens from a UTF-8 text file.
// Tokens are split on ASCII and Unicode whitespace; invalid UTF-8 is a hard
// error reporting the byte offset. Re-iterating the same file with the same
// options yields the identical token sequence.
class TokenReader {
   public:
    explicit TokenReader(const std::string& path, TokenizerOptions opts = {});

    // Fills `token` with the next token and returns true, or returns false
    // at end of stream. Never yields an empty token.
    bool next(std::string& token);

    const std::string& path() const { return path_; }

   private:
    void refill();

    std::string path_;
    TokenizerOptions opts_;
    std::ifstream in_;
    std::string buf_;       // current chunk, plus carried-over bytes
    size_t pos_ = 0;        // cursor into buf_
    uint64_t base_off_ = 0; // file offset of buf_[0]
    bool eof_ = false;
};

// TokenReader with a CorpusSlice applied. first_n stops early; last_n runs a
// counting pass first and then skips, so memory stays O(1).
class SlicedTokenReader {
   public:
    SlicedTokenReader(const std::string& path, TokenizerOptions opts,
                      const CorpusSlice& slice);

    bool next(std::string& token);

   private:
    TokenReader reader_;
    uint64_t remaining_;  // tokens still to yield (first_n/last_n)
    uint64_t skip_ = 0;   // leading tokens to drop (last_n)
    bool unbounded_;
};

// Counts the tokens in a file (used by last_n slicing and reporting).
uint64_t count_tokens(const std::string& path, TokenizerOptions opts = {});

// Word <-> dense id map with occurrence counts. Canonical order is count
// descending, ties broken lexicographically, so builds are deterministic.
class Vocabulary {
   public:
    Vocabulary() = default;

    uint32_t size() const { return static_cast<uint32_t>(words_.size()); }
    const std::string& word(uint32_t id) const { return words_[id]; }
    uint64_t count(uint32_t id) const { return counts_[id]; }
    uint32_t min_count() const { return min_count_; }

    static constexpr uint32_t kNotFound = UINT32_MAX;
    uint32_t lookup(const std::string& word) const;

    uint64_t total_count() const;

    // FNV-1a digest over (word, count) pairs; binds matrices to this build.
    uint64_t fingerprint() const;

    void save_tsv(const std::string& path) const;
    static Vocabulary load_tsv(const std::string& path);

    // Assembles a vocabulary from raw counts, applying min_count and the
    // canonical ordering.
    static Vocabulary from_counts(
        const std::unordered_map<std::string, uint64_t>& raw,
        uint32_t min_count);

   private:
    std::vector<std::string> words_;
    std::vector<uint64_t> counts_;
    std::unordered_map<std::string, uint32_t> index_;
    uint32_t min_count_ = 1;
};

// Counts every distinct token in the (sliced) corpus and keeps those with
// count >= min_count.
Vocabulary build_vocabulary(const std::string& path, TokenizerOptions opts,
                            const CorpusSlice& slice, uint32_t min_count);

// Sentinel id for out-of-vocabulary positions in an id sequence.
inline constexpr uint32_t kOovId = UINT32_MAX;

// Materializes the corpus as vocabulary ids. OOV tokens keep their position
// as kOovId so windows still see them.
std::vector<uint32_t> ids_from_corpus(const std::string& path,
                                      TokenizerOptions opts,
                                      const CorpusSlice& slice,
                                      const Vocabulary& vocab);

// Test seam: tokenize a whole in-memory string with the same rules as
// TokenReader.
std::vector<std::string> tokenize(const std::string& text,
                                  TokenizerOptions opts = {});

}  // namespace smidge

#endif  // SMIDGE_CORPUS_H_
