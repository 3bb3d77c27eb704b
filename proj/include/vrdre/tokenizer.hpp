#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace vrdre {

// Word string -> subword id list. Injected so the toy path and an external
// backbone checkpoint can plug in different vocabularies.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<int> encode_word(std::string_view word) const = 0;
  virtual int vocab_size() const = 0;
};

// Deterministic hashing tokenizer for the bundled encoder: one subword per
// word, id = fnv1a64(word) mod vocab. No vocabulary file needed; collisions
// are acceptable at desk scale.
class HashingTokenizer final : public Tokenizer {
 public:
  explicit HashingTokenizer(int vocab = 32768) : vocab_(vocab) {}

  static uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return h;
  }

  std::vector<int> encode_word(std::string_view word) const override {
    return {static_cast<int>(fnv1a64(word) % uint64_t(vocab_))};
  }
  int vocab_size() const override { return vocab_; }

 private:
  int vocab_;
};

// Crude subword splitter over the same hash space: words longer than
// `piece_len` split into fixed-size pieces. Used to exercise multi-subword
// code paths in tests.
class ChunkHashTokenizer final : public Tokenizer {
 public:
  ChunkHashTokenizer(int vocab, int piece_len)
      : vocab_(vocab), piece_len_(piece_len) {}

  std::vector<int> encode_word(std::string_view word) const override {
    std::vector<int> ids;
    if (word.empty()) word = "<empty>";
    for (size_t i = 0; i < word.size(); i += piece_len_)
      ids.push_back(static_cast<int>(
          HashingTokenizer::fnv1a64(word.substr(i, piece_len_)) %
          uint64_t(vocab_)));
    return ids;
  }
  int vocab_size() const override { return vocab_; }

 private:
  int vocab_;
  size_t piece_len_;
};

}  // namespace vrdre
