#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cie {

/// A canonical domain entity (e.g. a clinical concept) that text spans map to.
struct Concept {
  std::string concept_id;
  std::string preferred_name;
};

struct RawInstance {
  std::string id;
  std::string text;
  std::optional<std::string> gold_label;
};

/// An instance reduced to its set of concept ids. `concepts` is sorted and
/// duplicate-free, so iteration order is deterministic.
struct ConceptInstance {
  std::string id;
  std::vector<std::string> concepts;
  std::optional<std::string> gold_label;
};

/// Surface-form dictionary mapping normalized n-grams to concept ids.
/// Immutable after load; lookups are safe from multiple threads.
class Lexicon {
 public:
  Lexicon() = default;

  // Normalized surface form -> concept id. Throws on a conflict with an
  // existing entry for a different concept.
  void add_entry(const std::string& surface, const std::string& concept_id);
  void add_concept(Concept c);

  const std::string* find(const std::string& surface) const;
  bool has_concept(const std::string& concept_id) const;
  const std::string* preferred_name(const std::string& concept_id) const;

  int max_ngram() const { return max_ngram_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t concept_count() const { return concepts_.size(); }

  /// concept_id -> preferred_name, ordered by id.
  const std::map<std::string, std::string>& concept_table() const { return concepts_; }

 private:
  std::unordered_map<std::string, std::string> entries_;
  std::map<std::string, std::string> concepts_;
  int max_ngram_ = 1;
};

/// Lowercases and splits on whitespace and ASCII punctuation. Bytes >= 0x80
/// are kept as word characters, so UTF-8 sequences survive intact.
std::vector<std::string> tokenize(std::string_view text);

/// Normalizes a surface form with the same tokenizer used for matching:
/// lowercased tokens rejoined with single spaces. Empty result means the
/// form contained no word characters.
std::string normalize_surface(std::string_view surface);

/// Loads the three-column lexicon TSV (concept_id, preferred_name,
/// pipe-separated surface forms). Throws on malformed lines or when a
/// surface form maps to two different concepts.
Lexicon load_lexicon(const std::string& path);

/// Greedy longest-match scan: left to right, n-grams up to max_ngram, each
/// match consumes its tokens. Unmatched tokens are dropped. The result's
/// concept set is sorted and deduplicated.
ConceptInstance map_text(const RawInstance& instance, const Lexicon& lexicon);

// JSONL interchange. Raw instances: {id, text, label?}. Mapped instances:
// {id, concepts, label?} — the bypass format for external concept mappers.
std::vector<RawInstance> load_raw_jsonl(const std::string& path);
std::vector<ConceptInstance> load_mapped_jsonl(const std::string& path);
void save_mapped_jsonl(const std::vector<ConceptInstance>& instances, const std::string& path);

}  // namespace cie
