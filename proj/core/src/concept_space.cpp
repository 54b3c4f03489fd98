#include "cie/concept_space.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>

#include "io_util.hpp"

namespace cie {

namespace {

bool is_word_byte(unsigned char c) {
  if (c >= 0x80) return true;  // keep UTF-8 continuation/lead bytes
  return std::isalnum(c) != 0;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string join_tokens(const std::vector<std::string>& tokens, std::size_t begin,
                        std::size_t count) {
  std::string out;
  for (std::size_t i = 0; i < count; ++i) {
    if (i) out += ' ';
    out += tokens[begin + i];
  }
  return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      current += static_cast<char>(c < 0x80 ? std::tolower(c) : c);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string normalize_surface(std::string_view surface) {
  std::vector<std::string> tokens = tokenize(surface);
  return join_tokens(tokens, 0, tokens.size());
}

void Lexicon::add_entry(const std::string& surface, const std::string& concept_id) {
  auto [it, inserted] = entries_.emplace(surface, concept_id);
  if (!inserted && it->second != concept_id) {
    throw std::runtime_error("lexicon conflict: surface form \"" + surface +
                             "\" maps to both " + it->second + " and " + concept_id);
  }
  int words = 1 + static_cast<int>(std::count(surface.begin(), surface.end(), ' '));
  max_ngram_ = std::max(max_ngram_, words);
}

void Lexicon::add_concept(Concept c) {
  if (c.concept_id.empty()) throw std::runtime_error("lexicon: empty concept id");
  auto [it, inserted] = concepts_.emplace(c.concept_id, c.preferred_name);
  if (!inserted && it->second != c.preferred_name) {
    throw std::runtime_error("lexicon: concept " + c.concept_id +
                             " declared twice with different preferred names");
  }
}

const std::string* Lexicon::find(const std::string& surface) const {
  auto it = entries_.find(surface);
  return it == entries_.end() ? nullptr : &it->second;
}

bool Lexicon::has_concept(const std::string& concept_id) const {
  return concepts_.count(concept_id) != 0;
}

const std::string* Lexicon::preferred_name(const std::string& concept_id) const {
  auto it = concepts_.find(concept_id);
  return it == concepts_.end() ? nullptr : &it->second;
}

Lexicon load_lexicon(const std::string& path) {
  std::ifstream in = detail::open_input(path);
  Lexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols = split(line, '\t');
    if (cols.size() != 3) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": expected 3 tab-separated columns, got " +
                               std::to_string(cols.size()));
    }
    const std::string& concept_id = cols[0];
    if (concept_id.empty()) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) + ": empty concept id");
    }
    if (lex.has_concept(concept_id)) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": duplicate concept id " + concept_id);
    }
    lex.add_concept({concept_id, cols[1]});
    for (const std::string& raw : split(cols[2], '|')) {
      std::string surface = normalize_surface(raw);
      if (surface.empty()) {
        throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                                 ": surface form \"" + raw + "\" has no word characters");
      }
      lex.add_entry(surface, concept_id);
    }
  }
  return lex;
}

ConceptInstance map_text(const RawInstance& instance, const Lexicon& lexicon) {
  std::vector<std::string> tokens = tokenize(instance.text);
  std::set<std::string> found;
  std::size_t i = 0;
  const std::size_t n = tokens.size();
  const std::size_t max_len = static_cast<std::size_t>(lexicon.max_ngram());
  while (i < n) {
    std::size_t advance = 1;
    for (std::size_t len = std::min(max_len, n - i); len >= 1; --len) {
      if (const std::string* cid = lexicon.find(join_tokens(tokens, i, len))) {
        found.insert(*cid);
        advance = len;
        break;
      }
    }
    i += advance;
  }
  ConceptInstance out;
  out.id = instance.id;
  out.concepts.assign(found.begin(), found.end());
  out.gold_label = instance.gold_label;
  return out;
}

std::vector<RawInstance> load_raw_jsonl(const std::string& path) {
  std::vector<RawInstance> out;
  std::set<std::string> seen;
  detail::for_each_jsonl(path, [&](std::size_t line_no, const detail::json& j) {
    RawInstance inst;
    inst.id = detail::require_string(j, "id", path, line_no);
    inst.text = detail::require_string(j, "text", path, line_no);
    if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
      inst.gold_label = it->get<std::string>();
    }
    if (!seen.insert(inst.id).second) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": duplicate instance id " + inst.id);
    }
    out.push_back(std::move(inst));
  });
  return out;
}

std::vector<ConceptInstance> load_mapped_jsonl(const std::string& path) {
  std::vector<ConceptInstance> out;
  std::set<std::string> seen;
  detail::for_each_jsonl(path, [&](std::size_t line_no, const detail::json& j) {
    ConceptInstance inst;
    inst.id = detail::require_string(j, "id", path, line_no);
    auto it = j.find("concepts");
    if (it == j.end() || !it->is_array()) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               " is missing array field \"concepts\"");
    }
    std::set<std::string> concepts;
    for (const auto& c : *it) {
      if (!c.is_string()) {
        throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                                 ": non-string concept id");
      }
      concepts.insert(c.get<std::string>());
    }
    inst.concepts.assign(concepts.begin(), concepts.end());
    if (auto lit = j.find("label"); lit != j.end() && !lit->is_null()) {
      inst.gold_label = lit->get<std::string>();
    }
    if (!seen.insert(inst.id).second) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": duplicate instance id " + inst.id);
    }
    out.push_back(std::move(inst));
  });
  return out;
}

void save_mapped_jsonl(const std::vector<ConceptInstance>& instances, const std::string& path) {
  std::ofstream out = detail::open_output(path);
  for (const ConceptInstance& inst : instances) {
    detail::json j;
    j["id"] = inst.id;
    j["concepts"] = inst.concepts;
    if (inst.gold_label) j["label"] = *inst.gold_label;
    out << j.dump() << '\n';
  }
}

}  // namespace cie
