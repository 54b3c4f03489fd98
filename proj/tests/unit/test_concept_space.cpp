#include <doctest.h>

#include <string>
#include <vector>

#include "cie/concept_space.hpp"
#include "support/cli_runner.hpp"

using cie::ConceptInstance;
using cie::Lexicon;
using cie::RawInstance;
using testsupport::TempDir;
using testsupport::write_file;

namespace {

RawInstance raw(std::string id, std::string text) {
  RawInstance r;
  r.id = std::move(id);
  r.text = std::move(text);
  return r;
}

}  // namespace

TEST_CASE("tokenize lowercases and splits on punctuation") {
  CHECK(cie::tokenize("Aspirin after myocardial infarction") ==
        std::vector<std::string>{"aspirin", "after", "myocardial", "infarction"});
  CHECK(cie::tokenize("aspirin, (low-dose)!") == std::vector<std::string>{"aspirin", "low", "dose"});
  CHECK(cie::tokenize("") == std::vector<std::string>{});
  CHECK(cie::tokenize("  \t\n ") == std::vector<std::string>{});
  // Non-ASCII bytes are word characters, so UTF-8 terms survive.
  CHECK(cie::tokenize("naïve Bayes") == std::vector<std::string>{"naïve", "bayes"});
}

TEST_CASE("normalize_surface canonicalizes spacing and case") {
  CHECK(cie::normalize_surface("  Myocardial   INFARCTION ") == "myocardial infarction");
  CHECK(cie::normalize_surface("...") == "");
}

TEST_CASE("load_lexicon parses the three-column TSV") {
  TempDir dir;

  SUBCASE("empty file") {
    write_file(dir.file("lex.tsv"), "");
    const Lexicon lex = cie::load_lexicon(dir.file("lex.tsv"));
    CHECK(lex.size() == 0);
    CHECK(lex.max_ngram() == 1);
  }

  SUBCASE("surface forms split on pipes; max_ngram tracks the longest") {
    write_file(dir.file("lex.tsv"), "C001\tAspirin\taspirin|acetylsalicylic acid\n");
    const Lexicon lex = cie::load_lexicon(dir.file("lex.tsv"));
    CHECK(lex.size() == 2);
    CHECK(lex.max_ngram() == 2);
    REQUIRE(lex.find("aspirin") != nullptr);
    CHECK(*lex.find("aspirin") == "C001");
    REQUIRE(lex.find("acetylsalicylic acid") != nullptr);
    CHECK(*lex.find("acetylsalicylic acid") == "C001");
    REQUIRE(lex.preferred_name("C001") != nullptr);
    CHECK(*lex.preferred_name("C001") == "Aspirin");
  }

  SUBCASE("same surface for two concepts is a conflict") {
    write_file(dir.file("lex.tsv"), "C001\tAspirin\taspirin\nC002\tOther\taspirin\n");
    CHECK_THROWS_WITH_AS(cie::load_lexicon(dir.file("lex.tsv")),
                         doctest::Contains("aspirin"), std::runtime_error);
  }

  SUBCASE("wrong column count names the line") {
    write_file(dir.file("lex.tsv"), "C001\tAspirin\taspirin\nC002\tonly two columns\n");
    CHECK_THROWS_WITH_AS(cie::load_lexicon(dir.file("lex.tsv")), doctest::Contains("line 2"),
                         std::runtime_error);
  }

  SUBCASE("duplicate concept id rejected") {
    write_file(dir.file("lex.tsv"), "C001\tA\ta\nC001\tB\tb\n");
    CHECK_THROWS_AS(cie::load_lexicon(dir.file("lex.tsv")), std::runtime_error);
  }

  SUBCASE("missing file names the path") {
    CHECK_THROWS_WITH_AS(cie::load_lexicon(dir.file("nope.tsv")), doctest::Contains("nope.tsv"),
                         std::runtime_error);
  }
}

TEST_CASE("map_text emits the matched concept set") {
  Lexicon lex;
  lex.add_concept({"C_ASA", "Aspirin"});
  lex.add_concept({"C_MI", "Myocardial infarction"});
  lex.add_entry("aspirin", "C_ASA");
  lex.add_entry("myocardial infarction", "C_MI");

  SUBCASE("basic match, case-insensitive") {
    const ConceptInstance inst = cie::map_text(raw("d1", "Aspirin after Myocardial Infarction"), lex);
    CHECK(inst.id == "d1");
    CHECK(inst.concepts == std::vector<std::string>{"C_ASA", "C_MI"});
  }

  SUBCASE("set semantics collapse repeats") {
    const ConceptInstance once = cie::map_text(raw("d", "aspirin"), lex);
    const ConceptInstance thrice = cie::map_text(raw("d", "aspirin aspirin aspirin"), lex);
    CHECK(once.concepts == thrice.concepts);
  }

  SUBCASE("no hits yields an empty set") {
    CHECK(cie::map_text(raw("d", "completely unrelated words"), lex).concepts.empty());
    CHECK(cie::map_text(raw("d", ""), lex).concepts.empty());
  }
}

TEST_CASE("longest match consumes its span") {
  Lexicon lex;
  lex.add_concept({"C_MI", "Myocardial infarction"});
  lex.add_concept({"C_INF", "Infarction"});
  lex.add_entry("myocardial infarction", "C_MI");
  lex.add_entry("infarction", "C_INF");

  // The 2-gram wins its span; the 1-gram concept must not fire on the
  // consumed token.
  CHECK(cie::map_text(raw("d", "myocardial infarction"), lex).concepts ==
        std::vector<std::string>{"C_MI"});
  // Standing alone, the 1-gram still matches.
  CHECK(cie::map_text(raw("d", "prior infarction noted"), lex).concepts ==
        std::vector<std::string>{"C_INF"});
  // Both spans present: both concepts, sorted, deduplicated.
  CHECK(cie::map_text(raw("d", "infarction then myocardial infarction"), lex).concepts ==
        std::vector<std::string>{"C_INF", "C_MI"});
}

TEST_CASE("instance JSONL round-trips and validates") {
  TempDir dir;

  SUBCASE("raw instances") {
    write_file(dir.file("raw.jsonl"),
               "{\"id\":\"d1\",\"text\":\"aspirin\",\"label\":\"X\"}\n"
               "{\"id\":\"d2\",\"text\":\"\"}\n");
    const std::vector<RawInstance> raws = cie::load_raw_jsonl(dir.file("raw.jsonl"));
    REQUIRE(raws.size() == 2);
    CHECK(raws[0].gold_label == "X");
    CHECK(raws[1].text.empty());
    CHECK_FALSE(raws[1].gold_label.has_value());
  }

  SUBCASE("mapped instances round-trip byte-identically") {
    ConceptInstance a;
    a.id = "d1";
    a.concepts = {"C1", "C2"};
    a.gold_label = "X";
    ConceptInstance b;
    b.id = "d2";
    cie::save_mapped_jsonl({a, b}, dir.file("mapped.jsonl"));
    const auto loaded = cie::load_mapped_jsonl(dir.file("mapped.jsonl"));
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].concepts == a.concepts);
    CHECK(loaded[0].gold_label == "X");
    CHECK(loaded[1].concepts.empty());
    cie::save_mapped_jsonl(loaded, dir.file("mapped2.jsonl"));
    CHECK(testsupport::read_file(dir.file("mapped.jsonl")) ==
          testsupport::read_file(dir.file("mapped2.jsonl")));
  }

  SUBCASE("duplicate ids rejected") {
    write_file(dir.file("dup.jsonl"),
               "{\"id\":\"d1\",\"concepts\":[]}\n{\"id\":\"d1\",\"concepts\":[]}\n");
    CHECK_THROWS_WITH_AS(cie::load_mapped_jsonl(dir.file("dup.jsonl")), doctest::Contains("d1"),
                         std::runtime_error);
  }

  SUBCASE("malformed line reported with its number") {
    write_file(dir.file("bad.jsonl"), "{\"id\":\"d1\",\"concepts\":[]}\nnot json\n");
    CHECK_THROWS_WITH_AS(cie::load_mapped_jsonl(dir.file("bad.jsonl")),
                         doctest::Contains("line 2"), std::runtime_error);
  }
}
