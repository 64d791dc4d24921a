#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <set>

#include "qamem/text/corruption.hpp"
#include "qamem/text/vocab.hpp"
#include "qamem/util/io.hpp"
#include "qamem/util/rng.hpp"
#include "qamem/util/status.hpp"

using namespace qamem;
using text::Vocab;

namespace {

Vocab sample_vocab() {
  return text::build_vocab(
      {"paris is the capital of france", "alice was born in paris",
       "the cat sat on the mat", "bob plays the violin in lyon"},
      200);
}

}  // namespace

TEST_CASE("vocab: frequency order with lexicographic ties") {
  Vocab v = text::build_vocab({"a b b"}, 20);
  CHECK(v.id("b") < v.id("a"));
  CHECK(v.id("b") == Vocab::kReservedCount);
  // Unknown word maps to [UNK].
  CHECK(v.id("zebra") == Vocab::kUnk);
}

TEST_CASE("vocab: empty corpus is an error") {
  CHECK_THROWS_AS((void)text::build_vocab({}, 20), util::ValidationError);
  CHECK_THROWS_AS((void)text::build_vocab({"   "}, 20), util::ValidationError);
  CHECK_THROWS_AS((void)text::build_vocab({"a"}, Vocab::kReservedCount - 1),
                  util::ValidationError);
}

TEST_CASE("vocab: same corpus twice gives identical bytes") {
  auto p1 = std::filesystem::temp_directory_path() / "qamem_vocab1.txt";
  auto p2 = std::filesystem::temp_directory_path() / "qamem_vocab2.txt";
  std::vector<std::string> corpus{"alice was born in paris", "bob was born in lyon"};
  text::build_vocab(corpus, 50).save(p1.string());
  text::build_vocab(corpus, 50).save(p2.string());
  CHECK(util::slurp_file(p1.string()) == util::slurp_file(p2.string()));
  Vocab loaded = Vocab::load(p1.string());
  CHECK(loaded.id("alice") == text::build_vocab(corpus, 50).id("alice"));
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("vocab: reserved prefix is fixed and [PAD] is id 0") {
  Vocab v = sample_vocab();
  CHECK(v.token(0) == "[PAD]");
  CHECK(v.token(Vocab::kCls) == "[CLS]");
  CHECK(v.token(Vocab::kEos) == "[EOS]");
  CHECK(Vocab::mask_span_id(1) == Vocab::kMaskSpanBase);
  CHECK(Vocab::is_mask_id(Vocab::kMask));
  CHECK(Vocab::is_mask_id(Vocab::mask_span_id(8)));
  CHECK(!Vocab::is_mask_id(Vocab::kSep));
}

TEST_CASE("encode: prepend, truncate, pad") {
  Vocab v = sample_vocab();
  text::TokenSeq s = text::encode("The cat", v, 5, Vocab::kCls);
  REQUIRE(s.ids.size() == 5);
  CHECK(s.ids[0] == Vocab::kCls);
  CHECK(s.ids[1] == v.id("the"));
  CHECK(s.ids[2] == v.id("cat"));
  CHECK(s.ids[3] == Vocab::kPad);
  CHECK(s.ids[4] == Vocab::kPad);
  CHECK(s.effective_len() == 3);

  text::TokenSeq t = text::encode("the cat sat on the mat", v, 4);
  REQUIRE(t.ids.size() == 4);
  CHECK(t.effective_len() == 4);
  CHECK(t.ids[3] == v.id("on"));
}

TEST_CASE("encode/decode round-trip over random sentences") {
  Vocab v = sample_vocab();
  std::vector<std::string> words;
  for (int i = Vocab::kReservedCount; i < v.size(); ++i) words.push_back(v.token(i));
  util::Rng rng(41);
  for (int trial = 0; trial < 1000; ++trial) {
    int len = 1 + static_cast<int>(util::rand_index(rng, 12));
    std::string sentence;
    for (int i = 0; i < len; ++i) {
      if (i) sentence += ' ';
      sentence += words[util::rand_index(rng, words.size())];
    }
    // Mixed case and punctuation normalize away.
    std::string noisy = sentence + ".";
    noisy[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(noisy[0])));
    text::TokenSeq seq = text::encode(noisy, v, 16);
    CHECK(text::decode(seq, v) == sentence);
  }
}

TEST_CASE("encode is prefix-stable under padding changes") {
  Vocab v = sample_vocab();
  text::TokenSeq a = text::encode("alice was born in paris", v, 8);
  text::TokenSeq b = text::encode("alice was born in paris", v, 14);
  for (size_t i = 0; i < a.ids.size(); ++i) CHECK(a.ids[i] == b.ids[i]);
}

TEST_CASE("corrupt_spans: single span") {
  Vocab v = sample_vocab();
  util::Rng rng(1);
  auto ex = text::corrupt_spans("paris is the capital of france", {"paris"}, 1, rng, v,
                                16, 8);
  // Input: [CLS] [MASK_1] is the capital of france.
  CHECK(ex.input.ids[0] == Vocab::kCls);
  CHECK(ex.input.ids[1] == Vocab::mask_span_id(1));
  CHECK(ex.input.ids[2] == v.id("is"));
  CHECK(ex.input.effective_len() == 7);
  // Target: [MASK_1] paris.
  CHECK(ex.target.ids[0] == Vocab::mask_span_id(1));
  CHECK(ex.target.ids[1] == v.id("paris"));
  CHECK(ex.target.effective_len() == 2);
  REQUIRE(ex.span_map.size() == 1);
  CHECK(ex.span_map[0].start == 0);
  CHECK(ex.span_map[0].len == 1);
  CHECK(ex.span_map[0].answer == "paris");
}

TEST_CASE("corrupt_spans: two disjoint answers keep input order") {
  Vocab v = sample_vocab();
  util::Rng rng(2);
  auto ex = text::corrupt_spans("alice was born in paris", {"paris", "alice"}, 2, rng, v,
                                16, 8);
  // Masks appear left-to-right regardless of answer list order.
  CHECK(ex.input.ids[1] == Vocab::mask_span_id(1));  // alice
  CHECK(ex.input.ids[2] == v.id("was"));
  CHECK(ex.span_map[0].answer == "alice");
  CHECK(ex.span_map[1].answer == "paris");
  CHECK(ex.target.ids[0] == Vocab::mask_span_id(1));
  CHECK(ex.target.ids[1] == v.id("alice"));
  CHECK(ex.target.ids[2] == Vocab::mask_span_id(2));
  CHECK(ex.target.ids[3] == v.id("paris"));
}

TEST_CASE("corrupt_spans: overlap resolved within the valid selections") {
  Vocab v = text::build_vocab({"alice was born in near lyon"}, 50);
  std::string passage = "alice was born in near lyon";
  std::vector<std::string> answers{"alice was born", "born in", "lyon"};

  // Enumerate all valid (non-overlapping) selections of size 2 by brute force.
  auto words = text::normalize_words(passage);
  auto span_of = [&](const std::string& a) {
    auto aw = text::normalize_words(a);
    for (size_t i = 0; i + aw.size() <= words.size(); ++i) {
      bool hit = true;
      for (size_t j = 0; j < aw.size(); ++j) {
        if (words[i + j] != aw[j]) hit = false;
      }
      if (hit) {
        return std::pair<int, int>(static_cast<int>(i), static_cast<int>(i + aw.size()));
      }
    }
    return std::pair<int, int>(-1, -1);
  };
  std::set<std::set<std::string>> valid;
  for (size_t i = 0; i < answers.size(); ++i) {
    for (size_t j = i + 1; j < answers.size(); ++j) {
      auto [s1, e1] = span_of(answers[i]);
      auto [s2, e2] = span_of(answers[j]);
      if (e1 <= s2 || e2 <= s1) valid.insert({answers[i], answers[j]});
    }
  }
  REQUIRE(valid.size() == 2);  // {alice-was-born, lyon} and {born-in, lyon}

  for (uint64_t seed = 0; seed < 8; ++seed) {
    util::Rng rng(seed);
    auto ex = text::corrupt_spans(passage, answers, 2, rng, v, 16, 8);
    std::set<std::string> chosen;
    for (const auto& s : ex.span_map) chosen.insert(s.answer);
    CHECK(valid.count(chosen) == 1);
  }
}

TEST_CASE("corrupt_spans: unique disjoint pair is the one chosen") {
  // Spans: "a b c" [0,3), "c d e" [2,5), "e f" [4,6). The only disjoint pair
  // is {"a b c", "e f"}.
  Vocab v = text::build_vocab({"a b c d e f"}, 50);
  for (uint64_t seed = 0; seed < 6; ++seed) {
    util::Rng rng(seed);
    auto ex = text::corrupt_spans("a b c d e f", {"a b c", "c d e", "e f"}, 2, rng, v,
                                  16, 10);
    REQUIRE(ex.span_map.size() == 2);
    CHECK(ex.span_map[0].answer == "a b c");
    CHECK(ex.span_map[1].answer == "e f");
  }
}

TEST_CASE("corrupt_spans: error when no selection of size k exists") {
  Vocab v = sample_vocab();
  util::Rng rng(3);
  CHECK_THROWS_AS((void)text::corrupt_spans("paris is the capital", {"paris", "paris is"},
                                            2, rng, v, 16, 8),
                  util::ValidationError);
  CHECK_THROWS_AS(
      (void)text::corrupt_spans("paris is the capital", {"berlin"}, 1, rng, v, 16, 8),
      util::ValidationError);
}

TEST_CASE("corrupt_spans: reconstruction splices back the original passage") {
  Vocab v = sample_vocab();
  util::Rng rng(7);
  std::string passage = "alice was born in paris the cat sat on the mat";
  std::vector<std::string> answers{"alice", "paris", "cat", "mat"};
  for (int k = 1; k <= 4; ++k) {
    auto ex = text::corrupt_spans(passage, answers, k, rng, v, 24, 16);

    // Mask count in input equals distinct mask ordinals in target equals k.
    int input_masks = 0;
    std::set<int> target_ordinals;
    for (int id : ex.input.unpadded()) {
      if (Vocab::is_mask_id(id)) ++input_masks;
    }
    for (int id : ex.target.unpadded()) {
      if (Vocab::is_mask_id(id)) target_ordinals.insert(id);
    }
    CHECK(input_masks == k);
    CHECK(static_cast<int>(target_ordinals.size()) == k);

    // Splice answers back at span_map offsets; must reproduce the passage.
    auto words = text::normalize_words(passage);
    std::vector<std::string> rebuilt;
    size_t cursor = 0;
    int input_pos = 1;  // skip [CLS]
    auto input_ids = ex.input.unpadded();
    for (const auto& span : ex.span_map) {
      while (cursor < static_cast<size_t>(span.start)) {
        rebuilt.push_back(v.token(input_ids[input_pos++]));
        ++cursor;
      }
      for (const auto& w : text::normalize_words(span.answer)) rebuilt.push_back(w);
      cursor += span.len;
      ++input_pos;  // the [MASK_i] slot
    }
    while (input_pos < static_cast<int>(input_ids.size())) {
      rebuilt.push_back(v.token(input_ids[input_pos++]));
    }
    REQUIRE(rebuilt.size() == words.size());
    for (size_t i = 0; i < words.size(); ++i) CHECK(rebuilt[i] == words[i]);
  }
}
