#include "gphmm/manifest.hpp"

#include <gtest/gtest.h>

#include <fstream>

#include "gphmm/error.hpp"
#include "gphmm/image_io.hpp"
#include "test_util.hpp"

using namespace gphmm;
using gphmm::testing::temp_dir;

namespace {

std::filesystem::path make_dataset(const std::string& name, int subjects, int per_subject) {
  const auto root = temp_dir(name);
  for (int s = 1; s <= subjects; ++s) {
    const auto d = root / ("s" + std::to_string(s));
    std::filesystem::create_directories(d);
    for (int i = 1; i <= per_subject; ++i) write_pgm(d / (std::to_string(i) + ".pgm"), Image(4, 4, s * 10.0 + i));
  }
  std::ofstream(root / "README") << "not a subject";
  return root;
}

}  // namespace

TEST(NaturalLess, DigitRunsCompareNumerically) {
  EXPECT_TRUE(natural_less("s2", "s10"));
  EXPECT_FALSE(natural_less("s10", "s2"));
  EXPECT_TRUE(natural_less("1.pgm", "10.pgm"));
  EXPECT_TRUE(natural_less("9.pgm", "10.pgm"));
  EXPECT_TRUE(natural_less("a", "b"));
  EXPECT_FALSE(natural_less("a", "a"));
}

TEST(Manifest, ParsesEntriesAndVersion) {
  const std::string text =
      "{\"version\": 1}\n"
      "{\"path\": \"s1/1.pgm\", \"subject\": \"s1\", \"role\": \"train\"}\n"
      "\n"
      "{\"path\": \"/abs/x.pgm\", \"subject\": \"s2\", \"role\": \"probe_neg\", \"class\": \"s1\"}\n";
  const auto m = parse_manifest(text, "/data");
  ASSERT_EQ(m.entries.size(), 2u);
  EXPECT_EQ(m.entries[0].path, std::filesystem::path("/data/s1/1.pgm"));
  EXPECT_EQ(m.entries[0].class_id, "s1");
  EXPECT_EQ(m.entries[1].path, std::filesystem::path("/abs/x.pgm"));
  EXPECT_EQ(m.entries[1].role, ProbeRole::Negative);
  EXPECT_EQ(m.entries[1].class_id, "s1");
  EXPECT_EQ(m.classes(), (std::vector<std::string>{"s1"}));
}

TEST(Manifest, ErrorsNameTheLine) {
  try {
    parse_manifest("{\"path\": \"a\", \"subject\": \"s\", \"role\": \"train\"}\n{\"path\": \"b\"}\n", "/", "m.jsonl");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("m.jsonl:2"), std::string::npos);
  }
  EXPECT_THROW(parse_manifest("{\"version\": 3}\n", "/"), DataError);
  EXPECT_THROW(parse_manifest("[1,2]\n", "/"), DataError);
  EXPECT_THROW(parse_manifest("{\"path\":\"a\",\"subject\":\"s\",\"role\":\"test\"}\n", "/"), DataError);
}

TEST(Manifest, ValidateChecksFilesAndTraining) {
  const auto root = make_dataset("manifest_validate", 2, 2);
  Manifest m;
  m.entries.push_back({root / "s1/1.pgm", "s1", ProbeRole::Train, "s1"});
  m.entries.push_back({root / "s2/1.pgm", "s2", ProbeRole::Positive, "s2"});
  EXPECT_THROW(m.validate(), DataError);
  m.entries[1].role = ProbeRole::Train;
  EXPECT_NO_THROW(m.validate());
  m.entries.push_back({root / "s9/1.pgm", "s1", ProbeRole::Positive, "s1"});
  try {
    m.validate();
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("s9"), std::string::npos);
  }
}

TEST(Manifest, RoundTripIsByteIdentical) {
  const auto root = make_dataset("manifest_rt", 3, 3);
  const auto m = make_split_manifest(root, {1, 2, 7});
  save_manifest(root / "a.jsonl", m);
  const auto back = load_manifest(root / "a.jsonl");
  EXPECT_EQ(back.entries, m.entries);
  EXPECT_EQ(encode_manifest(back), read_file(root / "a.jsonl"));
}

TEST(SplitManifest, LayoutAndDeterminism) {
  const auto root = make_dataset("manifest_split", 12, 10);
  const auto m = make_split_manifest(root, {5, 5, 3});
  ASSERT_EQ(m.entries.size(), 12u * 15u);
  // Subjects in natural order, files in natural order.
  EXPECT_EQ(m.entries[0].path, root / "s1" / "1.pgm");
  EXPECT_EQ(m.entries[9].path, root / "s1" / "10.pgm");
  EXPECT_EQ(m.entries[15].subject, "s2");
  for (std::size_t s = 0; s < 12; ++s) {
    for (std::size_t i = 0; i < 15; ++i) {
      const auto& e = m.entries[s * 15 + i];
      const auto role = i < 5 ? ProbeRole::Train : (i < 10 ? ProbeRole::Positive : ProbeRole::Negative);
      EXPECT_EQ(e.role, role);
      EXPECT_EQ(e.class_id, "s" + std::to_string(s + 1));
      if (role == ProbeRole::Negative) EXPECT_NE(e.subject, e.class_id);
    }
  }
  EXPECT_EQ(make_split_manifest(root, {5, 5, 3}).entries, m.entries);
  EXPECT_NE(make_split_manifest(root, {5, 5, 4}).entries, m.entries);
  EXPECT_NO_THROW(m.validate());
}

TEST(SplitManifest, Errors) {
  const auto root = make_dataset("manifest_split_err", 2, 3);
  EXPECT_THROW(make_split_manifest(root, {3, 0, 0}), DataError);
  EXPECT_THROW(make_split_manifest(root, {1, 4, 0}), DataError);
  EXPECT_THROW(make_split_manifest(root / "nope", {1, 0, 0}), DataError);
}
