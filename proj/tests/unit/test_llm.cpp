#include <gtest/gtest.h>

#include <json.hpp>

#include "fixtures.hpp"
#include "llmforest/csv.hpp"
#include "llmforest/errors.hpp"
#include "llmforest/llm.hpp"

using namespace llmforest;
using namespace llmforest::testing;

namespace {

Table clinic() {
  return make_table({{"Age", FeatureKind::normal}, {"Sex", FeatureKind::categorical},
                     {"Stage", FeatureKind::categorical}, {"Grade", FeatureKind::empirical}},
                    {{num(63), cat("Female"), num(1), cat("G2")},
                     {num(41), cat("Male"), num(2), cat("G3")},
                     {kMissing, kMissing, kMissing, kMissing}});
}

PromptBundle bundle_with(const std::string& feature, const std::vector<std::string>& values,
                         bool continuous = false) {
  PromptBundle b;
  b.missing_features = {feature};
  if (continuous) b.continuous_features = {feature};
  for (std::size_t k = 0; k < values.size(); ++k) {
    NeighborRecord rec;
    rec.entry = k + 1;
    rec.values = {{feature, values[k]}};
    b.neighbors.push_back(rec);
  }
  return b;
}

void expect_conserved(const ParseResult& r, std::size_t requested) {
  EXPECT_EQ(r.votes.size() + r.unimputed.size() + r.invalid.size(), requested);
}

}  // namespace

TEST(ParseResponse, FlatObjectRoundTrip) {
  const auto t = clinic();
  const std::vector<std::string> missing = {"Age"};
  const auto r = parse_response(R"({"Age": "63", "Age_confidence": "High"})", missing, t.columns(), 2);
  ASSERT_EQ(r.votes.size(), 1u);
  EXPECT_EQ(r.votes[0].feature, "Age");
  EXPECT_EQ(r.votes[0].value, Cell{63.0});
  EXPECT_EQ(r.votes[0].confidence, Confidence::high);
  EXPECT_EQ(r.votes[0].tree_id, 2u);
  EXPECT_FALSE(r.parse_failure);
}

TEST(ParseResponse, ProseAroundNumericAgeIsInvalid) {
  const auto t = clinic();
  const std::vector<std::string> missing = {"Age"};
  const auto r = parse_response(R"({"Age": "approximately"})", missing, t.columns(), 0);
  EXPECT_TRUE(r.votes.empty());
  EXPECT_EQ(r.invalid, missing);
  expect_conserved(r, 1);
}

TEST(ParseResponse, OutOfRangeNumberStillFiniteForContinuous) {
  // A continuous column accepts any finite number, however implausible.
  const auto t = clinic();
  const std::vector<std::string> missing = {"Age"};
  const auto r = parse_response(R"({"Age": "18000"})", missing, t.columns(), 0);
  ASSERT_EQ(r.votes.size(), 1u);
  EXPECT_EQ(r.votes[0].value, Cell{18000.0});
}

TEST(ParseResponse, EmptyTextIsParseFailure) {
  const auto t = clinic();
  const std::vector<std::string> missing = {"Age", "Sex"};
  const auto r = parse_response("", missing, t.columns(), 0);
  EXPECT_TRUE(r.parse_failure);
  EXPECT_TRUE(r.votes.empty());
  expect_conserved(r, 2);
}

TEST(ParseResponse, ToleratesCodeFencesAndProse) {
  const auto t = clinic();
  const std::vector<std::string> missing = {"Sex", "Grade"};
  const std::string text =
      "Sure, here you go:\n```json\n{\"Sex\": \"female\", \"Sex_confidence\": \"low\", "
      "\"Grade\": \"G3 {x}\"}\n```\nLet me know.";
  const auto r = parse_response(text, missing, t.columns(), 0);
  ASSERT_EQ(r.votes.size(), 1u);
  EXPECT_EQ(r.votes[0].value, Cell{std::string("Female")});
  EXPECT_EQ(r.votes[0].confidence, Confidence::low);
  EXPECT_EQ(r.invalid, std::vector<std::string>{"Grade"});
  expect_conserved(r, 2);
}

TEST(ParseResponse, NumericCodesMustBeInDomain) {
  const auto t = clinic();
  const std::vector<std::string> missing = {"Stage"};
  EXPECT_EQ(parse_response(R"({"Stage": 2})", missing, t.columns(), 0).votes.size(), 1u);
  EXPECT_EQ(parse_response(R"({"Stage": "2.0"})", missing, t.columns(), 0).votes.size(), 1u);
  const auto bad = parse_response(R"({"Stage": 3})", missing, t.columns(), 0);
  EXPECT_TRUE(bad.votes.empty());
  EXPECT_EQ(bad.invalid.size(), 1u);
}

TEST(ParseResponse, AbsentAndNullAreUnimputed) {
  const auto t = clinic();
  const std::vector<std::string> missing = {"Age", "Sex", "Grade"};
  const auto r = parse_response(R"({"Age": null, "Grade": "G2"})", missing, t.columns(), 0);
  EXPECT_EQ(r.votes.size(), 1u);
  EXPECT_EQ(r.unimputed, (std::vector<std::string>{"Age", "Sex"}));
  EXPECT_EQ(r.votes[0].confidence, Confidence::medium);
  expect_conserved(r, 3);
}

TEST(ParseResponse, NestedValueAndCaseInsensitiveKeys) {
  const auto t = clinic();
  const std::vector<std::string> missing = {"Sex"};
  const auto r = parse_response(R"({"sex": {"value": "Male", "confidence": "HIGH"}})", missing, t.columns(), 0);
  ASSERT_EQ(r.votes.size(), 1u);
  EXPECT_EQ(r.votes[0].value, Cell{std::string("Male")});
  EXPECT_EQ(r.votes[0].confidence, Confidence::high);
}

TEST(ParseResponse, NeverEmitsCategoryOutsideDomain) {
  const auto t = clinic();
  const std::vector<std::string> missing = {"Sex", "Grade", "Stage", "Age"};
  const std::vector<std::string> answers = {
      R"({"Sex": "Other", "Grade": "G9", "Stage": "IV", "Age": "NaN"})",
      R"({"Sex": ["Male"], "Grade": 2, "Stage": true, "Age": "old"})",
      R"({"Sex": "", "Grade": " G2", "Stage": "one", "Age": {}})",
  };
  for (const auto& a : answers) {
    const auto r = parse_response(a, missing, t.columns(), 0);
    for (const auto& v : r.votes) {
      const auto col = *t.column_index(v.feature);
      if (!t.column(col).continuous()) EXPECT_TRUE(t.column(col).code_of(v.value).has_value()) << a;
    }
    EXPECT_LE(r.votes.size(), missing.size());
    expect_conserved(r, missing.size());
  }
}

TEST(ExtractJson, FirstBalancedObject) {
  EXPECT_EQ(extract_json_object(R"(x {"a": "}"} {"b": 1})"), std::optional<std::string>(R"({"a": "}"})"));
  EXPECT_FALSE(extract_json_object("no braces").has_value());
  EXPECT_FALSE(extract_json_object("{ unterminated").has_value());
  EXPECT_EQ(extract_json_object(R"({bad} {"ok": 1})"), std::optional<std::string>(R"({"ok": 1})"));
}

TEST(Confidence, ParsesCaseInsensitively) {
  EXPECT_EQ(parse_confidence("High"), Confidence::high);
  EXPECT_EQ(parse_confidence("medium"), Confidence::medium);
  EXPECT_EQ(parse_confidence("LOW"), Confidence::low);
  EXPECT_FALSE(parse_confidence("sure").has_value());
}

TEST(MockBackend, TwoOfThreeAgreeingIsMedium) {
  MockBackend mock({});
  const auto j = nlohmann::json::parse(mock.complete(bundle_with("F", {"1", "1", "2"}), 0));
  EXPECT_EQ(j["F"], "1");
  EXPECT_EQ(j["F_confidence"], "Medium");
}

TEST(MockBackend, UnanimousThreeIsHigh) {
  MockBackend mock({});
  const auto j = nlohmann::json::parse(mock.complete(bundle_with("F", {"1", "1", "1"}), 0));
  EXPECT_EQ(j["F"], "1");
  EXPECT_EQ(j["F_confidence"], "High");
}

TEST(MockBackend, TiesGoToSmallestAndContinuousToMean) {
  MockBackend mock({});
  auto j = nlohmann::json::parse(mock.complete(bundle_with("F", {"b", "a", "b", "a"}), 0));
  EXPECT_EQ(j["F"], "a");
  j = nlohmann::json::parse(mock.complete(bundle_with("F", {"10", "20", "40"}, true), 0));
  EXPECT_EQ(j["F"], "23.3333");
}

TEST(MockBackend, IsPureAndRejectsEmptyNeighbors) {
  MockBackend mock({});
  const auto b = bundle_with("F", {"x", "y", "x"});
  EXPECT_EQ(mock.complete(b, 0), mock.complete(b, 1));
  PromptBundle empty;
  empty.missing_features = {"F"};
  EXPECT_THROW(mock.complete(empty, 0), BackendError);
}

TEST(MockBackend, EchoFixtureReturnsFileText) {
  const auto dir = temp_dir("echo_fixture");
  write_file(dir / "reply.txt", "{\"F\": \"z\"}");
  BackendConfig cfg;
  cfg.mock_policy = BackendConfig::MockPolicy::echo_fixture;
  cfg.fixture = dir / "reply.txt";
  auto backend = make_backend(cfg);
  EXPECT_EQ(backend->complete(bundle_with("F", {"a"}), 0), "{\"F\": \"z\"}");
}

TEST(BackendConfig, HttpNeedsEndpointAndModel) {
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::http;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.endpoint = "http://localhost:1/v1/chat/completions";
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.model = "m";
  EXPECT_NO_THROW(cfg.validate());
  cfg.max_retries = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}
