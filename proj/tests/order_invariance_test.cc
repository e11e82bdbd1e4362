// Copyright 2026 The SPOR Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "spor/order_invariance.hpp"

#include <set>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.hpp"

namespace spor {
namespace {

using testing::Kv;
using testing::T;
using testing::ThrownKind;

Lexicon E2eLexicon() {
  Lexicon lex;
  lex.forms["family friendly"]["no"] = {"not family friendly", "not kid friendly"};
  lex.forms["family friendly"]["yes"] = {"family friendly", "kid friendly"};
  return lex;
}

Sample RayelSample() {
  Sample s;
  s.id = "rayel";
  s.units = {T("Trance_music", "stylistic_origin", "Pop_music"),
             T("Andrew_Rayel", "genre", "Trance_music"),
             T("Jwaydan_Moyine", "associatedMusicalArtist", "John_Digweed"),
             T("Andrew_Rayel", "associatedMusicalArtist", "Jwaydan_Moyine")};
  s.references = {"Andrew Rayel plays Trance music, which has its origins in Pop music. "
                  "He is associated with Jwaydan Moyine, who works with John Digweed."};
  return s;
}

Sample EagleSample() {
  Sample s;
  s.id = "eagle";
  s.name_unit = Kv("name", "The Eagle");
  s.units = {Kv("family friendly", "no"), Kv("price range", "cheap"), Kv("area", "city centre"),
             Kv("near", "Burger King"), Kv("customer rating", "average"), Kv("food", "Chinese"),
             Kv("eat type", "coffee shop")};
  s.references = {"The Eagle is a cheap Chinese coffee shop in the city centre near Burger King. "
                  "It has an average customer rating and is not family friendly."};
  return s;
}

TEST(Fidelity, PairedOutputsFromTheQualitativeSamples) {
  const Lexicon lex = E2eLexicon();
  const Sample rayel = RayelSample();
  const Sample eagle = EagleSample();
  const auto rayel_refs = DeterminableReferenceOrders(rayel);
  const auto eagle_refs = DeterminableReferenceOrders(eagle, lex);
  ASSERT_EQ(rayel_refs.size(), 1u);
  ASSERT_EQ(eagle_refs.size(), 1u);

  auto faithful = [&](const Sample& s, const std::string& text,
                      const std::vector<std::vector<size_t>>& refs) {
    return AssessOutput(s, text, refs, lex).faithful;
  };
  // Original: both outputs verbalize every triple.
  EXPECT_TRUE(faithful(rayel,
                       "Andrew Rayel is a Trance musician who is associated with the musical artist "
                       "Jwaydan Moyine. Moyine is associated with the musical artist John Digweed. "
                       "Trance music originated from pop music.",
                       rayel_refs));
  EXPECT_TRUE(faithful(rayel,
                       "Andrew Rayel's musical genre is Trance which has its origins in Pop music. He "
                       "is associated with the musical artist Jwaydan Moyine who is associated with "
                       "the musical artist John Digweed.",
                       rayel_refs));
  // Match: each output drops an entity.
  EXPECT_FALSE(faithful(rayel,
                        "Trance music originated from pop music and is performed by artists such as "
                        "Andrew Rayel and John Digweed.",
                        rayel_refs));
  EXPECT_FALSE(faithful(rayel,
                        "Jwaydan Moyine is associated with the musical artist John Digweed and with "
                        "Trance musician Andrew Rayel.",
                        rayel_refs));
  // E2E original: only the second mentions family friendliness.
  EXPECT_FALSE(faithful(eagle,
                        "The Eagle is a cheap Chinese coffee shop in the city centre near Burger "
                        "King. It has an average customer rating.",
                        eagle_refs));
  EXPECT_TRUE(faithful(eagle,
                       "The Eagle is a cheap Chinese coffee shop in the city centre near Burger "
                       "King. It has an average customer rating and is not family friendly.",
                       eagle_refs));
  EXPECT_TRUE(faithful(eagle,
                       "The Eagle is not family friendly, but is cheap. It is located in the city "
                       "centre near Burger King. It has an average customer rating and serves "
                       "Chinese food. It is a coffee shop.",
                       eagle_refs));
}

TEST(Ordering, AgreementWithReferenceDecidesProperness) {
  const Sample rayel = RayelSample();
  const auto refs = DeterminableReferenceOrders(rayel);
  const std::string same = rayel.references[0];
  const std::string reversed =
      "John Digweed works with Jwaydan Moyine. Moyine is associated with Andrew Rayel. Pop music is "
      "the origin of Trance music, the genre of Rayel.";
  EXPECT_TRUE(AssessOutput(rayel, same, refs).proper_order);
  EXPECT_FALSE(AssessOutput(rayel, reversed, refs).proper_order);
}

TEST(EvaluateOrderInvariance, CountsPartitionPairs) {
  const Lexicon lex = E2eLexicon();
  std::vector<PairedSample> pairs;
  PredictionStore store;
  const std::vector<std::pair<std::string, std::string>> outputs{
      {"The Eagle is a cheap Chinese coffee shop in the city centre near Burger King. It has an "
       "average customer rating and is not family friendly.",
       "The Eagle is a cheap Chinese coffee shop in the city centre near Burger King. It has an "
       "average customer rating and is not family friendly."},
      {"The Eagle is a cheap Chinese coffee shop in the city centre near Burger King. It has an "
       "average customer rating.",
       "The Eagle is a cheap Chinese coffee shop in the city centre near Burger King. It has an "
       "average customer rating and is not family friendly."},
      {"A coffee shop.", "Cheap."},
  };
  for (size_t i = 0; i < outputs.size(); ++i) {
    PairedSample p;
    p.sample = EagleSample();
    p.sample.id = "e" + std::to_string(i);
    p.pair = {p.sample.id, {0, 1, 2, 3, 4, 5, 6}, {6, 5, 4, 3, 2, 1, 0}};
    pairs.push_back(p);
    store.Add({p.sample.id, "a", outputs[i].first, ""});
    store.Add({p.sample.id, "b", outputs[i].second, ""});
  }
  const ParentMetric parent;
  const auto r = EvaluateOrderInvariance(pairs, store, lex, &parent);
  EXPECT_EQ(r.n_evaluated, 3u);
  EXPECT_EQ(r.fidelity.both, 1u);
  EXPECT_EQ(r.fidelity.one, 1u);
  EXPECT_EQ(r.fidelity.neither, 1u);
  EXPECT_NEAR(r.fidelity_pbh() + r.fidelity_poh(), 200.0 / 3.0, 1e-9);
  EXPECT_EQ(r.ordering.total(), 3u);
  ASSERT_TRUE(r.perf.has_value());
  EXPECT_GT(*r.perf, 0.0);
  EXPECT_LE(*r.perf, 1.0);

  PredictionStore partial;
  partial.Add({"e0", "a", "x", ""});
  EXPECT_EQ(ThrownKind([&] { EvaluateOrderInvariance(pairs, partial, lex); }),
            ErrorKind::kMissingPrediction);
}

std::vector<Sample> KvTrain() {
  std::vector<Sample> train;
  auto add = [&](std::vector<DataUnit> units, std::string ref) {
    Sample s;
    s.id = "t" + std::to_string(train.size());
    s.name_unit = Kv("name", "Aromi");
    s.units = std::move(units);
    s.references = {std::move(ref)};
    train.push_back(std::move(s));
  };
  add({Kv("area", "riverside"), Kv("food", "Thai")}, "Aromi serves Thai food by the riverside.");
  add({Kv("food", "Thai"), Kv("eat type", "pub"), Kv("area", "city centre")},
      "In the city centre, Aromi is a pub with Thai food.");
  add({Kv("family friendly", "yes"), Kv("food", "English")},
      "Aromi serves English food and is kid friendly.");
  add({Kv("food", "Italian"), Kv("area", "riverside")}, "Aromi is nice.");  // not alignable
  return train;
}

TEST(Match, TrainingOrderFollowsReference) {
  const Lexicon lex = E2eLexicon();
  const auto match = BuildMatchTraining(KvTrain(), lex);
  ASSERT_EQ(match.artifact.samples.size(), 4u);
  EXPECT_EQ(match.flagged, (std::vector<std::string>{"t3"}));
  EXPECT_EQ(match.artifact.samples[0].units[0].value(), "Thai");
  EXPECT_EQ(match.artifact.samples[1].units[0].value(), "city centre");
  EXPECT_EQ(match.artifact.samples[1].units[2].value(), "Thai");
  EXPECT_EQ(match.artifact.samples[2].units[0].value(), "English");
  // Flagged samples are kept as they were.
  EXPECT_EQ(match.artifact.samples[3].units[0].value(), "Italian");
  EXPECT_TRUE(MatchRoundTripFailures(match, lex).empty());
}

TEST(Match, TripleRoundTrip) {
  Sample s;
  s.id = "see";
  s.units = {T("Elliot_See", "almaMater", "University_of_Texas_at_Austin"),
             T("Elliot_See", "deathPlace", "St._Louis"), T("Elliot_See", "birthPlace", "Dallas")};
  s.references = {"Elliot See was born in Dallas and died in St. Louis. He attended the University "
                  "of Texas at Austin."};
  const auto match = BuildMatchTraining({s, RayelSample()});
  EXPECT_TRUE(match.flagged.empty());
  EXPECT_EQ(match.artifact.samples[0].units[0].object(), "Dallas");
  EXPECT_EQ(match.artifact.samples[0].units[2].object(), "University_of_Texas_at_Austin");
  EXPECT_TRUE(MatchRoundTripFailures(match).empty());
}

TEST(PermutationPairs, DistinctReproducibleAndFiltered) {
  std::vector<Sample> test = KvTrain();
  Sample single;
  single.id = "one";
  single.units = {Kv("food", "Thai")};
  single.references = {"Thai food."};
  test.push_back(single);
  const Lexicon lex = E2eLexicon();
  const auto pairs = GeneratePermutationPairs(test, 7, lex);
  ASSERT_EQ(pairs.size(), 3u);  // t3 has no determinable reference, "one" has one unit
  for (const auto& p : pairs) {
    EXPECT_NE(p.pair.order_a, p.pair.order_b);
    auto sorted = p.pair.order_a;
    std::sort(sorted.begin(), sorted.end());
    for (size_t i = 0; i < sorted.size(); ++i) EXPECT_EQ(sorted[i], i);
    EXPECT_EQ(sorted.size(), p.sample.size());
  }
  const auto again = GeneratePermutationPairs(test, 7, lex);
  for (size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(pairs[i].pair.order_a, again[i].pair.order_a);
    EXPECT_EQ(pairs[i].pair.order_b, again[i].pair.order_b);
    const auto round = PairedSampleFromJson(PairedSampleToJson(pairs[i]));
    EXPECT_EQ(round.pair.order_b, pairs[i].pair.order_b);
    EXPECT_EQ(round.sample.units, pairs[i].sample.units);
  }
}

TEST(Cwio, CopyAndReverseOrders) {
  Sample s;
  s.id = "s";
  s.units = {Kv("area", "riverside"), Kv("food", "Thai"), Kv("eat type", "pub")};
  s.references = {"x"};
  Sample r = s;
  r.id = "r";
  Sample lone = s;
  lone.id = "lone";
  PredictionStore store;
  store.Add({"s", "orig", "riverside Thai pub", ""});
  store.Add({"r", "orig", "a pub, Thai food, riverside", ""});
  store.Add({"lone", "orig", "a pub", ""});

  const auto copy = ComputeCwio({s}, store);
  EXPECT_DOUBLE_EQ(copy.cwio, 1.0);
  EXPECT_DOUBLE_EQ(ComputeCwio({r}, store).cwio, -1.0);
  const auto mixed = ComputeCwio({s, r, lone}, store);
  EXPECT_DOUBLE_EQ(mixed.cwio, 0.0);
  EXPECT_EQ(mixed.n_evaluated, 2u);
  EXPECT_EQ(mixed.n_excluded, 1u);
}

TEST(RestrictedTau, IgnoresAbsentUnits) {
  EXPECT_DOUBLE_EQ(*RestrictedTau({2, 0}, {0, 1, 2}, {0, 2}), -1.0);
  EXPECT_FALSE(RestrictedTau({1}, {0, 1, 2}, {1}).has_value());
}

}  // namespace
}  // namespace spor
