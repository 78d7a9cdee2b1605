#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"

using namespace copkit;

namespace {

bool has(const ModelRequest& r, std::string_view needle) { return r.instruction.find(needle) != std::string::npos; }

constexpr std::string_view kSelectNeedle = "Identify which instruction manual";
constexpr std::string_view kScoreNeedle = "accurately reflect the image";
constexpr std::string_view kSplitNeedle = "split the combined steps";
constexpr std::string_view kIdentifyNeedle = "which step in the instruction";
constexpr std::string_view kDirectNeedle = "determine the next step";

// Candidates A (positive, 4 steps), B, C; image shows A after step 2.
Instance hand_instance() {
  Instance in;
  in.id = "A:2:img-A-2";
  in.visual = {"img-A-2", "A", 2};
  in.domain = "cars";
  in.candidates = {fixtures::procedure("B", {"Jack up the car.", "Remove the wheel.", "Fit the spare."}),
                   fixtures::procedure("A", {"Open the hood.", "Find the dipstick.", "Pull out the dipstick.",
                                             "Wipe the dipstick."}),
                   fixtures::procedure("C", {"Unlock the door.", "Sit down.", "Start the engine."})};
  in.label = 1;
  in.slots = {1, 0, 2};
  in.source_steps = {"Open the hood.", "Find the dipstick.", "Pull out the dipstick.", "Wipe the dipstick."};
  in.gold_next_step = "Pull out the dipstick.";
  return in;
}

std::shared_ptr<ScriptedProvider> scores_provider(std::vector<std::string> per_candidate_scores) {
  auto p = std::make_shared<ScriptedProvider>();
  const std::vector<std::string> firsts = {"Jack up the car", "Open the hood", "Unlock the door"};
  for (std::size_t k = 0; k < firsts.size(); ++k) {
    const std::string first = firsts[k];
    const std::string score = per_candidate_scores[k];
    p->add_rule({"score" + std::to_string(k),
                 [first](const ModelRequest& r) { return has(r, kScoreNeedle) && has(r, first); },
                 [score](const ModelRequest&) { return score; }});
  }
  return p;
}

PipelineConfig per_candidate() {
  PipelineConfig c;
  c.retrieval_mode = RetrievalMode::kPerCandidateScore;
  return c;
}

}  // namespace

TEST(Phase1, ScoresArgmax) {
  const Instance in = hand_instance();
  auto p = scores_provider({"3", "9", "5"});
  PhaseTrace trace;
  TraceRecorder rec(*p, trace, {});
  const RetrievalResult r = phase1_retrieve(in.visual, in.candidates, rec, per_candidate());
  EXPECT_EQ(r.position, 1);
  EXPECT_EQ(trace.records.size(), 3u);
  EXPECT_EQ(trace.artifacts["scores"], (nlohmann::json{3, 9, 5}));
  EXPECT_EQ(trace.artifacts["selected_procedure"], "A");
}

TEST(Phase1, TieGoesToLowestPosition) {
  const Instance in = hand_instance();
  auto p = scores_provider({"7", "7/10", "1"});
  PhaseTrace trace;
  TraceRecorder rec(*p, trace, {});
  EXPECT_EQ(phase1_retrieve(in.visual, in.candidates, rec, per_candidate()).position, 0);
}

TEST(Phase1, SingleCandidateSingleShotIsOneRequest) {
  const Instance in = hand_instance();
  ScriptedProvider p("s", "[1]");
  PhaseTrace trace;
  TraceRecorder rec(p, trace, {});
  EXPECT_EQ(phase1_retrieve(in.visual, {in.candidates[1]}, rec, PipelineConfig{}).position, 0);
  EXPECT_EQ(p.calls(), 1);
}

TEST(Phase1, SingleShotParsesIdAndFallsBackOnce) {
  const Instance in = hand_instance();
  auto p = scores_provider({"2", "4", "8"});
  p->when_contains(std::string(kSelectNeedle), "Instruction 9");
  PhaseTrace trace;
  TraceRecorder rec(*p, trace, {});
  EXPECT_EQ(phase1_retrieve(in.visual, in.candidates, rec, PipelineConfig{}).position, 2);
  EXPECT_EQ(trace.records.size(), 4u);
  ASSERT_EQ(trace.warnings.size(), 1u);

  ScriptedProvider good("g", "[2]");
  PhaseTrace t2;
  TraceRecorder rec2(good, t2, {});
  EXPECT_EQ(phase1_retrieve(in.visual, in.candidates, rec2, PipelineConfig{}).position, 1);
  EXPECT_EQ(t2.records.size(), 1u);

  ScriptedProvider junk("j", "no idea");
  PhaseTrace t3;
  TraceRecorder rec3(junk, t3, {});
  try {
    phase1_retrieve(in.visual, in.candidates, rec3, PipelineConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnparseableSelection);
  }
}

TEST(Phase2, EchoIsIdentity) {
  const Procedure a = hand_instance().candidates[1];
  ScriptedProvider p("s", render_steps(a));
  PhaseTrace trace;
  TraceRecorder rec(p, trace, {});
  const Decomposition d = phase2_decompose(a, rec, PipelineConfig{});
  EXPECT_TRUE(d.accepted);
  EXPECT_EQ(d.map, (std::vector<int>{1, 2, 3, 4}));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(d.working.steps[i].text, a.steps[i].text);
  EXPECT_TRUE(trace.warnings.empty());
}

TEST(Phase2, SplitStepTwo) {
  const Procedure p3 = fixtures::procedure("P", {"Open the hood.", "Find and pull out the dipstick.", "Wipe it clean."});
  ScriptedProvider p("s",
                     "step_1: Open the hood.\nstep_2: Find the dipstick.\nstep_3: Pull out the dipstick.\n"
                     "step_4: Wipe it clean.");
  PhaseTrace trace;
  TraceRecorder rec(p, trace, {});
  const Decomposition d = phase2_decompose(p3, rec, PipelineConfig{});
  ASSERT_TRUE(d.accepted);
  EXPECT_EQ(d.working.steps.size(), 4u);
  EXPECT_EQ(d.map, (std::vector<int>{1, 2, 2, 3}));
}

TEST(Phase2, ReorderedOrDroppedIsRejected) {
  const Procedure a = hand_instance().candidates[1];
  for (const std::string reply :
       {"step_1: Find the dipstick.\nstep_2: Open the hood.\nstep_3: Pull out the dipstick.\nstep_4: Wipe the dipstick.",
        "step_1: Open the hood.\nstep_2: Find the dipstick.\nstep_3: Pull out the dipstick.",
        "step_1: Open the hood.\nstep_3: Find the dipstick.\nstep_4: Pull out the dipstick.\nstep_5: Wipe the dipstick.",
        "I would not split anything."}) {
    ScriptedProvider p("s", reply);
    PhaseTrace trace;
    TraceRecorder rec(p, trace, {});
    const Decomposition d = phase2_decompose(a, rec, PipelineConfig{});
    EXPECT_FALSE(d.accepted) << reply;
    EXPECT_EQ(d.working, a);
    EXPECT_EQ(trace.warnings.size(), 1u);
  }
}

TEST(Phase2, AlignmentNeverReordersProperty) {
  // Random splits of random procedures are accepted with the constructed map;
  // swapping whole parents is rejected.
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int L = 3 + static_cast<int>(gen() % 5);
    std::vector<std::string> original;
    std::vector<std::vector<std::string>> pieces(static_cast<std::size_t>(L));
    std::vector<int> expected_map;
    for (int i = 0; i < L; ++i) {
      const std::string tag = std::to_string(trial) + "x" + std::to_string(i);
      const std::string a = "lift" + tag + " part" + tag;
      const std::string b = "turn" + tag + " bolt" + tag;
      original.push_back(a + " and " + b);
      auto& mine = pieces[static_cast<std::size_t>(i)];
      if (gen() % 2) {
        mine = {a, "and " + b};
      } else {
        mine = {a + " and " + b};
      }
      expected_map.insert(expected_map.end(), mine.size(), i + 1);
    }
    auto flatten = [](const std::vector<std::vector<std::string>>& groups) {
      std::vector<std::string> out;
      for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
      return out;
    };
    const auto map = align_decomposition(original, flatten(pieces));
    ASSERT_TRUE(map.has_value());
    ASSERT_EQ(*map, expected_map);
    auto swapped = pieces;
    std::swap(swapped.front(), swapped.back());
    EXPECT_FALSE(align_decomposition(original, flatten(swapped)).has_value());
    auto dropped = flatten(pieces);
    dropped.pop_back();
    if (dropped.size() >= original.size()) {
      EXPECT_FALSE(align_decomposition(original, dropped).has_value());
    }
  }
}

TEST(Phase3, SuccessorAndSentinel) {
  const Instance in = hand_instance();
  const Decomposition d = identity_decomposition(in.candidates[1]);
  ScriptedProvider p("s", "step_2: Find the dipstick.");
  PhaseTrace trace;
  TraceRecorder rec(p, trace, {});
  const Prediction pr = phase3_predict(in.visual, d, rec, PipelineConfig{});
  EXPECT_EQ(pr.next_step_text, "Pull out the dipstick.");
  EXPECT_EQ(pr.next_step_index, 3);
  EXPECT_EQ(pr.current_step_index, 2);

  ScriptedProvider last("s", "step_4");
  PhaseTrace t2;
  TraceRecorder rec2(last, t2, {});
  const Prediction done = phase3_predict(in.visual, d, rec2, PipelineConfig{});
  EXPECT_EQ(done.next_step_text, kProcedureComplete);
  EXPECT_FALSE(done.next_step_index.has_value());
}

TEST(Phase3, Errors) {
  const Decomposition d = identity_decomposition(hand_instance().candidates[1]);
  const VisualState v{"img", "A", 1};
  for (const auto& [reply, code] : std::vector<std::pair<std::string, ErrorCode>>{
           {"the image shows a car", ErrorCode::kUnparseableCurrentStep}, {"step_9: x", ErrorCode::kIndexOutOfRange}}) {
    ScriptedProvider p("s", reply);
    PhaseTrace trace;
    TraceRecorder rec(p, trace, {});
    try {
      phase3_predict(v, d, rec, PipelineConfig{});
      FAIL() << reply;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code);
    }
  }
}

TEST(Phase3, DecompositionMapLift) {
  // Original: 1 "Open the hood.", 2 "Find and pull out the dipstick.", 3 "Wipe it clean."
  // Decomposed: 1, 2a, 2b, 3 with map {1,2,2,3}.
  const Procedure p3 = fixtures::procedure("P", {"Open the hood.", "Find and pull out the dipstick.", "Wipe it clean."});
  Decomposition d = identity_decomposition(p3);
  const std::vector<std::string> texts = {"Open the hood.", "Find the dipstick.", "Pull out the dipstick.",
                                          "Wipe it clean."};
  d.map = {1, 2, 2, 3};
  d.working = assemble_decomposition(p3, texts, d.map);
  // Hand walk: current = 2b (working 3) is the last child of original 2, next original is 3.
  EXPECT_EQ(successor_prediction(d, 3).next_step_text, "Wipe it clean.");
  // current = 2a: the next child is still inside original 2.
  EXPECT_EQ(successor_prediction(d, 2).next_step_text, "Pull out the dipstick.");
  // current = 1: the next step starts a split original, reported as its first child.
  EXPECT_EQ(successor_prediction(d, 1).next_step_text, "Find the dipstick.");
  EXPECT_EQ(successor_prediction(d, 4).next_step_text, kProcedureComplete);
}

TEST(RunCop, CallCountsBySubset) {
  const Instance in = hand_instance();
  auto p = std::make_shared<ScriptedProvider>();
  p->when_contains(std::string(kSelectNeedle), "[2]");
  p->add_rule({"score", [](const ModelRequest& r) { return has(r, kScoreNeedle); },
               [](const ModelRequest& r) { return std::string(has(r, "Open the hood") ? "9" : "4"); }});
  p->when_contains(std::string(kSplitNeedle), render_steps(in.candidates[1]));
  p->when_contains(std::string(kIdentifyNeedle), "step_2: Find the dipstick.");
  p->when_contains(std::string(kDirectNeedle), "step_3: Pull out the dipstick.");

  struct Case {
    std::set<int> phases;
    RetrievalMode mode;
    std::size_t expected;
  };
  for (const Case& c : std::vector<Case>{{{1, 2, 3}, RetrievalMode::kSingleShot, 3},
                                         {{1}, RetrievalMode::kSingleShot, 2},
                                         {{1, 2}, RetrievalMode::kSingleShot, 3},
                                         {{1, 3}, RetrievalMode::kSingleShot, 2},
                                         {{1, 2, 3}, RetrievalMode::kPerCandidateScore, 5},
                                         {{1}, RetrievalMode::kPerCandidateScore, 4}}) {
    PipelineConfig config;
    config.phases = c.phases;
    config.retrieval_mode = c.mode;
    const RunResult r = run_cop(in, config, *p);
    ASSERT_FALSE(r.error) << r.error->message;
    EXPECT_EQ(r.request_count(), c.expected) << config.phases_label();
    EXPECT_EQ(r.prediction.next_step_text, "Pull out the dipstick.") << config.phases_label();
    EXPECT_EQ(r.prediction.selected_procedure_id, "A");
  }
  EXPECT_EQ(cop_mode_name(PipelineConfig{}), "cop");
}

TEST(RunCop, ErrorsCarryPhase) {
  const Instance in = hand_instance();
  ScriptedProvider p("s", "[2]");  // phase 3 gets "[2]" too: no step label
  const RunResult r = run_cop(in, PipelineConfig{}, p);
  ASSERT_TRUE(r.error);
  EXPECT_EQ(r.error->phase, "phase3");
  EXPECT_EQ(r.error->code, "UnparseableCurrentStep");
  EXPECT_TRUE(r.prediction.next_step_text.empty());
}

TEST(RunCop, HandWrittenGoldenTrace) {
  // Fused candidate: step 2 merges two atoms; the image shows atom 2.
  Instance in = hand_instance();
  in.candidates[1] = fixtures::procedure("A", {"Open the hood.", "Find the dipstick. Pull out the dipstick.",
                                               "Wipe the dipstick."});
  in.candidates[1].steps[1].atomic = false;
  in.candidates[1].steps[1].source = {2, 3};
  in.candidates[1].steps[2].source = {4};
  in.gold_next_step = "Pull out the dipstick.";

  ScriptedProvider p;
  p.when_contains(std::string(kSelectNeedle), "[2]");
  p.when_contains(std::string(kSplitNeedle),
                  "step_1: Open the hood.\nstep_2: Find the dipstick.\nstep_3: Pull out the dipstick.\n"
                  "step_4: Wipe the dipstick.");
  p.when_contains(std::string(kIdentifyNeedle), "step_2: Find the dipstick.");
  const RunResult r = run_cop(in, PipelineConfig{}, p);
  ASSERT_FALSE(r.error);
  EXPECT_EQ(r.prediction.next_step_text, in.gold_next_step);
  EXPECT_EQ(r.trace.artifacts["decomposition_map"], (nlohmann::json{1, 2, 2, 3}));
  EXPECT_EQ(r.trace.artifacts["current_step"], 2);
}

TEST(RunCop, OracleOnTenInstancesIsPerfect) {
  const fixtures::Bench b = fixtures::make_bench(12, 4, 0.5, 10);
  ASSERT_EQ(b.instances.size(), 10u);
  auto oracle = make_oracle_provider(b.instances);
  int correct = 0;
  for (const auto& in : b.instances) {
    const RunResult r = run_cop(in, PipelineConfig{}, *oracle);
    ASSERT_FALSE(r.error) << r.error->message;
    EXPECT_EQ(r.request_count(), 3u);
    correct += r.prediction.next_step_text == in.gold_next_step;
  }
  EXPECT_EQ(correct, 10);
}

TEST(RunCop, TraceReplayReproducesPrediction) {
  const fixtures::Bench b = fixtures::make_bench(13, 3, 0.75, 6);
  auto oracle = make_oracle_provider(b.instances);
  for (const auto& in : b.instances) {
    const RunResult first = run_cop(in, PipelineConfig{}, *oracle);
    ScriptedProvider replay("replay", "unmatched");
    for (const auto& rec : first.trace.records) {
      replay.when_exact(rec.request.instruction, rec.request.image_ids, rec.response_text);
    }
    const RunResult second = run_cop(in, PipelineConfig{}, replay);
    EXPECT_EQ(result_record(first).dump(), result_record(second).dump());
    EXPECT_EQ(nlohmann::json(first.trace).dump(), nlohmann::json(second.trace).dump());
    PhaseTrace round = nlohmann::json(first.trace).get<PhaseTrace>();
    EXPECT_EQ(nlohmann::json(round).dump(), nlohmann::json(first.trace).dump());
  }
}

TEST(RunCop, BatchMatchesSequentialAndIsSorted) {
  const fixtures::Bench b = fixtures::make_bench(14, 3);
  auto oracle = make_oracle_provider(b.instances);
  const auto fn = [&](const Instance& in) { return run_cop(in, PipelineConfig{}, *oracle); };
  const auto par = run_batch(b.instances, fn, 4);
  ASSERT_EQ(par.size(), b.instances.size());
  EXPECT_TRUE(std::is_sorted(par.begin(), par.end(),
                             [](const auto& x, const auto& y) { return x.instance_id < y.instance_id; }));
  std::vector<RunResult> seq;
  for (const auto& in : b.instances) seq.push_back(fn(in));
  std::sort(seq.begin(), seq.end(), [](const auto& x, const auto& y) { return x.instance_id < y.instance_id; });
  for (std::size_t i = 0; i < seq.size(); ++i) EXPECT_EQ(result_record(seq[i]).dump(), result_record(par[i]).dump());
}

TEST(Baseline, OneRequestAndParse) {
  const Instance in = hand_instance();
  ScriptedProvider p("s", "Looking at the car...\nstep_2: Open the hood");
  const RunResult r = baseline_direct(in, p);
  EXPECT_EQ(r.request_count(), 1u);
  EXPECT_EQ(r.prediction.next_step_text, "Open the hood");
  EXPECT_EQ(r.mode, "baseline");
  PipelineConfig cot;
  cot.chain_of_thought = true;
  const RunResult c = baseline_direct(in, p, cot);
  EXPECT_EQ(c.mode, "baseline:cot");
  EXPECT_NE(c.trace.records[0].request.instruction.find("think step-by-step"), std::string::npos);
}

TEST(Baseline, MalformedIsNoStepLabel) {
  const Instance in = hand_instance();
  for (const std::string reply : {"I cannot tell.", "step_2:"}) {
    ScriptedProvider p("s", reply);
    const RunResult r = baseline_direct(in, p);
    ASSERT_TRUE(r.error) << reply;
    EXPECT_EQ(r.error->code, "NoStepLabel");
    EXPECT_FALSE(next_step_correct(r.prediction.next_step_text, in.gold_next_step));
  }
}

namespace {

struct ClipWorld {
  EmbeddingStore images;
  EmbeddingStore steps;
  ClipStores stores() const { return {images, steps}; }
};

ClipWorld random_clip_world(const Instance& in, std::uint64_t seed, std::size_t dim = 8) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  auto vec = [&] {
    std::vector<double> v(dim);
    for (double& x : v) x = normal(gen);
    return v;
  };
  ClipWorld w;
  w.images.add({in.visual.image_id, vec()});
  for (const auto& c : in.candidates) {
    for (const auto& s : c.steps) {
      for (int atom : source_of(s)) {
        const std::string key = step_embedding_key(c.id, atom);
        if (!w.steps.contains(key)) w.steps.add({key, vec()});
      }
    }
  }
  return w;
}

}  // namespace

TEST(Clip, FullModeMakesNoRequests) {
  const Instance in = hand_instance();
  const ClipWorld w = random_clip_world(in, 1);
  const RunResult r = clip_variant(in, ClipMode::kFull, w.stores(), nullptr);
  ASSERT_FALSE(r.error) << r.error->message;
  EXPECT_EQ(r.request_count(), 0u);
  EXPECT_EQ(r.mode, "clip:full");
  EXPECT_FALSE(r.prediction.next_step_text.empty());
}

TEST(Clip, P3PicksDuplicatedEmbedding) {
  const Instance in = hand_instance();
  ClipWorld w;
  std::mt19937_64 gen(2);
  std::normal_distribution<double> normal;
  std::vector<double> image(8);
  for (double& x : image) x = normal(gen);
  w.images.add({in.visual.image_id, image});
  for (const auto& c : in.candidates) {
    for (std::size_t s = 0; s < c.steps.size(); ++s) {
      std::vector<double> v(8);
      for (double& x : v) x = normal(gen);
      if (c.id == "A" && s == 1) v = image;
      w.steps.add({step_embedding_key(c.id, static_cast<int>(s + 1)), v});
    }
  }
  ScriptedProvider p;
  p.when_contains(std::string(kSelectNeedle), "[2]");
  p.when_contains(std::string(kSplitNeedle), render_steps(in.candidates[1]));
  const RunResult r = clip_variant(in, ClipMode::kP3, w.stores(), &p);
  ASSERT_FALSE(r.error) << r.error->message;
  EXPECT_EQ(r.prediction.current_step_index, 2);
  EXPECT_EQ(r.prediction.next_step_text, in.gold_next_step);
  EXPECT_EQ(r.request_count(), 2u);
}

TEST(Clip, P1MatchesMaxOverMaxOracle) {
  Instance in = hand_instance();
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const ClipWorld w = random_clip_world(in, seed);
    int expected = 0;
    double best = -10;
    for (std::size_t k = 0; k < in.candidates.size(); ++k) {
      for (const auto& s : in.candidates[k].steps) {
        const auto& a = w.images.at(in.visual.image_id).values;
        const auto& b = w.steps.at(step_embedding_key(in.candidates[k].id, s.index)).values;
        double dot = 0, na = 0, nb = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
          dot += a[i] * b[i];
          na += a[i] * a[i];
          nb += b[i] * b[i];
        }
        const double c = dot / std::sqrt(na * nb);
        if (c > best + 1e-12) {
          best = c;
          expected = static_cast<int>(k);
        }
      }
    }
    PhaseTrace trace;
    EXPECT_EQ(clip_retrieve(in.visual, in.candidates, w.stores(), trace).position, expected) << seed;

    ScriptedProvider p;
    p.when_contains(std::string(kIdentifyNeedle), "step_1");
    const RunResult r = clip_variant(in, ClipMode::kP1, w.stores(), &p);
    EXPECT_EQ(r.prediction.selected_position, expected);
    EXPECT_EQ(r.request_count(), 2u);
  }
}

TEST(Clip, MissingEmbeddingAndProviderChecks) {
  const Instance in = hand_instance();
  ClipWorld w = random_clip_world(in, 3);
  ClipWorld empty_steps;
  empty_steps.images.add(w.images.at(in.visual.image_id));
  const RunResult r = clip_variant(in, ClipMode::kFull, empty_steps.stores(), nullptr);
  ASSERT_TRUE(r.error);
  EXPECT_EQ(r.error->code, "MissingEmbedding");
  EXPECT_THROW(clip_variant(in, ClipMode::kP1, w.stores(), nullptr), Error);
  EXPECT_EQ(parse_clip_mode("P3"), ClipMode::kP3);
  EXPECT_THROW(parse_clip_mode("p2"), Error);
}

TEST(Determinism, ScriptedRunsAreByteIdentical) {
  const fixtures::Bench b = fixtures::make_bench(15, 3);
  auto o1 = make_oracle_provider(b.instances);
  auto o2 = make_oracle_provider(b.instances);
  for (const auto& in : b.instances) {
    EXPECT_EQ(result_record(run_cop(in, PipelineConfig{}, *o1)).dump(),
              result_record(run_cop(in, PipelineConfig{}, *o2)).dump());
  }
}

TEST(ResultRecordTest, RoundTripKeepsUsage) {
  const fixtures::Bench b = fixtures::make_bench(15, 3, 0.5, 4);
  auto oracle = make_oracle_provider(b.instances);
  for (const auto& in : b.instances) {
    const RunResult r = run_cop(in, PipelineConfig{}, *oracle);
    const ResultRecord direct = to_record(r);
    const ResultRecord parsed = parse_result_record(nlohmann::json::parse(result_record(r).dump()));
    EXPECT_EQ(parsed.instance_id, direct.instance_id);
    EXPECT_EQ(parsed.prediction, direct.prediction);
    EXPECT_EQ(parsed.trace_ref, direct.trace_ref);
    EXPECT_EQ(parsed.requests, 3u);
    EXPECT_EQ(parsed.usage.total(), direct.usage.total());
    ASSERT_EQ(parsed.per_phase.size(), 3u);
    for (const auto& [phase, u] : direct.per_phase) EXPECT_EQ(parsed.per_phase.at(phase).total(), u.total()) << phase;
    EXPECT_FALSE(parsed.error);
  }
}

TEST(PipelineConfigTest, ValidationAndParsing) {
  EXPECT_EQ(parse_phase_set("1,3"), (std::set<int>{1, 3}));
  PipelineConfig c;
  c.phases = {4};
  EXPECT_THROW(c.validate(), Error);
  c.phases = {};
  EXPECT_THROW(c.validate(), Error);
  c.phases = {2, 3};  // phase 3 on the provided procedure
  EXPECT_NO_THROW(c.validate());
  c.phases = {1, 3};
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(cop_mode_name(c), "ablation:1,3");
  PipelineConfig d;
  EXPECT_NE(c.hash(), d.hash());
  EXPECT_EQ(parse_retrieval_mode("per_candidate_score"), RetrievalMode::kPerCandidateScore);
}
