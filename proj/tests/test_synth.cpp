#include "apiknow/error.hpp"
#include "apiknow/oracle.hpp"
#include "apiknow/test_synth.hpp"

#include "support/alg1_reference.hpp"
#include "support/builders.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace apiknow;

namespace {

constexpr const char* kGoldenFitX =
    R"({"list":[{"list":[{"int":58537},{"int":52417},{"int":67251}]},{"list":[{"int":90785},{"int":67909},{"int":23935}]},)"
    R"({"list":[{"int":6738},{"int":23245},{"int":86585}]}]})";

PatternIndex rules_index(std::vector<UsageRule> rules) { return build_pattern_index(rules); }

const ParamSpec& param(const std::string& api, const std::string& name) {
  return *fixture::kb().entries.at(api).spec.find_param(name);
}

const ParamConstraint& constraint(const std::string& api, const std::string& name) {
  return fixture::kb().entries.at(api).constraints.at(name);
}

GenConfig config(std::uint64_t seed, double budget, Backend backend = Backend::random) {
  GenConfig c;
  c.seed = seed;
  c.budget_seconds = budget;
  c.backend = backend;
  return c;
}

bool calls_target(const TestCase& t, const std::string& target) {
  for (const auto& st : t.statements) {
    if ((st.kind == StatementKind::call || st.kind == StatementKind::construct) && st.callee.rfind(target, 0) == 0) {
      return true;
    }
  }
  return false;
}

std::vector<std::string> callees(const TestCase& t) {
  std::vector<std::string> out;
  for (const auto& st : t.statements) {
    if (st.kind == StatementKind::call || st.kind == StatementKind::construct) out.push_back(st.callee);
  }
  return out;
}

ParamConstraint random_constraint(std::mt19937_64& gen) {
  constexpr auto p = Provenance::parametric_page;
  auto coin = [&] { return gen() % 3 == 0; };
  ParamConstraint c;
  if (coin()) {
    static const Structure all[] = {Structure::array_like, Structure::list, Structure::tuple, Structure::set,
                                    Structure::dict,       Structure::sequence, Structure::scalar};
    std::vector<Structure> s = {all[gen() % 7]};
    if (coin()) s.push_back(all[gen() % 7]);
    c.structure.set(s, p);
  }
  if (coin()) {
    std::vector<DataType> t = {static_cast<DataType>(gen() % 4)};
    if (coin()) t.push_back(static_cast<DataType>(gen() % 4));
    c.data_type.set(t, p);
  }
  if (coin()) c.dimension.set(static_cast<std::int64_t>(1 + gen() % 3), p);
  if (coin()) {
    ShapeSpec shape;
    std::size_t rank = 1 + gen() % 3;
    for (std::size_t k = 0; k < rank; ++k) {
      if (gen() % 2) {
        shape.dims.emplace_back(std::string(gen() % 2 ? "n" : "m"));
      } else {
        shape.dims.emplace_back(static_cast<std::int64_t>(1 + gen() % 4));
      }
    }
    c.shape.set({shape}, p);
  }
  if (coin()) c.size.set(static_cast<std::int64_t>(1 + gen() % 5), p);
  if (coin()) {
    static const Literal pool[] = {std::string("text"), std::string("diagram"), std::int64_t{3}, 0.5, true,
                                   NoneLiteral{}};
    std::vector<Literal> values = {pool[gen() % 6]};
    if (coin()) values.push_back(pool[gen() % 6]);
    std::sort(values.begin(), values.end(), [](const Literal& a, const Literal& b) { return a.index() < b.index(); });
    values.erase(std::unique(values.begin(), values.end()), values.end());
    c.allowed_values.set(values, p);
  }
  return c;
}

} // namespace

// --- next_method -----------------------------------------------------------

TEST(NextMethod, SingleMatchingRule) {
  auto index = rules_index({{{"KMeans", "fit"}, "predict", 8, 10}});
  EXPECT_EQ(next_method({"KMeans", "fit"}, {"predict", "score"}, index, {"score", "predict"}), "predict");
}

TEST(NextMethod, NoMatchUsesFallbackTop) {
  auto index = rules_index({{{"a", "b"}, "c", 1, 1}});
  EXPECT_EQ(next_method({"KMeans", "fit"}, {"predict", "score"}, index, {"score", "predict"}), "score");
}

TEST(NextMethod, HigherConfidenceWins) {
  auto index = rules_index({{{"KMeans", "fit"}, "predict", 6, 10}, {{"KMeans", "fit"}, "score", 9, 10}});
  EXPECT_EQ(next_method({"KMeans", "fit"}, {"predict", "score"}, index, {"predict"}), "score");
}

TEST(NextMethod, SuffixWalkDropsLeadingCalls) {
  auto index = rules_index({{{"KMeans", "fit"}, "predict", 8, 10}});
  EXPECT_EQ(next_method({"load_data", "KMeans", "fit"}, {"predict", "score"}, index, {"score"}), "predict");
}

TEST(NextMethod, SingleCallSequenceNeverConsultsRules) {
  auto index = rules_index({{{"KMeans"}, "predict", 10, 10}});
  EXPECT_EQ(next_method({"KMeans"}, {"predict", "score"}, index, {"score"}), "score");
  EXPECT_EQ(next_method({}, {"predict", "score"}, index, {}), "predict");
}

TEST(NextMethod, ConfidenceTiesBreakBySupportThenId) {
  auto index = rules_index({{{"a", "b"}, "z", 2, 4}, {{"a", "b"}, "y", 1, 2}, {{"a", "b"}, "x", 2, 4}});
  EXPECT_EQ(next_method({"a", "b"}, {"y", "z", "x"}, index, {}), "x");
}

TEST(NextMethod, EmptyCandidatesIsAnError) {
  EXPECT_THROW(next_method({"a"}, {}, PatternIndex{}, {}), Error);
}

TEST(NextMethod, AgreesWithReferenceOnRandomScenarios) {
  std::mt19937_64 gen(99);
  for (int i = 0; i < 2000; ++i) {
    auto s = oracle::random_scenario(gen);
    auto got = next_method(s.sequence, s.candidates, build_pattern_index(s.rules), s.fallback);
    ASSERT_EQ(got, oracle::reference_next_method(s)) << "scenario " << i;
    auto priority = oracle::priority_set(s);
    if (!priority.empty()) {
      auto best = std::max_element(priority.begin(), priority.end(),
                                   [](const auto& a, const auto& b) { return a.confidence < b.confidence; });
      auto chosen = std::find_if(priority.begin(), priority.end(), [&](const auto& m) { return m.api == got; });
      ASSERT_NE(chosen, priority.end());
      ASSERT_EQ(chosen->confidence, best->confidence);
      ASSERT_GE(chosen->suffix_length, 2u);
    }
  }
}

// --- synth_input / synth_literal -----------------------------------------

TEST(SynthInput, SquareIntegerGridForFitX) {
  GenConfig cfg;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    auto arg = synth_input(param(build::kFit, "X"), constraint(build::kFit, "X"), {}, rng, cfg);
    const auto* v = std::get_if<Value>(&arg.value);
    ASSERT_NE(v, nullptr);
    auto dims = dims_of(*v);
    ASSERT_TRUE(dims.has_value());
    ASSERT_EQ(dims->size(), 2u);
    EXPECT_EQ((*dims)[0], (*dims)[1]);
    std::vector<const Literal*> leaves;
    collect_leaves(*v, leaves);
    for (const auto* leaf : leaves) EXPECT_EQ(tag_of(*leaf), LiteralTag::integer);
    EXPECT_EQ(std::get<std::size_t>(arg.binding), 0u);
  }
}

TEST(SynthInput, UndefinedConstraintGivesPrimitive) {
  GenConfig cfg;
  std::set<LiteralTag> seen;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    auto v = synth_literal(ParamConstraint{}, rng, cfg);
    ASSERT_TRUE(v.is_scalar());
    seen.insert(tag_of(v.scalar));
  }
  EXPECT_EQ(seen, (std::set<LiteralTag>{LiteralTag::integer, LiteralTag::floating, LiteralTag::string,
                                        LiteralTag::boolean}));
}

TEST(SynthInput, AllowedValuesDrawnFromSet) {
  ParamConstraint c;
  c.allowed_values.set({std::string("text"), std::string("diagram")}, Provenance::parametric_page);
  GenConfig cfg;
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    auto v = synth_literal(c, rng, cfg);
    ASSERT_TRUE(v.is_scalar());
    seen.insert(std::get<std::string>(v.scalar));
  }
  EXPECT_EQ(seen, (std::set<std::string>{"text", "diagram"}));
}

TEST(SynthInput, GoldenLiteralForSeed42) {
  GenConfig cfg;
  Rng rng(42);
  auto v = synth_literal(constraint(build::kFit, "X"), rng, cfg);
  EXPECT_EQ(value_to_json(v).dump(), kGoldenFitX);
}

TEST(SynthInput, ContradictionsNameTheProblem) {
  GenConfig cfg;
  Rng rng(1);
  ParamConstraint c;
  c.allowed_values.set({std::string("a")}, Provenance::parametric_page);
  c.shape.set({ShapeSpec{{std::string("n"), std::int64_t{2}}}}, Provenance::parametric_page);
  try {
    synth_literal(c, rng, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::generation);
    EXPECT_NE(std::string(e.what()).find("contradictory"), std::string::npos);
  }
  ParamConstraint scoped;
  scoped.data_type.set({DataType::integer}, Provenance::parametric_page);
  scoped.allowed_values.set({NoneLiteral{}}, Provenance::parametric_page);
  for (int k = 0; k < 20; ++k) {
    auto v = synth_literal(scoped, rng, cfg);
    EXPECT_EQ(tag_of(v.scalar), LiteralTag::integer);
    EXPECT_EQ(check_value(v, scoped), std::nullopt);
  }
  ParamConstraint rank;
  rank.dimension.set(2, Provenance::parametric_page);
  rank.shape.set({ShapeSpec{{std::string("n")}}}, Provenance::parametric_page);
  EXPECT_THROW(synth_literal(rank, rng, cfg), Error);
  ParamConstraint sparse;
  sparse.structure.set({Structure::sparse_matrix}, Provenance::parametric_page);
  EXPECT_THROW(synth_literal(sparse, rng, cfg), Error);
}

TEST(SynthInput, OptionalInclusionProbability) {
  GenConfig never;
  never.p_include_optional = 0;
  GenConfig always;
  always.p_include_optional = 1;
  always.p_use_default = 0;
  const auto& p = param(build::kKMeans, "n_clusters");
  const auto& c = constraint(build::kKMeans, "n_clusters");
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng a(seed), b(seed);
    EXPECT_TRUE(std::holds_alternative<UseDefault>(synth_input(p, c, {}, a, never).value));
    auto arg = synth_input(p, c, {}, b, always);
    ASSERT_TRUE(std::holds_alternative<Value>(arg.value));
    EXPECT_EQ(check_value(std::get<Value>(arg.value), c), std::nullopt);
  }
}

TEST(SynthInput, ReusesMostRecentMatchingPoolVariable) {
  GenConfig cfg;
  std::vector<PoolEntry> pool = {{0, build::grid({{1, 2}, {3, 4}})},
                                 {1, build::s("nope")},
                                 {2, build::grid({{5, 6}, {7, 8}})},
                                 {3, Value::object(build::kKMeans)}};
  Rng rng(3);
  auto arg = synth_input(param(build::kFit, "X"), constraint(build::kFit, "X"), pool, rng, cfg);
  ASSERT_TRUE(std::holds_alternative<VarRef>(arg.value));
  EXPECT_EQ(std::get<VarRef>(arg.value).id, 2);
}

TEST(SynthInput, LiteralsSatisfyRandomConstraints) {
  std::mt19937_64 gen(5);
  GenConfig cfg;
  int produced = 0, contradictions = 0;
  for (int i = 0; i < 3000; ++i) {
    auto c = random_constraint(gen);
    Rng rng(static_cast<std::uint64_t>(i));
    try {
      auto v = synth_literal(c, rng, cfg);
      auto verdict = check_value(v, c);
      ASSERT_FALSE(verdict.has_value()) << constraint_to_json(c).dump() << "\n"
                                        << describe(v) << "\n" << verdict->expected << " / " << verdict->actual;
      ++produced;
    } catch (const Error& e) {
      ASSERT_EQ(e.kind(), ErrorKind::generation) << e.what();
      ++contradictions;
    }
  }
  EXPECT_GT(produced, 1500);
}

TEST(SynthInput, FixtureKbLiteralsAreSound) {
  GenConfig cfg;
  for (const auto& [id, entry] : fixture::kb().entries) {
    for (const auto& [name, c] : entry.constraints) {
      if (c.value_undefined()) continue;
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        auto v = synth_literal(c, rng, cfg);
        EXPECT_EQ(check_value(v, c), std::nullopt) << id << "." << name << " " << describe(v);
      }
    }
  }
}

// --- random backend ----------------------------------------------------------

TEST(RandomSuite, ContainsFitBeforePredict) {
  auto suite = gen_random_suite("sklearn.cluster", fixture::kb(), fixture::patterns(), config(1, 40));
  ASSERT_FALSE(suite.tests.empty());
  auto fit_then_predict = [](const TestCase& t) {
    auto calls = callees(t);
    auto fit = std::find(calls.begin(), calls.end(), build::kFit);
    return fit != calls.end() && std::find(fit, calls.end(), build::kPredict) != calls.end();
  };
  EXPECT_TRUE(std::any_of(suite.tests.begin(), suite.tests.end(), fit_then_predict));
}

TEST(RandomSuite, ZeroBudgetIsEmpty) {
  auto suite = gen_random_suite("sklearn.cluster", fixture::kb(), fixture::patterns(), config(1, 0));
  EXPECT_TRUE(suite.tests.empty());
  EXPECT_EQ(suite.target, "sklearn.cluster");
}

TEST(RandomSuite, SameSeedSameSuite) {
  auto a = gen_random_suite("sklearn.cluster", fixture::kb(), fixture::patterns(), config(9, 20));
  auto b = gen_random_suite("sklearn.cluster", fixture::kb(), fixture::patterns(), config(9, 20));
  auto c = gen_random_suite("sklearn.cluster", fixture::kb(), fixture::patterns(), config(10, 20));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(RandomSuite, TestsAreValidStructuredAndEndWithAssertion) {
  auto suite = gen_random_suite("sklearn", fixture::kb(), fixture::patterns(), config(4, 40));
  std::set<std::string> ids;
  for (const auto& t : suite.tests) {
    EXPECT_NO_THROW(validate_structure(t));
    EXPECT_TRUE(check_test(t, fixture::kb()).valid);
    EXPECT_TRUE(calls_target(t, "sklearn"));
    EXPECT_EQ(t.statements.back().kind, StatementKind::assert_not_none);
    EXPECT_EQ(t.id, compute_test_id(t));
    EXPECT_TRUE(ids.insert(t.id).second);
    EXPECT_LE(callees(t).size(), GenConfig{}.max_sequence_length);
  }
}

TEST(RandomSuite, EmptyTargetIsAnError) {
  try {
    gen_random_suite("torch.nn", fixture::kb(), fixture::patterns(), config(1, 5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::generation);
  }
}

TEST(RandomSuite, GuidedNeverMoreInvalidThanBlind) {
  auto blind = strip_knowledge(fixture::kb());
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto rate = [&](const TestSuite& s) {
      std::size_t bad = 0;
      for (const auto& t : s.tests) bad += check_test(t, fixture::kb()).valid ? 0 : 1;
      return s.tests.empty() ? 0.0 : static_cast<double>(bad) / static_cast<double>(s.tests.size());
    };
    auto guided = gen_random_suite("sklearn.cluster", fixture::kb(), fixture::patterns(), config(seed, 20));
    auto unguided = gen_random_suite("sklearn.cluster", blind, PatternIndex{}, config(seed, 20));
    EXPECT_LE(rate(guided), rate(unguided));
  }
}

// --- search backend ----------------------------------------------------------

TEST(SearchSuite, OneGenerationGivesNonEmptySuite) {
  auto suite = gen_search_suite("sklearn.cluster", fixture::kb(), fixture::patterns(), config(3, 1, Backend::search));
  EXPECT_FALSE(suite.tests.empty());
  EXPECT_EQ(suite.backend, Backend::search);
  EXPECT_TRUE(gen_search_suite("sklearn.cluster", fixture::kb(), fixture::patterns(), config(3, 0, Backend::search))
                  .tests.empty());
}

TEST(SearchSuite, SameSeedSameSuite) {
  auto cfg = config(5, 4, Backend::search);
  auto a = gen_search_suite("sklearn.cluster", fixture::kb(), fixture::patterns(), cfg);
  auto b = gen_search_suite("sklearn.cluster", fixture::kb(), fixture::patterns(), cfg);
  EXPECT_EQ(a, b);
}

TEST(SearchSuite, SameFeedbackSameSuite) {
  auto cfg = config(5, 4, Backend::search);
  auto first = gen_random_suite("sklearn.cluster", fixture::kb(), fixture::patterns(), config(5, 10));
  CoverageFeedback fb;
  fb.total_branches = 40;
  for (std::size_t k = 0; k < first.tests.size(); ++k) fb.covered[first.tests[k].id] = {"b" + std::to_string(k)};
  auto a = gen_search_suite("sklearn.cluster", fixture::kb(), fixture::patterns(), cfg, &fb);
  auto b = gen_search_suite("sklearn.cluster", fixture::kb(), fixture::patterns(), cfg, &fb);
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a.tests.empty());
}

TEST(SearchSuite, StructurallyValidAfterEvolution) {
  auto suite = gen_search_suite("sklearn", fixture::kb(), fixture::patterns(), config(8, 6, Backend::search));
  ASSERT_FALSE(suite.tests.empty());
  EXPECT_LE(suite.tests.size(), GenConfig{}.max_tests_per_suite);
  for (const auto& t : suite.tests) {
    EXPECT_NO_THROW(validate_structure(t));
    EXPECT_TRUE(calls_target(t, "sklearn"));
    EXPECT_EQ(t.id, compute_test_id(t));
  }
}

TEST(SearchSuite, PatternsDoNotLowerProxyFitness) {
  double guided = 0, blind = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto cfg = config(seed, 3, Backend::search);
    auto g = gen_search_suite("sklearn.cluster", fixture::kb(), fixture::patterns(), cfg);
    auto b = gen_search_suite("sklearn.cluster", fixture::kb(), PatternIndex{}, cfg);
    guided += model_coverage(g, "sklearn.cluster", fixture::kb(), fixture::patterns()).score;
    blind += model_coverage(b, "sklearn.cluster", fixture::kb(), fixture::patterns()).score;
  }
  EXPECT_GE(guided, blind);
}

// --- repair ------------------------------------------------------------------

TEST(Repair, CallBeforeConstructIsReordered) {
  using namespace build;
  TestCase t;
  t.statements = {method(1, 0, kFit, {pos(0, 2)}), lit(2, grid({{1}})), construct(0, kKMeans), check_not_none(1)};
  auto fixed = repair_sequence(t);
  ASSERT_EQ(fixed.statements.size(), 4u);
  EXPECT_NO_THROW(validate_structure(fixed));
  EXPECT_EQ(fixed.statements.back().kind, StatementKind::assert_not_none);
}

TEST(Repair, DanglingReferenceIsDropped) {
  using namespace build;
  TestCase t;
  t.statements = {construct(0, kKMeans), method(1, 0, kFit, {pos(0, 7)}), check_not_none(0)};
  auto fixed = repair_sequence(t);
  EXPECT_EQ(fixed.statements.size(), 2u);
  EXPECT_NO_THROW(validate_structure(fixed));
}

TEST(Repair, ValidTestUnchanged) {
  auto t = build::fit_then_predict();
  EXPECT_EQ(repair_sequence(t), t);
  EXPECT_EQ(repair_sequence(repair_sequence(t)), t);
}

TEST(Repair, RandomShufflesBecomeValid) {
  std::mt19937_64 gen(17);
  auto base = build::fit_then_predict();
  for (int i = 0; i < 200; ++i) {
    auto t = base;
    std::shuffle(t.statements.begin(), t.statements.end(), gen);
    if (gen() % 2) t.statements.erase(t.statements.begin() + static_cast<std::ptrdiff_t>(gen() % t.statements.size()));
    auto fixed = repair_sequence(t);
    ASSERT_NO_THROW(validate_structure(fixed));
    ASSERT_EQ(repair_sequence(fixed), fixed);
  }
}

// --- config and rng ----------------------------------------------------------

TEST(GenConfigValidation, RejectsBadValues) {
  GenConfig c;
  EXPECT_NO_THROW(validate(c));
  c.mutation_rate = 1.5;
  EXPECT_THROW(validate(c), Error);
  c = GenConfig{};
  c.int_min = 5;
  c.int_max = 4;
  EXPECT_THROW(validate(c), Error);
  c = GenConfig{};
  c.budget_seconds = -1;
  EXPECT_THROW(validate(c), Error);
  c = GenConfig{};
  c.budget_seconds = 2.5;
  c.units_per_second = 4;
  EXPECT_EQ(c.work_units(), 10);
}

TEST(RngStreams, SplitIsStableAndIndependent) {
  Rng a(7), b(7);
  EXPECT_EQ(a.next(), b.next());
  auto s1 = Rng(7).split("x");
  auto s2 = Rng(7).split("x");
  auto s3 = Rng(7).split("y");
  EXPECT_EQ(s1.next(), s2.next());
  EXPECT_NE(Rng(7).split("x").next(), s3.next());
  Rng r(3);
  for (int i = 0; i < 1000; ++i) {
    auto x = r.range(-2, 2);
    ASSERT_GE(x, -2);
    ASSERT_LE(x, 2);
    auto u = r.unit();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}
