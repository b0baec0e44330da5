#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <limits>

#include "arvote/error.hpp"
#include "arvote/models.hpp"
#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace arvote;
using arvote::testing::TempDir;

namespace {

BackboneSpec toy_spec(std::vector<int> orders = {2, 3, 4}, std::size_t dim = 1 << 16, std::uint64_t seed = 0) {
  BackboneSpec spec = lookup_backbone("toy-ngram");
  spec.toy.orders = std::move(orders);
  spec.toy.dim = dim;
  spec.toy.hash_seed = seed;
  return spec;
}

struct Corpus {
  Dataset train;
  Dataset dev;
};

const Corpus& separable() {
  static const Corpus c{
      clean_dataset(arvote::testing::make_separable_corpus(200, 11, Task::kTask1a, Split::kTrain, "tr")),
      clean_dataset(arvote::testing::make_separable_corpus(100, 12, Task::kTask1a, Split::kDev, "dv"))};
  return c;
}

TrainConfig toy_config(std::uint64_t seed = 5) {
  TrainConfig cfg = TrainConfig::defaults_for(BackboneKind::kToy);
  cfg.seed = seed;
  return cfg;
}

double match_rate(const PredictionSet& ps, const Dataset& d) {
  std::size_t hits = 0;
  for (const auto& e : d.examples) hits += ps.find(e.id)->label == *e.label;
  return static_cast<double>(hits) / static_cast<double>(d.size());
}

struct AdapterEnv {
  explicit AdapterEnv(const char* value) {
    if (value) {
      ::setenv(kAdapterEnvVar, value, 1);
    } else {
      ::unsetenv(kAdapterEnvVar);
    }
  }
  ~AdapterEnv() { ::unsetenv(kAdapterEnvVar); }
};

}  // namespace

TEST_SUITE("featurize") {
  TEST_CASE("empty text is the zero vector") {
    const auto x = featurize("", toy_spec());
    CHECK(x.dim == 1 << 16);
    CHECK(x.indices.empty());
  }

  TEST_CASE("a single bigram lands in its documented bucket") {
    const std::uint64_t seed = 42;
    const auto x = featurize("ab", toy_spec({2}, 16, seed));
    REQUIRE(x.indices.size() == 1);
    CHECK(x.indices[0] == oracle::fnv1a_seeded("ab", seed) % 16);
    CHECK(x.values[0] == 1.0);
  }

  TEST_CASE("hash matches the reference implementation") {
    for (std::uint64_t seed : {0ULL, 1ULL, 0xdeadbeefULL}) {
      for (const char* s : {"", "a", "سلام", "ab cd"}) CHECK(ngram_hash(s, seed) == oracle::fnv1a_seeded(s, seed));
    }
  }

  TEST_CASE("s and s+s agree with a brute-force n-gram count") {
    CounterRng rng(3, 3);
    for (int trial = 0; trial < 50; ++trial) {
      const auto s = arvote::testing::random_noisy_string(rng);
      const auto spec = toy_spec({2}, 1 << 20, 9);
      for (const auto& text : {s, s + s}) {
        std::map<std::uint32_t, double> expected;
        for (const auto& [gram, n] : oracle::ngram_counts(text, 2)) {
          expected[static_cast<std::uint32_t>(oracle::fnv1a_seeded(gram, 9) % spec.toy.dim)] += n;
        }
        const auto x = featurize(text, spec);
        std::map<std::uint32_t, double> got;
        for (std::size_t i = 0; i < x.indices.size(); ++i) got[x.indices[i]] = x.values[i];
        REQUIRE(got == expected);
      }
    }
  }

  TEST_CASE("text is cut at max_seq_len code points") {
    auto spec = toy_spec({1}, 1 << 20);
    spec.max_seq_len = 3;
    const auto x = featurize("سلامعليكم", spec);
    double total = 0;
    for (double v : x.values) total += v;
    CHECK(total == 3.0);
  }

  TEST_CASE("external backbones are rejected") {
    CHECK_THROWS_AS(featurize("x", lookup_backbone("marbertv2")), ContractError);
  }
}

TEST_SUITE("softmax and loss") {
  TEST_CASE("zero parameters give a uniform distribution") {
    FittedModel m;
    m.spec = toy_spec({2}, 32);
    m.weights = init_linear_head(32);
    const auto spec = m.spec;
    std::vector<SparseVector> batch{featurize("abc", spec), featurize("", spec), featurize("zzzz", spec)};
    const auto out = forward(m, batch);
    REQUIRE(out.size() == 3);
    for (const auto& p : out) {
      CHECK(p[0] == 0.5);
      CHECK(p[1] == 0.5);
    }
  }

  TEST_CASE("hand-computed softmax") {
    const auto p = softmax({0.0, std::log(3.0)});
    CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.75).epsilon(1e-12));
    const auto big = softmax({1000.0, -1000.0});
    CHECK(big[0] == 1.0);
    CHECK(std::isfinite(big[1]));
  }

  TEST_CASE("forward rejects a dimension mismatch") {
    FittedModel m;
    m.spec = toy_spec({2}, 32);
    m.weights = init_linear_head(32);
    std::vector<SparseVector> batch{featurize("abc", toy_spec({2}, 64))};
    CHECK_THROWS_AS(forward(m, batch), ContractError);
  }

  TEST_CASE("forward outputs are distributions") {
    CounterRng rng(8, 8);
    FittedModel m;
    m.spec = toy_spec({1, 2}, 64);
    auto params = init_linear_head(64);
    for (auto& b : params)
      for (auto& v : b.values) v = 10.0 * (rng.uniform() - 0.5);
    m.weights = params;
    std::vector<SparseVector> batch;
    for (int i = 0; i < 200; ++i) batch.push_back(featurize(arvote::testing::random_noisy_string(rng), m.spec));
    for (const auto& p : forward(m, batch)) {
      CHECK(p[0] >= 0.0);
      CHECK(p[1] >= 0.0);
      CHECK(std::abs(p[0] + p[1] - 1.0) <= 1e-9);
    }
  }

  TEST_CASE("cross entropy examples") {
    CHECK(cross_entropy({1.0, 0.0}, 0) == 0.0);
    CHECK(cross_entropy({0.5, 0.5}, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(cross_entropy({0.0, 1.0}, 0) == doctest::Approx(-std::log(1e-12)).epsilon(1e-12));
    CHECK(cross_entropy({0.0, 1.0}, 0) == doctest::Approx(27.631).epsilon(1e-4));
  }
}

TEST_SUITE("adamw") {
  TEST_CASE("single scalar step without weight decay") {
    Parameters p{{"theta", {1.0}}};
    const Parameters g{{"theta", {1.0}}};
    auto state = OptimizerState::zeros_like(p);
    AdamWConfig cfg;
    cfg.weight_decay = 0.0;
    adamw_step(p, g, state, 0.1, cfg);
    CHECK(state.step == 1);
    CHECK(std::abs(p[0].values[0] - (1.0 - 0.1 / (1.0 + 1e-8))) <= 1e-12);
    CHECK(std::abs(p[0].values[0] - 0.9) <= 1e-8);
  }

  TEST_CASE("single scalar step with weight decay 0.01") {
    Parameters p{{"theta", {1.0}}};
    const Parameters g{{"theta", {1.0}}};
    auto state = OptimizerState::zeros_like(p);
    adamw_step(p, g, state, 0.1, AdamWConfig{});
    CHECK(std::abs(p[0].values[0] - (1.0 - 0.1 * (1.0 / (1.0 + 1e-8) + 0.01))) <= 1e-12);
    CHECK(std::abs(p[0].values[0] - 0.899) <= 1e-8);
  }

  TEST_CASE("second step follows the bias-corrected recurrence") {
    Parameters p{{"theta", {0.5, -2.0}}};
    auto state = OptimizerState::zeros_like(p);
    const AdamWConfig cfg;
    const double lr = 0.05;
    const std::vector<std::vector<double>> gs{{0.3, -1.0}, {-0.2, 4.0}};
    // reference recurrence, written out independently
    std::vector<double> theta{0.5, -2.0}, m(2, 0.0), v(2, 0.0);
    for (std::size_t t = 1; t <= gs.size(); ++t) {
      adamw_step(p, Parameters{{"theta", gs[t - 1]}}, state, lr, cfg);
      for (std::size_t i = 0; i < 2; ++i) {
        const double g = gs[t - 1][i];
        m[i] = 0.9 * m[i] + 0.1 * g;
        v[i] = 0.999 * v[i] + 0.001 * g * g;
        const double mh = m[i] / (1 - std::pow(0.9, double(t)));
        const double vh = v[i] / (1 - std::pow(0.999, double(t)));
        theta[i] -= lr * (mh / (std::sqrt(vh) + 1e-8) + 0.01 * theta[i]);
      }
    }
    CHECK(state.step == 2);
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(p[0].values[i] - theta[i]) <= 1e-12);
    for (double x : state.v[0]) CHECK(x >= 0.0);
  }

  TEST_CASE("zero gradient without decay is a fixed point for every step") {
    Parameters p{{"a", {1.0, -3.5, 0.0}}, {"b", {2.25}}};
    const Parameters before = p;
    const Parameters g{{"a", {0.0, 0.0, 0.0}}, {"b", {0.0}}};
    auto state = OptimizerState::zeros_like(p);
    AdamWConfig cfg;
    cfg.weight_decay = 0.0;
    for (int t = 1; t <= 100; ++t) {
      adamw_step(p, g, state, 0.1, cfg);
      REQUIRE(state.step == static_cast<std::uint64_t>(t));
    }
    CHECK(p == before);
  }

  TEST_CASE("non-finite gradients name the block and leave state untouched") {
    Parameters p{{"weights", {1.0}}, {"bias", {1.0}}};
    const Parameters before = p;
    auto state = OptimizerState::zeros_like(p);
    const Parameters g{{"weights", {0.1}}, {"bias", {std::numeric_limits<double>::quiet_NaN()}}};
    CHECK_THROWS_WITH_AS(adamw_step(p, g, state, 0.1, AdamWConfig{}), doctest::Contains("bias"), TrainingError);
    CHECK(p == before);
    CHECK(state.step == 0);
    const Parameters inf{{"weights", {std::numeric_limits<double>::infinity()}}, {"bias", {0.0}}};
    CHECK_THROWS_WITH_AS(adamw_step(p, inf, state, 0.1, AdamWConfig{}), doctest::Contains("weights"), TrainingError);
  }

  TEST_CASE("shape mismatch is a contract error") {
    Parameters p{{"weights", {1.0, 2.0}}};
    auto state = OptimizerState::zeros_like(p);
    CHECK_THROWS_AS(adamw_step(p, Parameters{{"weights", {1.0}}}, state, 0.1, AdamWConfig{}), ContractError);
    CHECK_THROWS_AS(adamw_step(p, Parameters{}, state, 0.1, AdamWConfig{}), ContractError);
  }
}

TEST_SUITE("gradient check") {
  TEST_CASE("analytic gradient matches central differences on 50 instances") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto r = arvote::testing::gradient_check_instance(seed);
      REQUIRE(r.parameters_checked > 0);
      CHECK_MESSAGE(r.worst_relative_error <= 1e-4, "instance " << seed);
    }
  }
}

TEST_SUITE("train") {
  TEST_CASE("separable corpus reaches dev micro F1 >= 0.95") {
    const auto& c = separable();
    const auto m = train(toy_spec(), c.train, c.dev, toy_config());
    REQUIRE(m.history.size() == 10);
    REQUIRE(m.selected_epoch >= 1);
    CHECK(*m.history[m.selected_epoch - 1].dev_micro_f1 >= 0.95);
    CHECK(match_rate(predict(m, c.dev), c.dev) >= 0.95);
    CHECK(m.warnings.empty());
  }

  TEST_CASE("same seed gives an identical model") {
    const auto& c = separable();
    const auto a = train(toy_spec(), c.train, c.dev, toy_config());
    const auto b = train(toy_spec(), c.train, c.dev, toy_config());
    CHECK(model_digest(a) == model_digest(b));
    CHECK(a.history == b.history);
    CHECK(std::get<Parameters>(a.weights) == std::get<Parameters>(b.weights));
    const auto other = train(toy_spec(), c.train, c.dev, toy_config(6));
    CHECK(model_digest(other) != model_digest(a));
  }

  TEST_CASE("one epoch with a batch covering the set takes one step") {
    const auto& c = separable();
    auto cfg = toy_config();
    cfg.epochs = 1;
    cfg.batch_size = c.train.size();
    const auto m = train(toy_spec(), c.train, c.dev, cfg);
    REQUIRE(m.history.size() == 1);
    CHECK(m.history[0].steps == 1);
    CHECK(m.selected_epoch == 1);
    cfg.batch_size = c.train.size() * 4;
    CHECK(train(toy_spec(), c.train, c.dev, cfg).history[0].steps == 1);
  }

  TEST_CASE("training loss is non-increasing after epoch 2 up to one bump") {
    const auto& c = separable();
    const auto m = train(toy_spec(), c.train, c.dev, toy_config());
    int increases = 0;
    for (std::size_t e = 2; e < m.history.size(); ++e) increases += m.history[e].train_loss > m.history[e - 1].train_loss;
    CHECK(increases <= 1);
    CHECK(m.history.back().train_loss < m.history.front().train_loss);
  }

  TEST_CASE("checkpoint selection") {
    const auto& c = separable();
    auto cfg = toy_config();
    cfg.selection = CheckpointSelection::kLastEpoch;
    const auto last = train(toy_spec(), c.train, c.dev, cfg);
    CHECK(last.selected_epoch == cfg.epochs);

    const auto best = train(toy_spec(), c.train, c.dev, toy_config());
    double top = 0.0;
    for (const auto& r : best.history) top = std::max(top, *r.dev_micro_f1);
    int first = 0;
    for (const auto& r : best.history) {
      if (*r.dev_micro_f1 == top) {
        first = r.epoch;
        break;
      }
    }
    CHECK(best.selected_epoch == first);
  }

  TEST_CASE("error paths") {
    const auto& c = separable();
    Dataset empty = c.train;
    empty.examples.clear();
    CHECK_THROWS_AS(train(toy_spec(), empty, c.dev, toy_config()), ConfigError);

    Dataset no_dev = c.dev;
    no_dev.examples.clear();
    CHECK_THROWS_AS(train(toy_spec(), c.train, no_dev, toy_config()), ConfigError);
    auto last = toy_config();
    last.selection = CheckpointSelection::kLastEpoch;
    const auto m = train(toy_spec(), c.train, no_dev, last);
    CHECK_FALSE(m.history[0].dev_micro_f1.has_value());

    Dataset unlabeled = c.train;
    unlabeled.examples[3].label.reset();
    CHECK_THROWS_AS(train(toy_spec(), unlabeled, c.dev, toy_config()), DataError);

    CHECK_THROWS_AS(train(lookup_backbone("arabertv2-base"), c.train, c.dev, toy_config()), ContractError);

    auto bad = toy_config();
    bad.epochs = 0;
    CHECK_THROWS_AS(train(toy_spec(), c.train, c.dev, bad), ConfigError);
  }

  TEST_CASE("a single-class training set warns and still trains") {
    const auto& c = separable();
    Dataset one = c.train;
    std::erase_if(one.examples, [](const Example& e) { return *e.label != "true"; });
    auto cfg = toy_config();
    cfg.epochs = 2;
    const auto m = train(toy_spec(), one, c.dev, cfg);
    REQUIRE(m.warnings.size() == 1);
    CHECK(m.warnings[0].find("single class") != std::string::npos);
    CHECK(m.history.size() == 2);
  }
}

TEST_SUITE("predict") {
  TEST_CASE("empty dataset gives an empty set") {
    const auto& c = separable();
    auto cfg = toy_config();
    cfg.epochs = 1;
    const auto m = train(toy_spec(), c.train, c.dev, cfg);
    Dataset empty = c.dev;
    empty.examples.clear();
    CHECK(predict(m, empty).empty());
  }

  TEST_CASE("training examples are recovered, deterministically, one per id") {
    const auto& c = separable();
    const auto m = train(toy_spec(), c.train, c.dev, toy_config());
    const auto a = predict(m, c.train);
    const auto b = predict(m, c.train);
    CHECK(a == b);
    CHECK(match_rate(a, c.train) >= 0.95);
    REQUIRE(a.size() == c.train.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a.entries()[i].id == c.train.examples[i].id);
      CHECK(a.entries()[i].confidence >= 0.5);
      CHECK(a.entries()[i].confidence <= 1.0);
    }
    CHECK(a.model_name() == "toy-ngram");
  }
}

TEST_SUITE("checkpoints") {
  TEST_CASE("save and load round-trip") {
    const auto& c = separable();
    auto cfg = toy_config();
    cfg.epochs = 3;
    auto m = train(toy_spec({2, 3}, 1024, 77), c.train, c.dev, cfg);
    m.name = "member-a";
    m.preprocess.strip_rt = RtMode::kAnywhere;
    TempDir tmp;
    save_model(m, tmp.file("model.json"));
    const auto back = load_model(tmp.file("model.json"));
    CHECK(back.name == "member-a");
    CHECK(back.spec == m.spec);
    CHECK(back.train_config == m.train_config);
    CHECK(back.history == m.history);
    CHECK(back.selected_epoch == m.selected_epoch);
    CHECK(back.labelspace == m.labelspace);
    CHECK(back.preprocess == m.preprocess);
    CHECK(std::get<Parameters>(back.weights) == std::get<Parameters>(m.weights));
    CHECK(model_digest(back) == model_digest(m));
    CHECK(predict(back, c.dev) == predict(m, c.dev));
  }

  TEST_CASE("corrupt checkpoints are rejected") {
    CHECK_THROWS(deserialize_model("{}", "x"));
    CHECK_THROWS(deserialize_model("not json", "x"));
    const auto& c = separable();
    auto cfg = toy_config();
    cfg.epochs = 1;
    const auto blob = serialize_model(train(toy_spec({2}, 64), c.train, c.dev, cfg));
    auto tampered = blob;
    tampered.replace(tampered.find(kCheckpointMagic), std::string(kCheckpointMagic).size(), "something-else");
    CHECK_THROWS(deserialize_model(tampered, "x"));
    CHECK_NOTHROW(deserialize_model(blob, "x"));
  }
}

TEST_SUITE("registry") {
  TEST_CASE("marbertv2 is external with a 128-token limit") {
    const auto& spec = lookup_backbone("marbertv2");
    CHECK(spec.kind == BackboneKind::kExternal);
    CHECK(spec.max_seq_len == 128);
    CHECK(spec.num_labels == 2);
  }

  TEST_CASE("roster members") {
    for (const char* name : {"arabertv02-twitter-base", "arabertv1-base", "arabertv2-base",
                             "araelectra-base-discriminator", "araelectra-base-generator"}) {
      CHECK(lookup_backbone(name).kind == BackboneKind::kExternal);
      CHECK_FALSE(lookup_backbone(name).checkpoint.empty());
    }
    CHECK(lookup_backbone("toy-ngram").kind == BackboneKind::kToy);
    CHECK_THROWS_AS(lookup_backbone("gpt"), ConfigError);
    const auto names = backbone_names();
    CHECK(std::set<std::string>(names.begin(), names.end()).size() == names.size());
  }

  TEST_CASE("spec validation") {
    auto spec = toy_spec();
    spec.toy.dim = 1;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = toy_spec();
    spec.max_seq_len = 0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
  }

  TEST_CASE("train config defaults and validation") {
    CHECK(TrainConfig::defaults_for(BackboneKind::kExternal).learning_rate == 1e-5);
    const auto toy = TrainConfig::defaults_for(BackboneKind::kToy);
    CHECK(toy.learning_rate == 1e-2);
    CHECK(toy.epochs == 10);
    CHECK(toy.batch_size == 32);
    CHECK(toy.selection == CheckpointSelection::kBestDev);
    for (auto mutate : std::vector<void (*)(TrainConfig&)>{
             [](TrainConfig& c) { c.adamw.beta1 = 1.0; }, [](TrainConfig& c) { c.adamw.beta2 = 0.0; },
             [](TrainConfig& c) { c.adamw.epsilon = 0.0; }, [](TrainConfig& c) { c.adamw.weight_decay = -1.0; },
             [](TrainConfig& c) { c.learning_rate = 0.0; }, [](TrainConfig& c) { c.batch_size = 0; }}) {
      auto c = toy;
      mutate(c);
      CHECK_THROWS_AS(c.validate(), ConfigError);
    }
  }
}

TEST_SUITE("external adapter") {
  TEST_CASE("a toy spec is the wrong kind") {
    const auto& c = separable();
    TempDir tmp;
    CHECK_THROWS_AS(fine_tune_external(toy_spec(), c.train, c.dev, toy_config(), tmp.path()), ContractError);
  }

  TEST_CASE("missing runtime is an environment error") {
    AdapterEnv env(nullptr);
    const auto& c = separable();
    TempDir tmp;
    CHECK_THROWS_WITH_AS(fine_tune_external(lookup_backbone("marbertv2"), c.train, c.dev, toy_config(), tmp.path()),
                         doctest::Contains(kAdapterEnvVar), EnvironmentError);
    // the toy path is unaffected
    auto cfg = toy_config();
    cfg.epochs = 1;
    CHECK_NOTHROW(predict(train(toy_spec({2}, 256), c.train, c.dev, cfg), c.dev));
  }

  TEST_CASE("fine-tune and predict through the adapter") {
    AdapterEnv env(ARVOTE_FAKE_ADAPTER);
    const auto& c = separable();
    TempDir tmp;
    auto cfg = TrainConfig::defaults_for(BackboneKind::kExternal);
    cfg.epochs = 3;
    const auto m = fine_tune_external(lookup_backbone("marbertv2"), c.train, c.dev, cfg, tmp.path());
    CHECK_FALSE(m.is_toy());
    CHECK(m.history.size() == 3);
    CHECK(m.selected_epoch == 3);
    const auto& h = std::get<ExternalHandle>(m.weights);
    CHECK(h.runtime == "fake-runtime");
    CHECK(h.checkpoint_version == "UBC-NLP/MARBERTv2@test");
    const auto ps = predict(m, c.dev);
    REQUIRE(ps.size() == c.dev.size());
    CHECK(ps.model_name() == "marbertv2");
    for (std::size_t i = 0; i < ps.size(); ++i) CHECK(ps.entries()[i].id == c.dev.examples[i].id);

    save_model(m, tmp.file("ext.json"));
    CHECK(std::get<ExternalHandle>(load_model(tmp.file("ext.json")).weights) == h);
  }

  TEST_CASE("an unresolvable checkpoint names the registry entry") {
    AdapterEnv env(ARVOTE_FAKE_ADAPTER);
    const auto& c = separable();
    TempDir tmp;
    auto spec = lookup_backbone("arabertv2-base");
    spec.checkpoint = "missing/nowhere";
    CHECK_THROWS_WITH_AS(fine_tune_external(spec, c.train, c.dev, toy_config(), tmp.path()),
                         doctest::Contains("arabertv2-base"), EnvironmentError);
  }
}
