#include "fixtures.hpp"

#include <unistd.h>

#include <fstream>
#include <iterator>
#include <stdexcept>

#include <fmt/format.h>

namespace arvote::testing {

namespace fs = std::filesystem;

namespace {

std::string encode_utf8(std::uint32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else {
    out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
  return out;
}

std::string random_word(CounterRng& rng, std::uint32_t first, std::uint32_t last) {
  const auto len = 3 + rng.below(4);
  std::string w;
  for (std::uint64_t i = 0; i < len; ++i) w += encode_utf8(first + static_cast<std::uint32_t>(rng.below(last - first + 1)));
  return w;
}

}  // namespace

TempDir::TempDir(const std::string& tag) {
  static std::uint64_t counter = 0;
  const auto base = fs::temp_directory_path();
  for (int attempt = 0; attempt < 1000; ++attempt) {
    auto candidate = base / fmt::format("{}-{}-{}-{}", tag, ::getpid(), counter++, attempt);
    if (fs::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("cannot create temp dir");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  out << contents;
  if (!out) throw std::runtime_error("cannot write " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Dataset make_separable_corpus(std::size_t n, std::uint64_t seed, Task task, Split split,
                              const std::string& id_prefix) {
  Dataset d;
  d.labelspace = LabelSpace::for_task(task);
  d.split = split;
  CounterRng rng(seed, 0x5e9a);
  for (std::size_t i = 0; i < n; ++i) {
    const bool positive = rng.below(2) == 0;
    const std::uint32_t first = positive ? 0x0627 : 0x0641;
    const std::uint32_t last = positive ? 0x063a : 0x064a;
    std::string text;
    if (rng.below(3) == 0) text += "RT @USER: ";
    const auto words = 4 + rng.below(7);
    for (std::uint64_t w = 0; w < words; ++w) {
      if (w) text += ' ';
      text += random_word(rng, first, last);
    }
    if (rng.below(3) == 0) text += " LINK";
    Example e;
    e.id = fmt::format("{}{:04d}", id_prefix, i);
    e.text = std::move(text);
    e.label = d.labelspace.label(positive ? 0 : 1);
    e.genre = Genre::kTweet;
    d.examples.push_back(std::move(e));
  }
  return d;
}

std::string to_tsv(const Dataset& d, bool with_labels) {
  std::string out = with_labels ? "id\ttext\tlabel\ttype\n" : "id\ttext\ttype\n";
  for (const auto& e : d.examples) {
    out += e.id + '\t' + e.text + '\t';
    if (with_labels) out += e.label.value_or("") + '\t';
    out += std::string(to_string(e.genre)) + '\n';
  }
  return out;
}

std::string random_noisy_string(CounterRng& rng) {
  static const std::vector<std::string> pieces = {
      "@USER", "LINK", "RT", "@USER:", "LINK.", "RT:", "@USERS", "LINKS", "@USER@USER", "نص", "التغريدة",
      "عادي",  "abc",  "x",  ":",      "!",     ",",   "@",      "_",     "LINKنص",     "سَلامٌ", "ـــ"};
  static const std::vector<std::string> spaces = {" ", "  ", "\t", "\n", "\r\n", " \t "};
  std::string s;
  if (rng.below(4) == 0) s += spaces[rng.below(spaces.size())];
  const auto n = rng.below(12);
  for (std::uint64_t i = 0; i < n; ++i) {
    s += pieces[rng.below(pieces.size())];
    if (rng.below(5) != 0) s += spaces[rng.below(spaces.size())];
  }
  return s;
}

PredictionSet random_predictions(const std::string& name, const std::vector<std::string>& ids,
                                 const LabelSpace& space, CounterRng& rng) {
  PredictionSet ps(name);
  for (const auto& id : ids) ps.add({id, space.label(rng.below(2)), 0.5 + 0.5 * rng.uniform()});
  return ps;
}

}  // namespace arvote::testing

namespace arvote::testing {

std::string write_toy_experiment(const std::filesystem::path& dir, std::uint64_t seed, std::size_t n_train,
                                 std::size_t n_dev) {
  fs::create_directories(dir);
  const auto train = make_separable_corpus(n_train, seed, Task::kTask1a, Split::kTrain, "tr");
  const auto dev = make_separable_corpus(n_dev, seed + 1, Task::kTask1a, Split::kDev, "dv");
  const auto test = make_separable_corpus(n_dev, seed + 2, Task::kTask1a, Split::kTest, "te");
  write_file((dir / "train.tsv").string(), to_tsv(train));
  write_file((dir / "dev.tsv").string(), to_tsv(dev));
  write_file((dir / "test.tsv").string(), to_tsv(test));
  const std::string config = R"({
  "task": "task1a",
  "data": {"train": "train.tsv", "dev": "dev.tsv", "test": "test.tsv"},
  "members": [
    {"name": "toy-a", "backbone": "toy-ngram", "train": {"epochs": 6}},
    {"name": "toy-b", "backbone": "toy-ngram", "spec": {"toy": {"orders": [1, 2], "dim": 4096}},
     "train": {"epochs": 6, "learning_rate": 0.02}}
  ],
  "vote": {"tie_break": "anchor_model"},
  "output_dir": "out",
  "seed": 13
})";
  const auto path = (dir / "experiment.json").string();
  write_file(path, config);
  return path;
}

namespace {

MetricReport score(const std::string& name, double micro) {
  MetricReport r;
  r.model_name = name;
  r.micro_f1 = micro;
  r.macro_f1 = micro;
  r.accuracy = micro;
  r.n = 1;
  return r;
}

struct Row {
  const char* name;
  double dev;
  double test;
};

RunManifest table_manifest(const std::string& label, const std::vector<Row>& members, Row ensemble) {
  RunManifest m;
  m.run_label = label;
  m.status = "finalized";
  m.source = label.empty() ? "submission/manifest.json" : "post-evaluation/manifest.json";
  for (const auto& row : members) {
    MemberRecord rec;
    rec.name = row.name;
    rec.dev_metrics = score(row.name, row.dev);
    rec.test_metrics = score(row.name, row.test);
    m.members.push_back(rec);
  }
  EnsembleRecord e;
  for (const auto& row : members) e.vote.members.push_back(row.name);
  e.dev_metrics = score("ensemble", ensemble.dev);
  e.test_metrics = score("ensemble", ensemble.test);
  m.ensemble = e;
  return m;
}

}  // namespace

std::vector<RunManifest> results_table_manifests(Task task) {
  if (task == Task::kTask1a) {
    const std::vector<Row> submission{{"Araelectra-base-discriminator", 0.872, 0.750},
                                      {"AraBERTv0.2-Twitter-base", 0.842, 0.746},
                                      {"AraBERTv1-base", 0.823, 0.702},
                                      {"AraBERTv2-base", 0.849, 0.728}};
    auto post = submission;
    post.insert(post.begin() + 2, Row{"MARBERTv2 (Post-evaluation)", 0.876, 0.732});
    return {table_manifest("", submission, {"", 0.865, 0.742}),
            table_manifest("Post-evaluation", post, {"", 0.869, 0.751})};
  }
  const std::vector<Row> submission{{"Araelectra-base-generator", 0.893, 0.882},
                                    {"AraBERTv0.2-Twitter-base", 0.907, 0.900},
                                    {"AraBERTv1-base", 0.882, 0.882},
                                    {"AraBERTv2-base", 0.897, 0.894}};
  auto post = submission;
  post.insert(post.begin() + 2, Row{"MARBERTv2 (Post-evaluation)", 0.909, 0.903});
  return {table_manifest("", submission, {"", 0.909, 0.901}),
          table_manifest("Post-evaluation", post, {"", 0.914, 0.905})};
}

}  // namespace arvote::testing
