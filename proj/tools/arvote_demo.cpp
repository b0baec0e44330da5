// Writes a small synthetic two-task demo: separable Arabic-script splits with
// shared-task noise markers and a two-member toy experiment config.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <fmt/format.h>

#include "arvote/rng.hpp"

namespace fs = std::filesystem;

namespace {

std::string utf8(std::uint32_t cp) {
  std::string out;
  out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
  out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  return out;
}

// Positive texts draw letters from one block, negative texts from another.
void write_split(const fs::path& path, const char* prefix, std::size_t n, std::uint64_t seed, bool labels) {
  std::ofstream out(path);
  out << (labels ? "id\ttext\tlabel\ttype\n" : "id\ttext\ttype\n");
  arvote::CounterRng rng(seed, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const bool positive = rng.below(2) == 0;
    const std::uint32_t lo = positive ? 0x0627 : 0x0641;
    const std::uint32_t span = positive ? 20 : 10;
    std::string text = rng.below(3) == 0 ? "RT @USER: " : "";
    const auto words = 4 + rng.below(7);
    for (std::uint64_t w = 0; w < words; ++w) {
      if (w) text += ' ';
      const auto len = 3 + rng.below(4);
      for (std::uint64_t k = 0; k < len; ++k) text += utf8(lo + static_cast<std::uint32_t>(rng.below(span)));
    }
    if (rng.below(4) == 0) text += " LINK";
    out << fmt::format("{}{:05}\t{}\t", prefix, i, text);
    if (labels) out << (positive ? "true" : "false") << '\t';
    out << (rng.below(2) ? "tweet" : "paragraph") << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: arvote-demo DIR\n";
    return 2;
  }
  const fs::path dir(argv[1]);
  fs::create_directories(dir);
  write_split(dir / "train.tsv", "tr", 400, 1, true);
  write_split(dir / "dev.tsv", "dv", 120, 2, true);
  write_split(dir / "test.tsv", "te", 120, 3, true);
  std::ofstream(dir / "experiment.json") << R"({
  "task": "task1a",
  "data": {"train": "train.tsv", "dev": "dev.tsv", "test": "test.tsv"},
  "preprocess": {"strip_rt": "leading"},
  "members": [
    {"name": "toy-a", "backbone": "toy-ngram"},
    {"name": "toy-b", "backbone": "toy-ngram", "spec": {"toy": {"orders": [1, 2], "dim": 4096}}},
    {"name": "toy-c", "backbone": "toy-ngram", "spec": {"toy": {"orders": [3], "hash_seed": 5}}}
  ],
  "vote": {"tie_break": "anchor_model"},
  "output_dir": "out",
  "seed": 42
}
)";
  std::cout << (dir / "experiment.json").string() << '\n';
  return 0;
}
