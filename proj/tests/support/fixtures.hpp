#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "arvote/corpus.hpp"
#include "arvote/expctl/manifest.hpp"
#include "arvote/prediction.hpp"
#include "arvote/rng.hpp"

namespace arvote::testing {

/// Temporary directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "arvote");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

void write_file(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

/// Linearly separable corpus: positive texts use only the letters
/// U+0627..U+063A, negative texts only U+0641..U+064A. Shared-task noise
/// markers are sprinkled in so cleaning is exercised. Labels are balanced in
/// expectation; ids are "<prefix><index>".
Dataset make_separable_corpus(std::size_t n, std::uint64_t seed, Task task, Split split,
                              const std::string& id_prefix);

/// TSV text for a dataset with header id, text, label, type.
std::string to_tsv(const Dataset& d, bool with_labels = true);

/// Random string mixing noise markers, ASCII, Arabic letters, punctuation
/// and assorted whitespace.
std::string random_noisy_string(CounterRng& rng);

/// Two-label prediction set with random labels and confidences >= 0.5.
PredictionSet random_predictions(const std::string& name, const std::vector<std::string>& ids,
                                 const LabelSpace& space, CounterRng& rng);

/// Writes train/dev/test TSVs of the separable corpus plus a 2-member toy
/// experiment config under `dir`; returns the config path.
std::string write_toy_experiment(const std::filesystem::path& dir, std::uint64_t seed = 7,
                                 std::size_t n_train = 200, std::size_t n_dev = 100);

/// Manifests carrying the published results tables: the submission run and
/// the post-evaluation run (run label "Post-evaluation") for one task, with
/// both dev and test metrics filled in.
std::vector<RunManifest> results_table_manifests(Task task);

}  // namespace arvote::testing
