#pragma once

#include <string>

#include "arvote/error.hpp"
#include "arvote/expctl/config.hpp"
#include "arvote/expctl/manifest.hpp"

namespace arvote {

struct RunOptions {
  /// Retrain members even when a cached checkpoint exists.
  bool force = false;
  /// Train members concurrently.
  bool parallel = true;
};

/// Thrown when a pipeline stage fails; carries the stage name and the path
/// of the partial manifest that records the failure.
class StageError : public Error {
 public:
  StageError(ErrorKind kind, std::string stage, std::string manifest_path, const std::string& what)
      : Error(kind, what), stage_(std::move(stage)), manifest_path_(std::move(manifest_path)) {}

  const std::string& stage() const { return stage_; }
  const std::string& manifest_path() const { return manifest_path_; }

 private:
  std::string stage_;
  std::string manifest_path_;
};

/// ingest -> clean -> train -> predict -> vote -> eval. Writes per-member and
/// ensemble prediction files plus the manifest under
/// <output_dir>/runs/<NNNN>/, caching member checkpoints under
/// <output_dir>/cache/<key>/.
RunManifest run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

/// Validation performed before any stage runs: member/vote consistency and
/// existence of every data file. Throws ConfigError.
void validate_experiment(const ExperimentConfig& cfg);

/// Cache key of one member: spec, train config, final-fit mode and the
/// digests of the cleaned training and dev data.
std::string member_cache_key(const MemberConfig& member, FinalFit final_fit, const std::string& train_digest,
                             const std::string& dev_digest);

}  // namespace arvote
