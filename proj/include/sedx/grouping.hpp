// Greedy recursive construction of background models over a corpus of
// min-max normalized sequences, with per-sequence fallbacks for whatever no
// shared model explains well enough.
#pragma once

#include "sedx/evaluation.hpp"

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace sedx {

enum class FallbackKind { Sarx, CopyPrevious };

struct GroupingConfig {
  double error_threshold = 0.3;  // a sequence is covered when its validation error is <= this
  int max_rounds = 10;
  FallbackKind fallback = FallbackKind::Sarx;

  void validate() const;
};

struct CopyPreviousModel {};

using RegistryModel = std::variant<SedxModel, SarxCoeffs, CopyPreviousModel>;

enum class EntryKind { Background, Fallback };

struct RegistryEntry {
  RegistryModel model;
  std::vector<std::string> covered_ids;
  int round = 0;
  EntryKind kind = EntryKind::Background;
  std::map<std::string, double> validation_error;  // per covered id, background entries only
};

struct ModelRegistry {
  SeasonalSpec spec;
  std::vector<RegistryEntry> entries;
  std::map<std::string, ScaleParams> scales;

  const RegistryEntry& entry_for(const std::string& id) const;
  /// Every id in exactly one entry and nothing else.
  bool is_partition_of(const std::vector<std::string>& ids) const;
  int background_count() const;
};

class UnusableSequencesError : public std::invalid_argument {
 public:
  UnusableSequencesError(const std::string& what, std::vector<std::string> ids)
      : std::invalid_argument(what), ids_(std::move(ids)) {}
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::vector<std::string> ids_;
};

struct GroupingRun {
  const SeasonalSpec& spec;
  const ModelConfig& model;
  const TrainConfig& train;
  const EvalConfig& eval;
  const GroupingConfig& grouping;
};

/// Prepares every sequence (rejecting any without a training and a
/// validation window), then runs the recursion on the whole corpus.
ModelRegistry build_background_models(const std::vector<TimeSeries>& corpus, const GroupingRun& run);

/// The recursion proper over already prepared sequences. `group` indexes into `prepared`.
void model_recursive(const std::vector<PreparedSeries>& prepared, std::vector<std::size_t> group,
                     const GroupingRun& run, int round, ModelRegistry& registry);

/// Forecast in the original domain for a prepared sequence covered by the registry.
VectorXr registry_forecast(const ModelRegistry& registry, const PreparedSeries& s, int anchor);

}  // namespace sedx
