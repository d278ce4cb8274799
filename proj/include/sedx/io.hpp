// Corpus CSV, run configuration, persisted models/registries and result tables.
#pragma once

#include "sedx/grouping.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sedx::io {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int row = -1) : std::runtime_error(what), row_(row) {}
  /// 1-based line number in the file, or -1.
  int row() const { return row_; }

 private:
  int row_;
};

// ---------------------------------------------------------------------------
// Corpus: header `series_id,t,y,x1,...,xm`, rows grouped by series with
// contiguous integer t.

std::vector<TimeSeries> read_corpus(std::istream& in);
std::vector<TimeSeries> load_corpus(const std::string& path);
void write_corpus(std::ostream& out, const std::vector<TimeSeries>& corpus);
void save_corpus(const std::string& path, const std::vector<TimeSeries>& corpus);

/// Series sorted by descending total variation (ties by id), keeping the
/// first round(top_fraction * n).
std::vector<TimeSeries> rank_by_total_variation(const std::vector<TimeSeries>& corpus, double top_fraction);

// ---------------------------------------------------------------------------
// Configuration

enum class ModelKind { Sedx, Bedx, Sarx };

struct SynthProcess {
  std::vector<double> ar;           // standard-lag polynomial coefficients
  std::vector<double> seasonal;     // seasonal polynomial coefficients
  std::vector<double> exo_coef;     // weight on x(t), one per exogenous channel
  double intercept = 0;
  double sigma = 0;
  int series = 1;
};

struct SynthConfig {
  int length = 500;
  ExoProcess exo;
  std::vector<SynthProcess> processes;
  double scale_min = 1;   // each series is multiplied by a factor drawn from [scale_min, scale_max]
  double scale_max = 1;
  double offset = 0;      // and shifted by this amount
};

struct RunConfig {
  static constexpr int kVersion = 1;
  SeasonalSpec spec;
  ModelKind kind = ModelKind::Sedx;
  ModelConfig model;
  std::uint64_t init_seed = 0;
  TrainConfig train;
  EvalConfig eval;
  GroupingConfig grouping;
  SynthConfig synth;

  void validate() const;
};

RunConfig parse_config(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& c);
RunConfig load_config(const std::string& path);

/// Spec used to build and window a model of `kind`.
SeasonalSpec spec_for(const RunConfig& c);

/// Corpus generated from the synth block.
std::vector<TimeSeries> synthesize_corpus(const SynthConfig& s, const SeasonalSpec& spec, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Persistence

nlohmann::json model_to_json(const SedxModel& m);
SedxModel model_from_json(const nlohmann::json& j);
nlohmann::json sarx_to_json(const SarxCoeffs& c);
SarxCoeffs sarx_from_json(const nlohmann::json& j);
nlohmann::json scale_to_json(const ScaleParams& s);
ScaleParams scale_from_json(const nlohmann::json& j);

/// A trained single-sequence model.
struct ModelFile {
  static constexpr int kVersion = 1;
  RunConfig config;
  std::string series_id;
  RegistryModel model;  // network or SARX
  ScaleParams scale;
  int epochs_completed = 0;
  int best_epoch = -1;
};

nlohmann::json to_json(const ModelFile& f);
ModelFile model_file_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ModelRegistry& r, const RunConfig& c);
ModelRegistry registry_from_json(const nlohmann::json& j);

/// Trains (or, for the sarx kind, fits) a model on one series using `c`.
struct SingleRun {
  ModelFile file;
  TrainReport report;  // empty for sarx
  PreparedSeries prepared;
};
SingleRun train_single(const RunConfig& c, const TimeSeries& raw);

/// Original-domain forecast of a persisted model from anchor t of `raw`.
VectorXr predict_with(const ModelFile& f, const TimeSeries& raw, int t);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

// ---------------------------------------------------------------------------
// Result tables: `series_id,window_anchor,mase,mape` (empty mape = undefined)

void write_results(std::ostream& out, const std::vector<WindowScore>& rows);
std::vector<WindowScore> read_results(std::istream& in);
std::vector<WindowScore> load_results(const std::string& path);
void save_results(const std::string& path, const std::vector<WindowScore>& rows);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

}  // namespace sedx::io
