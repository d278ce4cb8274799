#include "sedx/grouping.hpp"

#include <cmath>
#include <limits>

namespace sedx {

void GroupingConfig::validate() const {
  if (!(error_threshold >= 0)) throw ConfigError("grouping: error_threshold must be >= 0");
  if (max_rounds < 1) throw ConfigError("grouping: max_rounds must be >= 1");
}

const RegistryEntry& ModelRegistry::entry_for(const std::string& id) const {
  for (const auto& e : entries)
    for (const auto& c : e.covered_ids)
      if (c == id) return e;
  throw ConfigError("registry: no model covers series '" + id + "'");
}

bool ModelRegistry::is_partition_of(const std::vector<std::string>& ids) const {
  std::map<std::string, int> seen;
  for (const auto& e : entries)
    for (const auto& c : e.covered_ids) ++seen[c];
  if (seen.size() != ids.size()) return false;
  for (const auto& id : ids) {
    auto it = seen.find(id);
    if (it == seen.end() || it->second != 1) return false;
  }
  return true;
}

int ModelRegistry::background_count() const {
  int n = 0;
  for (const auto& e : entries) n += e.kind == EntryKind::Background ? 1 : 0;
  return n;
}

namespace {

// Mean validation error of one sequence in the original domain; +inf when undefined.
double validation_error(const SedxModel& model, const PreparedSeries& s, Metric metric) {
  const auto [m, p] = validation_scores(model, s.validation);
  const double v = metric == Metric::Mase ? m : p;
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

RegistryEntry fallback_entry(const PreparedSeries& s, const GroupingRun& run, int round) {
  RegistryEntry e;
  e.covered_ids = {s.raw.id};
  e.round = round;
  e.kind = EntryKind::Fallback;
  e.model = CopyPreviousModel{};
  if (run.grouping.fallback == FallbackKind::Sarx) {
    try {
      e.model = fit_sarx_prepared(s, run.spec);
    } catch (const RankDeficiencyError&) {
    } catch (const ConfigError&) {
    }
  }
  return e;
}

}  // namespace

void model_recursive(const std::vector<PreparedSeries>& prepared, std::vector<std::size_t> group,
                     const GroupingRun& run, int round, ModelRegistry& registry) {
  // Tail recursion unrolled: each pass either covers a non-empty subset or falls back.
  while (!group.empty()) {
    if (round >= run.grouping.max_rounds) break;

    std::vector<WindowExample> windows;
    for (auto i : group)
      windows.insert(windows.end(), prepared[i].train_windows.begin(), prepared[i].train_windows.end());

    TrainConfig tc = run.train;
    tc.seed = run.train.seed + static_cast<std::uint64_t>(round);
    const auto init = SedxModel::random(run.spec, prepared[group.front()].raw.exo_dim(), run.model, tc.seed);

    std::vector<ValidationWindow> val;
    for (auto i : group) val.insert(val.end(), prepared[i].validation.begin(), prepared[i].validation.end());
    auto trained = train(init, windows, val, tc);

    RegistryEntry entry;
    entry.round = round;
    entry.kind = EntryKind::Background;
    std::vector<std::size_t> rest;
    for (auto i : group) {
      const double err = validation_error(trained.best, prepared[i], run.eval.metric);
      if (err <= run.grouping.error_threshold) {
        entry.covered_ids.push_back(prepared[i].raw.id);
        entry.validation_error[prepared[i].raw.id] = err;
      } else {
        rest.push_back(i);
      }
    }
    if (entry.covered_ids.empty()) break;
    entry.model = std::move(trained.best);
    registry.entries.push_back(std::move(entry));
    group = std::move(rest);
    ++round;
  }
  for (auto i : group) registry.entries.push_back(fallback_entry(prepared[i], run, round));
}

ModelRegistry build_background_models(const std::vector<TimeSeries>& corpus, const GroupingRun& run) {
  run.grouping.validate();
  run.train.validate();
  if (corpus.empty()) throw ConfigError("grouping: empty corpus");

  std::vector<PreparedSeries> prepared;
  std::vector<std::string> bad;
  std::string reasons;
  for (const auto& ts : corpus) {
    try {
      auto s = prepare_series(ts, run.spec, run.eval);
      if (s.train_windows.empty() || s.validation.empty())
        throw ConfigError("no training or validation window");
      if (!prepared.empty() && s.raw.exo_dim() != prepared.front().raw.exo_dim())
        throw ConfigError("exogenous dimension differs from the rest of the corpus");
      prepared.push_back(std::move(s));
    } catch (const std::exception& e) {
      bad.push_back(ts.id);
      reasons += "\n  " + ts.id + ": " + e.what();
    }
  }
  if (!bad.empty()) throw UnusableSequencesError("grouping: unusable sequences:" + reasons, bad);

  ModelRegistry registry;
  registry.spec = run.spec;
  for (const auto& s : prepared) registry.scales[s.raw.id] = s.scale;
  std::vector<std::size_t> all(prepared.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  model_recursive(prepared, std::move(all), run, 0, registry);
  return registry;
}

VectorXr registry_forecast(const ModelRegistry& registry, const PreparedSeries& s, int anchor) {
  const auto& entry = registry.entry_for(s.raw.id);
  return std::visit(
      [&](const auto& m) -> VectorXr {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, SedxModel>)
          return network_forecaster(m, s)(anchor);
        else if constexpr (std::is_same_v<M, SarxCoeffs>)
          return sarx_forecaster(m, s, registry.spec.horizon)(anchor);
        else
          return copy_previous_forecaster(s, registry.spec.horizon)(anchor);
      },
      entry.model);
}

}  // namespace sedx
