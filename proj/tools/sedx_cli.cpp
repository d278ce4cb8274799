// sedx: command-line front end for the seasonal encoder-decoder pipeline.
//
//   sedx analyze  --config c.json --corpus data.csv --out acf.csv
//   sedx synth    --config c.json --out corpus.csv
//   sedx train    --config c.json --corpus data.csv --series ID --out model.json --report loss.csv
//   sedx train    --config c.json --corpus data.csv --grouped --out registry.json
//   sedx predict  --model model.json --corpus data.csv --anchor T --out forecast.csv
//   sedx evaluate --config c.json --corpus data.csv (--model F | --registry F | --method M) --out results.csv
//   sedx evaluate --config c.json --candidate a.csv --baseline b.csv --summary cmp.txt
//   sedx group    --config c.json --corpus data.csv --out registry.json
//
// Tables are CSV with a header, summaries are key=value lines, progress goes
// to stderr. Exit status is 2 for usage or validation errors and 1 for any
// other failure.

#include "sedx/io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace sedx;
using io::format_double;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

void log(const std::string& msg) { std::cerr << "[sedx] " << msg << '\n'; }

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

std::string num(double v) { return std::isfinite(v) ? format_double(v) : (std::isnan(v) ? "nan" : "inf"); }

// Options shared by every subcommand.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;

  io::RunConfig load() const {
    auto c = io::load_config(config);
    if (seed) c.train.seed = *seed;
    return c;
  }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "override train.seed (also seeds synthesis)");
}

const TimeSeries& find_series(const std::vector<TimeSeries>& corpus, const std::string& id) {
  for (const auto& s : corpus)
    if (s.id == id) return s;
  throw UsageError("series '" + id + "' is not in the corpus");
}

std::vector<TimeSeries> load_ranked(const std::string& path, double top_fraction) {
  auto corpus = io::load_corpus(path);
  for (const auto& s : corpus) log("loaded " + s.id + " (" + std::to_string(s.length()) + " points)");
  if (top_fraction < 1) {
    corpus = io::rank_by_total_variation(corpus, top_fraction);
    log("kept " + std::to_string(corpus.size()) + " series by total variation");
  }
  return corpus;
}

void write_summary(std::ostream& out, const std::string& prefix, const MetricSummary& s) {
  out << prefix << "sequences=" << s.sequences.size() << '\n';
  out << prefix << "windows=" << s.windows << '\n';
  out << prefix << "mase_max=" << num(s.mase.max) << '\n';
  out << prefix << "mase_avg=" << num(s.mase.avg) << '\n';
  out << prefix << "mase_min=" << num(s.mase.min) << '\n';
  out << prefix << "mape_valid_windows=" << s.windows_with_mape << '\n';
  if (s.mape) {
    out << prefix << "mape_max=" << num(s.mape->max) << '\n';
    out << prefix << "mape_avg=" << num(s.mape->avg) << '\n';
    out << prefix << "mape_min=" << num(s.mape->min) << '\n';
  }
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  Common common;
  std::string corpus, out;
  int max_lag = 0;
  double top_fraction = 1;
};

void run_analyze(const AnalyzeArgs& a) {
  const auto c = a.common.load();
  const int max_lag = a.max_lag > 0 ? a.max_lag : 2 * c.spec.period;
  const auto corpus = load_ranked(a.corpus, a.top_fraction);
  auto out = open_out(a.out);
  out << "series_id,length,total_variation,lag,acf,pacf\n";
  for (const auto& s : corpus) {
    const double tv = total_variation(s.y);
    const int lags = std::min(max_lag, s.length() - 1);
    const auto r = acf(s.y, lags);
    const auto phi = pacf(s.y, lags);
    for (int k = 0; k <= lags; ++k)
      out << s.id << ',' << s.length() << ',' << num(tv) << ',' << k << ',' << num(r[k]) << ',' << num(phi[k]) << '\n';
    log(s.id + ": total variation " + num(tv) + ", acf at period " +
        (c.spec.period <= lags ? num(r[c.spec.period]) : std::string("n/a")));
  }
}

struct SynthArgs {
  Common common;
  std::string out;
};

void run_synth(const SynthArgs& a) {
  const auto c = a.common.load();
  const auto corpus = io::synthesize_corpus(c.synth, c.spec, c.train.seed);
  io::save_corpus(a.out, corpus);
  log("wrote " + std::to_string(corpus.size()) + " series to " + a.out);
}

struct GroupArgs {
  Common common;
  std::string corpus, out;
  double top_fraction = 1;
};

void run_group(const GroupArgs& a) {
  const auto c = a.common.load();
  if (c.kind == io::ModelKind::Sarx) throw UsageError("grouping needs a network model kind (sedx or bedx)");
  const auto corpus = load_ranked(a.corpus, a.top_fraction);
  const SeasonalSpec spec = io::spec_for(c);
  const GroupingRun run{spec, c.model, c.train, c.eval, c.grouping};
  const auto t0 = std::chrono::steady_clock::now();
  const auto registry = build_background_models(corpus, run);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& e : registry.entries) {
    std::string ids;
    for (const auto& id : e.covered_ids) ids += " " + id;
    log(std::string(e.kind == EntryKind::Background ? "background" : "fallback") + " round " +
        std::to_string(e.round) + ":" + ids);
  }
  log(std::to_string(registry.background_count()) + " background models in " + num(secs) + " s");
  io::write_json(a.out, io::to_json(registry, c));
}

struct TrainArgs {
  Common common;
  std::string corpus, series, out, report;
  bool grouped = false;
  double top_fraction = 1;
};

void run_train(const TrainArgs& a) {
  if (a.grouped) {
    run_group({a.common, a.corpus, a.out, a.top_fraction});
    return;
  }
  const auto c = a.common.load();
  const auto corpus = io::load_corpus(a.corpus);
  if (a.series.empty() && corpus.size() != 1) throw UsageError("--series is required for a multi-series corpus");
  const auto& raw = a.series.empty() ? corpus.front() : find_series(corpus, a.series);
  const auto run = io::train_single(c, raw);
  io::write_json(a.out, io::to_json(run.file));
  const auto& r = run.report;
  if (!r.train_loss.empty()) {
    log(raw.id + ": " + std::to_string(r.train_loss.size()) + " epochs in " + num(r.seconds) + " s, best epoch " +
        std::to_string(r.best_epoch));
  } else {
    log(raw.id + ": SARX fitted");
  }
  if (!a.report.empty()) {
    auto out = open_out(a.report);
    out << "epoch,train_loss,val_mase,val_mape\n";
    for (std::size_t e = 0; e < r.train_loss.size(); ++e)
      out << e << ',' << num(r.train_loss[e]) << ',' << (e < r.val_mase.size() ? num(r.val_mase[e]) : "") << ','
          << (e < r.val_mape.size() ? num(r.val_mape[e]) : "") << '\n';
  }
}

struct PredictArgs {
  std::string model, corpus, series, out;
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::vector<int> anchors;
};

void run_predict(const PredictArgs& a) {
  const auto file = io::model_file_from_json(io::read_json(a.model));
  if (a.config) io::load_config(*a.config);  // validated; the model file carries its own configuration
  const auto corpus = io::load_corpus(a.corpus);
  const auto& raw = find_series(corpus, a.series.empty() ? file.series_id : a.series);
  auto out = open_out(a.out);
  out << "series_id,window_anchor,step,forecast\n";
  for (int t : a.anchors) {
    const VectorXr f = io::predict_with(file, raw, t);
    for (Eigen::Index k = 0; k < f.size(); ++k)
      out << raw.id << ',' << t << ',' << k << ',' << format_double(f[k]) << '\n';
  }
  log("forecast " + std::to_string(a.anchors.size()) + " anchors of " + raw.id);
}

struct EvaluateArgs {
  Common common;
  std::string corpus, out, summary;
  std::string model, registry, method;
  std::string candidate, baseline;
  double top_fraction = 1;
};

void run_compare(const EvaluateArgs& a) {
  const auto cand = io::load_results(a.candidate);
  const auto base = io::load_results(a.baseline);
  std::ostringstream s;
  write_summary(s, "candidate_", summarize(cand));
  write_summary(s, "baseline_", summarize(base));
  for (Metric m : {Metric::Mase, Metric::Mape}) {
    const std::string name = m == Metric::Mase ? "mase" : "mape";
    Comparison cmp;
    try {
      cmp = compare(cand, base, m);
    } catch (const UndefinedMetricError& e) {
      s << name << "_comparison=undefined\n";
      continue;
    }
    s << name << "_sequences=" << cmp.sequences << '\n';
    s << name << "_candidate_better=" << cmp.candidate_better << '\n';
    s << name << "_candidate_better_pct=" << num(cmp.candidate_better_pct) << '\n';
    s << name << "_candidate_mean_when_better=" << num(cmp.candidate_mean_when_better) << '\n';
    s << name << "_baseline_mean_when_better=" << num(cmp.baseline_mean_when_better) << '\n';
    s << name << "_candidate_mean_when_worse=" << num(cmp.candidate_mean_when_worse) << '\n';
    s << name << "_baseline_mean_when_worse=" << num(cmp.baseline_mean_when_worse) << '\n';
    if (cmp.welch) {
      s << name << "_welch_t=" << num(cmp.welch->t) << '\n';
      s << name << "_welch_dof=" << num(cmp.welch->dof) << '\n';
      s << name << "_welch_p=" << num(cmp.welch->p_two_sided) << '\n';
    }
  }
  if (!a.summary.empty()) open_out(a.summary) << s.str();
  std::cout << s.str();
}

void run_evaluate(const EvaluateArgs& a) {
  const auto c = a.common.load();
  if (!a.candidate.empty() || !a.baseline.empty()) {
    if (a.candidate.empty() || a.baseline.empty()) throw UsageError("--candidate and --baseline go together");
    run_compare(a);
    return;
  }
  const int sources = !a.model.empty() + !a.registry.empty() + !a.method.empty();
  if (sources != 1) throw UsageError("evaluate needs exactly one of --model, --registry, --method");
  if (a.corpus.empty() || a.out.empty()) throw UsageError("evaluate needs --corpus and --out");
  const auto corpus = load_ranked(a.corpus, a.top_fraction);

  std::optional<io::ModelFile> file;
  std::optional<ModelRegistry> registry;
  SeasonalSpec spec = io::spec_for(c);
  if (!a.model.empty()) {
    file = io::model_file_from_json(io::read_json(a.model));
    spec = io::spec_for(file->config);
  }
  if (!a.registry.empty()) {
    registry = io::registry_from_json(io::read_json(a.registry));
    spec = registry->spec;
  }

  std::vector<WindowScore> rows;
  for (const auto& raw : corpus) {
    if (file && raw.id != file->series_id) continue;
    const auto s = prepare_series(raw, spec, c.eval);
    Forecaster f;
    std::optional<SarxCoeffs> sarx;
    if (file) {
      f = [&](int t) { return io::predict_with(*file, raw, t); };
    } else if (registry) {
      f = [&](int t) { return registry_forecast(*registry, s, t); };
    } else if (a.method == "copy_previous") {
      f = copy_previous_forecaster(s, spec.horizon);
    } else if (a.method == "sarx") {
      sarx = fit_sarx_prepared(s, spec);
      f = sarx_forecaster(*sarx, s, spec.horizon);
    } else {
      throw UsageError("unknown --method '" + a.method + "' (copy_previous or sarx)");
    }
    auto scored = score_test(s, spec.horizon, c.eval, f);
    rows.insert(rows.end(), scored.begin(), scored.end());
  }
  if (rows.empty()) throw UsageError("no series of the corpus matched the model");
  io::save_results(a.out, rows);

  const auto summary = summarize(rows);
  std::ostringstream s;
  write_summary(s, "", summary);
  if (!a.summary.empty()) open_out(a.summary) << s.str();
  std::cout << s.str();
  log("mape defined on " + std::to_string(summary.windows_with_mape) + " of " + std::to_string(summary.windows) +
      " windows");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seasonal encoder-decoder forecasting"};
  app.require_subcommand(1);

  AnalyzeArgs analyze;
  auto* an = app.add_subcommand("analyze", "ACF, PACF and total variation per series");
  add_common(an, analyze.common);
  an->add_option("--corpus", analyze.corpus)->required()->check(CLI::ExistingFile);
  an->add_option("--out", analyze.out)->required();
  an->add_option("--max-lag", analyze.max_lag, "default: two periods");
  an->add_option("--top-fraction", analyze.top_fraction)->check(CLI::Range(0.0, 1.0));

  SynthArgs synth;
  auto* sy = app.add_subcommand("synth", "emit a corpus from the synth block");
  add_common(sy, synth.common);
  sy->add_option("--out", synth.out)->required();

  TrainArgs tr;
  auto* tn = app.add_subcommand("train", "train one series, or the whole corpus with --grouped");
  add_common(tn, tr.common);
  tn->add_option("--corpus", tr.corpus)->required()->check(CLI::ExistingFile);
  tn->add_option("--series", tr.series);
  tn->add_option("--out", tr.out)->required();
  tn->add_option("--report", tr.report, "per-epoch loss table");
  tn->add_flag("--grouped", tr.grouped);
  tn->add_option("--top-fraction", tr.top_fraction)->check(CLI::Range(0.0, 1.0));

  PredictArgs pr;
  auto* pd = app.add_subcommand("predict", "forecast from a saved model");
  pd->add_option("--model", pr.model)->required()->check(CLI::ExistingFile);
  pd->add_option("--config", pr.config)->check(CLI::ExistingFile);
  pd->add_option("--seed", pr.seed, "accepted for uniformity; prediction is deterministic");
  pd->add_option("--corpus", pr.corpus)->required()->check(CLI::ExistingFile);
  pd->add_option("--series", pr.series, "default: the series the model was trained on");
  pd->add_option("--anchor", pr.anchors)->required();
  pd->add_option("--out", pr.out)->required();

  EvaluateArgs ev;
  auto* el = app.add_subcommand("evaluate", "score test windows or compare two result tables");
  add_common(el, ev.common);
  el->add_option("--corpus", ev.corpus)->check(CLI::ExistingFile);
  el->add_option("--out", ev.out, "window-level results");
  el->add_option("--summary", ev.summary, "key=value summary");
  el->add_option("--model", ev.model)->check(CLI::ExistingFile);
  el->add_option("--registry", ev.registry)->check(CLI::ExistingFile);
  el->add_option("--method", ev.method, "copy_previous or sarx");
  el->add_option("--candidate", ev.candidate)->check(CLI::ExistingFile);
  el->add_option("--baseline", ev.baseline)->check(CLI::ExistingFile);
  el->add_option("--top-fraction", ev.top_fraction)->check(CLI::Range(0.0, 1.0));

  GroupArgs gr;
  auto* gp = app.add_subcommand("group", "build background models and fallbacks");
  add_common(gp, gr.common);
  gp->add_option("--corpus", gr.corpus)->required()->check(CLI::ExistingFile);
  gp->add_option("--out", gr.out)->required();
  gp->add_option("--top-fraction", gr.top_fraction)->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*an) run_analyze(analyze);
    if (*sy) run_synth(synth);
    if (*tn) run_train(tr);
    if (*pd) run_predict(pr);
    if (*el) run_evaluate(ev);
    if (*gp) run_group(gr);
  } catch (const std::invalid_argument& e) {  // ConfigError, UsageError, window range errors
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const io::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
