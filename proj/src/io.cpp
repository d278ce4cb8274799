#include "sedx/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

namespace sedx::io {

using nlohmann::json;

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_double(const std::string& cell, int row, const std::string& column) {
  const std::string s = trim(cell);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ParseError("row " + std::to_string(row) + ": column '" + column + "' is not a finite number: '" + cell + "'",
                     row);
  return v;
}

long parse_int(const std::string& cell, int row, const std::string& column) {
  const std::string s = trim(cell);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError("row " + std::to_string(row) + ": column '" + column + "' is not an integer: '" + cell + "'", row);
  return v;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Corpus

std::vector<TimeSeries> read_corpus(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("corpus: empty file", 1);
  auto header = split_csv(line);
  for (auto& h : header) h = trim(h);
  if (header.size() < 3 || header[0] != "series_id" || header[1] != "t" || header[2] != "y")
    throw ParseError("corpus: header must start with series_id,t,y", 1);
  const int m = static_cast<int>(header.size()) - 3;
  for (int j = 0; j < m; ++j)
    if (header[3 + j] != "x" + std::to_string(j + 1))
      throw ParseError("corpus: exogenous columns must be named x1..xm, got '" + header[3 + j] + "'", 1);

  std::vector<TimeSeries> corpus;
  std::vector<std::vector<double>> xs;
  long expected_t = 0;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (static_cast<int>(cells.size()) != m + 3)
      throw ParseError("row " + std::to_string(row) + ": expected " + std::to_string(m + 3) + " cells, found " +
                           std::to_string(cells.size()),
                       row);
    const std::string id = trim(cells[0]);
    if (id.empty()) throw ParseError("row " + std::to_string(row) + ": empty series_id", row);
    const long t = parse_int(cells[1], row, "t");
    if (corpus.empty() || corpus.back().id != id) {
      for (const auto& s : corpus)
        if (s.id == id)
          throw ParseError("row " + std::to_string(row) + ": rows of series '" + id + "' are not contiguous", row);
      corpus.emplace_back();
      corpus.back().id = id;
      xs.emplace_back();
      expected_t = t;
    }
    if (t != expected_t)
      throw ParseError("row " + std::to_string(row) + ": series '" + id + "' expected t=" +
                           std::to_string(expected_t) + ", found t=" + std::to_string(t),
                       row);
    ++expected_t;
    corpus.back().y.push_back(parse_double(cells[2], row, "y"));
    for (int j = 0; j < m; ++j) xs.back().push_back(parse_double(cells[3 + j], row, header[3 + j]));
  }
  if (corpus.empty()) throw ParseError("corpus: no data rows");
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto n = static_cast<Eigen::Index>(corpus[i].y.size());
    corpus[i].x = m > 0 ? MatrixXr(Eigen::Map<const MatrixXr>(xs[i].data(), n, m)) : MatrixXr::Zero(n, 0);
    corpus[i].validate();
  }
  return corpus;
}

std::vector<TimeSeries> load_corpus(const std::string& path) {
  auto in = open_in(path);
  return read_corpus(in);
}

void write_corpus(std::ostream& out, const std::vector<TimeSeries>& corpus) {
  const int m = corpus.empty() ? 0 : corpus.front().exo_dim();
  out << "series_id,t,y";
  for (int j = 0; j < m; ++j) out << ",x" << j + 1;
  out << '\n';
  for (const auto& s : corpus) {
    if (s.exo_dim() != m) throw ConfigError("write_corpus: ragged exogenous width");
    for (int t = 0; t < s.length(); ++t) {
      out << s.id << ',' << t << ',' << format_double(s.y[t]);
      for (int j = 0; j < m; ++j) out << ',' << format_double(s.x(t, j));
      out << '\n';
    }
  }
}

void save_corpus(const std::string& path, const std::vector<TimeSeries>& corpus) {
  auto out = open_out(path);
  write_corpus(out, corpus);
}

std::vector<TimeSeries> rank_by_total_variation(const std::vector<TimeSeries>& corpus, double top_fraction) {
  if (top_fraction < 0 || top_fraction > 1) throw ConfigError("top_fraction must lie in [0,1]");
  std::vector<std::pair<double, const TimeSeries*>> ranked;
  for (const auto& s : corpus) ranked.emplace_back(total_variation(s.y), &s);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second->id < b.second->id;
  });
  const auto keep = static_cast<std::size_t>(std::llround(top_fraction * static_cast<double>(corpus.size())));
  std::vector<TimeSeries> out;
  for (std::size_t i = 0; i < keep; ++i) out.push_back(*ranked[i].second);
  return out;
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

ModelKind parse_kind(const std::string& s) {
  if (s == "sedx") return ModelKind::Sedx;
  if (s == "bedx") return ModelKind::Bedx;
  if (s == "sarx") return ModelKind::Sarx;
  throw ConfigError("config: unknown model kind '" + s + "' (expected sedx, bedx or sarx)");
}

std::string kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::Sedx: return "sedx";
    case ModelKind::Bedx: return "bedx";
    case ModelKind::Sarx: return "sarx";
  }
  return "sedx";
}

json spec_json(const SeasonalSpec& s) {
  return {{"ar_order", s.ar_order}, {"period", s.period}, {"seasonal_order", s.seasonal_order},
          {"group_sizes", s.group_sizes}, {"horizon", s.horizon}};
}

SeasonalSpec parse_spec(const json& j) {
  SeasonalSpec s;
  s.ar_order = j.at("ar_order").get<int>();
  s.period = j.at("period").get<int>();
  s.seasonal_order = j.at("seasonal_order").get<int>();
  s.group_sizes = j.at("group_sizes").get<std::vector<int>>();
  s.horizon = j.at("horizon").get<int>();
  return s;
}

json exo_json(const ExoProcess& e) {
  return {{"dim", e.dim}, {"ar_coef", e.ar_coef}, {"noise_sd", e.noise_sd}, {"amplitude", e.amplitude},
          {"period", e.period}};
}

ExoProcess parse_exo(const json& j) {
  ExoProcess e;
  e.dim = get_or(j, "dim", 0);
  e.ar_coef = get_or(j, "ar_coef", 0.0);
  e.noise_sd = get_or(j, "noise_sd", 1.0);
  e.amplitude = get_or(j, "amplitude", 0.0);
  e.period = get_or(j, "period", 1);
  return e;
}

}  // namespace

void RunConfig::validate() const {
  spec.validate();
  spec_for(*this).validate();
  if (model.hidden < 1 || model.layers < 1) throw ConfigError("config: model.hidden and model.layers must be >= 1");
  train.validate();
  eval.validate();
  grouping.validate();
}

SeasonalSpec spec_for(const RunConfig& c) {
  return c.kind == ModelKind::Bedx ? c.spec.without_seasonal() : c.spec;
}

RunConfig parse_config(const json& j) {
  try {
    RunConfig c;
    const int version = get_or(j, "version", RunConfig::kVersion);
    if (version != RunConfig::kVersion)
      throw ConfigError("config: unsupported version " + std::to_string(version));
    c.spec = parse_spec(j.at("spec"));
    if (j.contains("model")) {
      const auto& m = j.at("model");
      c.kind = parse_kind(get_or<std::string>(m, "kind", "sedx"));
      c.model.hidden = get_or(m, "hidden", c.model.hidden);
      c.model.layers = get_or(m, "layers", c.model.layers);
      c.model.feed_context = get_or(m, "feed_context", c.model.feed_context);
      c.model.include_encoder0_context = get_or(m, "include_encoder0_context", c.model.include_encoder0_context);
      c.init_seed = get_or<std::uint64_t>(m, "init_seed", 0);
    }
    if (j.contains("train")) {
      const auto& t = j.at("train");
      c.train.batch_size = get_or(t, "batch_size", c.train.batch_size);
      c.train.learning_rate = get_or(t, "learning_rate", c.train.learning_rate);
      c.train.epochs = get_or(t, "epochs", c.train.epochs);
      c.train.seed = get_or<std::uint64_t>(t, "seed", c.train.seed);
      c.train.shuffle = get_or(t, "shuffle", c.train.shuffle);
      c.train.deterministic = get_or(t, "deterministic", c.train.deterministic);
      c.train.workers = get_or(t, "workers", c.train.workers);
    }
    if (j.contains("eval")) {
      const auto& e = j.at("eval");
      c.eval.test_len = get_or(e, "test_len", c.eval.test_len);
      c.eval.val_len = get_or(e, "val_len", c.eval.val_len);
      c.eval.mase_lag = get_or(e, "mase_lag", c.eval.mase_lag);
      c.eval.per_step_lag = get_or(e, "per_step_lag", c.eval.per_step_lag);
      c.eval.stride = get_or(e, "stride", c.eval.stride);
      const auto metric = get_or<std::string>(e, "metric", "mase");
      if (metric != "mase" && metric != "mape") throw ConfigError("config: eval.metric must be mase or mape");
      c.eval.metric = metric == "mase" ? Metric::Mase : Metric::Mape;
    }
    if (j.contains("grouping")) {
      const auto& g = j.at("grouping");
      c.grouping.error_threshold = get_or(g, "error_threshold", c.grouping.error_threshold);
      c.grouping.max_rounds = get_or(g, "max_rounds", c.grouping.max_rounds);
      const auto fb = get_or<std::string>(g, "fallback", "sarx");
      if (fb != "sarx" && fb != "copy_previous") throw ConfigError("config: grouping.fallback must be sarx or copy_previous");
      c.grouping.fallback = fb == "sarx" ? FallbackKind::Sarx : FallbackKind::CopyPrevious;
    }
    if (j.contains("synth")) {
      const auto& s = j.at("synth");
      c.synth.length = get_or(s, "length", c.synth.length);
      if (s.contains("exo")) c.synth.exo = parse_exo(s.at("exo"));
      c.synth.scale_min = get_or(s, "scale_min", c.synth.scale_min);
      c.synth.scale_max = get_or(s, "scale_max", c.synth.scale_max);
      c.synth.offset = get_or(s, "offset", c.synth.offset);
      for (const auto& p : s.value("processes", json::array())) {
        SynthProcess sp;
        sp.ar = p.at("ar").get<std::vector<double>>();
        sp.seasonal = get_or(p, "seasonal", std::vector<double>{});
        sp.exo_coef = get_or(p, "exo_coef", std::vector<double>{});
        sp.intercept = get_or(p, "intercept", 0.0);
        sp.sigma = get_or(p, "sigma", 0.0);
        sp.series = get_or(p, "series", 1);
        c.synth.processes.push_back(std::move(sp));
      }
    }
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

json to_json(const RunConfig& c) {
  json procs = json::array();
  for (const auto& p : c.synth.processes)
    procs.push_back({{"ar", p.ar}, {"seasonal", p.seasonal}, {"exo_coef", p.exo_coef}, {"intercept", p.intercept},
                     {"sigma", p.sigma}, {"series", p.series}});
  return {
      {"version", RunConfig::kVersion},
      {"spec", spec_json(c.spec)},
      {"model",
       {{"kind", kind_name(c.kind)}, {"hidden", c.model.hidden}, {"layers", c.model.layers},
        {"feed_context", c.model.feed_context}, {"include_encoder0_context", c.model.include_encoder0_context},
        {"init_seed", c.init_seed}}},
      {"train",
       {{"batch_size", c.train.batch_size}, {"learning_rate", c.train.learning_rate}, {"epochs", c.train.epochs},
        {"seed", c.train.seed}, {"shuffle", c.train.shuffle}, {"deterministic", c.train.deterministic},
        {"workers", c.train.workers}}},
      {"eval",
       {{"test_len", c.eval.test_len}, {"val_len", c.eval.val_len}, {"mase_lag", c.eval.mase_lag},
        {"per_step_lag", c.eval.per_step_lag}, {"stride", c.eval.stride},
        {"metric", c.eval.metric == Metric::Mase ? "mase" : "mape"}}},
      {"grouping",
       {{"error_threshold", c.grouping.error_threshold}, {"max_rounds", c.grouping.max_rounds},
        {"fallback", c.grouping.fallback == FallbackKind::Sarx ? "sarx" : "copy_previous"}}},
      {"synth",
       {{"length", c.synth.length}, {"exo", exo_json(c.synth.exo)}, {"scale_min", c.synth.scale_min},
        {"scale_max", c.synth.scale_max}, {"offset", c.synth.offset}, {"processes", procs}}},
  };
}

RunConfig load_config(const std::string& path) { return parse_config(read_json(path)); }

std::vector<TimeSeries> synthesize_corpus(const SynthConfig& s, const SeasonalSpec& spec, std::uint64_t seed) {
  if (s.processes.empty()) throw ConfigError("synth: no processes configured");
  if (s.scale_min <= 0 || s.scale_max < s.scale_min) throw ConfigError("synth: need 0 < scale_min <= scale_max");
  std::vector<TimeSeries> corpus;
  std::mt19937_64 scale_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> factor(s.scale_min, s.scale_max);
  for (std::size_t p = 0; p < s.processes.size(); ++p) {
    const auto& proc = s.processes[p];
    if (proc.ar.empty()) throw ConfigError("synth: each process needs at least one ar coefficient");
    if (static_cast<int>(proc.exo_coef.size()) != s.exo.dim)
      throw ConfigError("synth: exo_coef must have one entry per exogenous channel");
    SeasonalSpec gen;
    gen.ar_order = static_cast<int>(proc.ar.size());
    gen.period = spec.period;
    gen.seasonal_order = static_cast<int>(proc.seasonal.size());
    gen.group_sizes.assign(proc.seasonal.size(), gen.ar_order);
    gen.horizon = 1;
    const auto expanded = expand_multiplicative(proc.ar, proc.seasonal, gen);
    SarxCoeffs coeffs = SarxCoeffs::zeros(gen, s.exo.dim);
    coeffs.ar = expanded.ar;
    coeffs.seasonal = expanded.seasonal;
    coeffs.intercept = proc.intercept;
    for (int j = 0; j < s.exo.dim; ++j) coeffs.exo(0, j) = proc.exo_coef[j];
    for (int i = 0; i < proc.series; ++i) {
      std::ostringstream id;
      id << 'p' << p << "_s" << std::setw(3) << std::setfill('0') << i;
      const std::uint64_t series_seed = seed * 1000003ULL + p * 7919ULL + static_cast<std::uint64_t>(i);
      auto ts = synthesize_sarx(coeffs, {proc.sigma}, s.length, s.exo, series_seed, id.str());
      const double f = factor(scale_rng);
      for (auto& v : ts.y) v = f * v + s.offset;
      corpus.push_back(std::move(ts));
    }
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

json tensor_json(const MatrixXr& m) {
  return {{"shape", {m.rows(), m.cols()}}, {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

json tensor_json(const VectorXr& v) {
  return {{"shape", {v.size()}}, {"data", std::vector<double>(v.data(), v.data() + v.size())}};
}

MatrixXr matrix_from(const json& j) {
  const auto shape = j.at("shape").get<std::vector<Eigen::Index>>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (shape.size() != 2 || static_cast<Eigen::Index>(data.size()) != shape[0] * shape[1])
    throw ParseError("model file: malformed matrix tensor");
  return Eigen::Map<const MatrixXr>(data.data(), shape[0], shape[1]);
}

VectorXr vector_from(const json& j) {
  const auto shape = j.at("shape").get<std::vector<Eigen::Index>>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (shape.size() != 1 || static_cast<Eigen::Index>(data.size()) != shape[0])
    throw ParseError("model file: malformed vector tensor");
  return Eigen::Map<const VectorXr>(data.data(), shape[0]);
}

json stack_json(const GruStack<double>& s) {
  json layers = json::array();
  for (const auto& c : s.layers)
    layers.push_back({{"Wz", tensor_json(c.Wz)}, {"Wr", tensor_json(c.Wr)}, {"W", tensor_json(c.W)},
                      {"Uz", tensor_json(c.Uz)}, {"Ur", tensor_json(c.Ur)}, {"U", tensor_json(c.U)},
                      {"bz", tensor_json(c.bz)}, {"br", tensor_json(c.br)}, {"b", tensor_json(c.b)}});
  return layers;
}

GruStack<double> stack_from(const json& j) {
  GruStack<double> s;
  for (const auto& l : j) {
    GruCell<double> c;
    c.Wz = matrix_from(l.at("Wz"));
    c.Wr = matrix_from(l.at("Wr"));
    c.W = matrix_from(l.at("W"));
    c.Uz = matrix_from(l.at("Uz"));
    c.Ur = matrix_from(l.at("Ur"));
    c.U = matrix_from(l.at("U"));
    c.bz = vector_from(l.at("bz"));
    c.br = vector_from(l.at("br"));
    c.b = vector_from(l.at("b"));
    c.validate();
    s.layers.push_back(std::move(c));
  }
  return s;
}

json range_json(const ChannelRange& r) { return {r.min, r.max}; }
ChannelRange range_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json registry_model_json(const RegistryModel& m) {
  return std::visit(
      [](const auto& v) -> json {
        using M = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<M, SedxModel>)
          return {{"type", "network"}, {"params", model_to_json(v)}};
        else if constexpr (std::is_same_v<M, SarxCoeffs>)
          return {{"type", "sarx"}, {"params", sarx_to_json(v)}};
        else
          return {{"type", "copy_previous"}};
      },
      m);
}

RegistryModel registry_model_from(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "network") return model_from_json(j.at("params"));
  if (type == "sarx") return sarx_from_json(j.at("params"));
  if (type == "copy_previous") return CopyPreviousModel{};
  throw ParseError("model file: unknown model type '" + type + "'");
}

void expect_format(const json& j, const std::string& format, int version) {
  if (j.value("format", std::string{}) != format) throw ParseError("expected a '" + format + "' file");
  if (j.value("version", -1) != version)
    throw ParseError(format + ": unsupported version " + std::to_string(j.value("version", -1)));
}

}  // namespace

json model_to_json(const SedxModel& m) {
  json encoders = json::array();
  for (const auto& e : m.encoders) encoders.push_back(stack_json(e));
  return {{"spec", spec_json(m.spec)},
          {"exo_dim", m.exo_dim},
          {"hidden", m.config.hidden},
          {"layers", m.config.layers},
          {"feed_context", m.config.feed_context},
          {"include_encoder0_context", m.config.include_encoder0_context},
          {"encoders", encoders},
          {"decoder", stack_json(m.decoder)},
          {"ctx_proj", {{"W", tensor_json(m.ctx_proj.W)}, {"b", tensor_json(m.ctx_proj.b)}}},
          {"head", {{"W", tensor_json(m.head.W)}, {"b", tensor_json(m.head.b)}}}};
}

SedxModel model_from_json(const json& j) {
  ModelConfig cfg;
  cfg.hidden = j.at("hidden").get<int>();
  cfg.layers = j.at("layers").get<int>();
  cfg.feed_context = j.at("feed_context").get<bool>();
  cfg.include_encoder0_context = j.at("include_encoder0_context").get<bool>();
  SedxModel m = SedxModel::zeros(parse_spec(j.at("spec")), j.at("exo_dim").get<int>(), cfg);
  const auto& enc = j.at("encoders");
  if (enc.size() != m.encoders.size()) throw ParseError("model file: encoder count does not match the spec");
  for (std::size_t e = 0; e < m.encoders.size(); ++e) m.encoders[e] = stack_from(enc[e]);
  m.decoder = stack_from(j.at("decoder"));
  m.ctx_proj = {matrix_from(j.at("ctx_proj").at("W")), vector_from(j.at("ctx_proj").at("b"))};
  m.head = {matrix_from(j.at("head").at("W")), vector_from(j.at("head").at("b"))};

  const SedxModel shape = SedxModel::zeros(m.spec, m.exo_dim, cfg);
  auto got = m.tensors();
  auto want = const_cast<SedxModel&>(shape).tensors();
  if (got.size() != want.size()) throw ParseError("model file: tensor layout does not match the configuration");
  for (std::size_t i = 0; i < got.size(); ++i)
    if (got[i].size() != want[i].size()) throw ParseError("model file: tensor " + std::to_string(i) + " has the wrong size");
  return m;
}

json sarx_to_json(const SarxCoeffs& c) {
  const VectorXr flat = c.flatten();
  return {{"spec", spec_json(c.spec)},
          {"exo_dim", c.exo_dim},
          {"coefficients", std::vector<double>(flat.data(), flat.data() + flat.size())},
          {"columns", c.column_names()},
          {"residual_variance", c.residual_variance}};
}

SarxCoeffs sarx_from_json(const json& j) {
  SarxCoeffs c = SarxCoeffs::zeros(parse_spec(j.at("spec")), j.at("exo_dim").get<int>());
  const auto v = j.at("coefficients").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(v.size()) != c.flatten().size())
    throw ParseError("model file: SARX coefficient count does not match the spec");
  c.unflatten(Eigen::Map<const VectorXr>(v.data(), static_cast<Eigen::Index>(v.size())));
  c.residual_variance = j.value("residual_variance", 0.0);
  return c;
}

json scale_to_json(const ScaleParams& s) {
  json x = json::array();
  for (const auto& r : s.x) x.push_back(range_json(r));
  return {{"y", range_json(s.y)}, {"x", x}};
}

ScaleParams scale_from_json(const json& j) {
  ScaleParams s;
  s.y = range_from(j.at("y"));
  for (const auto& r : j.at("x")) s.x.push_back(range_from(r));
  return s;
}

json to_json(const ModelFile& f) {
  return {{"format", "sedx-model"},
          {"version", ModelFile::kVersion},
          {"config", to_json(f.config)},
          {"series_id", f.series_id},
          {"model", registry_model_json(f.model)},
          {"scale", scale_to_json(f.scale)},
          {"fingerprint",
           {{"seed", f.config.train.seed}, {"init_seed", f.config.init_seed}, {"epochs_completed", f.epochs_completed},
            {"best_epoch", f.best_epoch}}}};
}

ModelFile model_file_from_json(const json& j) {
  expect_format(j, "sedx-model", ModelFile::kVersion);
  ModelFile f;
  f.config = parse_config(j.at("config"));
  f.series_id = j.at("series_id").get<std::string>();
  f.model = registry_model_from(j.at("model"));
  f.scale = scale_from_json(j.at("scale"));
  f.epochs_completed = j.at("fingerprint").value("epochs_completed", 0);
  f.best_epoch = j.at("fingerprint").value("best_epoch", -1);
  return f;
}

json to_json(const ModelRegistry& r, const RunConfig& c) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    json err = json::object();
    for (const auto& [id, v] : e.validation_error) err[id] = v;
    entries.push_back({{"kind", e.kind == EntryKind::Background ? "background" : "fallback"},
                       {"round", e.round},
                       {"covered_ids", e.covered_ids},
                       {"validation_error", err},
                       {"model", registry_model_json(e.model)}});
  }
  json scales = json::object();
  for (const auto& [id, s] : r.scales) scales[id] = scale_to_json(s);
  return {{"format", "sedx-registry"}, {"version", 1},       {"config", to_json(c)},
          {"spec", spec_json(r.spec)},  {"entries", entries}, {"scales", scales}};
}

ModelRegistry registry_from_json(const json& j) {
  expect_format(j, "sedx-registry", 1);
  ModelRegistry r;
  r.spec = parse_spec(j.at("spec"));
  for (const auto& e : j.at("entries")) {
    RegistryEntry entry;
    entry.kind = e.at("kind").get<std::string>() == "background" ? EntryKind::Background : EntryKind::Fallback;
    entry.round = e.at("round").get<int>();
    entry.covered_ids = e.at("covered_ids").get<std::vector<std::string>>();
    for (const auto& [id, v] : e.at("validation_error").items()) entry.validation_error[id] = v.get<double>();
    entry.model = registry_model_from(e.at("model"));
    r.entries.push_back(std::move(entry));
  }
  for (const auto& [id, s] : j.at("scales").items()) r.scales[id] = scale_from_json(s);
  return r;
}

SingleRun train_single(const RunConfig& c, const TimeSeries& raw) {
  c.validate();
  const SeasonalSpec spec = spec_for(c);
  SingleRun run;
  run.prepared = prepare_series(raw, spec, c.eval);
  run.file.config = c;
  run.file.series_id = raw.id;
  run.file.scale = run.prepared.scale;
  if (c.kind == ModelKind::Sarx) {
    run.file.model = fit_sarx_prepared(run.prepared, spec);
    return run;
  }
  if (run.prepared.train_windows.empty()) throw ConfigError("train: series '" + raw.id + "' has no training window");
  const auto init = SedxModel::random(spec, raw.exo_dim(), c.model, c.init_seed);
  auto result = train(init, run.prepared.train_windows, run.prepared.validation, c.train);
  run.file.model = std::move(result.best);
  run.file.epochs_completed = static_cast<int>(result.report.train_loss.size());
  run.file.best_epoch = result.report.best_epoch;
  run.report = std::move(result.report);
  return run;
}

VectorXr predict_with(const ModelFile& f, const TimeSeries& raw, int t) {
  const int horizon = spec_for(f.config).horizon;
  if (std::holds_alternative<CopyPreviousModel>(f.model)) return copy_previous(raw, t, horizon);
  const TimeSeries scaled = apply_scale(raw, f.scale);
  if (const auto* m = std::get_if<SedxModel>(&f.model)) return unscale(predict_multi_step(*m, scaled, t), f.scale.y);
  return unscale(predict_sarx_recursive(std::get<SarxCoeffs>(f.model), scaled, t, horizon), f.scale.y);
}

void write_json(const std::string& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(1) << '\n';
}

json read_json(const std::string& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("'" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Results

void write_results(std::ostream& out, const std::vector<WindowScore>& rows) {
  out << "series_id,window_anchor,mase,mape\n";
  for (const auto& r : rows)
    out << r.series_id << ',' << r.anchor << ',' << format_double(r.mase) << ','
        << (r.mape ? format_double(*r.mape) : std::string{}) << '\n';
}

std::vector<WindowScore> read_results(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "series_id,window_anchor,mase,mape")
    throw ParseError("results: header must be series_id,window_anchor,mase,mape", 1);
  std::vector<WindowScore> rows;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw ParseError("row " + std::to_string(row) + ": expected 4 cells", row);
    WindowScore s;
    s.series_id = trim(cells[0]);
    s.anchor = static_cast<int>(parse_int(cells[1], row, "window_anchor"));
    s.mase = parse_double(cells[2], row, "mase");
    if (!trim(cells[3]).empty()) s.mape = parse_double(cells[3], row, "mape");
    rows.push_back(std::move(s));
  }
  return rows;
}

std::vector<WindowScore> load_results(const std::string& path) {
  auto in = open_in(path);
  return read_results(in);
}

void save_results(const std::string& path, const std::vector<WindowScore>& rows) {
  auto out = open_out(path);
  write_results(out, rows);
}

}  // namespace sedx::io
