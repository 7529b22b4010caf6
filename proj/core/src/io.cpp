#include "irmkit/io.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "irmkit/error.hpp"
#include "text.hpp"

namespace irmkit {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kDatasetFormat = "irmkit.dataset";
constexpr int kDatasetVersion = 1;

json parse(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string(what) + ": invalid JSON: " + e.what());
  }
}

void require_object(const json& j, std::string_view what) {
  if (!j.is_object()) throw ValidationError(std::string(what) + ": expected a JSON object");
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view what) {
  require_object(j, what);
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw ValidationError(std::string(what) + ": unknown key '" + key + "'");
  }
}

const json& required(const json& j, const char* key, std::string_view what) {
  if (!j.contains(key)) throw ValidationError(std::string(what) + ": missing key '" + key + "'");
  return j.at(key);
}

// Runs `fn`, turning nlohmann type errors into ValidationError.
template <typename Fn>
auto guarded(std::string_view what, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw ValidationError(std::string(what) + ": " + e.what());
  }
}

double number_or_nan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

std::uint64_t get_count(const json& j, const char* key, std::string_view what) {
  const auto& v = j.at(key);
  const bool non_negative = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
  if (!non_negative) {
    throw ValidationError(std::string(what) + ": '" + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

json config_json(const TrainConfig& c) {
  return json{{"loss", to_string(c.loss_kind)},
              {"lambda", c.lambda_final},
              {"anneal_iters", c.anneal_iters},
              {"total_iters", c.total_iters},
              {"learning_rate", c.learning_rate},
              {"l2_weight", c.l2_weight},
              {"seed", c.seed},
              {"init_scale", c.init_scale},
              {"w0", c.w0}};
}

TrainConfig config_from(const json& j) {
  constexpr std::string_view what = "train config";
  check_keys(j,
             {"loss", "lambda", "anneal_iters", "total_iters", "learning_rate", "l2_weight", "seed", "init_scale", "w0"},
             what);
  return guarded(what, [&] {
    TrainConfig c;
    if (j.contains("loss")) c.loss_kind = parse_loss_kind(j.at("loss").get<std::string>());
    if (j.contains("lambda")) c.lambda_final = j.at("lambda").get<double>();
    if (j.contains("anneal_iters")) c.anneal_iters = static_cast<std::int64_t>(get_count(j, "anneal_iters", what));
    if (j.contains("total_iters")) c.total_iters = static_cast<std::int64_t>(get_count(j, "total_iters", what));
    if (j.contains("learning_rate")) c.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("l2_weight")) c.l2_weight = j.at("l2_weight").get<double>();
    if (j.contains("seed")) c.seed = get_count(j, "seed", what);
    if (j.contains("init_scale")) c.init_scale = j.at("init_scale").get<double>();
    if (j.contains("w0")) c.w0 = j.at("w0").get<double>();
    validate(c);
    return c;
  });
}

json ranking_json(const RankedFeatureList& list) {
  json entries = json::array();
  for (const auto& e : list.entries) entries.push_back(json::array({e.gene_id, e.score}));
  return json{{"source", list.source}, {"entries", std::move(entries)}};
}

RankedFeatureList ranking_from(const json& j) {
  constexpr std::string_view what = "ranking";
  check_keys(j, {"source", "entries"}, what);
  return guarded(what, [&] {
    RankedFeatureList list;
    if (j.contains("source")) list.source = j.at("source").get<std::string>();
    for (const auto& e : required(j, "entries", what)) {
      if (!e.is_array() || e.size() != 2) throw ValidationError("ranking: each entry must be [gene_id, score]");
      list.entries.push_back({e.at(0).get<std::string>(), e.at(1).get<double>()});
    }
    validate(list);
    return list;
  });
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (std::isfinite(m(i, j))) {
        row.push_back(m(i, j));
      } else {
        row.push_back(nullptr);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from(const json& j, std::size_t side) {
  const auto n = static_cast<Eigen::Index>(side);
  Matrix m(n, n);
  if (!j.is_array() || j.size() != side) throw ValidationError("sweep report: matrix has the wrong number of rows");
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (!row.is_array() || row.size() != side) throw ValidationError("sweep report: matrix row has the wrong length");
    for (Eigen::Index k = 0; k < n; ++k) m(i, k) = number_or_nan(row.at(static_cast<std::size_t>(k)));
  }
  return m;
}

void write_values_csv(const Environment& env, const std::vector<std::string>& genes, const fs::path& path) {
  std::string out = "sample_id,label";
  for (const auto& g : genes) out += "," + g;
  out += "\n";
  for (Eigen::Index i = 0; i < env.features.rows(); ++i) {
    out += env.sample_ids.empty() ? "s" + std::to_string(i) : env.sample_ids[static_cast<std::size_t>(i)];
    out += "," + detail::format_double(env.labels[i]);
    for (Eigen::Index j = 0; j < env.features.cols(); ++j) out += "," + detail::format_double(env.features(i, j));
    out += "\n";
  }
  write_text_file(path, out);
}

Environment read_values_csv(const fs::path& path, const std::vector<std::string>& genes) {
  auto in = detail::open_input(path);
  const auto lines = detail::read_lines(in);
  const std::string where = "'" + path.filename().string() + "'";
  if (lines.empty()) throw ValidationError(where + ": file is empty");
  const auto header = detail::split(lines.front(), ',');
  if (header.size() != genes.size() + 2 || header[0] != "sample_id" || header[1] != "label" ||
      !std::equal(genes.begin(), genes.end(), header.begin() + 2)) {
    throw ValidationError(where + ": header does not match dataset.json gene ids");
  }
  Environment env;
  const auto rows = static_cast<Eigen::Index>(lines.size() - 1);
  const auto cols = static_cast<Eigen::Index>(genes.size());
  env.features.resize(rows, cols);
  env.labels.resize(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto fields = detail::split(lines[static_cast<std::size_t>(r + 1)], ',');
    const auto line_no = std::to_string(r + 2);
    if (fields.size() != header.size()) throw ValidationError(where + ", line " + line_no + ": wrong field count");
    env.sample_ids.push_back(fields[0]);
    for (std::size_t f = 1; f < fields.size(); ++f) {
      const auto v = detail::parse_double(fields[f]);
      if (!v) throw ValidationError(where + ", line " + line_no + ": bad number '" + fields[f] + "'");
      if (f == 1) {
        env.labels[r] = *v;
      } else {
        env.features(r, static_cast<Eigen::Index>(f - 2)) = *v;
      }
    }
  }
  return env;
}

json plan_json(const SweepPlan& plan) {
  json cells = json::array();
  for (const auto& c : plan.cells) cells.push_back(json{{"label", c.label}, {"counts", c.counts}});
  json metrics = json::array();
  for (auto m : plan.metrics) metrics.push_back(to_string(m));
  json j{{"mode", to_string(plan.mode)},
         {"cells", std::move(cells)},
         {"seeds", plan.seeds},
         {"train_config", config_json(plan.train_config)},
         {"metrics", std::move(metrics)},
         {"rbo_p", plan.rbo_p},
         {"workers", plan.workers}};
  j["total_budget"] = plan.total_budget ? json(*plan.total_budget) : json(nullptr);
  return j;
}

SweepPlan plan_from(const json& j) {
  constexpr std::string_view what = "sweep plan";
  check_keys(j, {"mode", "cells", "seeds", "train_config", "metrics", "rbo_p", "workers", "total_budget"}, what);
  return guarded(what, [&] {
    SweepPlan plan;
    plan.mode = parse_sweep_mode(required(j, "mode", what).get<std::string>());
    for (const auto& c : required(j, "cells", what)) {
      check_keys(c, {"label", "counts"}, "sweep cell");
      plan.cells.push_back({c.at("label").get<std::string>(), c.at("counts").get<std::vector<std::size_t>>()});
    }
    plan.seeds = required(j, "seeds", what).get<std::vector<std::uint64_t>>();
    plan.train_config = config_from(required(j, "train_config", what));
    plan.metrics.clear();
    for (const auto& m : required(j, "metrics", what)) plan.metrics.push_back(parse_metric(m.get<std::string>()));
    plan.rbo_p = required(j, "rbo_p", what).get<double>();
    if (j.contains("workers")) plan.workers = j.at("workers").get<std::size_t>();
    if (j.contains("total_budget") && !j.at("total_budget").is_null()) {
      plan.total_budget = j.at("total_budget").get<std::size_t>();
    }
    return plan;
  });
}

}  // namespace

std::string read_text_file(const fs::path& path) {
  auto in = detail::open_input(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const fs::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  auto out = detail::open_output(path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_dataset(const MultiEnvDataset& data, const fs::path& dir) {
  validate(data);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
  json envs = json::array();
  for (std::size_t e = 0; e < data.environments.size(); ++e) {
    const auto& env = data.environments[e];
    char name[32];
    std::snprintf(name, sizeof name, "env_%03zu.csv", e);
    envs.push_back(json{{"id", env.id},
                        {"organism", to_string(env.organism)},
                        {"n_samples", env.n_samples()},
                        {"file", name}});
    write_values_csv(env, data.gene_ids, dir / name);
  }
  json doc{{"format", kDatasetFormat},
           {"version", kDatasetVersion},
           {"gene_ids", data.gene_ids},
           {"environments", std::move(envs)},
           {"provenance", json{{"steps", data.provenance.steps}, {"counters", data.provenance.counters}}}};
  write_text_file(dir / "dataset.json", doc.dump(2) + "\n");
}

MultiEnvDataset read_dataset(const fs::path& dir) {
  const auto doc = parse(read_text_file(dir / "dataset.json"), "dataset.json");
  constexpr std::string_view what = "dataset.json";
  check_keys(doc, {"format", "version", "gene_ids", "environments", "provenance"}, what);
  return guarded(what, [&] {
    if (required(doc, "format", what).get<std::string>() != kDatasetFormat) {
      throw ValidationError("dataset.json: not an irmkit dataset");
    }
    if (required(doc, "version", what).get<int>() != kDatasetVersion) {
      throw ValidationError("dataset.json: unsupported version");
    }
    MultiEnvDataset data;
    data.gene_ids = required(doc, "gene_ids", what).get<std::vector<std::string>>();
    for (const auto& e : required(doc, "environments", what)) {
      check_keys(e, {"id", "organism", "n_samples", "file"}, "dataset.json environment");
      const auto file = e.at("file").get<std::string>();
      if (fs::path(file).has_parent_path()) throw ValidationError("dataset.json: environment file must be a plain name");
      Environment env = read_values_csv(dir / file, data.gene_ids);
      env.id = e.at("id").get<std::string>();
      env.organism = parse_organism(e.at("organism").get<std::string>());
      if (env.n_samples() != e.at("n_samples").get<std::size_t>()) {
        throw ValidationError("dataset.json: sample count of '" + env.id + "' does not match " + file);
      }
      data.environments.push_back(std::move(env));
    }
    if (doc.contains("provenance")) {
      const auto& p = doc.at("provenance");
      check_keys(p, {"steps", "counters"}, "dataset.json provenance");
      if (p.contains("steps")) data.provenance.steps = p.at("steps").get<std::vector<std::string>>();
      if (p.contains("counters")) {
        data.provenance.counters = p.at("counters").get<std::map<std::string, std::int64_t>>();
      }
    }
    validate(data);
    return data;
  });
}

std::string to_json(const TrainConfig& config) { return config_json(config).dump(2) + "\n"; }

TrainConfig train_config_from_json(std::string_view text) { return config_from(parse(text, "train config")); }

std::string to_json(const ScmSpec& spec) {
  json j{{"n_causal", spec.n_causal},
         {"n_spurious", spec.n_spurious},
         {"env_scales", spec.env_scales},
         {"n_samples_per_env", spec.n_samples_per_env},
         {"task", to_string(spec.task)},
         {"causal_weights", spec.resolved_causal_weights()},
         {"spurious_weights", spec.resolved_spurious_weights()},
         {"test_scale", spec.test_scale}};
  return j.dump(2) + "\n";
}

ScmSpec scm_spec_from_json(std::string_view text) {
  constexpr std::string_view what = "SCM spec";
  const auto j = parse(text, what);
  check_keys(j,
             {"n_causal", "n_spurious", "env_scales", "n_samples_per_env", "task", "causal_weights", "spurious_weights",
              "test_scale"},
             what);
  return guarded(what, [&] {
    ScmSpec spec;
    if (j.contains("n_causal")) spec.n_causal = get_count(j, "n_causal", what);
    if (j.contains("n_spurious")) spec.n_spurious = get_count(j, "n_spurious", what);
    if (j.contains("env_scales")) spec.env_scales = j.at("env_scales").get<std::vector<double>>();
    if (j.contains("n_samples_per_env")) spec.n_samples_per_env = get_count(j, "n_samples_per_env", what);
    if (j.contains("task")) spec.task = parse_scm_task(j.at("task").get<std::string>());
    if (j.contains("causal_weights")) spec.causal_weights = j.at("causal_weights").get<std::vector<double>>();
    if (j.contains("spurious_weights")) spec.spurious_weights = j.at("spurious_weights").get<std::vector<double>>();
    if (j.contains("test_scale")) spec.test_scale = j.at("test_scale").get<double>();
    validate(spec, 2);
    return spec;
  });
}

std::string to_json(const ModelFile& model, std::size_t trace_tail) {
  const auto& m = model.trained.model;
  json trace = json::array();
  const auto& t = model.trained.trace;
  const std::size_t first = t.size() > trace_tail ? t.size() - trace_tail : 0;
  for (std::size_t i = first; i < t.size(); ++i) {
    trace.push_back(json{{"iteration", t[i].iteration}, {"objective", t[i].objective}, {"penalty", t[i].penalty}});
  }
  json j{{"gene_ids", model.gene_ids},
         {"theta", std::vector<double>(m.theta.data(), m.theta.data() + m.theta.size())},
         {"bias", m.bias},
         {"w0", m.w0},
         {"config", config_json(model.trained.config)},
         {"trace_tail", std::move(trace)}};
  return j.dump(2) + "\n";
}

ModelFile model_from_json(std::string_view text) {
  constexpr std::string_view what = "model";
  const auto j = parse(text, what);
  check_keys(j, {"gene_ids", "theta", "bias", "w0", "config", "trace_tail"}, what);
  return guarded(what, [&] {
    ModelFile out;
    out.gene_ids = required(j, "gene_ids", what).get<std::vector<std::string>>();
    const auto theta = required(j, "theta", what).get<std::vector<double>>();
    if (theta.size() != out.gene_ids.size()) throw ValidationError("model: theta and gene_ids differ in length");
    out.trained.model.theta = Eigen::Map<const Vector>(theta.data(), static_cast<Eigen::Index>(theta.size()));
    out.trained.model.bias = required(j, "bias", what).get<double>();
    out.trained.model.w0 = required(j, "w0", what).get<double>();
    validate(out.trained.model);
    if (j.contains("config")) out.trained.config = config_from(j.at("config"));
    if (j.contains("trace_tail")) {
      for (const auto& p : j.at("trace_tail")) {
        check_keys(p, {"iteration", "objective", "penalty"}, "model trace");
        out.trained.trace.push_back(
            {p.at("iteration").get<std::int64_t>(), number_or_nan(p.at("objective")), number_or_nan(p.at("penalty"))});
      }
    }
    return out;
  });
}

std::string to_json(const RankedFeatureList& list) { return ranking_json(list).dump(2) + "\n"; }

RankedFeatureList ranking_from_json(std::string_view text) { return ranking_from(parse(text, "ranking")); }

std::string to_json(const SweepReport& report) {
  json runs = json::array();
  for (const auto& r : report.runs) {
    json run{{"cell", r.cell}, {"seed", report.plan.seeds.at(r.seed_index)}, {"failed", r.failed}};
    if (r.failed) {
      run["error"] = r.error;
    } else {
      run["ranking"] = ranking_json(r.ranking);
    }
    runs.push_back(std::move(run));
  }
  json matrices = json::array();
  for (const auto& m : report.matrices) {
    matrices.push_back(json{{"metric", to_string(m.metric)},
                            {"labels", m.labels},
                            {"mean", matrix_json(m.mean)},
                            {"ci_low", matrix_json(m.ci_low)},
                            {"ci_high", matrix_json(m.ci_high)}});
  }
  json j{{"plan", plan_json(report.plan)},
         {"runs", std::move(runs)},
         {"matrices", std::move(matrices)},
         {"provenance", json{{"dataset_hash", report.dataset_hash}, {"toolkit_version", report.toolkit_version}}}};
  return j.dump(1) + "\n";
}

SweepReport sweep_report_from_json(std::string_view text) {
  constexpr std::string_view what = "sweep report";
  const auto j = parse(text, what);
  check_keys(j, {"plan", "runs", "matrices", "provenance"}, what);
  return guarded(what, [&] {
    SweepReport report;
    report.plan = plan_from(required(j, "plan", what));
    const auto n_seeds = report.plan.seeds.size();
    for (const auto& r : required(j, "runs", what)) {
      check_keys(r, {"cell", "seed", "failed", "error", "ranking"}, "sweep run");
      CellRun run;
      run.cell = r.at("cell").get<std::size_t>();
      run.seed_index = report.runs.size() % std::max<std::size_t>(n_seeds, 1);
      run.failed = r.at("failed").get<bool>();
      if (r.contains("error")) run.error = r.at("error").get<std::string>();
      if (r.contains("ranking")) run.ranking = ranking_from(r.at("ranking"));
      report.runs.push_back(std::move(run));
    }
    const auto side = report.plan.cells.size();
    for (const auto& m : required(j, "matrices", what)) {
      check_keys(m, {"metric", "labels", "mean", "ci_low", "ci_high"}, "similarity matrix");
      SimilarityMatrix sm;
      sm.metric = parse_metric(m.at("metric").get<std::string>());
      sm.labels = m.at("labels").get<std::vector<std::string>>();
      if (sm.labels.size() != side) throw ValidationError("sweep report: matrix labels do not match the plan's cells");
      sm.mean = matrix_from(m.at("mean"), side);
      sm.ci_low = matrix_from(m.at("ci_low"), side);
      sm.ci_high = matrix_from(m.at("ci_high"), side);
      report.matrices.push_back(std::move(sm));
    }
    const auto& p = required(j, "provenance", what);
    check_keys(p, {"dataset_hash", "toolkit_version"}, "sweep report provenance");
    report.dataset_hash = p.at("dataset_hash").get<std::string>();
    report.toolkit_version = p.at("toolkit_version").get<std::string>();
    return report;
  });
}

}  // namespace irmkit
