#include "cli.hpp"

#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "irmkit/irmkit.hpp"

namespace irmkit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Training flags shared by `train` and `sweep`. Values given on the command
// line override a --config file, which overrides the built-in defaults.
struct TrainFlags {
  std::string config_path;
  std::string loss;
  double lambda = 0.0;
  std::int64_t anneal = 0;
  std::int64_t iters = 0;
  double lr = 0.0;
  double l2 = 0.0;
  double init_scale = 0.0;
  double w0 = 0.0;
  std::uint64_t seed = 0;

  CLI::Option* loss_opt = nullptr;
  CLI::Option* lambda_opt = nullptr;
  CLI::Option* anneal_opt = nullptr;
  CLI::Option* iters_opt = nullptr;
  CLI::Option* lr_opt = nullptr;
  CLI::Option* l2_opt = nullptr;
  CLI::Option* init_opt = nullptr;
  CLI::Option* w0_opt = nullptr;
  CLI::Option* seed_opt = nullptr;

  void attach(CLI::App& app, bool with_seed) {
    const TrainConfig d;
    app.add_option("--config", config_path, "Train config JSON (keys: loss, lambda, anneal_iters, total_iters, "
                                            "learning_rate, l2_weight, seed, init_scale, w0)");
    loss_opt = app.add_option("--loss", loss, "Loss: logistic or squared")->default_str("logistic");
    lambda_opt = app.add_option("--lambda", lambda, "IRM penalty weight after warm-up (0 = ERM)")->default_val(d.lambda_final);
    anneal_opt = app.add_option("--anneal", anneal, "Warm-up iterations with penalty weight 1")->default_val(d.anneal_iters);
    iters_opt = app.add_option("--iters", iters, "Total gradient-descent iterations")->default_val(d.total_iters);
    lr_opt = app.add_option("--lr", lr, "Learning rate")->default_val(d.learning_rate);
    l2_opt = app.add_option("--l2", l2, "L2 weight on theta")->default_val(d.l2_weight);
    init_opt = app.add_option("--init-scale", init_scale, "Std-dev of the Gaussian theta init")->default_val(d.init_scale);
    w0_opt = app.add_option("--w0", w0, "Fixed classifier scalar")->default_val(d.w0);
    if (with_seed) seed_opt = app.add_option("--seed", seed, "Initialization seed")->default_val(d.seed);
  }

  [[nodiscard]] TrainConfig resolve() const {
    TrainConfig c;
    if (!config_path.empty()) c = train_config_from_json(read_text_file(config_path));
    if (loss_opt->count()) c.loss_kind = parse_loss_kind(loss);
    if (lambda_opt->count()) c.lambda_final = lambda;
    if (anneal_opt->count()) c.anneal_iters = anneal;
    if (iters_opt->count()) c.total_iters = iters;
    if (lr_opt->count()) c.learning_rate = lr;
    if (l2_opt->count()) c.l2_weight = l2;
    if (init_opt->count()) c.init_scale = init_scale;
    if (w0_opt->count()) c.w0 = w0;
    if (seed_opt != nullptr && seed_opt->count()) c.seed = seed;
    validate(c);
    return c;
  }
};

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

json number_or_null(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void write_or_print(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Invariant feature discovery across data-generating environments (IRMv1 / ERM)", "irmkit"};
  app.require_subcommand(1);
  app.fallthrough(false);

  std::function<void()> action;

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a multi-environment dataset from a linear SCM spec");
  std::string synth_spec;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  std::string synth_test_out;
  synth->add_option("--spec", synth_spec, "SCM spec JSON (n_causal, n_spurious, env_scales, n_samples_per_env, task, "
                                          "causal_weights, spurious_weights, test_scale)")
      ->required();
  synth->add_option("--seed", synth_seed, "Generator seed")->default_val(0);
  synth->add_option("--out", synth_out, "Output dataset directory")->required();
  synth->add_option("--test-out", synth_test_out, "Also write the held-out test environment to this directory");
  synth->callback([&] {
    action = [&] {
      const ScmSpec spec = scm_spec_from_json(read_text_file(synth_spec));
      write_dataset(generate_scm_dataset(spec, synth_seed), synth_out);
      if (!synth_test_out.empty()) {
        MultiEnvDataset test;
        test.gene_ids = scm_feature_names(spec);
        test.provenance.steps.push_back("scm_test");
        test.environments.push_back(generate_scm_test_environment(spec, synth_seed));
        write_dataset(test, synth_test_out);
      }
    };
  });

  // preprocess
  auto* prep = app.add_subcommand("preprocess", "Map homologues, merge, variance-filter and z-normalize expression tables");
  std::vector<std::string> prep_human;
  std::vector<std::string> prep_mouse;
  std::string prep_map;
  std::size_t prep_top = 1000;
  std::string prep_label = "label";
  std::string prep_out;
  prep->add_option("--human", prep_human, "Human expression CSV (repeatable; experiment id = file stem)");
  prep->add_option("--mouse", prep_mouse, "Mouse expression CSV (repeatable; experiment id = file stem)");
  prep->add_option("--homologues", prep_map, "Mouse->human homologue TSV (required with --mouse)");
  prep->add_option("--top-genes", prep_top, "Number of highest-variance genes to keep")->default_val(1000);
  prep->add_option("--label-column", prep_label, "Name of the label column")->default_val("label");
  prep->add_option("--out", prep_out, "Output dataset directory")->required();
  prep->callback([&] {
    action = [&] {
      if (prep_human.size() + prep_mouse.size() < 2) throw ValidationError("preprocess needs at least two input tables");
      std::optional<HomologueMap> map;
      if (!prep_map.empty()) map = load_homologue_map(prep_map);
      if (!prep_mouse.empty() && !map) throw ValidationError("mouse tables need --homologues");
      std::vector<ExpressionTable> tables;
      for (const auto& p : prep_human) tables.push_back(load_expression_table(p, {stem_of(p), Organism::Human, prep_label}));
      for (const auto& p : prep_mouse) tables.push_back(load_expression_table(p, {stem_of(p), Organism::Mouse, prep_label}));
      const auto data = run_preprocess(tables, map ? &*map : nullptr, PreprocessOptions{prep_top});
      write_dataset(data, prep_out);
    };
  });

  // train
  auto* train_cmd = app.add_subcommand("train", "Train an IRMv1 (or ERM with --lambda 0) linear model");
  std::string train_data;
  std::string train_out;
  std::size_t train_tail = 10;
  TrainFlags train_flags;
  train_cmd->add_option("--data", train_data, "Dataset directory")->required();
  train_cmd->add_option("--out", train_out, "Output model JSON")->required();
  train_cmd->add_option("--trace-tail", train_tail, "Trace points kept in the model file")->default_val(10);
  train_flags.attach(*train_cmd, true);
  train_cmd->callback([&] {
    action = [&] {
      const TrainConfig config = train_flags.resolve();
      const auto data = read_dataset(train_data);
      ModelFile model{train(data, config), data.gene_ids};
      write_text_file(train_out, to_json(model, train_tail));
    };
  });

  // rank
  auto* rank_cmd = app.add_subcommand("rank", "Rank genes of a trained model by |coefficient|");
  std::string rank_model;
  std::string rank_out;
  std::string rank_source;
  rank_cmd->add_option("--model", rank_model, "Model JSON written by train")->required();
  rank_cmd->add_option("--out", rank_out, "Output ranking JSON ('-' for stdout)")->default_val("-");
  rank_cmd->add_option("--source", rank_source, "Free-form descriptor stored in the ranking (default: model path)");
  rank_cmd->callback([&] {
    action = [&] {
      const auto model = model_from_json(read_text_file(rank_model));
      const auto list =
          rank_features(model.trained.model, model.gene_ids, rank_source.empty() ? rank_model : rank_source);
      write_or_print(rank_out, to_json(list), out);
    };
  });

  // compare
  auto* compare = app.add_subcommand("compare", "Print top-10/top-50 overlap, extrapolated RBO and Kendall tau of two rankings");
  std::string cmp_a;
  std::string cmp_b;
  double cmp_p = 0.9;
  compare->add_option("first", cmp_a, "Ranking JSON")->required();
  compare->add_option("second", cmp_b, "Ranking JSON")->required();
  compare->add_option("--rbo-p", cmp_p, "RBO persistence in (0,1)")->default_val(0.9);
  compare->callback([&] {
    action = [&] {
      const auto a = ranking_from_json(read_text_file(cmp_a)).ids();
      const auto b = ranking_from_json(read_text_file(cmp_b)).ids();
      // Top-k is reported as null when either list is shorter than k.
      auto top = [&](std::size_t k) -> std::optional<double> {
        if (a.size() < k || b.size() < k) return std::nullopt;
        return top_k_overlap(a, b, k);
      };
      std::optional<double> tau;
      try {
        tau = kendall_tau(a, b);
      } catch (const ValidationError&) {
      }
      json j{{"top10", number_or_null(top(10))},
             {"top50", number_or_null(top(50))},
             {"rbo", rbo_ext(a, b, cmp_p)},
             {"tau", number_or_null(tau)}};
      out << j.dump(2) << "\n";
    };
  });

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run an augmentation, substitution or fixed-total sweep and write a report");
  std::string sw_mode;
  std::string sw_data;
  std::size_t sw_step = 0;
  std::size_t sw_budget = 0;
  std::vector<std::uint64_t> sw_seeds{0};
  std::vector<std::string> sw_metrics{"top10", "top50", "rbo", "tau"};
  double sw_p = 0.9;
  std::size_t sw_workers = 1;
  std::string sw_out;
  TrainFlags sweep_flags;
  sweep->add_option("--mode", sw_mode, "augment, substitute or fixed")->required();
  sweep->add_option("--data", sw_data, "Dataset directory")->required();
  sweep->add_option("--step", sw_step, "Samples added/removed per environment (per cell, for fixed: in total)")->required();
  auto* budget_opt = sweep->add_option("--budget", sw_budget, "Total samples per cell (fixed mode)");
  sweep->add_option("--seeds", sw_seeds, "Comma-separated seeds")->delimiter(',')->default_str("0");
  sweep->add_option("--metrics", sw_metrics, "Comma-separated metrics: top10,top50,rbo,tau")
      ->delimiter(',')
      ->default_str("top10,top50,rbo,tau");
  sweep->add_option("--rbo-p", sw_p, "RBO persistence in (0,1)")->default_val(0.9);
  sweep->add_option("--workers", sw_workers, "Concurrent trainings")->default_val(1);
  sweep->add_option("--out", sw_out, "Output report JSON")->required();
  sweep_flags.attach(*sweep, false);
  sweep->callback([&] {
    action = [&] {
      const TrainConfig config = sweep_flags.resolve();
      const SweepMode mode = parse_sweep_mode(sw_mode);
      std::vector<Metric> metrics;
      for (const auto& m : sw_metrics) metrics.push_back(parse_metric(m));
      if (!(sw_p > 0.0 && sw_p < 1.0)) throw ValidationError("--rbo-p must lie in (0, 1)");
      if (mode == SweepMode::FixedTotal && !budget_opt->count()) throw ValidationError("fixed mode needs --budget");
      const auto data = read_dataset(sw_data);
      SweepPlan plan;
      switch (mode) {
        case SweepMode::Augmentation: plan = build_augmentation_plan(data, sw_step, sw_seeds, config); break;
        case SweepMode::Substitution: plan = build_substitution_plan(data, sw_step, sw_seeds, config); break;
        case SweepMode::FixedTotal: plan = build_fixed_total_plan(data, sw_budget, sw_step, sw_seeds, config); break;
      }
      plan.metrics = metrics;
      plan.rbo_p = sw_p;
      plan.workers = sw_workers;
      const auto report = run_sweep(data, plan);
      // Worker count does not affect results; keep it out of the artifact.
      auto stored = report;
      stored.plan.workers = 1;
      write_text_file(sw_out, to_json(stored));
    };
  });

  // report
  auto* report_cmd = app.add_subcommand("report", "Write heatmap CSVs (and SVGs) from a sweep report");
  std::string rep_in;
  std::string rep_out;
  bool rep_svg = false;
  report_cmd->add_option("--in", rep_in, "Sweep report JSON")->required();
  report_cmd->add_option("--out", rep_out, "Output directory")->required();
  report_cmd->add_flag("--svg", rep_svg, "Also write SVG heatmaps");
  report_cmd->callback([&] {
    action = [&] { write_heatmaps(sweep_report_from_json(read_text_file(rep_in)), rep_out, rep_svg); };
  });

  auto fail = [&](std::string_view kind, const std::string& message, int code) {
    err << json{{"error", {{"kind", kind}, {"message", message}}}, {"exit_code", code}}.dump() << "\n";
    return code;
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    // help() delegates to the selected subcommand.
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), kValidationError);
  }

  try {
    if (action) action();
    return kOk;
  } catch (const ValidationError& e) {
    return fail("validation", e.what(), kValidationError);
  } catch (const IoError& e) {
    return fail("io", e.what(), kIoError);
  } catch (const NumericError& e) {
    return fail("numeric", e.what(), kNumericError);
  } catch (const std::filesystem::filesystem_error& e) {
    return fail("io", e.what(), kIoError);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), kIoError);
  }
}

}  // namespace irmkit::cli
