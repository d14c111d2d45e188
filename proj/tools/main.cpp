#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "tacit/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"tacit - trial-driven experience store for text-environment agents"};
  app.require_subcommand(1);

  tacit::LearnArgs learn_args;
  tacit::EvalArgs eval_args;
  tacit::DbExportArgs db_export_args;
  tacit::DbImportArgs db_import_args;
  tacit::DbInspectArgs db_inspect_args;
  tacit::StatsArgs stats_args;
  tacit::CurveArgs curve_args;

  std::string learn_templates, eval_templates, learn_model, eval_model, learn_endpoint,
      eval_endpoint;
  std::int64_t learn_seed = 0, eval_seed = 0;

  auto* learn = app.add_subcommand("learn", "run learning episodes with interval checkpoints");
  learn->add_option("--config", learn_args.config_path, "config file")->required();
  learn->add_option("--episodes", learn_args.episodes, "learning episodes (default 25)");
  learn->add_option("--out", learn_args.out_dir, "run directory")->required();
  auto* learn_seed_opt = learn->add_option("--seed", learn_seed, "rng seed override");
  learn->add_option("--templates", learn_templates, "template directory override");
  learn->add_option("--model", learn_model, "remote model override");
  learn->add_option("--endpoint", learn_endpoint, "remote endpoint override");

  auto* eval = app.add_subcommand("eval", "evaluate with learning disabled");
  eval->add_option("--config", eval_args.config_path, "config file")->required();
  eval->add_option("--mode", eval_args.mode, "ral|direct|reflection")->required();
  eval->add_option("--games", eval_args.games, "evaluation games (default 20)");
  eval->add_option("--db", eval_args.db_imports, "database snapshot dir(s) to import (ral mode)");
  eval->add_option("--out", eval_args.out_dir, "output directory")->required();
  auto* eval_seed_opt = eval->add_option("--seed", eval_seed, "rng seed override");
  eval->add_option("--templates", eval_templates, "template directory override");
  eval->add_option("--model", eval_model, "remote model override");
  eval->add_option("--endpoint", eval_endpoint, "remote endpoint override");

  auto* db = app.add_subcommand("db", "inspect and move database snapshots");
  db->require_subcommand(1);
  auto* db_export = db->add_subcommand("export", "re-export a snapshot");
  db_export->add_option("--from", db_export_args.from_dir, "source snapshot dir")->required();
  db_export->add_option("--out", db_export_args.out_dir, "target snapshot dir")->required();
  std::string export_source_model;
  auto* export_model_opt =
      db_export->add_option("--source-model", export_source_model, "override source model tag");
  auto* db_import = db->add_subcommand("import", "import a snapshot into a store directory");
  db_import->add_option("--snapshot", db_import_args.snapshot_dir, "snapshot to import")->required();
  db_import->add_option("--into", db_import_args.into_dir, "target store directory")->required();
  db_import->add_flag("--merge", db_import_args.merge,
                      "merge instead of replacing per (db, scenario)");
  auto* db_inspect = db->add_subcommand("inspect", "print snapshot contents");
  db_inspect->add_option("dir", db_inspect_args.dir, "snapshot directory")->required();

  auto* stats = app.add_subcommand("stats", "per-mode usage table for a run");
  stats->add_option("--run", stats_args.run_dir, "run directory")->required();
  std::string stats_out;
  auto* stats_out_opt = stats->add_option("--out", stats_out, "also write the JSON report");

  auto* curve = app.add_subcommand("curve", "export the learning curve of a run");
  curve->add_option("--run", curve_args.run_dir, "run directory")->required();
  curve->add_option("--format", curve_args.format, "csv|json (default csv)");
  curve->add_option("--out", curve_args.out_path, "output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (learn->parsed()) {
      if (*learn_seed_opt) learn_args.seed = learn_seed;
      if (!learn_templates.empty()) learn_args.overrides.templates_dir = learn_templates;
      if (!learn_model.empty()) learn_args.overrides.model = learn_model;
      if (!learn_endpoint.empty()) learn_args.overrides.endpoint = learn_endpoint;
      return tacit::cmd_learn(learn_args);
    }
    if (eval->parsed()) {
      if (*eval_seed_opt) eval_args.seed = eval_seed;
      if (!eval_templates.empty()) eval_args.overrides.templates_dir = eval_templates;
      if (!eval_model.empty()) eval_args.overrides.model = eval_model;
      if (!eval_endpoint.empty()) eval_args.overrides.endpoint = eval_endpoint;
      return tacit::cmd_eval(eval_args);
    }
    if (db_export->parsed()) {
      if (*export_model_opt) db_export_args.source_model = export_source_model;
      return tacit::cmd_db_export(db_export_args);
    }
    if (db_import->parsed()) return tacit::cmd_db_import(db_import_args);
    if (db_inspect->parsed()) return tacit::cmd_db_inspect(db_inspect_args);
    if (stats->parsed()) {
      if (*stats_out_opt) stats_args.out_path = stats_out;
      return tacit::cmd_stats(stats_args);
    }
    if (curve->parsed()) return tacit::cmd_curve(curve_args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
