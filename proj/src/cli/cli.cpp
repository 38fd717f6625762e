#include "pcad/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include "pcad/config.hpp"
#include "pcad/error.hpp"
#include "pcad/eval/protocol.hpp"
#include "pcad/eval/report.hpp"
#include "pcad/parallel.hpp"
#include "pcad/rng.hpp"
#include "pcad/scoring/scoring.hpp"
#include "pcad/support/build.hpp"
#include "pcad/synth/synth.hpp"

namespace fs = std::filesystem;

namespace pcad {

namespace {

struct ConfigFlags {
  std::string config_path;
  std::string stage, strategy;
  std::optional<std::size_t> shots, folds;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
};

void add_config_flags(CLI::App* app, ConfigFlags& f, bool run_flags) {
  app->add_option("--config", f.config_path, "key=value configuration file")->check(CLI::ExistingFile);
  app->add_option("--seed", f.seed, "master seed");
  app->add_option("--set", f.sets, "override one key (key=value); repeatable");
  if (!run_flags) return;
  app->add_option("--stage", f.stage, "M6, M7, M8 or M9");
  app->add_option("--strategy", f.strategy, "identity, random, greedy, greedy-proj or correspondence");
  app->add_option("--shots", f.shots, "seen anomalies drawn per seen kind");
}

// Precedence: base < config file < dedicated flags < --set.
RunConfig resolve_config(const ConfigFlags& f, RunConfig base = {}) {
  RunConfig cfg = f.config_path.empty() ? base : load_config(f.config_path, base);
  if (!f.stage.empty()) cfg.stage = parse_stage(f.stage);
  if (!f.strategy.empty()) cfg.strategy = parse_strategy(f.strategy);
  if (f.shots) cfg.shots = *f.shots;
  if (f.folds) cfg.folds = *f.folds;
  if (f.seed) cfg.seed = *f.seed;
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) fail_usage("--set expects key=value, got '" + s + "'");
    cfg.set(s.substr(0, eq), s.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

void echo_config(const RunConfig& cfg, std::ostream& out) {
  for (const auto& [k, v] : cfg.to_pairs()) out << "# " << k << "=" << v << "\n";
}

void write_config_file(const RunConfig& cfg, const fs::path& path) {
  std::ofstream o(path, std::ios::binary | std::ios::trunc);
  if (!o) fail_data("cannot open '" + path.string() + "' for writing");
  o << cfg.to_text();
}

std::set<DefectKind> seen_kinds(const RunConfig& cfg) { return parse_kind_set(cfg.seen_kinds); }

std::string pick_category(const DatasetManifest& m, const std::string& requested) {
  const auto cats = m.categories();
  if (!requested.empty()) {
    if (std::find(cats.begin(), cats.end(), requested) == cats.end())
      fail_usage("category '" + requested + "' is not in the manifest");
    return requested;
  }
  if (cats.size() == 1) return cats.front();
  std::string list;
  for (const auto& c : cats) list += (list.empty() ? "" : ", ") + c;
  fail_usage("manifest has several categories (" + list + "); pick one with --category");
}

// The fold a build/score invocation works on: the manifest itself with
// --as-is, otherwise open-set fold `fold` drawn exactly as eval draws it.
DatasetManifest working_manifest(const DatasetManifest& m, const RunConfig& cfg, std::size_t fold, bool as_is) {
  if (as_is) return m;
  auto folds = make_openset_splits(m, seen_kinds(cfg), cfg.shots, fold + 1, derive_seed(cfg.seed, "splits"));
  return std::move(folds[fold]);
}

DatasetManifest load_checked_manifest(const std::string& path) {
  auto m = load_manifest(path);
  m.validate(true);
  return m;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"open-set supervised point-cloud anomaly detection", "pcad"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "print help for every subcommand");

  // gen
  auto* gen = app.add_subcommand("gen", "write the synthetic benchmark and its manifest");
  std::string gen_out;
  std::size_t gen_categories = 3, gen_normals = 20, gen_train = 10, gen_anomalies = 40, gen_points = 4000;
  double gen_magnitude = 4.0, gen_noise = 0.0;
  std::uint64_t gen_seed = 7;
  std::vector<std::string> gen_kinds;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--categories", gen_categories, "number of shape categories")->capture_default_str();
  gen->add_option("--normals", gen_normals, "normal samples per category")->capture_default_str();
  gen->add_option("--train-normals", gen_train, "normal samples in the train split")->capture_default_str();
  gen->add_option("--anomalies", gen_anomalies, "anomalous samples per category")->capture_default_str();
  gen->add_option("--points", gen_points, "points per cloud")->capture_default_str();
  gen->add_option("--magnitude", gen_magnitude, "defect depth in median spacings")->capture_default_str();
  gen->add_option("--noise", gen_noise, "normal-direction noise sigma in median spacings")->capture_default_str();
  gen->add_option("--kinds", gen_kinds, "defect kinds (default: all five)")->delimiter(',');
  gen->add_option("--seed", gen_seed, "generator seed")->capture_default_str();

  // build
  auto* build = app.add_subcommand("build", "build one category's dual memory bank");
  ConfigFlags build_flags;
  std::string build_manifest, build_out, build_category;
  std::size_t build_fold = 0;
  bool build_as_is = false;
  build->add_option("--manifest", build_manifest, "manifest TSV")->required()->check(CLI::ExistingFile);
  build->add_option("--out", build_out, "bank file to write")->required();
  build->add_option("--category", build_category, "category (default: the only one)");
  build->add_option("--fold", build_fold, "open-set fold to train on")->capture_default_str();
  build->add_flag("--as-is", build_as_is, "use the manifest's own train split");
  add_config_flags(build, build_flags, true);

  // score
  auto* score = app.add_subcommand("score", "score test samples against a bank");
  ConfigFlags score_flags;
  std::string score_manifest, score_bank, score_out;
  std::size_t score_fold = 0;
  bool score_as_is = false;
  score->add_option("--manifest", score_manifest, "manifest TSV")->required()->check(CLI::ExistingFile);
  score->add_option("--bank", score_bank, "bank file")->required()->check(CLI::ExistingFile);
  score->add_option("--out", score_out, "output directory")->required();
  score->add_option("--fold", score_fold, "open-set fold whose test split is scored")->capture_default_str();
  score->add_flag("--as-is", score_as_is, "use the manifest's own test split");
  add_config_flags(score, score_flags, false);

  // eval
  auto* eval = app.add_subcommand("eval", "cross-validated open-set evaluation");
  ConfigFlags eval_flags;
  std::string eval_manifest, eval_out;
  std::size_t eval_seeds = 1;
  bool eval_silhouette = false;
  eval->add_option("--manifest", eval_manifest, "manifest TSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", eval_out, "output directory")->required();
  eval->add_option("--folds", eval_flags.folds, "folds per seed");
  eval->add_option("--seeds", eval_seeds, "seeds (cfg.seed, cfg.seed+1, ...)")->capture_default_str();
  eval->add_flag("--silhouette", eval_silhouette, "report normal/anomalous bank silhouette");
  add_config_flags(eval, eval_flags, true);

  // ablate
  auto* abl = app.add_subcommand("ablate", "strategy (M1-M5) and stage (M6-M9) sweeps");
  ConfigFlags abl_flags;
  std::string abl_manifest, abl_out;
  std::size_t abl_seeds = 1;
  abl->add_option("--manifest", abl_manifest, "manifest TSV")->required()->check(CLI::ExistingFile);
  abl->add_option("--out", abl_out, "output directory")->required();
  abl->add_option("--folds", abl_flags.folds, "folds per seed");
  abl->add_option("--seeds", abl_seeds, "seeds (cfg.seed, cfg.seed+1, ...)")->capture_default_str();
  add_config_flags(abl, abl_flags, true);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "pcad: " << e.what() << "\n";
    if (!app.get_subcommands().empty()) err << app.get_subcommands().front()->help();
    return 2;
  }

  try {
    configure_threads();
    if (*gen) {
      BenchmarkSpec spec;
      spec.categories = default_categories(gen_categories, gen_points, gen_noise);
      spec.normals = gen_normals;
      spec.train_normals = gen_train;
      spec.anomalies = gen_anomalies;
      spec.magnitude = gen_magnitude;
      spec.seed = gen_seed;
      if (!gen_kinds.empty()) {
        spec.kinds.clear();
        for (const auto& k : gen_kinds) spec.kinds.push_back(parse_defect_kind(k));
      }
      const auto m = gen_benchmark(spec, gen_out);
      const auto st = benchmark_stats(m);
      out << "wrote " << st.samples << " samples (" << st.anomalous << " anomalous) to "
          << (fs::path(gen_out) / "manifest.tsv").string() << "\n";
      out << "anomaly point ratio: min " << st.min_ratio << ", mean " << st.mean_ratio << ", max " << st.max_ratio
          << "\n";
      return 0;
    }
    if (*build) {
      const RunConfig cfg = resolve_config(build_flags);
      echo_config(cfg, out);
      const auto m = load_checked_manifest(build_manifest);
      const std::string cat = pick_category(m, build_category);
      const auto work = working_manifest(m, cfg, build_fold, build_as_is).filter_category(cat);
      FeatureCache cache;
      DualSupport ds = build_supports(work, cfg, cache);
      ds.category = cat;
      save_bank(ds, build_out);
      out << "bank '" << build_out << "': category " << cat << ", " << ds.normal.size() << " normal + "
          << ds.anomalous.size() << " anomalous vectors, C1=" << ds.dim() << ", removed_cor=" << ds.removed_cor
          << "\n";
      return 0;
    }
    if (*score) {
      const DualSupport ds = load_bank(score_bank);
      const RunConfig cfg = resolve_config(score_flags, ds.cfg);
      echo_config(cfg, out);
      check_bank_dimension(ds, cfg);
      const auto m = load_checked_manifest(score_manifest);
      const std::string cat = pick_category(m, ds.category);
      const auto work = working_manifest(m, cfg, score_fold, score_as_is).filter_category(cat);
      const auto scored = score_dataset(work, ds, cfg, score_out);
      write_config_file(cfg, fs::path(score_out) / "config.txt");
      out << "scored " << scored.size() << " samples into '" << score_out << "'\n";
      return 0;
    }
    if (*eval || *abl) {
      const bool is_eval = eval->parsed();
      const RunConfig cfg = resolve_config(is_eval ? eval_flags : abl_flags);
      echo_config(cfg, out);
      const auto m = load_checked_manifest(is_eval ? eval_manifest : abl_manifest);
      ProtocolSpec spec{seen_kinds(cfg), cfg.shots, cfg.folds, is_eval ? eval_seeds : abl_seeds};
      const fs::path dir = is_eval ? eval_out : abl_out;
      std::error_code ec;
      fs::create_directories(dir, ec);
      if (ec || !fs::is_directory(dir)) fail_data("cannot create output directory '" + dir.string() + "'");
      FeatureCache cache;
      if (is_eval) {
        const auto rep = evaluate_protocol(m, cfg, spec, cache, EvalOptions{eval_silhouette});
        emit_report(rep, (dir / "report.tsv").string(), ReportFormat::tsv);
        emit_report(rep, (dir / "report.txt").string(), ReportFormat::text);
        out << format_report(rep, ReportFormat::text);
      } else {
        const auto rep = ablate(m, cfg, spec, cache);
        emit_ablation(rep, (dir / "ablation.tsv").string(), ReportFormat::tsv);
        emit_ablation(rep, (dir / "ablation.txt").string(), ReportFormat::text);
        out << format_ablation(rep, ReportFormat::text);
      }
      return 0;
    }
  } catch (const Error& e) {
    err << "pcad: error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::usage: return 2;
      case ErrorKind::data: return 3;
      case ErrorKind::internal: return 4;
    }
  } catch (const std::bad_alloc&) {
    err << "pcad: error: out of memory\n";
    return 4;
  } catch (const std::exception& e) {
    err << "pcad: internal error: " << e.what() << "\n";
    return 4;
  }
  return 2;
}

}  // namespace pcad
