// rfr: command-line front end. Every pipeline stage is a subcommand that
// reads the previous stage's files; `run` does the whole range in one go.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "rfr/artifacts.hpp"
#include "rfr/config.hpp"
#include "rfr/errors.hpp"
#include "rfr/pipeline.hpp"
#include "rfr/stress_eval.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rfr;

namespace {

enum class Kind { Num, Int, Str, Bool, List };

struct Override {
  const char* flag;
  const char* key;  // dotted config path
  Kind kind;
  const char* help;
  std::string value;
  CLI::Option* opt = nullptr;
};

std::vector<Override> make_overrides() {
  return {
      {"--run-name", "run_name", Kind::Str, "run directory name", {}},
      {"--prices", "data.prices", Kind::Str, "prices CSV", {}},
      {"--sentiment", "data.sentiment", Kind::Str, "sentiment CSV", {}},
      {"--macro", "data.macro", Kind::Str, "macro CSV", {}},
      {"--knowledge", "data.knowledge", Kind::Str, "knowledge-graph CSV", {}},
      {"--embeddings", "data.embeddings", Kind::Str, "entity embeddings", {}},
      {"--comentions", "data.comentions", Kind::Str, "co-mention CSV", {}},
      {"--universe", "universe", Kind::List, "comma-separated tickers", {}},
      {"--train-end", "train_end", Kind::Str, "last day of the normalization period", {}},
      {"--start", "start", Kind::Str, "first date of the range", {}},
      {"--end", "end", Kind::Str, "last date of the range", {}},
      {"--history-window", "history_window", Kind::Int, "W, trailing frames required", {}},
      {"--correlation-window", "correlation_window", Kind::Int, "correlation window", {}},
      {"--top-k", "graph_top_k", Kind::Int, "edges kept per node and kind", {}},
      {"--min-edge-weight", "min_edge_weight", Kind::Num, "global edge weight floor", {}},
      {"--kind", "curvature", Kind::Str, "curvature kind: ollivier or forman", {}},
      {"--p-idle", "p_idle", Kind::Num, "idleness of the random-walk measure", {}},
      {"--augmented-forman", "augmented_forman", Kind::Bool, "count triangles in Forman", {}},
      {"--flow-iters", "flow_iters", Kind::Int, "Ricci flow iterations", {}},
      {"--eta", "eta", Kind::Num, "Ricci flow step size", {}},
      {"--renormalize", "renormalize", Kind::Bool, "keep total edge weight fixed", {}},
      {"--frozen-curvature", "frozen_curvature", Kind::Bool, "reuse the initial curvature", {}},
      {"--horizon", "horizon", Kind::Int, "H, forecast horizon in days", {}},
      {"--scoring", "scoring", Kind::Str, "alpha or lambda", {}},
      {"--alpha", "alpha", Kind::Num, "return weight of the alpha form", {}},
      {"--lambda", "lambda", Kind::Num, "risk weight of the lambda form", {}},
      {"--k", "k", Kind::Int, "recommendation size", {}},
      {"--theta", "theta", Kind::Num, "curvature-change threshold", {}},
      {"--h-max", "h_max", Kind::Int, "maximum RCA hops", {}},
      {"--epsilon", "epsilon", Kind::Num, "RCA decay floor", {}},
      {"--shift-source", "shift_source", Kind::Str, "flow or cross_day", {}},
      {"--cross-day-shift", "cross_day_shift", Kind::Bool, "emit shifts H days apart", {}},
      {"--eval-date", "eval.date", Kind::Str, "evaluation date", {}},
      {"--trials", "eval.trials", Kind::Int, "perturbation trials", {}},
      {"--seed", "eval.seed", Kind::Int, "RNG seed for shock sampling", {}},
      {"--mode", "eval.shock.mode", Kind::Str, "shock or control", {}},
      {"--multiplier", "eval.shock.multiplier", Kind::Num, "shock volatility multiplier", {}},
      {"--sentiment-delta", "eval.shock.sentiment_delta", Kind::Num, "shock sentiment shift", {}},
      {"--targets-per-trial", "eval.shock.targets_per_trial", Kind::Int, "sampled targets", {}},
      {"--shock-targets", "eval.shock.targets", Kind::List, "fixed shock targets", {}},
  };
}

json parse_value(const Override& o) {
  try {
    switch (o.kind) {
      case Kind::Num:
        return std::stod(o.value);
      case Kind::Int:
        return std::stoll(o.value);
      case Kind::Bool:
        if (o.value == "true" || o.value == "1") return true;
        if (o.value == "false" || o.value == "0") return false;
        throw std::invalid_argument(o.value);
      case Kind::List: {
        json arr = json::array();
        std::stringstream ss(o.value);
        std::string item;
        while (std::getline(ss, item, ',')) {
          if (!item.empty()) arr.push_back(item);
        }
        return arr;
      }
      case Kind::Str:
        return o.value;
    }
  } catch (const std::invalid_argument&) {
  } catch (const std::out_of_range&) {
  }
  throw ConfigError(std::string("bad value '") + o.value + "' for " + o.flag);
}

void set_path(json& j, const std::string& dotted, json value) {
  json* cur = &j;
  std::stringstream ss(dotted);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) cur = &(*cur)[parts[i]];
  (*cur)[parts.back()] = std::move(value);
}

struct Cli {
  std::string config_path;
  std::vector<Override> overrides = make_overrides();
  bool verbose = false;

  PipelineConfig config() const {
    PipelineConfig base;
    json patch = json::object();
    for (const auto& o : overrides) {
      if (o.opt && o.opt->count() > 0) set_path(patch, o.key, parse_value(o));
    }
    if (!config_path.empty()) {
      base = load_config(config_path);
    } else if (!patch.contains("data") || !patch["data"].contains("prices")) {
      throw ConfigError("no --config given and no --prices to fall back on");
    } else {
      base.data.prices = "-";  // replaced by the patch; validation needs a value
      base.base_dir = fs::current_path();
    }
    return patch.empty() ? base : with_overrides(base, patch);
  }
};

Date parse_date_arg(const std::string& s) {
  try {
    return Date::parse(s);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
}

std::set<std::string> split_set(const std::string& s) {
  std::set<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.insert(item);
  }
  return out;
}

void print_written(const fs::path& p) { std::cout << "wrote " << p.string() << "\n"; }

int run_stage(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const StageError& e) {
    std::cerr << "stage " << e.stage() << " failed: " << e.what() << "\n";
    return kExitStage;
  } catch (const ComputeError& e) {
    std::cerr << "compute error: " << e.what() << "\n";
    return kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RicciFlowRec pipeline: curvature-aware ranking with root-cause paths"};
  app.require_subcommand(1);
  app.fallthrough();
  Cli cli;
  app.add_option("-c,--config", cli.config_path, "pipeline config JSON")->check(CLI::ExistingFile);
  app.add_flag("-v,--verbose", cli.verbose, "debug logging");
  for (auto& o : cli.overrides) o.opt = app.add_option(o.flag, o.value, o.help);

  std::string date, out, graph_in, curv_in, delta_in, ranking_in, score_in, day_dir, perturbed,
      targets, param, values, delta_out;
  std::uint64_t shock_seed = 0;

  auto* build = app.add_subcommand("build-graph", "build G_t from the raw inputs");
  build->add_option("--date", date, "snapshot date")->required();
  build->add_option("-o,--out", out, "graph JSON")->required();

  auto* curv = app.add_subcommand("curvature", "edge curvature of an exported graph");
  curv->add_option("--graph", graph_in, "graph JSON")->required()->check(CLI::ExistingFile);
  curv->add_option("-o,--out", out, "curvature CSV")->required();

  auto* flow = app.add_subcommand("flow", "Ricci flow on an exported graph");
  flow->add_option("--graph", graph_in, "graph JSON")->required()->check(CLI::ExistingFile);
  flow->add_option("-o,--out", out, "flow JSON")->required();
  flow->add_option("--delta-out", delta_out, "curvature-shift CSV")->required();
  flow->add_option("--prev-curvature", curv_in,
                   "earlier curvature CSV; with it the shift is taken across days");

  auto* score = app.add_subcommand("score", "score the assets of a graph");
  score->add_option("--graph", graph_in, "graph JSON")->required()->check(CLI::ExistingFile);
  score->add_option("--delta", delta_in, "curvature-shift CSV")->required()->check(CLI::ExistingFile);
  score->add_option("-o,--out", out, "scoreboard CSV")->required();

  auto* rank = app.add_subcommand("rank", "top-K ranking from a scoreboard");
  rank->add_option("--scoreboard", score_in, "scoreboard CSV")->required()->check(CLI::ExistingFile);
  rank->add_option("-o,--out", out, "ranking CSV")->required();

  auto* rca = app.add_subcommand("rca", "unstable zone and root-cause paths");
  rca->add_option("--graph", graph_in, "graph JSON")->required()->check(CLI::ExistingFile);
  rca->add_option("--delta", delta_in, "curvature-shift CSV")->required()->check(CLI::ExistingFile);
  rca->add_option("--ranking", ranking_in, "ranking CSV")->required()->check(CLI::ExistingFile);
  rca->add_option("--perturbed", perturbed, "comma-separated externally flagged nodes");
  rca->add_option("-o,--out", out, "output directory for zone.json, rca.json, rca.dot")->required();

  auto* perturb = app.add_subcommand("perturb", "run one day on shocked inputs");
  perturb->add_option("--date", date, "snapshot date")->required();
  perturb->add_option("--targets", targets, "comma-separated shock targets")->required();
  perturb->add_option("--shock-seed", shock_seed, "noise seed");
  perturb->add_option("-o,--out", out, "output day directory")->required();

  auto* eval = app.add_subcommand("eval", "synthetic-shock evaluation protocol");
  eval->add_option("-o,--out", out, "output directory (default <run dir>/eval)");

  auto* sweep = app.add_subcommand("sweep", "sensitivity sweep over alpha or theta");
  sweep->add_option("--param", param, "alpha or theta")->required()->check(CLI::IsMember({"alpha", "theta"}));
  sweep->add_option("--values", values, "comma-separated grid (default: 0.5,0.7,0.9 or -0.03,-0.05,-0.07)");
  sweep->add_option("-o,--out", out, "output directory (default <run dir>/sweep_<param>)");

  auto* report = app.add_subcommand("report", "markdown and DOT bundle for a day directory");
  report->add_option("--day", day_dir, "day directory")->required()->check(CLI::ExistingDirectory);
  report->add_option("-o,--out", out, "output markdown (default <day>/report.md)");

  auto* run = app.add_subcommand("run", "full pipeline over the configured date range");
  run->add_option("-o,--out", out, "run directory (default $RFR_RUN_ROOT/<run_name>)");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(cli.verbose ? spdlog::level::debug : spdlog::level::warn);

  return run_stage([&]() -> int {
    const PipelineConfig config = cli.config();
    const std::string hash = config_hash(config);
    // Inputs must come from the config this invocation runs with.
    const std::pair<fs::path, std::string> active{"<active config>", hash};

    if (*build) {
      const Dataset data = load_dataset(config);
      const Date d = parse_date_arg(date);
      const std::size_t i = frame_index(data.frames, d);
      require_warmup(config, data.frames, i);
      const std::span<const MarketFrame> history(data.frames.data(), i + 1);
      const GraphBuild g = build_graph(history, d, data.sources, config.assembly_options());
      write_atomic(out, dump(graph_json(g.graph, hash)));
      print_written(out);
      return kExitOk;
    }
    if (*curv) {
      const auto g = read_graph(graph_in);
      expect_same_hash({active, {graph_in, g.stamp.config_hash}});
      write_atomic(out, curvature_csv(curvature_map(g.value, config.curvature_options()), hash));
      print_written(out);
      return kExitOk;
    }
    if (*flow) {
      const auto g = read_graph(graph_in);
      expect_same_hash({active, {graph_in, g.stamp.config_hash}});
      const FlowTrace trace = simulate_flow(g.value, config.flow_config());
      DeltaTable table{g.value.date(), "flow", trace.delta, {}, {}};
      if (!curv_in.empty()) {
        const auto prev = read_curvature(curv_in);
        expect_same_hash({active, {graph_in, g.stamp.config_hash}, {curv_in, prev.stamp.config_hash}});
        CurvatureShift shift = cross_day_shift(prev.value, trace.initial);
        table = {g.value.date(), "cross_day", std::move(shift.delta), std::move(shift.born),
                 std::move(shift.died)};
      }
      write_atomic(out, dump(flow_json(trace, hash)));
      write_atomic(delta_out, delta_csv(table, hash));
      print_written(out);
      print_written(delta_out);
      return kExitOk;
    }
    if (*score) {
      const auto g = read_graph(graph_in);
      const auto d = read_delta(delta_in);
      expect_same_hash({active, {graph_in, g.stamp.config_hash}, {delta_in, d.stamp.config_hash}});
      const Dataset data = load_dataset(config);
      const ScoreBoard board = score_day(config, data.frames, g.value, d.value.delta, g.value.date());
      write_atomic(out, scoreboard_csv(board, hash));
      print_written(out);
      return kExitOk;
    }
    if (*rank) {
      const auto b = read_scoreboard(score_in);
      expect_same_hash({active, {score_in, b.stamp.config_hash}});
      write_atomic(out, ranking_csv(b.value, config.k, hash));
      print_written(out);
      return kExitOk;
    }
    if (*rca) {
      const auto g = read_graph(graph_in);
      const auto d = read_delta(delta_in);
      const auto r = read_ranking(ranking_in);
      expect_same_hash({active,
                        {graph_in, g.stamp.config_hash},
                        {delta_in, d.stamp.config_hash},
                        {ranking_in, r.stamp.config_hash}});
      const WeightedGraph wg = g.value.collapse();
      const UnstableZone zone = unstable_zone(wg, g.value.date(), d.value.delta, config.theta);
      RcaBundle bundle{g.value.date(), split_set(perturbed), {}};
      bundle.reports =
          rca_report(wg, r.value.assets, zone, bundle.perturbed, d.value.delta, config.rca_params());
      const fs::path dir(out);
      write_atomic(dir / DayFiles::kZone, dump(zone_json(zone, config.theta, hash)));
      write_atomic(dir / DayFiles::kRca, dump(rca_json(bundle, hash)));
      write_atomic(dir / DayFiles::kRcaDot, rca_dot(bundle));
      print_written(dir);
      return kExitOk;
    }
    if (*perturb) {
      const Dataset data = load_dataset(config);
      const Date d = parse_date_arg(date);
      const std::size_t i = frame_index(data.frames, d);
      const std::span<const MarketFrame> history(data.frames.data(), i + 1);
      ShockSpec spec{split_set(targets), config.eval.shock.multiplier,
                     config.eval.shock.sentiment_delta, shock_seed,
                     static_cast<std::size_t>(config.correlation_window)};
      const auto shocked = inject_shock(history, spec, &data.stats);
      const DayResult day = run_day(config, shocked, data.sources, d, spec.targets);
      write_day(day, out, config);
      write_atomic(fs::path(out) / "shock.json",
                   dump({{"schema", "shock"},
                         {"schema_version", kSchemaVersion},
                         {"config_hash", hash},
                         {"date", d.str()},
                         {"targets", spec.targets},
                         {"multiplier", spec.multiplier},
                         {"sentiment_delta", spec.sentiment_delta},
                         {"seed", spec.seed},
                         {"window", spec.window}}));
      print_written(out);
      return kExitOk;
    }
    if (*eval) {
      const Dataset data = load_dataset(config);
      const fs::path dir = out.empty() ? default_run_dir(config) / "eval" : fs::path(out);
      const ProtocolResult result = run_protocol(config, data);
      write_protocol(result, dir, config);
      std::cout << metrics_json(result.metrics).dump(2) << "\n";
      return result.metrics.failed_trials ? kExitPartial : kExitOk;
    }
    if (*sweep) {
      std::vector<double> grid;
      const std::string text = values.empty()
                                   ? (param == "alpha" ? "0.5,0.7,0.9" : "-0.03,-0.05,-0.07")
                                   : values;
      for (const auto& v : split_set(text)) grid.push_back(std::stod(v));
      std::sort(grid.begin(), grid.end());
      const Dataset data = load_dataset(config);
      const SweepResult result = sensitivity_sweep(config, data, param, grid);
      const fs::path dir = out.empty() ? default_run_dir(config) / ("sweep_" + param) : fs::path(out);
      write_atomic(dir / "sweep.csv", sweep_csv(result, hash));
      write_atomic(dir / "sweep.md", sweep_markdown(result));
      std::cout << sweep_markdown(result);
      return kExitOk;
    }
    if (*report) {
      const fs::path dir(day_dir);
      const auto board = read_scoreboard(dir / DayFiles::kScoreboard);
      const auto ranking = read_ranking(dir / DayFiles::kRanking);
      const auto rca_in = read_rca(dir / DayFiles::kRca);
      expect_same_hash({{dir / DayFiles::kScoreboard, board.stamp.config_hash},
                        {dir / DayFiles::kRanking, ranking.stamp.config_hash},
                        {dir / DayFiles::kRca, rca_in.stamp.config_hash}});
      std::string md = "# Recommendations " + ranking.value.date.str() + "\n\n";
      md += "config hash `" + ranking.stamp.config_hash + "`\n\n";
      md += "| rank | asset | r_hat | risk | score | RCA path | stop |\n|---|---|---|---|---|---|---|\n";
      for (const auto& asset : ranking.value.assets) {
        const ScoreEntry* e = nullptr;
        for (const auto& x : board.value.entries) {
          if (x.asset == asset) e = &x;
        }
        if (!e) throw DataError("ranked asset " + asset + " is missing from the scoreboard");
        std::string path = "-", reason = "-";
        if (auto it = rca_in.value.reports.find(asset); it != rca_in.value.reports.end()) {
          reason = std::string(to_string(it->second.reason));
          if (it->second.path) {
            path.clear();
            for (const auto& n : it->second.path->nodes) path += (path.empty() ? "" : " → ") + n;
          }
        }
        char nums[128];
        std::snprintf(nums, sizeof(nums), "%.6f | %.6f | %.6f", e->r_hat, e->risk, e->score);
        md += "| " + std::to_string(e->rank) + " | " + asset + " | " + nums + " | " + path + " | " +
              reason + " |\n";
      }
      md += "\nRCA subgraphs: `rca.dot` (render with `dot -Tsvg`).\n";
      const fs::path md_out = out.empty() ? dir / "report.md" : fs::path(out);
      write_atomic(md_out, md);
      write_atomic(md_out.parent_path() / DayFiles::kRcaDot, rca_dot(rca_in.value));
      print_written(md_out);
      return kExitOk;
    }
    // run
    const Dataset data = load_dataset(config);
    const fs::path dir = out.empty() ? default_run_dir(config) : fs::path(out);
    const RangeResult result = run_range(config, data, eligible_dates(config, data.frames), dir);
    std::cout << "wrote " << (dir / "manifest.json").string() << " ("
              << result.manifest["days"].size() - result.failures.size() << " days ok, "
              << result.failures.size() << " failed)\n";
    return result.exit_code();
  });
}
