#include "rfr/config.hpp"

#include <fstream>
#include <set>

#include "rfr/digest.hpp"
#include "rfr/errors.hpp"

namespace rfr {

using nlohmann::json;

std::filesystem::path PipelineConfig::resolve(const std::string& path) const {
  if (path.empty()) return {};
  std::filesystem::path p(path);
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

void PipelineConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(!data.prices.empty(), "data.prices is required");
  require(correlation_window >= 2, "correlation_window must be at least 2");
  require(history_window >= correlation_window + 1,
          "history_window must exceed correlation_window");
  require(graph_top_k >= 1, "graph_top_k must be at least 1");
  require(!min_edge_weight || *min_edge_weight > 0.0, "min_edge_weight must be positive");
  require(p_idle >= 0.0 && p_idle < 1.0, "p_idle must lie in [0, 1)");
  require(flow_iters >= 0, "flow_iters must be non-negative");
  require(eta > 0.0, "eta must be positive");
  require(horizon >= 1, "horizon must be at least 1");
  require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
  require(lambda > 0.0, "lambda must be positive");
  require(k >= 1, "k must be at least 1");
  require(h_max >= 1, "h_max must be at least 1");
  require(epsilon > 0.0, "epsilon must be positive");
  require(!(start && end) || *start <= *end, "start must not follow end");
  require(eval.trials >= 1, "eval.trials must be at least 1");
  require(eval.shock.mode == "shock" || eval.shock.mode == "control",
          "eval.shock.mode must be shock or control");
  require(eval.shock.multiplier > 1.0, "eval.shock.multiplier must exceed 1");
  require(eval.shock.sentiment_delta <= 0.0, "eval.shock.sentiment_delta must be <= 0");
  require(eval.shock.targets_per_trial >= 1, "eval.shock.targets_per_trial must be at least 1");
}

FlowConfig PipelineConfig::flow_config() const {
  FlowConfig f;
  f.step = eta;
  f.iterations = flow_iters;
  f.renormalize = renormalize;
  f.frozen_curvature = frozen_curvature;
  f.curvature = curvature_options();
  return f;
}

CurvatureOptions PipelineConfig::curvature_options() const {
  return {curvature, p_idle, augmented_forman};
}

RcaParams PipelineConfig::rca_params() const { return {theta, h_max, epsilon}; }

ScoringOptions PipelineConfig::scoring_options() const { return {scoring, alpha, lambda}; }

AssemblyOptions PipelineConfig::assembly_options() const {
  return {graph_top_k, static_cast<std::size_t>(correlation_window), min_edge_weight};
}

namespace {

json opt_date(const std::optional<Date>& d) { return d ? json(d->str()) : json(nullptr); }

std::optional<Date> read_opt_date(const json& j) {
  if (j.is_null()) return std::nullopt;
  return Date::parse(j.get<std::string>());
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + where + key + "'");
  }
}

}  // namespace

json to_json(const PipelineConfig& c) {
  json j;
  j["run_name"] = c.run_name;
  j["data"] = {{"prices", c.data.prices},         {"sentiment", c.data.sentiment},
               {"macro", c.data.macro},           {"knowledge", c.data.knowledge},
               {"embeddings", c.data.embeddings}, {"comentions", c.data.comentions}};
  j["universe"] = c.universe;
  j["train_end"] = opt_date(c.train_end);
  j["start"] = opt_date(c.start);
  j["end"] = opt_date(c.end);
  j["history_window"] = c.history_window;
  j["correlation_window"] = c.correlation_window;
  j["graph_top_k"] = c.graph_top_k;
  j["min_edge_weight"] = c.min_edge_weight ? json(*c.min_edge_weight) : json(nullptr);
  j["curvature"] = std::string(to_string(c.curvature));
  j["p_idle"] = c.p_idle;
  j["augmented_forman"] = c.augmented_forman;
  j["flow_iters"] = c.flow_iters;
  j["eta"] = c.eta;
  j["renormalize"] = c.renormalize;
  j["frozen_curvature"] = c.frozen_curvature;
  j["horizon"] = c.horizon;
  j["scoring"] = std::string(to_string(c.scoring));
  j["alpha"] = c.alpha;
  j["lambda"] = c.lambda;
  j["k"] = c.k;
  j["theta"] = c.theta;
  j["h_max"] = c.h_max;
  j["epsilon"] = c.epsilon;
  j["shift_source"] = c.shift_source == ShiftSource::Flow ? "flow" : "cross_day";
  j["cross_day_shift"] = c.cross_day_shift;
  j["eval"] = {{"date", opt_date(c.eval.date)},
               {"trials", c.eval.trials},
               {"seed", c.eval.seed},
               {"shock",
                {{"mode", c.eval.shock.mode},
                 {"multiplier", c.eval.shock.multiplier},
                 {"sentiment_delta", c.eval.shock.sentiment_delta},
                 {"targets_per_trial", c.eval.shock.targets_per_trial},
                 {"targets", c.eval.shock.targets}}}};
  return j;
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  try {
    reject_unknown(j,
                   {"run_name", "data", "universe", "train_end", "start", "end", "history_window",
                    "correlation_window", "graph_top_k", "min_edge_weight", "curvature", "p_idle",
                    "augmented_forman", "flow_iters", "eta", "renormalize", "frozen_curvature",
                    "horizon", "scoring", "alpha", "lambda", "k", "theta", "h_max", "epsilon",
                    "shift_source", "cross_day_shift", "eval"},
                   "");
    auto get = [&](const char* key, auto& out) {
      if (j.contains(key)) out = j.at(key).get<std::decay_t<decltype(out)>>();
    };
    get("run_name", c.run_name);
    if (j.contains("data")) {
      const auto& d = j.at("data");
      reject_unknown(d, {"prices", "sentiment", "macro", "knowledge", "embeddings", "comentions"},
                     "data.");
      auto str = [&](const char* key, std::string& out) {
        if (d.contains(key)) out = d.at(key).get<std::string>();
      };
      str("prices", c.data.prices);
      str("sentiment", c.data.sentiment);
      str("macro", c.data.macro);
      str("knowledge", c.data.knowledge);
      str("embeddings", c.data.embeddings);
      str("comentions", c.data.comentions);
    }
    get("universe", c.universe);
    if (j.contains("train_end")) c.train_end = read_opt_date(j.at("train_end"));
    if (j.contains("start")) c.start = read_opt_date(j.at("start"));
    if (j.contains("end")) c.end = read_opt_date(j.at("end"));
    get("history_window", c.history_window);
    get("correlation_window", c.correlation_window);
    get("graph_top_k", c.graph_top_k);
    if (j.contains("min_edge_weight") && !j.at("min_edge_weight").is_null()) {
      c.min_edge_weight = j.at("min_edge_weight").get<double>();
    }
    if (j.contains("curvature")) {
      c.curvature = curvature_kind_from_string(j.at("curvature").get<std::string>());
    }
    get("p_idle", c.p_idle);
    get("augmented_forman", c.augmented_forman);
    get("flow_iters", c.flow_iters);
    get("eta", c.eta);
    get("renormalize", c.renormalize);
    get("frozen_curvature", c.frozen_curvature);
    get("horizon", c.horizon);
    if (j.contains("scoring")) {
      c.scoring = scoring_form_from_string(j.at("scoring").get<std::string>());
    }
    get("alpha", c.alpha);
    get("lambda", c.lambda);
    get("k", c.k);
    get("theta", c.theta);
    get("h_max", c.h_max);
    get("epsilon", c.epsilon);
    if (j.contains("shift_source")) {
      const auto s = j.at("shift_source").get<std::string>();
      if (s == "flow") {
        c.shift_source = ShiftSource::Flow;
      } else if (s == "cross_day") {
        c.shift_source = ShiftSource::CrossDay;
      } else {
        throw ConfigError("shift_source must be flow or cross_day");
      }
    }
    get("cross_day_shift", c.cross_day_shift);
    if (j.contains("eval")) {
      const auto& e = j.at("eval");
      reject_unknown(e, {"date", "trials", "seed", "shock"}, "eval.");
      if (e.contains("date")) c.eval.date = read_opt_date(e.at("date"));
      if (e.contains("trials")) c.eval.trials = e.at("trials").get<int>();
      if (e.contains("seed")) c.eval.seed = e.at("seed").get<std::uint64_t>();
      if (e.contains("shock")) {
        const auto& s = e.at("shock");
        reject_unknown(s, {"mode", "multiplier", "sentiment_delta", "targets_per_trial", "targets"},
                       "eval.shock.");
        auto& sh = c.eval.shock;
        if (s.contains("mode")) sh.mode = s.at("mode").get<std::string>();
        if (s.contains("multiplier")) sh.multiplier = s.at("multiplier").get<double>();
        if (s.contains("sentiment_delta")) sh.sentiment_delta = s.at("sentiment_delta").get<double>();
        if (s.contains("targets_per_trial")) sh.targets_per_trial = s.at("targets_per_trial").get<int>();
        if (s.contains("targets")) sh.targets = s.at("targets").get<std::vector<std::string>>();
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  } catch (const DataError& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  PipelineConfig c = config_from_json(j);
  c.base_dir = path.parent_path();
  return c;
}

PipelineConfig with_overrides(const PipelineConfig& base, const json& overrides) {
  json j = to_json(base);
  j.merge_patch(overrides);
  PipelineConfig c = config_from_json(j);
  c.base_dir = base.base_dir;
  return c;
}

std::string config_hash(const PipelineConfig& config) {
  return sha256_hex(to_json(config).dump());
}

}  // namespace rfr
