#include "rfr/stress_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <spdlog/spdlog.h>

#include "rfr/csv.hpp"
#include "rfr/digest.hpp"
#include "rfr/errors.hpp"

namespace rfr {

using nlohmann::json;
namespace fs = std::filesystem;

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(std::mt19937_64& rng) {
  // Box-Muller; 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::string> sample_without_replacement(std::vector<std::string> pool, std::size_t n,
                                                    std::mt19937_64& rng) {
  if (n > pool.size()) {
    throw ConfigError("cannot sample " + std::to_string(n) + " targets from " +
                      std::to_string(pool.size()) + " candidates");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(n);
  return pool;
}

void ShockSpec::validate() const {
  if (targets.empty()) throw ConfigError("shock needs at least one target");
  if (!(multiplier > 1.0)) throw ConfigError("shock multiplier must exceed 1");
  if (!(sentiment_delta <= 0.0)) throw ConfigError("shock sentiment delta must be <= 0");
  if (window < 2) throw ConfigError("shock window must cover at least 2 frames");
}

std::vector<MarketFrame> inject_shock(std::span<const MarketFrame> frames, const ShockSpec& spec,
                                      const NormalizationStats* stats) {
  spec.validate();
  std::vector<MarketFrame> out(frames.begin(), frames.end());
  const std::size_t begin = out.size() - std::min(spec.window, out.size());
  std::mt19937_64 rng(spec.seed);

  for (const auto& target : spec.targets) {
    std::vector<EntityDay*> days;
    for (std::size_t i = begin; i < out.size(); ++i) {
      auto it = out[i].entities.find(target);
      if (it != out[i].entities.end()) days.push_back(&it->second);
    }
    if (days.empty()) throw DataError("shock target " + target + " is not in the shock window");

    const double n = static_cast<double>(days.size());
    std::vector<double> dev(days.size()), z(days.size());
    double mean = 0.0;
    for (const auto* d : days) mean += d->raw.log_return;
    mean /= n;
    double dd = 0.0;
    for (std::size_t i = 0; i < days.size(); ++i) {
      dev[i] = days[i]->raw.log_return - mean;
      dd += dev[i] * dev[i];
    }
    for (auto& v : z) v = standard_normal(rng);
    if (days.size() >= 2) {
      double zm = 0.0;
      for (double v : z) zm += v;
      zm /= n;
      for (auto& v : z) v -= zm;
      if (dd > 0.0) {
        double zd = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) zd += z[i] * dev[i];
        for (std::size_t i = 0; i < z.size(); ++i) z[i] -= zd / dd * dev[i];
      }
      double zz = 0.0;
      for (double v : z) zz += v * v;
      const double sigma = std::sqrt(dd / n);
      const double sigma_z = std::sqrt(zz / n);
      if (sigma > 0.0 && sigma_z > 0.0) {
        const double b = sigma * std::sqrt(spec.multiplier * spec.multiplier - 1.0) / sigma_z;
        for (std::size_t i = 0; i < days.size(); ++i) days[i]->raw.log_return += b * z[i];
      }
    }
    for (auto* d : days) {
      if (d->raw.realised_vol) *d->raw.realised_vol *= spec.multiplier;
      d->raw.sentiment = std::clamp(d->raw.sentiment + spec.sentiment_delta, -1.0, 1.0);
      if (stats) {
        auto it = stats->per_entity.find(target);
        if (it == stats->per_entity.end()) {
          throw DataError("no training statistics for shock target " + target);
        }
        d->features = normalize(d->raw, it->second);
      }
    }
  }
  return out;
}

double ndcg_at_k(const std::vector<std::string>& ranking, const std::map<std::string, double>& gains,
                 std::size_t k) {
  if (ranking.empty()) throw DataError("NDCG needs a nonempty ranking");
  std::vector<double> all;
  for (const auto& [asset, g] : gains) {
    if (!(g >= 0.0)) throw DataError("relevance gain for " + asset + " is negative");
    all.push_back(g);
  }
  double dcg = 0.0;
  for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i) {
    auto it = gains.find(ranking[i]);
    if (it != gains.end()) dcg += it->second / std::log2(static_cast<double>(i) + 2.0);
  }
  std::sort(all.begin(), all.end(), std::greater<>());
  double ideal = 0.0;
  for (std::size_t i = 0; i < std::min(k, all.size()); ++i) {
    ideal += all[i] / std::log2(static_cast<double>(i) + 2.0);
  }
  return ideal > 0.0 ? dcg / ideal : 0.0;
}

std::map<std::string, double> forward_returns(std::span<const MarketFrame> frames, Date date,
                                              int horizon) {
  const std::size_t index = frame_index(frames, date);
  const auto h = static_cast<std::size_t>(horizon);
  if (index + h >= frames.size()) {
    throw DataError("forward returns for " + date.str() + " need " + std::to_string(h) +
                    " later frames");
  }
  std::map<std::string, double> out;
  for (const auto& [id, day] : frames[index].entities) {
    if (day.kind != EntityKind::Asset) continue;
    double sum = 0.0;
    bool complete = true;
    for (std::size_t i = index + 1; i <= index + h && complete; ++i) {
      const auto* d = frames[i].find(id);
      if (d) {
        sum += d->raw.log_return;
      } else {
        complete = false;
      }
    }
    if (complete) out[id] = sum;
  }
  return out;
}

std::map<std::string, double> quintile_gains(const std::map<std::string, double>& forward) {
  std::vector<std::pair<std::string, double>> order(forward.begin(), forward.end());
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::map<std::string, double> gains;
  const std::size_t n = order.size();
  for (std::size_t i = 0; i < n; ++i) {
    gains[order[i].first] = 4.0 - static_cast<double>((5 * i) / n);
  }
  return gains;
}

namespace {

double top_mean(const std::vector<double>& scores) {
  const std::size_t n = std::min<std::size_t>(10, scores.size());
  if (n == 0) throw DataError("a trial has no ranked assets");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += scores[i];
  return sum / static_cast<double>(n);
}

// Welford, so identical inputs give exactly zero.
double population_std(const std::vector<double>& xs) {
  double mean = 0.0, m2 = 0.0;
  std::size_t n = 0;
  for (double x : xs) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  return n ? std::sqrt(m2 / static_cast<double>(n)) : 0.0;
}

}  // namespace

double top10_volatility(const std::vector<std::vector<double>>& top_scores) {
  if (top_scores.size() < 2) throw DataError("Top-10 volatility needs at least 2 trials");
  std::vector<double> means;
  for (const auto& s : top_scores) means.push_back(top_mean(s));
  return population_std(means);
}

double within_list_volatility(const std::vector<std::vector<double>>& top_scores) {
  if (top_scores.empty()) throw DataError("within-list volatility needs at least 1 trial");
  double sum = 0.0;
  for (const auto& s : top_scores) {
    std::vector<double> head(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(10, s.size())));
    sum += population_std(head);
  }
  return sum / static_cast<double>(top_scores.size());
}

Date evaluation_date(const PipelineConfig& config, const Dataset& data) {
  if (config.eval.date) return *config.eval.date;
  const auto h = static_cast<std::size_t>(config.horizon);
  if (data.frames.size() <= h) throw DataError("dataset is shorter than the forecast horizon");
  return data.frames[data.frames.size() - 1 - h].date;
}

namespace {

std::vector<std::string> ranking_of(const ScoreBoard& board) {
  std::vector<std::string> out;
  for (const auto& e : board.entries) out.push_back(e.asset);
  return out;
}

std::vector<double> scores_of(const ScoreBoard& board) {
  std::vector<double> out;
  for (const auto& e : board.entries) out.push_back(e.score);
  return out;
}

}  // namespace

ProtocolResult run_protocol(const PipelineConfig& config, const Dataset& data) {
  const auto& eval = config.eval;
  if (eval.trials < 1) throw ConfigError("eval.trials must be at least 1");
  const bool control = eval.shock.mode == "control";
  ProtocolResult result;
  auto& m = result.metrics;
  m.date = evaluation_date(config, data);
  m.mode = eval.shock.mode;
  m.trials = eval.trials;
  m.config_hash = config_hash(config);

  const std::size_t index = frame_index(data.frames, m.date);
  const std::span<const MarketFrame> history(data.frames.data(), index + 1);
  result.baseline = run_day(config, history, data.sources, m.date);
  const auto gains = quintile_gains(forward_returns(data.frames, m.date, config.horizon));
  m.baseline_ndcg_at_10 = ndcg_at_10(ranking_of(result.baseline.board), gains);

  std::vector<std::string> pool;
  for (const auto& [id, day] : data.frames[index].entities) {
    if (day.kind == EntityKind::Asset) pool.push_back(id);
  }
  std::mt19937_64 rng(eval.seed);
  std::vector<std::vector<double>> top_scores;
  std::vector<RcaTrial> rca_trials;
  double ndcg_sum = 0.0;

  for (int t = 0; t < eval.trials; ++t) {
    TrialResult trial;
    trial.id = t;
    trial.baseline_ranking = ranking_of(result.baseline.board);
    const auto sampled =
        eval.shock.targets.empty()
            ? sample_without_replacement(pool, static_cast<std::size_t>(eval.shock.targets_per_trial), rng)
            : eval.shock.targets;
    trial.targets = {sampled.begin(), sampled.end()};
    trial.shock_seed = rng();
    try {
      std::vector<MarketFrame> perturbed(history.begin(), history.end());
      if (!control) {
        ShockSpec spec{trial.targets, eval.shock.multiplier, eval.shock.sentiment_delta,
                       trial.shock_seed, static_cast<std::size_t>(config.correlation_window)};
        perturbed = inject_shock(history, spec, &data.stats);
      }
      DayResult day = run_day(config, perturbed, data.sources, m.date, trial.targets);
      trial.perturbed_ranking = ranking_of(day.board);
      trial.perturbed_scores = day.board.entries;
      trial.rca = day.rca.reports;
      trial.ndcg = ndcg_at_10(trial.perturbed_ranking, gains);
      for (const auto& [asset, outcome] : trial.rca) {
        if (outcome.path && trial.targets.count(outcome.path->nodes.back())) trial.hit = true;
      }
      top_scores.push_back(scores_of(day.board));
      rca_trials.push_back({trial.rca, trial.targets});
      ndcg_sum += trial.ndcg;
      trial.day = std::move(day);
    } catch (const std::exception& e) {
      spdlog::error("trial {} failed: {}", t, e.what());
      trial.error = e.what();
      ++m.failed_trials;
    }
    result.trials.push_back(std::move(trial));
  }

  const std::size_t done = top_scores.size();
  if (done > 0) {
    m.ndcg_at_10 = ndcg_sum / static_cast<double>(done);
    m.within_list_volatility = within_list_volatility(top_scores);
    m.rca_fidelity = rca_fidelity(rca_trials);
  }
  if (done >= 2) m.top10_volatility = top10_volatility(top_scores);
  return result;
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string opt_str(const std::optional<double>& v) {
  return v ? csv::format_double(*v) : std::string("n/a");
}

std::string fixed(const std::optional<double>& v, int digits = 4) {
  if (!v) return "n/a";
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(digits);
  ss << *v;
  return ss.str();
}

std::string join(const std::set<std::string>& items, char sep) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

}  // namespace

json metrics_json(const MetricsReport& r) {
  return {{"schema", "metrics"},
          {"schema_version", kSchemaVersion},
          {"config_hash", r.config_hash},
          {"date", r.date.str()},
          {"mode", r.mode},
          {"trials", r.trials},
          {"failed_trials", r.failed_trials},
          {"ndcg_at_10", r.ndcg_at_10},
          {"baseline_ndcg_at_10", r.baseline_ndcg_at_10},
          {"top10_volatility", opt(r.top10_volatility)},
          {"within_list_volatility", opt(r.within_list_volatility)},
          {"rca_fidelity", opt(r.rca_fidelity)}};
}

std::string trials_csv(const ProtocolResult& result) {
  std::string out = stamp_line({"trials", kSchemaVersion, result.metrics.config_hash,
                                {{"date", result.metrics.date.str()}}});
  out += "trial,targets,shock_seed,ndcg_at_10,top10_mean,hit,terminals,error\n";
  for (const auto& t : result.trials) {
    std::set<std::string> terminals;
    for (const auto& [_, o] : t.rca) {
      if (o.path) terminals.insert(o.path->nodes.back());
    }
    std::string top_mean_text;
    if (!t.error) {
      double sum = 0.0;
      const std::size_t n = std::min<std::size_t>(10, t.perturbed_scores.size());
      for (std::size_t i = 0; i < n; ++i) sum += t.perturbed_scores[i].score;
      top_mean_text = n ? csv::format_double(sum / static_cast<double>(n)) : "";
    }
    std::string error = t.error.value_or("");
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    out += std::to_string(t.id) + "," + join(t.targets, ';') + "," + std::to_string(t.shock_seed) +
           "," + (t.error ? "" : csv::format_double(t.ndcg)) + "," + top_mean_text + "," +
           (t.hit ? "1" : "0") + "," + join(terminals, ';') + "," + error + "\n";
  }
  return out;
}

std::string summary_markdown(const ProtocolResult& result) {
  const auto& m = result.metrics;
  std::string out = "# Stress evaluation " + m.date.str() + "\n\n";
  out += "config hash `" + m.config_hash + "`, mode `" + m.mode + "`, " + std::to_string(m.trials) +
         " trials (" + std::to_string(m.failed_trials) + " failed)\n\n";
  out += "| metric | value |\n|---|---|\n";
  out += "| NDCG@10 (perturbed, mean) | " + fixed(m.ndcg_at_10) + " |\n";
  out += "| NDCG@10 (baseline) | " + fixed(m.baseline_ndcg_at_10) + " |\n";
  out += "| Top-10 Volatility | " + fixed(m.top10_volatility, 6) + " |\n";
  out += "| within-list volatility | " + fixed(m.within_list_volatility, 6) + " |\n";
  out += "| RCA Fidelity | " + fixed(m.rca_fidelity) + " |\n\n";
  out += "| trial | targets | NDCG@10 | hit | error |\n|---|---|---|---|---|\n";
  for (const auto& t : result.trials) {
    out += "| " + std::to_string(t.id) + " | " + join(t.targets, ' ') + " | " +
           (t.error ? std::string("-") : fixed(t.ndcg)) + " | " + (t.hit ? "yes" : "no") + " | " +
           t.error.value_or("") + " |\n";
  }
  return out;
}

void write_protocol(const ProtocolResult& result, const fs::path& dir, const PipelineConfig& config) {
  write_atomic(dir / "metrics.json", dump(metrics_json(result.metrics)));
  write_atomic(dir / "trials.csv", trials_csv(result));
  write_atomic(dir / "summary.md", summary_markdown(result));
  write_day(result.baseline, dir / "baseline", config);
  for (const auto& t : result.trials) {
    if (!t.day) continue;
    char name[16];
    std::snprintf(name, sizeof(name), "%03d", t.id);
    write_day(*t.day, dir / "trials" / name, config);
  }
}

SweepResult sensitivity_sweep(const PipelineConfig& config, const Dataset& data,
                              const std::string& parameter, const std::vector<double>& values) {
  if (parameter != "alpha" && parameter != "theta") {
    throw ConfigError("sweep parameter must be alpha or theta, got '" + parameter + "'");
  }
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  SweepResult sweep{parameter, {}};
  for (double v : values) {
    const PipelineConfig c = with_overrides(config, json{{parameter, v}});
    sweep.rows.push_back({v, run_protocol(c, data).metrics});
  }
  return sweep;
}

std::string sweep_markdown(const SweepResult& sweep) {
  const std::string name = sweep.parameter == "alpha" ? "α" : "θ";
  std::string out = "| " + name + " | NDCG@10 | Top-10 Volatility | RCA Fidelity | AUC |\n";
  out += "|---|---|---|---|---|\n";
  for (const auto& row : sweep.rows) {
    out += "| " + csv::format_double(row.value) + " | " + fixed(row.metrics.ndcg_at_10) + " | " +
           fixed(row.metrics.top10_volatility, 6) + " | " + fixed(row.metrics.rca_fidelity) +
           " | n/a |\n";
  }
  out += "\nAUC is not reported: no definition of it is available for this ranking task.\n";
  return out;
}

std::string sweep_csv(const SweepResult& sweep, const std::string& config_hash) {
  std::string out = stamp_line({"sweep", kSchemaVersion, config_hash, {{"parameter", sweep.parameter}}});
  out += "value,ndcg_at_10,top10_volatility,rca_fidelity,auc,config_hash\n";
  for (const auto& row : sweep.rows) {
    out += csv::format_double(row.value) + "," + csv::format_double(row.metrics.ndcg_at_10) + "," +
           opt_str(row.metrics.top10_volatility) + "," + opt_str(row.metrics.rca_fidelity) +
           ",unreproducible," + row.metrics.config_hash + "\n";
  }
  return out;
}

}  // namespace rfr
