/* Copyright 2026 The speclab Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "speclab/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "speclab/enumerate.hpp"
#include "speclab/exact.hpp"
#include "speclab/model_io.hpp"
#include "speclab/tradeoff.hpp"

namespace speclab::cli {

namespace {

using nlohmann::json;

constexpr double kIdentityTolerance = 1e-12;

// Integers built in code are signed in nlohmann::json; parsed ones unsigned.
bool is_nonnegative_integer(const json& value) {
  return value.is_number_unsigned() ||
         (value.is_number_integer() && value.get<std::int64_t>() >= 0);
}

std::size_t get_count(const json& config, const char* key,
                      std::size_t fallback, std::size_t minimum) {
  if (!config.contains(key)) return fallback;
  const json& value = config.at(key);
  if (!is_nonnegative_integer(value) || value.get<std::uint64_t>() < minimum) {
    throw ConfigError(std::string("\"") + key + "\" must be an integer >= " +
                      std::to_string(minimum));
  }
  return value.get<std::size_t>();
}

std::uint64_t get_seed(const json& config) {
  if (!config.contains("seed")) return 0;
  const json& value = config.at("seed");
  if (!is_nonnegative_integer(value)) {
    throw ConfigError("\"seed\" must be a nonnegative integer");
  }
  return value.get<std::uint64_t>();
}

double get_eps(const json& value, const char* what) {
  if (!value.is_number() || !(value.get<double>() >= 0.0) ||
      !std::isfinite(value.get<double>())) {
    throw ConfigError(std::string(what) + " must be a finite number >= 0");
  }
  return value.get<double>();
}

std::vector<std::size_t> batch_range(const json& config) {
  if (!config.contains("M_range")) {
    throw ConfigError("\"M_range\" is required");
  }
  const json& range = config.at("M_range");
  std::vector<std::size_t> batches;
  if (range.is_array()) {
    for (const json& m : range) {
      if (!is_nonnegative_integer(m) || m.get<std::uint64_t>() == 0) {
        throw ConfigError("\"M_range\" entries must be integers >= 1");
      }
      batches.push_back(m.get<std::size_t>());
    }
  } else if (range.is_object()) {
    const std::size_t from = get_count(range, "from", 1, 1);
    const std::size_t to = get_count(range, "to", from, from);
    for (std::size_t m = from; m <= to; ++m) batches.push_back(m);
  } else {
    throw ConfigError("\"M_range\" must be a list or {\"from\", \"to\"}");
  }
  if (batches.empty()) throw ConfigError("\"M_range\" is empty");
  return batches;
}

std::vector<double> eps_grid(const json& config) {
  if (!config.contains("eps_grid")) throw ConfigError("\"eps_grid\" is required");
  const json& grid = config.at("eps_grid");
  std::vector<double> values;
  if (grid.is_array()) {
    for (const json& e : grid) values.push_back(get_eps(e, "eps_grid entry"));
  } else if (grid.is_object()) {
    const double from = get_eps(grid.value("from", json(0.0)), "\"from\"");
    const double to = get_eps(grid.value("to", json(from)), "\"to\"");
    const std::size_t count = get_count(grid, "count", 2, 1);
    if (to < from) throw ConfigError("eps_grid \"to\" is below \"from\"");
    for (std::size_t i = 0; i < count; ++i) {
      values.push_back(count == 1 ? from
                                  : from + (to - from) * static_cast<double>(i) /
                                               static_cast<double>(count - 1));
    }
  } else {
    throw ConfigError("\"eps_grid\" must be a list or {\"from\", \"to\", \"count\"}");
  }
  if (values.empty()) throw ConfigError("\"eps_grid\" is empty");
  return values;
}

Dist dist_from_json(const json& value, const char* what) {
  if (!value.is_array()) throw ConfigError(std::string(what) + " must be a list");
  std::vector<double> probs;
  for (const json& v : value) {
    if (!v.is_number()) throw ConfigError(std::string(what) + " has a non-number");
    probs.push_back(v.get<double>());
  }
  try {
    return Dist(std::move(probs));
  } catch (const InvalidDistribution& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

std::string header(const json& config) {
  return "# config: " + config.dump() + "\n";
}

std::string render(const json& config, const std::vector<std::string>& columns,
                   const std::vector<std::vector<std::string>>& rows,
                   const json& rows_json, Format format) {
  if (format == Format::kJson) {
    return json{{"config", config}, {"rows", rows_json}}.dump(2) + "\n";
  }
  std::ostringstream out;
  out << header(config);
  for (std::size_t i = 0; i < columns.size(); ++i) {
    out << (i ? "," : "") << columns[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
  return out.str();
}

json real_json(double value) {
  if (!std::isfinite(value)) return nullptr;
  return value;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace

json effective_config(json config, const Overrides& overrides) {
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  if (overrides.seed) config["seed"] = *overrides.seed;
  if (overrides.runs) config["runs"] = *overrides.runs;
  return config;
}

AnyPair pair_from_config(const json& config,
                         const std::filesystem::path& base_dir) {
  if (!config.contains("model")) throw ConfigError("\"model\" is required");
  json model = config.at("model");
  if (model.is_string()) {
    const std::filesystem::path path = base_dir / model.get<std::string>();
    model = parse_json(read_file(path), path.string());
  }
  return markov_pair_from_json(model);
}

Algorithm algorithm_from_config(const json& config) {
  const json name = config.value("algorithm", json("sd"));
  if (!name.is_string()) throw ConfigError("\"algorithm\" must be a string");
  const std::string algo = name.get<std::string>();
  if (algo == "sd") return SpeculativeAlgorithm{};
  if (algo == "autoregressive") return AutoregressiveAlgorithm{};
  if (algo == "batch") {
    if (!config.contains("M")) throw ConfigError("batch needs \"M\"");
    return BatchAlgorithm{get_count(config, "M", 1, 1)};
  }
  if (algo == "opt" || algo == "uno") {
    if (!config.contains("eps")) throw ConfigError(algo + " needs \"eps\"");
    const double eps = get_eps(config.at("eps"), "\"eps\"");
    return GenericAlgorithm{algo == "opt" ? decoding_opt_policy(eps)
                                          : decoding_uno_policy(eps),
                            algo + "(eps=" + format_real(eps) + ")"};
  }
  throw ConfigError("unknown algorithm \"" + algo + "\"");
}

std::string cmd_exact(const json& raw, const Overrides& overrides) {
  const json config = effective_config(raw, overrides);
  const AnyPair any = pair_from_config(config, overrides.base_dir);
  const MarkovPair& pair = std::get<MarkovPair>(any);
  const Algorithm algorithm = algorithm_from_config(config);
  const std::size_t horizon = pair.horizon();
  const double sd = expected_rejections_sd(pair);

  std::vector<std::size_t> batches{1};
  if (const auto* a = std::get_if<BatchAlgorithm>(&algorithm)) batches = {a->batch};
  if (config.contains("M_range")) batches = batch_range(config);

  const std::vector<std::string> columns{
      "algorithm", "M", "expected_rejections_sd", "batch_improvement",
      "expected_rejections", "acceleration_rate"};
  std::vector<std::vector<std::string>> rows;
  json rows_json = json::array();
  auto emit = [&](const std::string& name, const std::string& m,
                  double improvement, double total) {
    const double rate = acceleration_rate(horizon, total);
    rows.push_back({name, m, format_real(sd), format_real(improvement),
                    format_real(total), format_real(rate)});
    rows_json.push_back({{"algorithm", name},
                         {"M", m},
                         {"expected_rejections_sd", real_json(sd)},
                         {"batch_improvement", real_json(improvement)},
                         {"expected_rejections", real_json(total)},
                         {"acceleration_rate", real_json(rate)}});
  };

  if (std::holds_alternative<SpeculativeAlgorithm>(algorithm) ||
      std::holds_alternative<BatchAlgorithm>(algorithm)) {
    for (std::size_t m : batches) {
      const BatchRejections batch = expected_rejections_batch(pair, m);
      if (batch.improvement < -kIdentityTolerance) {
        throw NumericalGuard("negative batch improvement at M=" + std::to_string(m));
      }
      emit(m == 1 ? "sd" : "batch", std::to_string(m), batch.improvement,
           batch.total);
    }
  } else if (std::holds_alternative<AutoregressiveAlgorithm>(algorithm)) {
    // Every token costs one call to the target.
    rows.push_back({"autoregressive", "", format_real(sd), "nan",
                    format_real(static_cast<double>(horizon)), "1"});
    rows_json.push_back({{"algorithm", "autoregressive"},
                         {"M", ""},
                         {"expected_rejections_sd", real_json(sd)},
                         {"batch_improvement", nullptr},
                         {"expected_rejections", horizon},
                         {"acceleration_rate", 1.0}});
  } else {
    const std::string name = algorithm_name(algorithm);
    emit(name, "", std::nan(""), enumerate_expected_rejections(pair, algorithm));
  }
  return render(config, columns, rows, rows_json, overrides.format);
}

std::string cmd_simulate(const json& raw, const Overrides& overrides) {
  const json config = effective_config(raw, overrides);
  Campaign campaign{pair_from_config(config, overrides.base_dir),
                    algorithm_from_config(config)};
  campaign.runs = get_count(config, "runs", 10'000, 1);
  campaign.checkpoint_every = get_count(config, "checkpoint", 100, 1);
  campaign.seed = get_seed(config);
  campaign.record_frequencies = config.value("frequencies", false);
  const CampaignReport report = run_campaign(campaign);
  if (overrides.format == Format::kJson) {
    json out = json::parse(report_to_json(report));
    return json{{"config", config}, {"report", out}}.dump(2) + "\n";
  }
  return header(config) + report_to_csv(report);
}

std::string cmd_batch_scan(const json& raw, const Overrides& overrides) {
  const json config = effective_config(raw, overrides);
  const AnyPair pair = pair_from_config(config, overrides.base_dir);
  const std::vector<BatchScanRow> scan =
      batch_scan(pair, batch_range(config), get_count(config, "runs", 0, 0),
                 get_seed(config));
  std::vector<std::vector<std::string>> rows;
  json rows_json = json::array();
  for (const BatchScanRow& r : scan) {
    const std::string m = r.batch ? std::to_string(*r.batch) : "inf";
    rows.push_back({m, format_real(r.exact), format_real(r.mean),
                    format_real(r.std_error)});
    rows_json.push_back({{"M", m},
                         {"exact", real_json(r.exact)},
                         {"empirical_mean", real_json(r.mean)},
                         {"stderr", real_json(r.std_error)}});
  }
  return render(config, {"M", "exact", "empirical_mean", "stderr"}, rows,
                rows_json, overrides.format);
}

std::string cmd_pareto(const json& raw, const Overrides& overrides) {
  const json config = effective_config(raw, overrides);
  const std::vector<double> grid = eps_grid(config);
  const json spec = config.value("pareto", json::object());
  Dist p;
  Dist q;
  if (spec.contains("p") || spec.contains("q")) {
    if (!spec.contains("p") || !spec.contains("q")) {
      throw ConfigError("\"pareto\" needs both \"p\" and \"q\"");
    }
    p = dist_from_json(spec.at("p"), "pareto.p");
    q = dist_from_json(spec.at("q"), "pareto.q");
    if (p.size() != q.size()) throw ConfigError("pareto.p and pareto.q differ in size");
  } else {
    const AnyPair any = pair_from_config(config, overrides.base_dir);
    const MarkovPair& pair = std::get<MarkovPair>(any);
    const std::size_t step = get_count(spec, "step", 1, 1);
    const std::size_t context = get_count(spec, "context", 0, 0);
    if (step > pair.horizon() || context >= pair.vocab_size()) {
      throw ConfigError("pareto step/context outside the model");
    }
    p = pair.draft.step(step).row(static_cast<Token>(context));
    q = pair.target.step(step).row(static_cast<Token>(context));
  }

  const double tv = tv_distance(p, q);
  std::vector<std::vector<std::string>> rows;
  json rows_json = json::array();
  for (const ParetoPoint& point : pareto_front(p, q, grid)) {
    if (std::abs(point.reject_prob + point.loss_star - tv) > kIdentityTolerance) {
      throw NumericalGuard("reject_prob + loss_star != tv at eps=" +
                           format_real(point.epsilon));
    }
    rows.push_back({format_real(point.epsilon), format_real(point.reject_prob),
                    format_real(point.loss_star), format_real(tv)});
    rows_json.push_back({{"eps", point.epsilon},
                         {"reject_prob", point.reject_prob},
                         {"loss_star", point.loss_star},
                         {"tv", tv}});
  }
  return render(config, {"eps", "reject_prob", "loss_star", "tv"}, rows,
                rows_json, overrides.format);
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Speculative decoding analysis and simulation"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::string out_path;
  std::string format = "csv";

  auto add_common = [&](CLI::App* sub, bool simulated) {
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_path, "Write results here instead of stdout");
    sub->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));
    if (simulated) {
      sub->add_option("--seed", seed, "Master seed");
      sub->add_option("--runs", runs, "Number of runs");
    }
  };
  CLI::App* exact = app.add_subcommand("exact", "Exact expected rejections");
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo campaign");
  CLI::App* scan = app.add_subcommand("batch-scan", "Expected rejections over M");
  CLI::App* pareto = app.add_subcommand("pareto", "Rejection vs bias front");
  add_common(exact, false);
  add_common(simulate, true);
  add_common(scan, true);
  add_common(pareto, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    Overrides overrides;
    overrides.seed = seed;
    overrides.runs = runs;
    overrides.format = format == "json" ? Format::kJson : Format::kCsv;
    const std::filesystem::path path(config_path);
    overrides.base_dir = path.parent_path();
    const json config = parse_json(read_file(path), config_path);

    std::string result;
    if (exact->parsed()) result = cmd_exact(config, overrides);
    if (simulate->parsed()) result = cmd_simulate(config, overrides);
    if (scan->parsed()) result = cmd_batch_scan(config, overrides);
    if (pareto->parsed()) result = cmd_pareto(config, overrides);

    if (out_path.empty()) {
      out << result;
    } else {
      std::ofstream file(out_path, std::ios::binary);
      if (!file) throw ConfigError("cannot write " + out_path);
      file << result;
    }
    return kExitOk;
  } catch (const NumericalGuard& e) {
    err << "numerical guard: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ZeroResidual& e) {
    err << "numerical guard: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DegenerateRejection& e) {
    err << "numerical guard: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace speclab::cli
