#pragma once

#include "fadeopt/anneal.hpp"
#include "fadeopt/episim.hpp"
#include "fadeopt/qlearn.hpp"
#include "fadeopt/receivers.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace fadeopt {

/// Number formatted with 12 significant digits, '.' decimal, no locale.
inline std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string outcome_prefix(int depth, unsigned prefix) {
  std::string s(static_cast<std::size_t>(depth), '0');
  for (int k = 0; k < depth; ++k)
    if ((prefix >> (depth - 1 - k)) & 1u) s[static_cast<std::size_t>(k)] = '1';
  return s;
}

inline nlohmann::json strategy_to_json(const ReceiverStrategy& strategy) {
  strategy.validate();
  nlohmann::json j;
  j["layers"] = strategy.layers;
  j["splits"] = strategy.splits;
  nlohmann::json disp = nlohmann::json::object();
  for (int depth = 0; depth < strategy.layers; ++depth)
    for (unsigned p = 0; p < (1u << depth); ++p)
      disp[outcome_prefix(depth, p)] = strategy.displacement(depth, p);
  j["displacements"] = std::move(disp);
  if (strategy.guess == GuessRule::maximum_likelihood) {
    j["guess"] = "ml";
  } else {
    nlohmann::json g = nlohmann::json::object();
    for (unsigned p = 0; p < (1u << strategy.layers); ++p)
      g[outcome_prefix(strategy.layers, p)] = strategy.guess_map[p];
    j["guess"] = std::move(g);
  }
  return j;
}

inline ReceiverStrategy strategy_from_json(const nlohmann::json& j) {
  ReceiverStrategy s;
  s.layers = j.at("layers").get<int>();
  if (s.layers < 1 || s.layers > 24)
    throw std::invalid_argument("strategy.layers: out of range");
  s.splits = j.at("splits").get<std::vector<double>>();
  s.displacements.assign(tree_size(s.layers), 0.0);
  const auto& disp = j.at("displacements");
  for (int depth = 0; depth < s.layers; ++depth)
    for (unsigned p = 0; p < (1u << depth); ++p) {
      const std::string key = outcome_prefix(depth, p);
      if (!disp.contains(key))
        throw std::invalid_argument("strategy.displacements: missing prefix \"" + key + "\"");
      s.displacement(depth, p) = disp.at(key).get<double>();
    }
  const auto& guess = j.at("guess");
  if (guess.is_string() && guess.get<std::string>() == "ml") {
    s.guess = GuessRule::maximum_likelihood;
  } else if (guess.is_object()) {
    s.guess = GuessRule::explicit_map;
    s.guess_map.assign(std::size_t{1} << s.layers, 0);
    for (unsigned p = 0; p < (1u << s.layers); ++p) {
      const std::string key = outcome_prefix(s.layers, p);
      if (!guess.contains(key))
        throw std::invalid_argument("strategy.guess: missing outcome \"" + key + "\"");
      s.guess_map[p] = guess.at(key).get<int>();
    }
  } else {
    throw std::invalid_argument("strategy.guess: expected \"ml\" or an outcome map");
  }
  s.validate();
  return s;
}

/// FNV-1a over a canonical rendering of the config; ties a checkpoint to the
/// run that produced it.
inline std::string qlearn_config_hash(const QLearnConfig& config) {
  std::string canon;
  canon += "episodes=" + std::to_string(config.episodes);
  canon += ";discount=" + format_value(config.discount);
  canon += ";lr=" + std::string(config.learning_rate.mode == LearningRate::Mode::constant
                                    ? "constant:" + format_value(config.learning_rate.constant_value)
                                    : "visits");
  canon += ";eps=" + format_value(config.epsilon.initial) + "," +
           format_value(config.epsilon.tau) + "," + format_value(config.epsilon.floor);
  canon += ";qinit=" + format_value(config.q_init);
  canon += ";grid=";
  for (double v : config.grid.values) canon += format_value(v) + ",";
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline constexpr int kQTableFormatVersion = 1;

inline nlohmann::json qtable_to_json(const QTable& table, const QLearnConfig& config) {
  nlohmann::json j;
  j["format_version"] = kQTableFormatVersion;
  j["config_hash"] = qlearn_config_hash(config);
  j["q_init"] = table.init_value();
  std::vector<std::tuple<std::string, int, double, std::int64_t>> entries;
  for (const auto& [key, row] : table.rows())
    for (std::size_t a = 0; a < row.size(); ++a)
      entries.emplace_back(key, static_cast<int>(a), row[a].value, row[a].visits);
  std::sort(entries.begin(), entries.end());
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [key, action, value, visits] : entries)
    arr.push_back(nlohmann::json::array({key, action, value, visits}));
  j["entries"] = std::move(arr);
  return j;
}

inline QTable qtable_from_json(const nlohmann::json& j) {
  if (j.at("format_version").get<int>() != kQTableFormatVersion)
    throw std::invalid_argument("qtable: unsupported format_version");
  QTable table(j.value("q_init", 0.0));
  // Rows are rebuilt with the widest action index seen per state.
  std::map<std::string, int> widths;
  for (const auto& e : j.at("entries"))
    widths[e.at(0).get<std::string>()] =
        std::max(widths[e.at(0).get<std::string>()], e.at(1).get<int>() + 1);
  for (const auto& e : j.at("entries")) {
    HistoryState state;
    const std::string key = e.at(0).get<std::string>();
    // parse "a3|o1|..."
    std::size_t pos = 0;
    while (pos < key.size()) {
      std::size_t bar = key.find('|', pos);
      if (bar == std::string::npos) bar = key.size();
      const std::string tok = key.substr(pos, bar - pos);
      if (tok.size() < 2 || (tok[0] != 'a' && tok[0] != 'o'))
        throw std::invalid_argument("qtable: bad history token \"" + tok + "\"");
      const int v = std::stoi(tok.substr(1));
      if (tok[0] == 'a')
        state.push_action(v);
      else
        state.push_outcome(v);
      pos = bar + 1;
    }
    auto& cell = table.at(state, e.at(1).get<int>(), widths[key]);
    cell.value = e.at(2).get<double>();
    cell.visits = e.at(3).get<std::int64_t>();
  }
  return table;
}

/// CSV rendering of a learning curve: one row per episode, P_t only on
/// stride rows.
inline std::string learning_curve_csv(const LearningCurve& curve) {
  std::string out = "episode,R_t,P_t\n";
  std::size_t next_success = 0;
  for (std::size_t t = 0; t < curve.returns.size(); ++t) {
    const std::int64_t episode = static_cast<std::int64_t>(t) + 1;
    out += std::to_string(episode);
    out += ',';
    out += format_value(curve.returns[t]);
    out += ',';
    if (next_success < curve.greedy_success.size() &&
        curve.greedy_success[next_success].first == episode) {
      out += format_value(curve.greedy_success[next_success].second);
      ++next_success;
    }
    out += '\n';
  }
  return out;
}

inline std::string anneal_log_csv(const std::vector<AnnealLogRow>& log) {
  std::string out = "restart,step,temperature,current,best\n";
  for (const auto& row : log) {
    out += std::to_string(row.restart) + ',' + std::to_string(row.step) + ',' +
           format_value(row.temperature) + ',' + format_value(row.current) + ',' +
           format_value(row.best) + '\n';
  }
  return out;
}

inline nlohmann::json episode_to_json(const EpisodeRecord& record) {
  return nlohmann::json{{"true_bit", record.true_bit},
                        {"channel_index", record.channel_index},
                        {"displacements", record.displacements},
                        {"outcomes", record.outcomes},
                        {"guess", record.guess},
                        {"reward", record.reward}};
}

}  // namespace fadeopt
