#include "teachsim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "teachsim/envs.hpp"

namespace teachsim {
namespace {

template <typename Int>
Int parse_int(const std::string& key, const std::string& text) {
  Int value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(key + ": expected an integer, got '" + text + "'");
  }
  return value;
}

double parse_real(const std::string& key, const std::string& text) {
  try {
    return parse_double(text);
  } catch (const std::invalid_argument&) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
}

struct Field {
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
  std::function<std::optional<std::string>(const ExperimentConfig&)> get;
};

template <typename Int, typename Member>
Field int_field(Member member) {
  return {[member](ExperimentConfig& c, const std::string& k, const std::string& v) {
            member(c) = parse_int<Int>(k, v);
          },
          [member](const ExperimentConfig& c) -> std::optional<std::string> {
            return std::to_string(member(c));
          }};
}

template <typename Member>
Field real_field(Member member) {
  return {[member](ExperimentConfig& c, const std::string& k, const std::string& v) {
            member(c) = parse_real(k, v);
          },
          [member](const ExperimentConfig& c) -> std::optional<std::string> {
            return format_double(member(c));
          }};
}

std::string join_seeds(const std::vector<std::uint64_t>& seeds) {
  std::string out;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(seeds[i]);
  }
  return out;
}

// Ordered so write_config groups keys by section.
const std::vector<std::pair<std::string, Field>>& fields() {
  using C = ExperimentConfig;
  static const std::vector<std::pair<std::string, Field>> table = {
      {"env.name",
       {[](C& c, const std::string&, const std::string& v) { c.env = v; },
        [](const C& c) -> std::optional<std::string> { return c.env; }}},
      {"env.segment_length", int_field<int>([](auto& c) -> auto& { return c.segment_length; })},

      {"teachers.count", int_field<int>([](auto& c) -> auto& { return c.teacher_count; })},
      {"teachers.scale", real_field([](auto& c) -> auto& { return c.teacher_scale; })},
      {"teachers.beta_floor", real_field([](auto& c) -> auto& { return c.beta_floor; })},
      {"teachers.width",
       {[](C& c, const std::string& k, const std::string& v) {
          if (v.empty() || v == "auto") c.width.reset();
          else c.width = parse_real(k, v);
        },
        [](const C& c) -> std::optional<std::string> {
          return c.width ? format_double(*c.width) : std::string("auto");
        }}},

      {"selection.sampling",
       {[](C& c, const std::string& k, const std::string& v) {
          try {
            c.sampling = parse_sampling_strategy(v);
          } catch (const std::invalid_argument& e) {
            throw ConfigError(k + ": " + e.what());
          }
        },
        [](const C& c) -> std::optional<std::string> { return std::string(to_string(c.sampling)); }}},
      {"selection.teacher",
       {[](C& c, const std::string& k, const std::string& v) {
          try {
            c.teacher_selection = parse_teacher_strategy(v);
          } catch (const std::invalid_argument& e) {
            throw ConfigError(k + ": " + e.what());
          }
        },
        [](const C& c) -> std::optional<std::string> {
          return std::string(to_string(c.teacher_selection));
        }}},
      {"selection.queries_per_session", int_field<int>([](auto& c) -> auto& { return c.queries_per_session; })},
      {"selection.pool_size", int_field<int>([](auto& c) -> auto& { return c.pool_size; })},
      {"selection.candidate_episodes", int_field<int>([](auto& c) -> auto& { return c.candidate_episodes; })},

      {"reward_model.ensemble_size", int_field<int>([](auto& c) -> auto& { return c.ensemble_size; })},
      {"reward_model.hidden", int_field<int>([](auto& c) -> auto& { return c.hidden; })},
      {"reward_model.learning_rate", real_field([](auto& c) -> auto& { return c.train.learning_rate; })},
      {"reward_model.batch_size", int_field<int>([](auto& c) -> auto& { return c.train.batch_size; })},
      {"reward_model.epochs_per_update", int_field<int>([](auto& c) -> auto& { return c.train.epochs_per_update; })},
      {"reward_model.adam_beta1", real_field([](auto& c) -> auto& { return c.train.adam_beta1; })},
      {"reward_model.adam_beta2", real_field([](auto& c) -> auto& { return c.train.adam_beta2; })},
      {"reward_model.adam_epsilon", real_field([](auto& c) -> auto& { return c.train.adam_epsilon; })},

      {"learner.alpha", real_field([](auto& c) -> auto& { return c.learner.alpha; })},
      {"learner.gamma", real_field([](auto& c) -> auto& { return c.learner.gamma; })},
      {"learner.initial_value", real_field([](auto& c) -> auto& { return c.learner.initial_value; })},
      {"learner.epsilon_start", real_field([](auto& c) -> auto& { return c.learner.epsilon.start; })},
      {"learner.epsilon_end", real_field([](auto& c) -> auto& { return c.learner.epsilon.end; })},
      {"learner.epsilon_decay_steps", int_field<long>([](auto& c) -> auto& { return c.learner.epsilon.decay_steps; })},
      {"learner.replay_capacity", int_field<std::size_t>([](auto& c) -> auto& { return c.learner.replay_capacity; })},
      {"learner.batch_size", int_field<int>([](auto& c) -> auto& { return c.learner.batch_size; })},

      {"experiment.total_steps", int_field<long>([](auto& c) -> auto& { return c.total_steps; })},
      {"experiment.session_interval", int_field<long>([](auto& c) -> auto& { return c.session_interval; })},
      {"experiment.eval_interval", int_field<long>([](auto& c) -> auto& { return c.eval_interval; })},
      {"experiment.eval_episodes", int_field<int>([](auto& c) -> auto& { return c.eval_episodes; })},
      {"experiment.final_rows", int_field<int>([](auto& c) -> auto& { return c.final_rows; })},
      {"experiment.seeds",
       {[](C& c, const std::string&, const std::string& v) { c.seeds = parse_seed_list(v); },
        [](const C& c) -> std::optional<std::string> { return join_seeds(c.seeds); }}},
  };
  return table;
}

const Field& field_for(const std::string& dotted_key) {
  for (const auto& [name, field] : fields()) {
    if (name == dotted_key) return field;
  }
  throw ConfigError("unknown config key '" + dotted_key + "'");
}

}  // namespace

void set_config_value(ExperimentConfig& config, const std::string& dotted_key,
                      const std::string& value) {
  field_for(dotted_key).set(config, dotted_key, value);
}

ExperimentConfig parse_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  ExperimentConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      if (!body.data().empty()) {
        throw ConfigError("config key '" + section + "' must live inside a [section]");
      }
      bool known = false;
      for (const auto& [name, field] : fields()) known = known || name.rfind(section + ".", 0) == 0;
      if (!known) throw ConfigError("unknown config section '" + section + "'");
    }
    for (const auto& [key, value] : body) {
      set_config_value(config, section + "." + key, value.get_value<std::string>());
    }
  }
  validate(config);
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_config(in);
}

void validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  try {
    make_env(c.env, c.segment_length);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("env: ") + e.what());
  }
  require(c.teacher_count >= 1, "teachers.count must be >= 1");
  require(c.teacher_scale > 0.0, "teachers.scale must be positive");
  require(c.beta_floor > 0.0, "teachers.beta_floor must be positive");
  if (!c.width) {
    require(c.beta_floor <= c.teacher_scale,
            "teachers.beta_floor must not exceed teachers.scale when width is calibrated");
  } else {
    require(*c.width >= 0.0, "teachers.width must be non-negative");
  }
  require(c.queries_per_session >= 1, "selection.queries_per_session must be >= 1");
  require(c.pool_size >= c.queries_per_session,
          "selection.pool_size must be >= selection.queries_per_session");
  require(c.candidate_episodes >= 1, "selection.candidate_episodes must be >= 1");
  require(c.ensemble_size >= 1, "reward_model.ensemble_size must be >= 1");
  require(c.hidden >= 1, "reward_model.hidden must be >= 1");
  require(c.train.learning_rate >= 0.0, "reward_model.learning_rate must be >= 0");
  require(c.train.batch_size >= 1, "reward_model.batch_size must be >= 1");
  require(c.train.epochs_per_update >= 1, "reward_model.epochs_per_update must be >= 1");
  require(c.train.adam_beta1 >= 0.0 && c.train.adam_beta1 < 1.0, "reward_model.adam_beta1 must lie in [0, 1)");
  require(c.train.adam_beta2 >= 0.0 && c.train.adam_beta2 < 1.0, "reward_model.adam_beta2 must lie in [0, 1)");
  require(c.train.adam_epsilon > 0.0, "reward_model.adam_epsilon must be positive");
  require(c.learner.alpha > 0.0 && c.learner.alpha <= 1.0, "learner.alpha must lie in (0, 1]");
  require(c.learner.gamma >= 0.0 && c.learner.gamma <= 1.0, "learner.gamma must lie in [0, 1]");
  require(std::isfinite(c.learner.initial_value), "learner.initial_value must be finite");
  require(c.learner.epsilon.start >= 0.0 && c.learner.epsilon.start <= 1.0 &&
              c.learner.epsilon.end >= 0.0 && c.learner.epsilon.end <= 1.0,
          "learner epsilon bounds must lie in [0, 1]");
  require(c.learner.epsilon.decay_steps >= 0, "learner.epsilon_decay_steps must be >= 0");
  require(c.learner.replay_capacity >= 1, "learner.replay_capacity must be >= 1");
  require(c.learner.batch_size >= 1, "learner.batch_size must be >= 1");
  require(c.total_steps >= 0, "experiment.total_steps must be >= 0");
  require(c.session_interval >= 1, "experiment.session_interval must be >= 1");
  require(c.eval_interval >= 1, "experiment.eval_interval must be >= 1");
  require(c.eval_episodes >= 1, "experiment.eval_episodes must be >= 1");
  require(c.final_rows >= 1, "experiment.final_rows must be >= 1");
  require(!c.seeds.empty(), "experiment.seeds must not be empty");
}

void write_config(std::ostream& out, const ExperimentConfig& config) {
  std::string current;
  for (const auto& [name, field] : fields()) {
    const auto dot = name.find('.');
    const std::string section = name.substr(0, dot);
    if (section != current) {
      if (!current.empty()) out << '\n';
      out << '[' << section << "]\n";
      current = section;
    }
    out << name.substr(dot + 1) << " = " << field.get(config).value_or("") << '\n';
  }
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  const auto range = text.find("..");
  if (range != std::string::npos) {
    const auto lo = parse_int<std::uint64_t>("seeds", text.substr(0, range));
    const auto hi = parse_int<std::uint64_t>("seeds", text.substr(range + 2));
    if (hi < lo) throw ConfigError("seeds: empty range '" + text + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError("seeds: empty entry in '" + text + "'");
    seeds.push_back(parse_int<std::uint64_t>("seeds", item.substr(b, e - b + 1)));
  }
  if (seeds.empty()) throw ConfigError("seeds: no seeds in '" + text + "'");
  return seeds;
}

}  // namespace teachsim
