#include "teachsim/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

namespace teachsim {
namespace {

constexpr std::string_view kMagic = "teachsim-preferences v1";

void write_segment(std::ostream& out, const Segment& segment) {
  for (const Transition& t : segment.steps()) {
    for (double x : t.state) out << ',' << format_double(x);
    out << ',' << t.action;
    for (double x : t.next_state) out << ',' << format_double(x);
  }
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

long long parse_integer(std::string_view text) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("not an integer: '" + std::string(text) + "'");
  }
  return value;
}

Segment read_segment(const std::vector<std::string_view>& fields, std::size_t offset,
                     std::size_t k, std::size_t obs_dim) {
  std::vector<Transition> steps(k);
  std::size_t pos = offset;
  for (Transition& t : steps) {
    t.state.resize(obs_dim);
    for (double& x : t.state) x = parse_double(fields[pos++]);
    t.action = static_cast<int>(parse_integer(fields[pos++]));
    t.next_state.resize(obs_dim);
    for (double& x : t.next_state) x = parse_double(fields[pos++]);
  }
  return Segment(std::move(steps));
}

}  // namespace

void write_dataset(std::ostream& out, const PreferenceDataset& dataset) {
  std::size_t obs_dim = 0;
  std::size_t k = 0;
  if (!dataset.empty()) {
    const Segment& s = dataset[0].query.first;
    k = s.length();
    obs_dim = s[0].state.size();
  }
  out << kMagic << " obs_dim=" << obs_dim << " k=" << k << '\n';
  for (const PreferenceRecord& r : dataset) {
    if (r.query.first.length() != k || r.query.first[0].state.size() != obs_dim) {
      throw ContractViolation("dataset mixes segment shapes");
    }
    out << r.teacher_id << ',' << r.step_collected << ',' << format_double(r.label.mu1) << ','
        << format_double(r.label.mu2);
    write_segment(out, r.query.first);
    write_segment(out, r.query.second);
    out << '\n';
  }
}

PreferenceDataset read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(kMagic, 0) != 0) {
    throw std::runtime_error("missing preference dataset header");
  }
  std::size_t obs_dim = 0;
  std::size_t k = 0;
  {
    std::istringstream header(line.substr(kMagic.size()));
    std::string token;
    while (header >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos) throw std::runtime_error("bad header token " + token);
      const auto key = token.substr(0, eq);
      const auto value = static_cast<std::size_t>(parse_integer(token.substr(eq + 1)));
      if (key == "obs_dim") obs_dim = value;
      else if (key == "k") k = value;
      else throw std::runtime_error("unknown header key " + key);
    }
  }
  const std::size_t per_segment = k * (2 * obs_dim + 1);
  PreferenceDataset dataset;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != 4 + 2 * per_segment) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected " +
                               std::to_string(4 + 2 * per_segment) + " fields, got " +
                               std::to_string(fields.size()));
    }
    PreferenceRecord r;
    r.teacher_id = static_cast<int>(parse_integer(fields[0]));
    r.step_collected = parse_integer(fields[1]);
    r.label = {parse_double(fields[2]), parse_double(fields[3])};
    r.query = Query(read_segment(fields, 4, k, obs_dim),
                    read_segment(fields, 4 + per_segment, k, obs_dim));
    dataset.append(std::move(r));
  }
  return dataset;
}

void save_dataset(const std::string& path, const PreferenceDataset& dataset) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_dataset(out, dataset);
}

PreferenceDataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_dataset(in);
}

}  // namespace teachsim
