#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dcskel/error.hpp"
#include "dcskel/types.hpp"

namespace dcskel {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorKind::io, "read error on '" + path.string() + "'");
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorKind::io, "write error on '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// CSV datasets: header row of unique names, comma separated, '.' decimals.
// Row numbers in error messages count body rows from 1.

inline Dataset parse_dataset_csv(std::string_view text) {
  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;
  std::size_t pos = 0;
  std::size_t row = 0;
  bool header_done = false;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (detail::trim(line).empty()) {
      if (nl >= text.size()) break;
      continue;
    }
    auto cells = detail::split_csv_line(line);
    if (!header_done) {
      for (auto c : cells) {
        if (c.size() >= 2 && c.front() == '"' && c.back() == '"') c = c.substr(1, c.size() - 2);
        names.emplace_back(c);
      }
      std::map<std::string, int> seen;
      for (const auto& n : names) {
        if (n.empty()) fail(ErrorKind::parse, "csv: empty header name");
        if (++seen[n] > 1) fail(ErrorKind::parse, "csv: duplicate header name '" + n + "'");
      }
      cols.resize(names.size());
      header_done = true;
      continue;
    }
    ++row;
    if (cells.size() != names.size()) {
      fail(ErrorKind::parse, "csv: row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                                 " cells, header has " + std::to_string(names.size()));
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      double v = 0.0;
      const auto cell = cells[j];
      const char* first = cell.data();
      const char* last = cell.data() + cell.size();
      if (first != last && *first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last || cell.empty()) {
        fail(ErrorKind::parse, "csv: non-numeric cell '" + std::string(cell) + "' at row " +
                                   std::to_string(row) + ", column " + names[j]);
      }
      if (!std::isfinite(v)) {
        fail(ErrorKind::parse, "csv: non-finite value at row " + std::to_string(row) + ", column " + names[j]);
      }
      cols[j].push_back(v);
    }
    if (nl >= text.size()) break;
  }
  if (!header_done) fail(ErrorKind::parse, "csv: missing header row");
  if (row == 0) fail(ErrorKind::parse, "csv: no data rows");
  try {
    return Dataset(std::move(names), std::move(cols));
  } catch (const Error& e) {
    throw Error(ErrorKind::parse, std::string("csv: ") + e.what());
  }
}

inline Dataset load_dataset(const std::filesystem::path& path) { return parse_dataset_csv(read_text_file(path)); }

/// Shortest round-trip representation for every value.
inline std::string format_dataset_csv(const Dataset& d) {
  std::string out;
  for (std::size_t j = 0; j < d.p(); ++j) {
    if (j) out += ',';
    out += d.names()[j];
  }
  out += '\n';
  for (std::size_t r = 0; r < d.n(); ++r) {
    for (std::size_t j = 0; j < d.p(); ++j) {
      if (j) out += ',';
      out += detail::format_double(d.at(r, j));
    }
    out += '\n';
  }
  return out;
}

inline void save_dataset(const Dataset& d, const std::filesystem::path& path) {
  write_text_file(path, format_dataset_csv(d));
}

// ---------------------------------------------------------------------------
// Skeleton JSON: {"p":3,"edges":[[0,1]]}

inline nlohmann::ordered_json skeleton_to_json(const Skeleton& g) {
  nlohmann::ordered_json j;
  j["p"] = g.p();
  auto edges = nlohmann::ordered_json::array();
  for (const auto& e : g.edges()) edges.push_back({e.u, e.v});
  j["edges"] = std::move(edges);
  return j;
}

inline std::string serialize_skeleton(const Skeleton& g) { return skeleton_to_json(g).dump(); }

inline Skeleton skeleton_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("p") || !j.contains("edges")) {
    fail(ErrorKind::parse, "skeleton: expected object with fields 'p' and 'edges'");
  }
  if (!j["p"].is_number_integer() || j["p"].get<long long>() < 0) {
    fail(ErrorKind::parse, "skeleton: 'p' must be a nonnegative integer");
  }
  const int p = j["p"].get<int>();
  if (!j["edges"].is_array()) fail(ErrorKind::parse, "skeleton: 'edges' must be an array");
  Skeleton g(p);
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
      fail(ErrorKind::parse, "skeleton: each edge must be a pair of integers");
    }
    const long long a = e[0].get<long long>();
    const long long b = e[1].get<long long>();
    if (a < 0 || b < 0 || a >= p || b >= p) {
      fail(ErrorKind::parse, "skeleton: edge [" + std::to_string(a) + "," + std::to_string(b) +
                                 "] out of range for p=" + std::to_string(p));
    }
    if (a == b) fail(ErrorKind::parse, "skeleton: self-loop on vertex " + std::to_string(a));
    if (!g.add_edge(static_cast<int>(a), static_cast<int>(b))) {
      fail(ErrorKind::parse, "skeleton: duplicate edge [" + std::to_string(a) + "," + std::to_string(b) + "]");
    }
  }
  return g;
}

inline Skeleton parse_skeleton(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::parse, std::string("skeleton: malformed JSON: ") + e.what());
  }
  return skeleton_from_json(j);
}

inline Skeleton load_skeleton(const std::filesystem::path& path) { return parse_skeleton(read_text_file(path)); }

inline void save_skeleton(const Skeleton& g, const std::filesystem::path& path) {
  write_text_file(path, serialize_skeleton(g) + "\n");
}

// ---------------------------------------------------------------------------
// Partition JSON: {"blocks":[[0,1,2],[2,3]]}

inline std::string serialize_partition(const Partition& part) {
  nlohmann::ordered_json j;
  j["blocks"] = part.blocks;
  return j.dump();
}

inline Partition parse_partition(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::parse, std::string("partition: malformed JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("blocks") || !j["blocks"].is_array()) {
    fail(ErrorKind::parse, "partition: expected object with array field 'blocks'");
  }
  Partition part;
  try {
    part.blocks = j["blocks"].get<std::vector<std::vector<int>>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("partition: ") + e.what());
  }
  return part;
}

// ---------------------------------------------------------------------------
// Gaussian network JSON:
//   {"nodes":[{"name":"a","noise_sd":1.0,"parents":[{"name":"b","coef":0.5}]}]}
// An optional per-node "noise" field selects a non-Gaussian family; "noise_sd"
// is then the scale multiplier.

struct NetworkSummary {
  std::size_t nodes = 0;
  std::size_t arcs = 0;
};

inline GaussianSEM gaussian_network_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("nodes") || !j["nodes"].is_array()) {
    fail(ErrorKind::parse, "network: expected object with array field 'nodes'");
  }
  const auto& nodes = j["nodes"];
  GaussianSEM sem;
  std::map<std::string, int> index;
  for (const auto& node : nodes) {
    if (!node.is_object() || !node.contains("name") || !node["name"].is_string()) {
      fail(ErrorKind::parse, "network: every node needs a string 'name'");
    }
    const auto name = node["name"].get<std::string>();
    if (index.count(name)) fail(ErrorKind::parse, "network: duplicate node name '" + name + "'");
    index[name] = static_cast<int>(sem.names.size());
    sem.names.push_back(name);
    NoiseSpec noise;
    if (node.contains("noise_sd")) {
      if (!node["noise_sd"].is_number()) fail(ErrorKind::parse, "network: 'noise_sd' of '" + name + "' must be a number");
      noise.scale = node["noise_sd"].get<double>();
      if (!(noise.scale >= 0.0) || !std::isfinite(noise.scale)) {
        fail(ErrorKind::parse, "network: 'noise_sd' of '" + name + "' must be finite and >= 0");
      }
    }
    if (node.contains("noise")) {
      if (!node["noise"].is_string()) fail(ErrorKind::parse, "network: 'noise' of '" + name + "' must be a string");
      try {
        noise.family = parse_noise_family(node["noise"].get<std::string>());
      } catch (const Error& e) {
        fail(ErrorKind::parse, std::string("network: ") + e.what());
      }
    }
    sem.noise.push_back(noise);
  }
  const int p = sem.p();
  sem.weights.assign(static_cast<std::size_t>(p) * p, 0.0);
  for (int child = 0; child < p; ++child) {
    const auto& node = nodes[static_cast<std::size_t>(child)];
    if (!node.contains("parents")) continue;
    if (!node["parents"].is_array()) fail(ErrorKind::parse, "network: 'parents' of '" + sem.names[child] + "' must be an array");
    for (const auto& par : node["parents"]) {
      if (!par.is_object() || !par.contains("name") || !par["name"].is_string() || !par.contains("coef") ||
          !par["coef"].is_number()) {
        fail(ErrorKind::parse, "network: parent entries of '" + sem.names[child] + "' need 'name' and numeric 'coef'");
      }
      const auto pname = par["name"].get<std::string>();
      auto it = index.find(pname);
      if (it == index.end()) {
        fail(ErrorKind::parse, "network: unknown parent '" + pname + "' of '" + sem.names[child] + "'");
      }
      if (it->second == child) fail(ErrorKind::cyclic_graph, "network: self-loop on '" + pname + "'");
      const double coef = par["coef"].get<double>();
      if (!std::isfinite(coef)) fail(ErrorKind::parse, "network: non-finite coefficient on " + pname + " -> " + sem.names[child]);
      sem.set_coef(it->second, child, coef);
    }
  }
  if (!topological_order(sem)) fail(ErrorKind::cyclic_graph, "network: cycle detected");
  return sem;
}

inline GaussianSEM parse_gaussian_network(std::string_view text, NetworkSummary* summary = nullptr) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::parse, std::string("network: malformed JSON: ") + e.what());
  }
  auto sem = gaussian_network_from_json(j);
  if (summary) *summary = {static_cast<std::size_t>(sem.p()), sem.arc_count()};
  return sem;
}

inline GaussianSEM load_gaussian_network(const std::filesystem::path& path, NetworkSummary* summary = nullptr) {
  return parse_gaussian_network(read_text_file(path), summary);
}

inline std::string serialize_gaussian_network(const GaussianSEM& sem) {
  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  for (int child = 0; child < sem.p(); ++child) {
    nlohmann::ordered_json node;
    node["name"] = sem.names[child];
    node["noise_sd"] = sem.noise[child].scale;
    if (sem.noise[child].family != NoiseFamily::gaussian) node["noise"] = std::string(to_string(sem.noise[child].family));
    auto parents = nlohmann::ordered_json::array();
    for (int parent = 0; parent < sem.p(); ++parent) {
      if (sem.coef(parent, child) != 0.0) {
        parents.push_back({{"name", sem.names[parent]}, {"coef", sem.coef(parent, child)}});
      }
    }
    node["parents"] = std::move(parents);
    nodes.push_back(std::move(node));
  }
  nlohmann::ordered_json j;
  j["nodes"] = std::move(nodes);
  return j.dump(1);
}

}  // namespace dcskel
