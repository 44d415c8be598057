#pragma once

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "ccwl/acc.hpp"
#include "json.hpp"

namespace ccwl {

using json = nlohmann::ordered_json;

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << text;
}

inline json acc_to_json(const ACC& acc) {
  json j;
  j["version"] = 1;
  j["vertices"] = acc.vertex_count();
  j["ell"] = acc.ell();
  if (acc.anchor_vertex()) j["anchor"] = *acc.anchor_vertex();
  json cells = json::array();
  for (const Cell& c : acc.cells()) cells.push_back({{"vertices", c.vertices}, {"rank", c.rank}, {"attr", c.attr}});
  j["cells"] = cells;
  return j;
}

namespace detail {
inline void check_version(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Validation, "document is not a JSON object");
  if (!j.contains("version") || j["version"] != 1) throw Error(ErrorCode::Validation, "unsupported or missing version");
}
}  // namespace detail

inline ACC acc_from_json(const json& j) {
  detail::check_version(j);
  try {
    std::vector<Cell> cells;
    for (const auto& c : j.at("cells"))
      cells.push_back({c.at("vertices").get<std::vector<int>>(), c.at("rank").get<int>(), c.at("attr").get<std::string>()});
    std::optional<int> anchor;
    if (j.contains("anchor")) anchor = j["anchor"].get<int>();
    return ACC(j.at("vertices").get<int>(), j.at("ell").get<int>(), std::move(cells), anchor);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Validation, std::string("malformed ACC document: ") + e.what());
  }
}

inline json graph_to_json(const Graph& g) {
  json edges = json::array();
  for (auto [u, v] : g.edges) edges.push_back({u, v});
  return {{"version", 1}, {"vertices", g.vertex_count}, {"ell", g.ell}, {"edges", edges}, {"colors", g.colors}};
}

inline Graph graph_from_json(const json& j) {
  detail::check_version(j);
  try {
    Graph g;
    g.vertex_count = j.at("vertices").get<int>();
    g.ell = j.at("ell").get<int>();
    for (const auto& e : j.at("edges")) g.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
    if (j.contains("colors"))
      g.colors = j["colors"].get<std::vector<std::string>>();
    else
      g.colors.assign(std::size_t(g.vertex_count), std::string(std::size_t(g.ell), '0'));
    return g;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Validation, std::string("malformed graph document: ") + e.what());
  }
}

inline bool is_graph_document(const json& j) { return j.is_object() && j.contains("edges") && !j.contains("cells"); }

struct LoadedACC {
  ACC acc;
  std::string hash;  // sha256 of the file bytes
  bool lifted = false;
};

// Loads an ACC file; graph documents are lifted.
inline LoadedACC load_acc_file(const std::string& path) {
  std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, path + ": " + e.what());
  }
  if (is_graph_document(j)) return {lift_graph(graph_from_json(j)), sha256_hex(text), true};
  return {acc_from_json(j), sha256_hex(text), false};
}

inline Graph load_graph_file(const std::string& path) {
  std::string text = read_file(path);
  try {
    return graph_from_json(json::parse(text));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, path + ": " + e.what());
  }
}

}  // namespace ccwl
