#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "rfr/graph.hpp"
#include "rfr/market_data.hpp"

namespace testing {

inline std::filesystem::path data_dir() { return RFR_DATA_DIR; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("rfr_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path write(const std::string& name, const std::string& content) const {
    auto p = path_ / name;
    std::ofstream(p) << content;
    return p;
  }

 private:
  std::filesystem::path path_;
};

// Unit-weight graph from "a-b" pairs.
inline rfr::WeightedGraph graph_of(const std::vector<std::pair<std::string, std::string>>& pairs,
                                   std::vector<std::string> extra_nodes = {}) {
  std::vector<std::string> ids = std::move(extra_nodes);
  std::vector<std::pair<rfr::EdgeId, double>> edges;
  for (const auto& [a, b] : pairs) {
    ids.push_back(a);
    ids.push_back(b);
    edges.emplace_back(rfr::EdgeId(a, b), 1.0);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return rfr::WeightedGraph(ids, edges);
}

inline rfr::WeightedGraph weighted_graph_of(
    const std::vector<std::tuple<std::string, std::string, double>>& list) {
  std::vector<std::string> ids;
  std::vector<std::pair<rfr::EdgeId, double>> edges;
  for (const auto& [a, b, w] : list) {
    ids.push_back(a);
    ids.push_back(b);
    edges.emplace_back(rfr::EdgeId(a, b), w);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return rfr::WeightedGraph(ids, edges);
}

inline std::string node_name(int i) {
  std::string s = "n";
  if (i < 10) s += "0";
  return s + std::to_string(i);
}

// Connected random graph on n nodes: a random spanning tree plus extra edges
// with probability p, weights uniform in [0.2, 2].
inline rfr::WeightedGraph random_connected(int n, double p, std::mt19937_64& rng,
                                           bool unit_weights = false) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) ids.push_back(node_name(i));
  std::set<std::pair<int, int>> pairs;
  for (int i = 1; i < n; ++i) {
    const int j = static_cast<int>(rng() % static_cast<unsigned>(i));
    pairs.emplace(j, i);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (u(rng) < p) pairs.emplace(i, j);
  std::vector<std::pair<rfr::EdgeId, double>> edges;
  for (const auto& [a, b] : pairs) {
    edges.emplace_back(rfr::EdgeId(ids[a], ids[b]), unit_weights ? 1.0 : 0.2 + 1.8 * u(rng));
  }
  return rfr::WeightedGraph(ids, edges);
}

}  // namespace testing
