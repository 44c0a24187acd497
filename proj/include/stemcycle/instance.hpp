#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stemcycle {

using NodeId = int;          // 1-based throughout
using Weight = std::int64_t; // TSPLIB weights are integral after rounding

/// Undirected edge, stored with u < v so that (i,j) and (j,i) compare equal.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  Edge() = default;
  Edge(NodeId a, NodeId b) : u(std::min(a, b)), v(std::max(a, b)) {}

  bool touches(NodeId x) const { return u == x || v == x; }
  NodeId other(NodeId x) const { return x == u ? v : u; }

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline std::string to_string(const Edge& e) {
  return "(" + std::to_string(e.u) + "," + std::to_string(e.v) + ")";
}

/// Raised for malformed or unsupported TSPLIB input.
class TsplibError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class WeightType { euc_2d, ceil_2d, explicit_matrix };

struct Point {
  double x = 0;
  double y = 0;
};

/// Immutable symmetric complete graph. Weights are precomputed into an n x n
/// matrix at construction.
class TspInstance {
 public:
  TspInstance(std::string name, WeightType type, std::vector<Point> coords)
      : name_(std::move(name)), type_(type), n_(static_cast<int>(coords.size())),
        coords_(std::move(coords)), w_(static_cast<std::size_t>(n_) * n_, 0) {
    if (type_ == WeightType::explicit_matrix)
      throw std::invalid_argument("coordinate constructor requires EUC_2D or CEIL_2D");
    check_size();
    for (int i = 0; i < n_; ++i) {
      for (int j = i + 1; j < n_; ++j) {
        const double d = std::hypot(coords_[i].x - coords_[j].x, coords_[i].y - coords_[j].y);
        // TSPLIB nint(x) is (int)(x + 0.5)
        const Weight w = type_ == WeightType::euc_2d ? static_cast<Weight>(d + 0.5)
                                                     : static_cast<Weight>(std::ceil(d));
        at(i, j) = at(j, i) = w;
      }
    }
  }

  /// Row-major n x n matrix; must be symmetric and non-negative off the diagonal.
  TspInstance(std::string name, int n, std::vector<Weight> matrix)
      : name_(std::move(name)), type_(WeightType::explicit_matrix), n_(n), w_(std::move(matrix)) {
    check_size();
    if (w_.size() != static_cast<std::size_t>(n_) * n_)
      throw std::invalid_argument("weight matrix must have n*n entries");
    for (int i = 0; i < n_; ++i) {
      at(i, i) = 0;
      for (int j = i + 1; j < n_; ++j) {
        if (at(i, j) != at(j, i))
          throw std::invalid_argument("weight matrix is not symmetric at (" + std::to_string(i + 1) +
                                      "," + std::to_string(j + 1) + ")");
        if (at(i, j) < 0) throw std::invalid_argument("negative edge weight");
      }
    }
  }

  const std::string& name() const { return name_; }
  int n() const { return n_; }
  WeightType weight_type() const { return type_; }
  const std::vector<Point>& coords() const { return coords_; }

  Weight weight(NodeId i, NodeId j) const {
    if (i == j || i < 1 || j < 1 || i > n_ || j > n_)
      throw std::out_of_range("edge_weight: invalid node pair " + std::to_string(i) + "," +
                              std::to_string(j));
    return w_[static_cast<std::size_t>(i - 1) * n_ + (j - 1)];
  }
  Weight weight(const Edge& e) const { return weight(e.u, e.v); }

  /// Unchecked access for inner loops; i != j assumed.
  Weight weight_unchecked(NodeId i, NodeId j) const {
    return w_[static_cast<std::size_t>(i - 1) * n_ + (j - 1)];
  }

  Weight max_weight() const { return *std::max_element(w_.begin(), w_.end()); }
  Weight min_weight() const {
    Weight best = std::numeric_limits<Weight>::max();
    for (int i = 1; i <= n_; ++i)
      for (int j = i + 1; j <= n_; ++j) best = std::min(best, weight_unchecked(i, j));
    return best;
  }

 private:
  void check_size() const {
    if (n_ < 3) throw std::invalid_argument("instance needs at least 3 nodes");
  }
  Weight& at(int i, int j) { return w_[static_cast<std::size_t>(i) * n_ + j]; }

  std::string name_;
  WeightType type_;
  int n_;
  std::vector<Point> coords_;
  std::vector<Weight> w_;
};

inline Weight edge_weight(const TspInstance& inst, NodeId i, NodeId j) { return inst.weight(i, j); }

/// Hamiltonian cycle as a visiting order; the closing edge is implicit.
struct Tour {
  std::vector<NodeId> order;

  std::size_t size() const { return order.size(); }
  friend bool operator==(const Tour&, const Tour&) = default;
};

inline bool is_valid_tour(const Tour& t, int n) {
  if (static_cast<int>(t.order.size()) != n) return false;
  std::vector<char> seen(n + 1, 0);
  for (NodeId v : t.order) {
    if (v < 1 || v > n || seen[v]) return false;
    seen[v] = 1;
  }
  return true;
}

inline Weight tour_length(const TspInstance& inst, const Tour& t) {
  if (!is_valid_tour(t, inst.n())) throw std::invalid_argument("tour_length: not a permutation of 1..n");
  Weight sum = 0;
  for (std::size_t k = 0; k < t.order.size(); ++k)
    sum += inst.weight_unchecked(t.order[k], t.order[(k + 1) % t.order.size()]);
  return sum;
}

inline std::vector<Edge> tour_edges(const Tour& t) {
  std::vector<Edge> out;
  out.reserve(t.order.size());
  for (std::size_t k = 0; k < t.order.size(); ++k)
    out.emplace_back(t.order[k], t.order[(k + 1) % t.order.size()]);
  return out;
}

// ---------------------------------------------------------------------------
// TSPLIB parsing

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  return s;
}

inline bool is_section_keyword(const std::string& line) {
  const std::string u = upper(line);
  return u.find("_SECTION") != std::string::npos || u == "EOF" || u.find(':') != std::string::npos;
}

}  // namespace detail

/// Parse TSPLIB text. Supports EDGE_WEIGHT_TYPE EUC_2D, CEIL_2D and EXPLICIT
/// (FULL_MATRIX, UPPER_ROW, LOWER_ROW, UPPER_DIAG_ROW, LOWER_DIAG_ROW).
inline TspInstance parse_tsplib(std::string_view text) {
  std::map<std::string, std::string> header;
  std::vector<std::string> lines;
  {
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
      line = detail::trim(line);
      if (!line.empty()) lines.push_back(line);
    }
  }

  std::vector<Point> coords;
  std::vector<Weight> raw_weights;
  bool have_coords = false;
  bool have_weights = false;

  std::size_t i = 0;
  auto read_numbers_until_keyword = [&](auto&& sink) {
    while (i < lines.size() && !detail::is_section_keyword(lines[i])) {
      sink(lines[i]);
      ++i;
    }
  };

  while (i < lines.size()) {
    const std::string& line = lines[i];
    const std::string key_upper = detail::upper(line);
    if (key_upper == "EOF") break;
    if (key_upper.starts_with("NODE_COORD_SECTION")) {
      ++i;
      have_coords = true;
      read_numbers_until_keyword([&](const std::string& l) {
        std::istringstream ls(l);
        long id = 0;
        Point p;
        if (!(ls >> id >> p.x >> p.y)) throw TsplibError("malformed coordinate line: '" + l + "'");
        coords.push_back(p);
      });
      continue;
    }
    if (key_upper.starts_with("EDGE_WEIGHT_SECTION")) {
      ++i;
      have_weights = true;
      read_numbers_until_keyword([&](const std::string& l) {
        std::istringstream ls(l);
        std::string tok;
        while (ls >> tok) {
          try {
            std::size_t used = 0;
            const long long v = std::stoll(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            raw_weights.push_back(v);
          } catch (const std::exception&) {
            throw TsplibError("non-integer edge weight '" + tok + "'");
          }
        }
      });
      continue;
    }
    if (key_upper.ends_with("_SECTION")) {
      // DISPLAY_DATA_SECTION and friends carry nothing we need.
      ++i;
      read_numbers_until_keyword([](const std::string&) {});
      continue;
    }
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw TsplibError("malformed header line: '" + line + "'");
    header[detail::upper(detail::trim(line.substr(0, colon)))] = detail::trim(line.substr(colon + 1));
    ++i;
  }

  auto field = [&](const std::string& key) -> std::optional<std::string> {
    if (auto it = header.find(key); it != header.end()) return it->second;
    return std::nullopt;
  };

  const std::string name = field("NAME").value_or("unnamed");
  if (auto type = field("TYPE"); type && detail::upper(*type) != "TSP")
    throw TsplibError("unsupported problem type '" + *type + "' (only symmetric TSP)");
  const auto dim_text = field("DIMENSION");
  if (!dim_text) throw TsplibError("missing DIMENSION");
  int n = 0;
  try {
    n = std::stoi(*dim_text);
  } catch (const std::exception&) {
    throw TsplibError("malformed DIMENSION '" + *dim_text + "'");
  }
  if (n < 3) throw TsplibError("DIMENSION must be at least 3");
  const auto wtype_text = field("EDGE_WEIGHT_TYPE");
  if (!wtype_text) throw TsplibError("missing EDGE_WEIGHT_TYPE");
  const std::string wtype = detail::upper(*wtype_text);

  if (wtype == "EUC_2D" || wtype == "CEIL_2D") {
    if (!have_coords) throw TsplibError("missing NODE_COORD_SECTION");
    if (static_cast<int>(coords.size()) != n)
      throw TsplibError("DIMENSION is " + std::to_string(n) + " but NODE_COORD_SECTION has " +
                        std::to_string(coords.size()) + " entries");
    return TspInstance(name, wtype == "EUC_2D" ? WeightType::euc_2d : WeightType::ceil_2d,
                       std::move(coords));
  }
  if (wtype != "EXPLICIT") throw TsplibError("unsupported weight type '" + wtype + "'");

  if (!have_weights) throw TsplibError("missing EDGE_WEIGHT_SECTION");
  const std::string format = detail::upper(field("EDGE_WEIGHT_FORMAT").value_or(""));
  const std::size_t nn = static_cast<std::size_t>(n);
  std::size_t expected = 0;
  if (format == "FULL_MATRIX") expected = nn * nn;
  else if (format == "UPPER_ROW" || format == "LOWER_ROW") expected = nn * (nn - 1) / 2;
  else if (format == "UPPER_DIAG_ROW" || format == "LOWER_DIAG_ROW") expected = nn * (nn + 1) / 2;
  else throw TsplibError("unsupported EDGE_WEIGHT_FORMAT '" + format + "'");
  if (raw_weights.size() != expected)
    throw TsplibError("EDGE_WEIGHT_SECTION has " + std::to_string(raw_weights.size()) +
                      " values, expected " + std::to_string(expected) + " for " + format);

  std::vector<Weight> m(nn * nn, 0);
  auto set = [&](std::size_t r, std::size_t c, Weight w) { m[r * nn + c] = m[c * nn + r] = w; };
  auto it = raw_weights.begin();
  if (format == "FULL_MATRIX") {
    m = raw_weights;
  } else if (format == "UPPER_ROW") {
    for (std::size_t r = 0; r < nn; ++r)
      for (std::size_t c = r + 1; c < nn; ++c) set(r, c, *it++);
  } else if (format == "LOWER_ROW") {
    for (std::size_t r = 0; r < nn; ++r)
      for (std::size_t c = 0; c < r; ++c) set(r, c, *it++);
  } else if (format == "UPPER_DIAG_ROW") {
    for (std::size_t r = 0; r < nn; ++r)
      for (std::size_t c = r; c < nn; ++c) set(r, c, *it++);
  } else {
    for (std::size_t r = 0; r < nn; ++r)
      for (std::size_t c = 0; c <= r; ++c) set(r, c, *it++);
  }
  try {
    return TspInstance(name, n, std::move(m));
  } catch (const std::invalid_argument& e) {
    throw TsplibError(e.what());
  }
}

inline TspInstance load_tsplib(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TsplibError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_tsplib(buf.str());
}

/// Serialise as EXPLICIT FULL_MATRIX. Parsing the result reproduces every weight.
inline std::string to_tsplib_full_matrix(const TspInstance& inst) {
  std::ostringstream out;
  out << "NAME: " << inst.name() << "\nTYPE: TSP\nDIMENSION: " << inst.n()
      << "\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: FULL_MATRIX\nEDGE_WEIGHT_SECTION\n";
  for (int i = 1; i <= inst.n(); ++i) {
    for (int j = 1; j <= inst.n(); ++j) out << (j > 1 ? " " : "") << (i == j ? 0 : inst.weight(i, j));
    out << '\n';
  }
  out << "EOF\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Known optima, read from a `name,optimum` CSV.

using OptimaRegistry = std::map<std::string, Weight>;

inline OptimaRegistry parse_optima_csv(std::string_view text) {
  OptimaRegistry reg;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header_seen = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::trim(line);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "name,optimum") throw std::runtime_error("optima registry: expected header 'name,optimum'");
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("optima registry line " + std::to_string(lineno) + ": missing comma");
    try {
      reg[detail::trim(line.substr(0, comma))] = std::stoll(line.substr(comma + 1));
    } catch (const std::logic_error&) {
      throw std::runtime_error("optima registry line " + std::to_string(lineno) + ": bad optimum");
    }
  }
  if (!header_seen) throw std::runtime_error("optima registry: empty file");
  return reg;
}

inline OptimaRegistry load_optima_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open optima registry '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_optima_csv(buf.str());
}

// ---------------------------------------------------------------------------
// Reproducible randomness

/// MT19937-64 with a hand-rolled bounded draw. std::uniform_int_distribution is
/// implementation-defined, so it is avoided to keep streams identical across
/// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, bound) by rejection of the biased low range.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::below(0)");
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Fisher-Yates shuffle of the identity order 1..n.
inline Tour random_start_tour(const TspInstance& inst, Rng& rng) {
  Tour t;
  t.order.resize(inst.n());
  std::iota(t.order.begin(), t.order.end(), 1);
  for (std::size_t k = t.order.size() - 1; k > 0; --k) {
    const auto j = static_cast<std::size_t>(rng.below(k + 1));
    std::swap(t.order[k], t.order[j]);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Exact oracle

inline constexpr int kHeldKarpMaxNodes = 12;

/// Bitmask dynamic programme over subsets of {2..n}; O(2^n n^2).
inline std::pair<Tour, Weight> held_karp_optimal(const TspInstance& inst) {
  const int n = inst.n();
  if (n > kHeldKarpMaxNodes)
    throw std::invalid_argument("held_karp_optimal: n = " + std::to_string(n) + " exceeds the limit of " +
                                std::to_string(kHeldKarpMaxNodes));
  const int m = n - 1;  // nodes 2..n mapped to bits 0..m-1
  const std::size_t states = std::size_t{1} << m;
  constexpr Weight inf = std::numeric_limits<Weight>::max() / 4;
  std::vector<Weight> cost(states * m, inf);
  std::vector<std::int8_t> prev(states * m, -1);
  auto idx = [m](std::size_t mask, int j) { return mask * m + j; };

  for (int j = 0; j < m; ++j) cost[idx(std::size_t{1} << j, j)] = inst.weight_unchecked(1, j + 2);
  for (std::size_t mask = 1; mask < states; ++mask) {
    for (int j = 0; j < m; ++j) {
      if (!(mask & (std::size_t{1} << j))) continue;
      const Weight here = cost[idx(mask, j)];
      if (here >= inf) continue;
      for (int k = 0; k < m; ++k) {
        if (mask & (std::size_t{1} << k)) continue;
        const std::size_t next = mask | (std::size_t{1} << k);
        const Weight c = here + inst.weight_unchecked(j + 2, k + 2);
        if (c < cost[idx(next, k)]) {
          cost[idx(next, k)] = c;
          prev[idx(next, k)] = static_cast<std::int8_t>(j);
        }
      }
    }
  }
  const std::size_t full = states - 1;
  Weight best = inf;
  int last = 0;
  for (int j = 0; j < m; ++j) {
    const Weight c = cost[idx(full, j)] + inst.weight_unchecked(j + 2, 1);
    if (c < best) {
      best = c;
      last = j;
    }
  }
  Tour t;
  std::size_t mask = full;
  int j = last;
  while (j >= 0) {
    t.order.push_back(j + 2);
    const int p = prev[idx(mask, j)];
    mask &= ~(std::size_t{1} << j);
    j = p;
  }
  t.order.push_back(1);
  std::reverse(t.order.begin(), t.order.end());
  return {t, best};
}

}  // namespace stemcycle
