#pragma once

// File formats: game config (YAML), value-field CSV and the martingale tree
// document (JSON).

#include <yaml-cpp/yaml.h>

#include <array>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "asymgame/errors.hpp"
#include "asymgame/game.hpp"
#include "asymgame/martingale.hpp"
#include "asymgame/solver.hpp"
#include "json.hpp"

namespace asymgame::io {

/// Shortest-free decimal form with 17 significant digits; parses back to the same double.
inline std::string format_real(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

inline double parse_real(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("malformed number '" + std::string(s) + "'");
  return v;
}

// ---------------------------------------------------------------------------
// Game config

namespace detail {

class SpecReader {
 public:
  explicit SpecReader(std::string path) : path_(std::move(path)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
    const auto mark = node.Mark();
    if (mark.line >= 0) throw ConfigError(path_ + ":" + std::to_string(mark.line + 1) + ": " + msg);
    throw ConfigError(path_ + ": " + msg);
  }

  double real(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + ": expected a number");
    try {
      return parse_real(node.Scalar());
    } catch (const ConfigError&) {
      fail(node, what + ": malformed number '" + node.Scalar() + "'");
    }
  }

  std::size_t positive_integer(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + ": expected a positive integer");
    const auto& s = node.Scalar();
    long long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      fail(node, what + ": malformed integer '" + s + "'");
    if (v <= 0) fail(node, what + " must be positive");
    return static_cast<std::size_t>(v);
  }

  std::vector<double> reals(const YAML::Node& node, const std::string& what) const {
    if (!node.IsSequence()) fail(node, what + ": expected a list of numbers");
    std::vector<double> out;
    for (const auto& item : node) out.push_back(real(item, what));
    return out;
  }

  // A list of points; a bare number is accepted as a one-coordinate point.
  std::vector<Point> points(const YAML::Node& node, const std::string& what) const {
    if (!node.IsSequence() || node.size() == 0) fail(node, what + ": expected a non-empty list of points");
    std::vector<Point> out;
    for (const auto& item : node) {
      if (item.IsScalar()) {
        out.push_back({real(item, what)});
      } else {
        auto p = reals(item, what);
        if (p.empty()) fail(item, what + ": empty point");
        out.push_back(std::move(p));
      }
      if (out.back().size() != out.front().size())
        fail(item, what + ": points have different numbers of coordinates");
    }
    return out;
  }

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace detail

/// Parses a game config from YAML text. `origin` names the source in errors.
inline GameSpec parse_spec(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(origin + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  detail::SpecReader rd(origin);
  if (!root.IsMap()) throw ConfigError(origin + ": top level must be a mapping of keys");

  static const std::set<std::string> allowed{"types",   "prior",   "controls_u", "controls_v",
                                             "payoff",  "horizon", "time_steps", "grid_resolution"};
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) rd.fail(kv.first, "unknown key '" + key + "'");
  }
  auto need = [&](const char* key) {
    const auto node = root[key];
    if (!node) throw ConfigError(origin + ": missing key '" + std::string(key) + "'");
    return node;
  };

  GameSpec spec;
  spec.type_points = rd.points(need("types"), "types");
  spec.controls_u = rd.points(need("controls_u"), "controls_u");
  spec.controls_v = rd.points(need("controls_v"), "controls_v");

  const auto prior_node = need("prior");
  auto prior = rd.reals(prior_node, "prior");
  if (prior.size() != spec.type_points.size())
    rd.fail(prior_node, "prior has " + std::to_string(prior.size()) + " weights for " +
                            std::to_string(spec.type_points.size()) + " types");
  double sum = 0.0;
  for (double w : prior) {
    if (!(w >= 0.0)) rd.fail(prior_node, "prior has a negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) rd.fail(prior_node, "prior sums to " + ::asymgame::detail::format_double(sum));
  spec.prior = Belief::normalized(std::move(prior));

  const auto payoff_node = need("payoff");
  if (!payoff_node.IsScalar()) rd.fail(payoff_node, "payoff: expected an expression string");
  try {
    spec.payoff = PayoffExpr::parse(payoff_node.Scalar());
  } catch (const ParseError& e) {
    rd.fail(payoff_node, std::string("payoff: ") + e.what());
  }

  const auto horizon_node = need("horizon");
  spec.horizon = rd.real(horizon_node, "horizon");
  if (!(spec.horizon > 0.0)) rd.fail(horizon_node, "horizon must be positive");
  spec.time_steps = rd.positive_integer(need("time_steps"), "time_steps");
  spec.grid_resolution = rd.positive_integer(need("grid_resolution"), "grid_resolution");

  try {
    spec.validate();
  } catch (const ConfigError& e) {
    rd.fail(payoff_node, e.what());
  }
  return spec;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline GameSpec load_spec(const std::string& path) { return parse_spec(read_file(path), path); }

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(path + ": cannot open for writing");
  out << content;
  out.flush();
  if (!out) throw Error(path + ": write failed");
}

// ---------------------------------------------------------------------------
// Value field CSV: k,t,node_index,p_1,...,p_I,W,exposed

inline std::string value_csv(const ValueField& vf) {
  std::string out = "k,t,node_index";
  for (std::size_t i = 0; i < vf.grid.dimension(); ++i) out += ",p_" + std::to_string(i + 1);
  out += ",W,exposed\n";
  for (std::size_t k = 0; k < vf.layers(); ++k) {
    const std::string t = format_real(vf.time(k));
    for (std::size_t j = 0; j < vf.grid.size(); ++j) {
      out += std::to_string(k) + "," + t + "," + std::to_string(j);
      const auto b = vf.grid.belief(j);
      for (std::size_t i = 0; i < b.size(); ++i) out += "," + format_real(b[i]);
      out += "," + format_real(vf.values[k][j]) + (vf.exposed(k, j) ? ",1\n" : ",0\n");
    }
  }
  return out;
}

inline void export_value_csv(const ValueField& vf, const std::string& path) {
  write_file(path, value_csv(vf));
}

struct ValueRow {
  std::size_t k = 0;
  double t = 0.0;
  std::size_t node = 0;
  std::vector<double> p;
  double w = 0.0;
  bool exposed = false;
};

inline std::vector<ValueRow> parse_value_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("value csv: empty document");
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 6 || header[0] != "k" || header[1] != "t" || header[2] != "node_index" ||
      header[header.size() - 2] != "W" || header.back() != "exposed")
    throw ConfigError("value csv: unexpected header '" + line + "'");
  const std::size_t dim = header.size() - 5;
  std::vector<ValueRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size())
      throw ConfigError("value csv:" + std::to_string(lineno) + ": wrong number of columns");
    try {
      ValueRow r;
      r.k = static_cast<std::size_t>(parse_real(cells[0]));
      r.t = parse_real(cells[1]);
      r.node = static_cast<std::size_t>(parse_real(cells[2]));
      for (std::size_t i = 0; i < dim; ++i) r.p.push_back(parse_real(cells[3 + i]));
      r.w = parse_real(cells[3 + dim]);
      r.exposed = cells[4 + dim] == "1";
      rows.push_back(std::move(r));
    } catch (const ConfigError& e) {
      throw ConfigError("value csv:" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Martingale tree document

inline nlohmann::json martingale_json(const BeliefMartingale& m) {
  std::function<nlohmann::json(std::size_t)> node_json = [&](std::size_t idx) {
    const auto& n = m.nodes[idx];
    nlohmann::json j;
    j["k"] = n.level;
    j["belief"] = n.belief.weights();
    j["reach_prob"] = n.reach_prob;
    j["children"] = nlohmann::json::array();
    for (const auto& e : n.children)
      j["children"].push_back({{"prob", e.prob}, {"node", node_json(e.child)}});
    return j;
  };
  return {{"horizon", m.horizon}, {"time_steps", m.time_steps}, {"root", node_json(0)}};
}

inline void export_martingale(const BeliefMartingale& m, const std::string& path) {
  write_file(path, martingale_json(m).dump(1) + "\n");
}

inline BeliefMartingale martingale_from_json(const nlohmann::json& doc) {
  BeliefMartingale m;
  try {
    m.horizon = doc.at("horizon").get<double>();
    m.time_steps = doc.at("time_steps").get<std::size_t>();
    std::function<void(const nlohmann::json&)> visit = [&](const nlohmann::json& j) {
      const std::size_t idx = m.nodes.size();
      m.nodes.push_back({j.at("k").get<std::size_t>(), Belief(j.at("belief").get<std::vector<double>>()),
                         j.at("reach_prob").get<double>(), {}});
      for (const auto& c : j.at("children")) {
        const double prob = c.at("prob").get<double>();
        const std::size_t child = m.nodes.size();
        visit(c.at("node"));
        m.nodes[idx].children.push_back({prob, child});
      }
    };
    visit(doc.at("root"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("martingale document: ") + e.what());
  }
  return m;
}

inline BeliefMartingale import_martingale(const std::string& path) {
  try {
    return martingale_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace asymgame::io
