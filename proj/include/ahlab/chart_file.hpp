#pragma once

/// Plain-text chart files.
///
///   name = sphere2                       # optional
///   dim = 2
///   params { c = 1 }
///   domain { lo = [-0.8, -0.8], hi = [0.8, 0.8] }
///   metric { g[1][1] = 4/(1 + c*(x1^2 + x2^2))^2; g[2][2] = ... }
///   J { J[2][1] = 1; J[1][2] = -1 }
///
/// or, instead of metric and J,
///
///   embedding {
///     ambient_dim = 7
///     phi[1] = x1
///     ambient_product = octonion          # or [(1,2,3,1), (1,4,5,1), ...]
///   }
///
/// Statements end at a newline or ';', '#' starts a comment, indices are
/// 1-based. A missing g[i][j] mirrors g[j][i]; a missing J[i][j] is 0.
/// J[i][j] is component i of J applied to the j-th coordinate vector.

#include <cctype>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ahlab/error.hpp"
#include "ahlab/expr.hpp"
#include "ahlab/geometry.hpp"

namespace ahlab {

namespace detail {

struct Statement {
  std::string text;
  int line = 0;
  std::size_t offset = 0;  // byte offset of the first character
};

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Splits into statements; '{' and '}' are statements of their own.
inline std::vector<Statement> split_statements(std::string_view text) {
  std::vector<Statement> out;
  std::string cur;
  std::size_t cur_offset = 0;
  int line = 1;
  int cur_line = 1;
  bool comment = false;
  auto flush = [&] {
    const auto t = trim(cur);
    if (!t.empty()) {
      const std::size_t lead = cur.find(t.front());
      out.push_back({std::string(t), cur_line, cur_offset + lead});
    }
    cur.clear();
  };
  for (std::size_t k = 0; k < text.size(); ++k) {
    const char ch = text[k];
    if (cur.empty()) {
      cur_offset = k;
      cur_line = line;
    }
    if (ch == '\n') {
      comment = false;
      flush();
      ++line;
      continue;
    }
    if (comment) continue;
    if (ch == '#') {
      comment = true;
      continue;
    }
    if (ch == ';') {
      flush();
      continue;
    }
    if (ch == '{' || ch == '}') {
      flush();
      out.push_back({std::string(1, ch), line, k});
      continue;
    }
    cur.push_back(ch);
  }
  flush();
  return out;
}

[[noreturn]] inline void fail(const Statement& s, const std::string& what) {
  throw ParseError("line " + std::to_string(s.line) + ": " + what, s.offset, s.line);
}

inline double parse_number(const Statement& s, std::string_view v) {
  v = trim(v);
  double out = 0.0;
  const char* begin = v.data();
  const char* end = v.data() + v.size();
  if (!v.empty() && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end) fail(s, "expected a number, got '" + std::string(v) + "'");
  return out;
}

inline std::vector<double> parse_list(const Statement& s, std::string_view v) {
  v = trim(v);
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') fail(s, "expected a list [a, b, ...]");
  v = v.substr(1, v.size() - 2);
  std::vector<double> out;
  if (trim(v).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = v.find(',', start);
    out.push_back(parse_number(s, v.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// "key = value" with a bare or indexed key; returns (key, indices, value).
struct Assignment {
  std::string key;
  std::vector<int> indices;
  std::string value;
  std::size_t value_offset = 0;
};

inline Assignment parse_assignment(const Statement& s) {
  const std::size_t eq = s.text.find('=');
  if (eq == std::string::npos) fail(s, "expected 'name = value'");
  Assignment a;
  std::string_view lhs = trim(std::string_view(s.text).substr(0, eq));
  std::size_t k = 0;
  while (k < lhs.size() && (std::isalnum(static_cast<unsigned char>(lhs[k])) || lhs[k] == '_')) ++k;
  a.key = std::string(lhs.substr(0, k));
  if (a.key.empty()) fail(s, "missing name before '='");
  std::string_view rest = trim(lhs.substr(k));
  while (!rest.empty()) {
    if (rest.front() != '[') fail(s, "unexpected '" + std::string(rest) + "' in assignment target");
    const std::size_t close = rest.find(']');
    if (close == std::string_view::npos) fail(s, "unclosed '['");
    a.indices.push_back(static_cast<int>(parse_number(s, rest.substr(1, close - 1))));
    rest = trim(rest.substr(close + 1));
  }
  const std::string_view value = std::string_view(s.text).substr(eq + 1);
  const std::string_view tv = trim(value);
  a.value = std::string(tv);
  a.value_offset = s.offset + eq + 1 + (tv.empty() ? 0 : static_cast<std::size_t>(tv.data() - value.data()));
  return a;
}

inline std::vector<AmbientProduct::Triple> parse_triples(const Statement& s, std::string_view v, int dim) {
  v = trim(v);
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') fail(s, "ambient_product must be a table name or [(i,j,k,s), ...]");
  v = v.substr(1, v.size() - 2);
  std::vector<AmbientProduct::Triple> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t open = v.find('(', pos);
    if (open == std::string_view::npos) break;
    const std::size_t close = v.find(')', open);
    if (close == std::string_view::npos) fail(s, "unclosed '(' in triple list");
    std::vector<double> nums = parse_list(s, "[" + std::string(v.substr(open + 1, close - open - 1)) + "]");
    if (nums.size() != 4) fail(s, "each triple needs four entries (i, j, k, sign)");
    for (int q = 0; q < 3; ++q)
      if (nums[static_cast<std::size_t>(q)] < 1 || nums[static_cast<std::size_t>(q)] > dim) fail(s, "triple index out of range");
    if (nums[3] != 1.0 && nums[3] != -1.0) fail(s, "triple sign must be +1 or -1");
    out.push_back({static_cast<int>(nums[0]) - 1, static_cast<int>(nums[1]) - 1, static_cast<int>(nums[2]) - 1, static_cast<int>(nums[3])});
    pos = close + 1;
  }
  return out;
}

}  // namespace detail

/// Parses chart text; errors carry the line and byte offset.
inline Chart parse_chart(std::string_view text, std::string default_name = "chart") {
  using detail::fail;
  const auto stmts = detail::split_statements(text);
  Chart chart;
  chart.name = std::move(default_name);
  std::optional<int> dim;
  std::set<std::string, std::less<>> param_names;
  std::map<std::pair<int, int>, std::pair<Expr, const detail::Statement*>> g, jm;
  std::optional<int> ambient;
  std::map<int, Expr> phi;
  std::optional<AmbientProduct> prod;
  bool saw_metric = false, saw_j = false, saw_embedding = false, saw_domain = false;

  auto need_dim = [&](const detail::Statement& s) {
    if (!dim) fail(s, "'dim' must come before this section");
    return *dim;
  };
  auto parse_expr = [&](const detail::Statement& s, const detail::Assignment& a) {
    try {
      return parse(a.value, need_dim(s), param_names);
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(s.line) + ": " + e.what(), a.value_offset + e.offset(), s.line);
    }
  };
  auto index = [&](const detail::Statement& s, int i, int limit) {
    if (i < 1 || i > limit) fail(s, "index " + std::to_string(i) + " out of range 1.." + std::to_string(limit));
    return i - 1;
  };

  std::size_t k = 0;
  while (k < stmts.size()) {
    const auto& s = stmts[k];
    if (s.text == "}" || s.text == "{") fail(s, "unexpected '" + s.text + "'");
    const bool opens = k + 1 < stmts.size() && stmts[k + 1].text == "{";
    if (!opens) {
      const auto a = detail::parse_assignment(s);
      if (!a.indices.empty()) fail(s, "indexed assignment outside a section");
      if (a.key == "dim") {
        if (dim) fail(s, "duplicate 'dim'");
        const double d = detail::parse_number(s, a.value);
        if (d != static_cast<int>(d) || d <= 0 || static_cast<int>(d) % 2 != 0) fail(s, "dim must be a positive even integer");
        if (d > kMaxVariables) fail(s, "dim exceeds " + std::to_string(kMaxVariables));
        dim = static_cast<int>(d);
      } else if (a.key == "name") {
        chart.name = a.value;
      } else {
        fail(s, "unknown setting '" + a.key + "'");
      }
      ++k;
      continue;
    }
    const std::string section(detail::trim(s.text));
    std::size_t end = k + 2;
    while (end < stmts.size() && stmts[end].text != "}") {
      if (stmts[end].text == "{") fail(stmts[end], "nested sections are not allowed");
      ++end;
    }
    if (end >= stmts.size()) fail(s, "section '" + section + "' is not closed");
    for (std::size_t q = k + 2; q < end; ++q) {
      const auto& st = stmts[q];
      const auto a = detail::parse_assignment(st);
      if (section == "params") {
        if (!a.indices.empty()) fail(st, "parameter names take no index");
        if (a.key.front() == 'x' && a.key.size() > 1 &&
            a.key.find_first_not_of("0123456789", 1) == std::string::npos) {
          fail(st, "parameter name '" + a.key + "' clashes with a coordinate");
        }
        if (chart.params.count(a.key) != 0) fail(st, "duplicate parameter '" + a.key + "'");
        chart.params[a.key] = detail::parse_number(st, a.value);
        param_names.insert(a.key);
      } else if (section == "domain") {
        saw_domain = true;
        if (a.key == "lo") chart.domain.lo = detail::parse_list(st, a.value);
        else if (a.key == "hi") chart.domain.hi = detail::parse_list(st, a.value);
        else fail(st, "domain takes 'lo' and 'hi'");
      } else if (section == "metric") {
        saw_metric = true;
        const int n = need_dim(st);
        if (a.key != "g" || a.indices.size() != 2) fail(st, "metric entries are g[i][j] = <expr>");
        const auto key = std::make_pair(index(st, a.indices[0], n), index(st, a.indices[1], n));
        if (g.count(key) != 0) fail(st, "duplicate metric entry");
        g.emplace(key, std::make_pair(parse_expr(st, a), &st));
      } else if (section == "J") {
        saw_j = true;
        const int n = need_dim(st);
        if (a.key != "J" || a.indices.size() != 2) fail(st, "J entries are J[i][j] = <expr>");
        const auto key = std::make_pair(index(st, a.indices[0], n), index(st, a.indices[1], n));
        if (jm.count(key) != 0) fail(st, "duplicate J entry");
        jm.emplace(key, std::make_pair(parse_expr(st, a), &st));
      } else if (section == "embedding") {
        saw_embedding = true;
        if (a.key == "ambient_dim") {
          const double d = detail::parse_number(st, a.value);
          if (d != static_cast<int>(d) || d <= 0) fail(st, "ambient_dim must be a positive integer");
          ambient = static_cast<int>(d);
        } else if (a.key == "phi") {
          if (!ambient) fail(st, "'ambient_dim' must come before phi entries");
          if (a.indices.size() != 1) fail(st, "embedding entries are phi[k] = <expr>");
          const int kk = index(st, a.indices[0], *ambient);
          if (phi.count(kk) != 0) fail(st, "duplicate phi entry");
          phi.emplace(kk, parse_expr(st, a));
        } else if (a.key == "ambient_product") {
          if (!ambient) fail(st, "'ambient_dim' must come before ambient_product");
          const auto v = detail::trim(a.value);
          if (!v.empty() && v.front() == '[') {
            prod = AmbientProduct::from_triples(*ambient, detail::parse_triples(st, v, *ambient));
          } else {
            try {
              prod = AmbientProduct::builtin(std::string(v));
            } catch (const Error& e) {
              fail(st, e.what());
            }
            if (prod->dim != *ambient) fail(st, "ambient product dimension differs from ambient_dim");
          }
        } else {
          fail(st, "unknown embedding setting '" + a.key + "'");
        }
      } else {
        fail(s, "unknown section '" + section + "'");
      }
    }
    k = end + 1;
  }

  const detail::Statement eof{"", stmts.empty() ? 1 : stmts.back().line, text.size()};
  if (!dim) fail(eof, "missing 'dim'");
  const int n = *dim;
  chart.dim = n;
  if (!saw_domain) fail(eof, "missing 'domain' section");
  if (chart.domain.lo.size() != static_cast<std::size_t>(n) || chart.domain.hi.size() != static_cast<std::size_t>(n)) {
    fail(eof, "domain lo and hi need " + std::to_string(n) + " entries each");
  }
  if (saw_embedding && (saw_metric || saw_j)) fail(eof, "a chart is either embedded or has metric and J sections, not both");
  if (saw_embedding) {
    if (!prod) fail(eof, "embedding needs an ambient_product");
    EmbeddedPresentation e;
    e.ambient_dim = *ambient;
    for (int q = 0; q < *ambient; ++q) {
      auto it = phi.find(q);
      if (it == phi.end()) fail(eof, "missing phi[" + std::to_string(q + 1) + "]");
      e.map.push_back(it->second);
    }
    e.product = *prod;
    chart.presentation = e;
  } else {
    if (!saw_metric) fail(eof, "missing 'metric' section");
    if (!saw_j) fail(eof, "missing 'J' section");
    DirectPresentation d;
    d.metric.assign(static_cast<std::size_t>(n * n), Expr::constant(0));
    d.complex_structure.assign(static_cast<std::size_t>(n * n), Expr::constant(0));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        auto it = g.find({i, j});
        if (it == g.end()) it = g.find({j, i});
        if (it != g.end()) {
          d.metric[static_cast<std::size_t>(i * n + j)] = it->second.first;
        } else if (i == j) {
          fail(eof, "missing diagonal metric entry g[" + std::to_string(i + 1) + "][" + std::to_string(i + 1) + "]");
        }
        auto jt = jm.find({i, j});
        if (jt != jm.end()) d.complex_structure[static_cast<std::size_t>(i * n + j)] = jt->second.first;
      }
    chart.presentation = d;
  }
  validate_structure(chart);
  return chart;
}

inline Chart load_chart(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open chart file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string stem = path;
  if (auto slash = stem.find_last_of('/'); slash != std::string::npos) stem = stem.substr(slash + 1);
  if (auto dot = stem.rfind('.'); dot != std::string::npos) stem = stem.substr(0, dot);
  return parse_chart(ss.str(), stem);
}

/// Canonical text. Off-diagonal metric entries are written once (upper
/// triangle) when symmetric; zero J entries are omitted.
inline std::string emit_chart(const Chart& chart) {
  validate_structure(chart);
  const int n = chart.dim;
  std::string out;
  auto num = [](double v) { return detail::format_double(v); };
  auto list = [&](const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + num(v[k]);
    return s + "]";
  };
  out += "name = " + chart.name + "\n";
  out += "dim = " + std::to_string(n) + "\n";
  if (!chart.params.empty()) {
    out += "params {\n";
    for (const auto& [k, v] : chart.params) out += "  " + k + " = " + num(v) + "\n";
    out += "}\n";
  }
  out += "domain {\n  lo = " + list(chart.domain.lo) + "\n  hi = " + list(chart.domain.hi) + "\n}\n";
  auto idx = [](int i, int j) { return "[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) + "]"; };
  if (chart.is_direct()) {
    const auto& d = chart.direct();
    out += "metric {\n";
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const Expr& e = d.metric[static_cast<std::size_t>(i * n + j)];
        const Expr& mirror = d.metric[static_cast<std::size_t>(j * n + i)];
        if (!e.is_zero_constant() || i == j) out += "  g" + idx(i, j) + " = " + to_string(e) + "\n";
        if (i != j && !(mirror == e)) out += "  g" + idx(j, i) + " = " + to_string(mirror) + "\n";
      }
    out += "}\nJ {\n";
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Expr& e = d.complex_structure[static_cast<std::size_t>(i * n + j)];
        if (!e.is_zero_constant()) out += "  J" + idx(i, j) + " = " + to_string(e) + "\n";
      }
    out += "}\n";
  } else {
    const auto& e = chart.embedded();
    out += "embedding {\n  ambient_dim = " + std::to_string(e.ambient_dim) + "\n";
    for (int k = 0; k < e.ambient_dim; ++k) {
      out += "  phi[" + std::to_string(k + 1) + "] = " + to_string(e.map[static_cast<std::size_t>(k)]) + "\n";
    }
    std::string triples = "[";
    for (std::size_t k = 0; k < e.product.triples.size(); ++k) {
      const auto& t = e.product.triples[k];
      triples += (k ? ", (" : "(") + std::to_string(t.i + 1) + ", " + std::to_string(t.j + 1) + ", " +
                 std::to_string(t.k + 1) + ", " + std::to_string(t.sign) + ")";
    }
    triples += "]";
    if (!e.product.name.empty()) {
      // Named tables are documented by their defining triples, completed cyclically and antisymmetrically.
      out += "  # " + e.product.name + ": e_i x e_j = s e_k for (i, j, k, s) in " + triples + "\n";
      out += "  ambient_product = " + e.product.name + "\n";
    } else {
      out += "  ambient_product = " + triples + "\n";
    }
    out += "}\n";
  }
  return out;
}

}  // namespace ahlab
