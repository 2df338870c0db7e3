#pragma once

/// The `ahlab` command line: classify | check | match | zoo-list | zoo-emit.
///
/// Exit status: 0 when every asserted check passes, 2 when an asserted check
/// fails (or the chart is invalid at a sample point, or the matcher flags an
/// inconsistency), 1 on usage and parse errors.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ahlab/analysis.hpp"
#include "ahlab/chart_file.hpp"
#include "ahlab/error.hpp"
#include "ahlab/geometry.hpp"
#include "ahlab/sampling.hpp"
#include "ahlab/zoo.hpp"

namespace ahlab::cli {

using Json = nlohmann::ordered_json;

enum ExitCode : int { ok = 0, usage = 1, check_failed = 2 };

struct Options {
  std::string command;
  std::string chart_path;
  std::string zoo_name;
  std::vector<std::string> params;
  int points = 5;
  std::vector<std::string> at;
  double tol = 1e-6;
  std::string json_path;
  std::string suite = "all";
  std::string out_path;
  std::string out_dir;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

inline std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const ahlab::detail::Statement s{item, 0, 0};
    try {
      out.push_back(ahlab::detail::parse_number(s, item));
    } catch (const ParseError&) {
      throw ParseError("invalid number '" + item + "' in " + what, 0);
    }
  }
  if (out.empty()) throw ParseError("empty list in " + what, 0);
  return out;
}

inline zoo::Params parse_params(const std::vector<std::string>& kv) {
  zoo::Params p;
  for (const auto& s : kv) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ParseError("--param expects k=v, got '" + s + "'", 0);
    p[s.substr(0, eq)] = parse_numbers(s.substr(eq + 1), "--param " + s.substr(0, eq));
  }
  return p;
}

inline Json residuals_json(const IdentityReport& r) {
  Json eq = Json::object();
  for (const auto& e : r.equations) {
    Json j;
    j["residual"] = e.residual ? Json(*e.residual) : Json(nullptr);
    j["status"] = to_string(e.status);
    j["passed"] = e.passed(r.tol);
    if (!e.note.empty()) j["note"] = e.note;
    eq[e.id] = j;
  }
  return eq;
}

inline Json hypotheses_json(const IdentityReport& r) {
  Json h = Json::object();
  if (r.hypothesis_conformal_flat) h["conformal_flat"] = *r.hypothesis_conformal_flat;
  if (r.hypothesis_almost_kahler) h["almost_kahler"] = *r.hypothesis_almost_kahler;
  if (r.hypothesis_class2) h["id2"] = *r.hypothesis_class2;
  return h;
}

// Class residuals as an identity report: identity 1.2 is asserted on K, NK
// and AK points, identities 1)-3) on Kaehler points.
inline IdentityReport class_identities(const ClassReport& c) {
  IdentityReport r;
  r.point = c.point;
  r.tol = c.tol;
  const bool in_class = c.is_kahler() || c.is_nearly_kahler() || c.is_almost_kahler();
  const Status s12 = in_class ? Status::asserted : Status::informational;
  const Status sk = c.is_kahler() ? Status::asserted : Status::informational;
  r.equations = {{"1.2", c.identity_12, s12, {}},
                 {"id1", c.curvature_class[0], sk, {}},
                 {"id2", c.curvature_class[1], sk, {}},
                 {"id3", c.curvature_class[2], sk, {}}};
  return r;
}

inline Json class_json(const ClassReport& c, const IdentityReport& ids) {
  Json j;
  j["verdict"] = c.verdict();
  j["1.1"] = {{"kahler", c.kahler}, {"nearly_kahler", c.nearly_kahler}, {"almost_kahler", c.almost_kahler}};
  j["conformal_flat"] = c.conformal_flat;
  j["identities"] = residuals_json(ids);
  return j;
}

inline Json point_json(const std::vector<double>& p) {
  Json a = Json::array();
  for (double v : p) a.push_back(v);
  return a;
}

inline Json match_json(const CaseMatch& m) {
  Json j;
  j["label"] = to_string(m.label);
  j["inconsistent"] = m.inconsistent;
  j["c"] = m.c ? Json(*m.c) : Json(nullptr);
  j["mixed_plane_residual"] = m.mixed_plane ? Json(*m.mixed_plane) : Json(nullptr);
  j["factor_dims"] = m.factor_dims;
  j["factor_curvatures"] = m.factor_curvatures;
  j["diagnostics"] = m.diagnostics;
  return j;
}

struct Tally {
  int asserted = 0;
  int failed = 0;
  int informational = 0;
  int not_applicable = 0;

  void add(const IdentityReport& r) {
    for (const auto& e : r.equations) {
      if (e.status == Status::asserted) {
        ++asserted;
        if (!e.passed(r.tol)) ++failed;
      } else if (e.status == Status::informational) {
        ++informational;
      } else {
        ++not_applicable;
      }
    }
  }
};

inline void print_equations(std::ostream& out, const IdentityReport& r) {
  for (const auto& e : r.equations) {
    out << "  " << std::left << std::setw(8) << e.id << std::right;
    if (!e.residual) {
      out << "       n/a  not_applicable";
      if (!e.note.empty()) out << "  (" << e.note << ")";
      out << "\n";
      continue;
    }
    out << std::setw(10) << fmt(*e.residual) << "  ";
    if (e.status == Status::asserted) {
      out << (e.passed(r.tol) ? "ok" : "FAIL");
    } else {
      out << "~ informational";
    }
    out << "\n";
  }
}

inline std::string point_text(const std::vector<double>& p) {
  std::string s = "(";
  for (std::size_t k = 0; k < p.size(); ++k) s += (k ? ", " : "") + ahlab::detail::format_double(p[k]);
  return s + ")";
}

struct Source {
  std::optional<Chart> chart;
  std::optional<CurvatureSample> synthetic;
  std::string label;
  std::string canonical;  // emitted chart text, for hashing
};

inline Source load_source(const Options& o) {
  if (o.chart_path.empty() == o.zoo_name.empty()) throw ParseError("give exactly one of --chart or --zoo", 0);
  Source s;
  if (!o.chart_path.empty()) {
    if (!o.params.empty()) throw ParseError("--param applies to --zoo entries only", 0);
    s.chart = load_chart(o.chart_path);
  } else {
    const auto params = parse_params(o.params);
    if (zoo::is_synthetic(o.zoo_name)) {
      s.synthetic = zoo::synthetic_curvature(o.zoo_name, params);
      s.label = o.zoo_name;
      return s;
    }
    s.chart = zoo::build(o.zoo_name, params);
  }
  s.canonical = emit_chart(*s.chart);
  s.label = s.chart->name;
  return s;
}

inline std::vector<std::vector<double>> sample_points(const Options& o, const Source& s) {
  const Chart& c = *s.chart;
  if (!o.at.empty()) {
    std::vector<std::vector<double>> pts;
    for (const auto& a : o.at) {
      auto p = parse_numbers(a, "--at");
      if (static_cast<int>(p.size()) != c.dim) {
        throw ParseError("--at point has " + std::to_string(p.size()) + " coordinates, chart dimension is " + std::to_string(c.dim), 0);
      }
      pts.push_back(std::move(p));
    }
    return pts;
  }
  if (o.points < 1) throw ParseError("--points must be positive", 0);
  return halton_points(c.domain, o.points, fnv1a64(s.canonical));
}

inline Json chart_json(const Source& s) {
  Json j;
  j["name"] = s.label;
  if (s.chart) {
    j["dim"] = s.chart->dim;
    j["presentation"] = s.chart->is_direct() ? "direct" : "embedded";
    Json p = Json::object();
    for (const auto& [k, v] : s.chart->params) p[k] = v;
    j["params"] = p;
    char hash[24];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(s.canonical)));
    j["hash"] = hash;
  } else {
    j["dim"] = s.synthetic->R.dim();
    j["presentation"] = "synthetic";
  }
  return j;
}

inline void write_json(const Options& o, const Json& doc, std::ostream& out) {
  if (o.json_path.empty()) return;
  const std::string text = doc.dump(2) + "\n";
  if (o.json_path == "-") {
    out << text;
    return;
  }
  std::ofstream f(o.json_path, std::ios::binary);
  if (!f) throw Error("cannot write '" + o.json_path + "'");
  f << text;
}

inline int run_analysis(const Options& o, std::ostream& out) {
  const Source src = load_source(o);
  const bool quiet = o.json_path == "-";
  Json doc;
  doc["tool"] = "ahlab";
  doc["command"] = o.command;
  doc["chart"] = chart_json(src);
  Json settings;
  settings["tol"] = o.tol;
  if (o.command == "check") settings["suite"] = o.suite;

  if (o.command == "match") {
    CaseMatch m;
    if (src.synthetic) {
      settings["points"] = 0;
      doc["settings"] = settings;
      m = theorem_case_match(zoo::synthetic_summary(*src.synthetic, o.tol), o.tol);
    } else {
      const auto pts = sample_points(o, src);
      settings["points"] = static_cast<int>(pts.size());
      settings["sampling"] = o.at.empty() ? "halton" : "explicit";
      doc["settings"] = settings;
      m = theorem_case_match(summarize(*src.chart, pts, o.tol), o.tol);
    }
    doc["match"] = match_json(m);
    const int code = m.inconsistent ? check_failed : ok;
    doc["summary"] = {{"label", to_string(m.label)}, {"exit_status", code}};
    if (!quiet) {
      out << "chart " << src.label << ": " << to_string(m.label);
      if (m.c) out << " (c = " << ahlab::detail::format_double(*m.c) << ")";
      if (m.inconsistent) out << " INCONSISTENT";
      out << "\n";
      for (const auto& d : m.diagnostics) out << "  - " << d << "\n";
    }
    write_json(o, doc, out);
    return code;
  }

  if (src.synthetic) throw ParseError("'" + o.zoo_name + "' is a synthetic curvature profile; only 'match' accepts it", 0);
  const auto pts = sample_points(o, src);
  settings["points"] = static_cast<int>(pts.size());
  settings["sampling"] = o.at.empty() ? "halton" : "explicit";
  doc["settings"] = settings;
  if (!quiet) {
    out << "chart " << src.label << " (dim " << src.chart->dim << ", " << (src.chart->is_direct() ? "direct" : "embedded")
        << "), " << pts.size() << " points, tol " << fmt(o.tol) << "\n";
  }

  Tally tally;
  Json jpoints = Json::array();
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const CurvatureBundle b = curvature_bundle(*src.chart, pts[k]);
    const ClassReport cls = classify(b, o.tol);
    const IdentityReport cls_ids = class_identities(cls);
    tally.add(cls_ids);
    Json jp;
    jp["x"] = point_json(pts[k]);
    jp["class"] = class_json(cls, cls_ids);
    if (!quiet) {
      out << "point " << (k + 1) << " " << point_text(pts[k]) << "  verdict " << cls.verdict() << "\n";
      out << "  1.1     K " << fmt(cls.kahler) << "  NK " << fmt(cls.nearly_kahler) << "  AK " << fmt(cls.almost_kahler)
          << "\n";
      out << "  C       " << std::setw(10) << fmt(cls.conformal_flat) << "\n";
      print_equations(out, cls_ids);
    }
    if (o.command == "check") {
      std::vector<IdentityReport> reps;
      if (o.suite == "universal" || o.suite == "all") reps.push_back(check_universal(b, o.tol));
      if (o.suite == "ak2" || o.suite == "all") reps.push_back(check_ak2(b, o.tol));
      if (o.suite == "cf-ak2" || o.suite == "all") reps.push_back(check_cf_ak2_chain(b, o.tol));
      Json ids = Json::object();
      Json hyp = Json::object();
      Json notes = Json::array();
      for (const auto& r : reps) {
        tally.add(r);
        const Json rj = residuals_json(r);
        const Json hj = hypotheses_json(r);
        for (const auto& [key, val] : rj.items()) ids[key] = val;
        for (const auto& [key, val] : hj.items()) hyp[key] = val;
        if (!r.note.empty()) notes.push_back(r.note);
        if (!quiet) {
          print_equations(out, r);
          if (!r.note.empty()) out << "  ~ " << r.note << "\n";
        }
      }
      jp["hypotheses"] = hyp;
      jp["identities"] = ids;
      if (!notes.empty()) jp["notes"] = notes;
    }
    jpoints.push_back(jp);
  }
  doc["points"] = jpoints;
  const int code = tally.failed > 0 ? check_failed : ok;
  doc["summary"] = {{"asserted", tally.asserted},
                    {"failed", tally.failed},
                    {"informational", tally.informational},
                    {"not_applicable", tally.not_applicable},
                    {"exit_status", code}};
  if (!quiet) {
    out << "summary: " << tally.asserted << " asserted, " << tally.failed << " failed, " << tally.informational
        << " informational, " << tally.not_applicable << " not applicable\n";
  }
  write_json(o, doc, out);
  return code;
}

inline std::string params_text(const zoo::Params& p) {
  std::string s;
  for (const auto& [k, v] : p) {
    s += (s.empty() ? "" : " ") + k + "=";
    for (std::size_t q = 0; q < v.size(); ++q) s += (q ? "," : "") + ahlab::detail::format_double(v[q]);
  }
  return s;
}

inline int run_zoo_list(const Options& o, std::ostream& out) {
  Json arr = Json::array();
  for (const auto& e : zoo::entries()) {
    Json j;
    j["name"] = e.name;
    j["signature"] = e.signature;
    j["kind"] = e.synthetic ? "synthetic" : "chart";
    Json d = Json::object();
    for (const auto& [k, v] : e.defaults) d[k] = v.size() == 1 ? Json(v[0]) : Json(v);
    j["defaults"] = d;
    j["provenance"] = e.expected.provenance;
    arr.push_back(j);
    if (o.json_path != "-") {
      out << std::left << std::setw(22) << e.name << std::setw(34) << e.signature << std::right
          << (e.synthetic ? "synthetic  " : "chart      ") << params_text(e.defaults) << "\n";
    }
  }
  write_json(o, Json{{"tool", "ahlab"}, {"command", "zoo-list"}, {"entries", arr}}, out);
  return ok;
}

inline int run_zoo_emit(const Options& o, std::ostream& out) {
  if (!o.out_dir.empty()) {
    if (!o.zoo_name.empty() || !o.params.empty()) throw ParseError("--dir emits every chart entry with defaults; drop --zoo/--param", 0);
    std::filesystem::create_directories(o.out_dir);
    for (const auto& e : zoo::entries()) {
      if (e.synthetic) continue;
      const std::string path = (std::filesystem::path(o.out_dir) / (e.name + ".chart")).string();
      std::ofstream f(path, std::ios::binary);
      if (!f) throw Error("cannot write '" + path + "'");
      f << emit_chart(zoo::build(e.name));
      out << path << "\n";
    }
    return ok;
  }
  if (o.zoo_name.empty()) throw ParseError("zoo-emit needs --zoo <name> or --dir <directory>", 0);
  if (zoo::is_synthetic(o.zoo_name)) throw ParseError("'" + o.zoo_name + "' is synthetic and has no chart file", 0);
  const std::string text = emit_chart(zoo::build(o.zoo_name, parse_params(o.params)));
  if (o.out_path.empty()) {
    out << text;
  } else {
    std::ofstream f(o.out_path, std::ios::binary);
    if (!f) throw Error("cannot write '" + o.out_path + "'");
    f << text;
  }
  return ok;
}

}  // namespace detail

inline int run(const Options& o, std::ostream& out, std::ostream& err) {
  try {
    if (o.command == "zoo-list") return detail::run_zoo_list(o, out);
    if (o.command == "zoo-emit") return detail::run_zoo_emit(o, out);
    if (o.command == "classify" || o.command == "check" || o.command == "match") return detail::run_analysis(o, out);
    err << "unknown command '" << o.command << "'\n";
    return usage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return usage;
  } catch (const Error& e) {
    const bool lookup = o.command == "zoo-list" || o.command == "zoo-emit";
    err << "error: " << e.what() << "\n";
    return lookup ? usage : check_failed;
  }
}

/// Parses argv (without the program name) and runs the command.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Curvature identities of almost Hermitian charts", "ahlab"};
  app.require_subcommand(1);
  Options o;

  auto source = [&](CLI::App* sub) {
    sub->add_option("--chart", o.chart_path, "chart file");
    sub->add_option("--zoo", o.zoo_name, "built-in zoo entry");
    sub->add_option("--param", o.params, "zoo parameter k=v (repeatable)");
  };
  auto sampling = [&](CLI::App* sub) {
    sub->add_option("--points", o.points, "number of Halton sample points")->capture_default_str();
    sub->add_option("--at", o.at, "explicit point x1,...,xn (repeatable)");
    sub->add_option("--tol", o.tol, "residual tolerance")->capture_default_str();
    sub->add_option("--json", o.json_path, "write the JSON report here ('-' for stdout)");
  };

  auto* classify_cmd = app.add_subcommand("classify", "class residuals and verdicts at sample points");
  source(classify_cmd);
  sampling(classify_cmd);
  auto* check_cmd = app.add_subcommand("check", "identity suites at sample points");
  source(check_cmd);
  sampling(check_cmd);
  check_cmd->add_option("--suite", o.suite, "universal | ak2 | cf-ak2 | all")
      ->check(CLI::IsMember({"universal", "ak2", "cf-ak2", "all"}))
      ->capture_default_str();
  auto* match_cmd = app.add_subcommand("match", "match the curvature profile to a case of the classification");
  source(match_cmd);
  sampling(match_cmd);
  auto* list_cmd = app.add_subcommand("zoo-list", "list built-in entries");
  list_cmd->add_option("--json", o.json_path, "write the JSON listing here ('-' for stdout)");
  auto* emit_cmd = app.add_subcommand("zoo-emit", "write zoo charts in the chart file format");
  emit_cmd->add_option("--zoo", o.zoo_name, "zoo entry");
  emit_cmd->add_option("--param", o.params, "zoo parameter k=v (repeatable)");
  emit_cmd->add_option("--out", o.out_path, "output file (default stdout)");
  emit_cmd->add_option("--dir", o.out_dir, "emit every chart entry into this directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return usage;
  }
  for (auto* sub : app.get_subcommands()) o.command = sub->get_name();
  return run(o, out, err);
}

}  // namespace ahlab::cli
