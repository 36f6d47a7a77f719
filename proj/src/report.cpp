#include <cmath>
#include <cstdio>
#include <sstream>

#include "socnav/errors.hpp"
#include "socnav/trial.hpp"

namespace socnav {

Aggregate aggregate_values(const std::vector<double>& values) {
  Aggregate a;
  a.n = static_cast<int>(values.size());
  if (values.empty()) return a;
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / a.n;
  if (a.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.stddev = std::sqrt(ss / (a.n - 1));
  }
  return a;
}

TrialReport aggregate(const std::vector<EpisodeMetrics>& rows) {
  TrialReport r;
  r.rows = rows;
  for (std::size_t i = 0; i < rows.size(); ++i) r.episode_ids.push_back(static_cast<std::int64_t>(i));
  std::vector<double> elapsed, final_distance, min_ped, collisions, ped, stat;
  for (const auto& m : rows) {
    if (m.aborted) {
      ++r.aborted;
      continue;
    }
    ++r.n;
    r.completed += m.completed ? 1 : 0;
    elapsed.push_back(m.elapsed);
    final_distance.push_back(m.final_distance);
    if (m.min_ped_distance) min_ped.push_back(*m.min_ped_distance);
    collisions.push_back(static_cast<double>(m.total_collisions()));
    ped.push_back(static_cast<double>(m.ped_collisions));
    stat.push_back(static_cast<double>(m.static_collisions));
  }
  if (r.n == 0) return r;
  r.completion_rate = static_cast<int>(std::llround(100.0 * r.completed / r.n));
  r.elapsed = aggregate_values(elapsed);
  r.final_distance = aggregate_values(final_distance);
  if (!min_ped.empty()) r.min_ped_distance = aggregate_values(min_ped);
  r.collisions = aggregate_values(collisions);
  r.ped_collisions = aggregate_values(ped);
  r.static_collisions = aggregate_values(stat);
  return r;
}

TrialReport reaggregate(const TrialReport& report) {
  TrialReport r = aggregate(report.rows);
  r.scene = report.scene;
  r.robot = report.robot;
  r.controller = report.controller;
  r.episode_ids = report.episode_ids;
  return r;
}

namespace {

std::string cell(const std::optional<Aggregate>& a) {
  if (!a) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f \xC2\xB1 %.2f", a->mean, a->stddev);
  return buf;
}

std::string num(double v) { return Json(v).dump(); }

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : "NA"; }

void put_aggregate(std::ostringstream& out, const std::optional<Aggregate>& a) {
  if (a) {
    out << '\t' << num(a->mean) << '\t' << num(a->stddev);
  } else {
    out << "\tNA\tNA";
  }
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    parts.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return parts;
}

double parse_num(const std::string& s) {
  try {
    const Json j = Json::parse(s);
    if (!j.is_number()) throw ConfigError("report: expected a number, got '" + s + "'");
    return j.get<double>();
  } catch (const Json::parse_error&) {
    throw ConfigError("report: expected a number, got '" + s + "'");
  }
}

std::optional<Aggregate> parse_aggregate(const std::string& mean, const std::string& sd, int n) {
  if (mean == "NA") return std::nullopt;
  return Aggregate{parse_num(mean), parse_num(sd), n};
}

}  // namespace

std::string render_table(const TrialReport& r) {
  std::ostringstream out;
  out << "Scene: " << r.scene << "  Robot: " << r.robot << "  Controller: " << r.controller << '\n';
  out << kTableHeader << '\n';
  out << cell(r.elapsed) << " | " << r.completion_rate << "% | " << cell(r.final_distance) << " | "
      << cell(r.min_ped_distance) << " | " << cell(r.collisions) << '\n';
  out << "\xCE\xBC \xC2\xB1 \xCF\x83 over " << r.n << " episodes";
  if (r.aborted > 0) out << " (" << r.aborted << " aborted, excluded)";
  out << '\n';
  return out.str();
}

std::string render_tsv(const TrialReport& r) {
  std::ostringstream out;
  out << "#socnav-report\n";
  out << "#scene\t" << r.scene << "\n#robot\t" << r.robot << "\n#controller\t" << r.controller << '\n';
  out << "#episode\tcompleted\telapsed\tfinal_distance\tmin_ped_distance\tped_collisions\tstatic_collisions\taborted"
         "\tabort_reason\n";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& m = r.rows[i];
    out << (i < r.episode_ids.size() ? r.episode_ids[i] : static_cast<std::int64_t>(i)) << '\t'
        << (m.completed ? 1 : 0) << '\t' << num(m.elapsed) << '\t' << num(m.final_distance) << '\t'
        << opt_num(m.min_ped_distance) << '\t' << m.ped_collisions << '\t' << m.static_collisions << '\t'
        << (m.aborted ? 1 : 0) << '\t' << m.abort_reason << '\n';
  }
  out << "#aggregate\tn\taborted\tcompleted\tcompletion_rate\telapsed_mean\telapsed_sd\tfinal_distance_mean"
         "\tfinal_distance_sd\tmin_ped_distance_mean\tmin_ped_distance_sd\tmin_ped_distance_n\tcollisions_mean"
         "\tcollisions_sd\tped_collisions_mean\tped_collisions_sd\tstatic_collisions_mean\tstatic_collisions_sd\n";
  out << "aggregate\t" << r.n << '\t' << r.aborted << '\t' << r.completed << '\t' << r.completion_rate;
  put_aggregate(out, r.elapsed);
  put_aggregate(out, r.final_distance);
  put_aggregate(out, r.min_ped_distance);
  out << '\t' << (r.min_ped_distance ? r.min_ped_distance->n : 0);
  put_aggregate(out, r.collisions);
  put_aggregate(out, r.ped_collisions);
  put_aggregate(out, r.static_collisions);
  out << '\n';
  return out.str();
}

TrialReport parse_tsv(const std::string& text) {
  TrialReport r;
  std::istringstream in(text);
  std::string line;
  bool have_aggregate = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    if (f[0] == "#scene" && f.size() == 2) {
      r.scene = f[1];
    } else if (f[0] == "#robot" && f.size() == 2) {
      r.robot = f[1];
    } else if (f[0] == "#controller" && f.size() == 2) {
      r.controller = f[1];
    } else if (f[0].starts_with('#')) {
      continue;
    } else if (f[0] == "aggregate") {
      if (f.size() != 18) throw ConfigError("report: aggregate row has " + std::to_string(f.size()) + " fields");
      r.n = std::stoi(f[1]);
      r.aborted = std::stoi(f[2]);
      r.completed = std::stoi(f[3]);
      r.completion_rate = std::stoi(f[4]);
      r.elapsed = parse_aggregate(f[5], f[6], r.n);
      r.final_distance = parse_aggregate(f[7], f[8], r.n);
      r.min_ped_distance = parse_aggregate(f[9], f[10], std::stoi(f[11]));
      r.collisions = parse_aggregate(f[12], f[13], r.n);
      r.ped_collisions = parse_aggregate(f[14], f[15], r.n);
      r.static_collisions = parse_aggregate(f[16], f[17], r.n);
      have_aggregate = true;
    } else {
      if (f.size() != 9) throw ConfigError("report: episode row has " + std::to_string(f.size()) + " fields");
      EpisodeMetrics m;
      r.episode_ids.push_back(std::stoll(f[0]));
      m.completed = f[1] == "1";
      m.elapsed = parse_num(f[2]);
      m.final_distance = parse_num(f[3]);
      if (f[4] != "NA") m.min_ped_distance = parse_num(f[4]);
      m.ped_collisions = std::stoll(f[5]);
      m.static_collisions = std::stoll(f[6]);
      m.aborted = f[7] == "1";
      m.abort_reason = f[8];
      r.rows.push_back(std::move(m));
    }
  }
  if (!have_aggregate) throw ConfigError("report: missing aggregate row");
  return r;
}

}  // namespace socnav
