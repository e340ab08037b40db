#include "tfcl/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tfcl {

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_header(int segment_count) {
  std::string h = "step,variant,seed";
  for (int s = 0; s < segment_count; ++s) h += ",acc_seg" + std::to_string(s);
  h += ",acc_total,acc_weighted";
  for (int s = 0; s < segment_count; ++s) h += ",forget_seg" + std::to_string(s);
  h += ",consolidation,window_mean,window_std";
  return h;
}

void append_csv(const MetricsLog& log, std::ostream& out) {
  for (const EvalRecord& r : log.records) {
    out << r.step << ',' << log.variant << ',' << log.seed;
    for (double a : r.segment_acc) out << ',' << format_g17(a);
    out << ',' << format_g17(r.total_acc) << ',' << format_g17(r.weighted_acc);
    for (double f : r.segment_forgetting) out << ',' << format_g17(f);
    out << ',' << (r.consolidation_since_last ? 1 : 0);
    out << ',' << format_g17(r.window_mean) << ',' << format_g17(r.window_std);
    out << '\n';
  }
}

void export_csv(const MetricsLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << csv_header(log.segment_count) << '\n';
  append_csv(log, out);
  if (!out) throw std::runtime_error("short write to " + path);
}

static std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

CsvTable parse_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (first) {
      t.header = std::move(cells);
      first = false;
      continue;
    }
    if (cells.size() != t.header.size())
      throw std::runtime_error("csv row width does not match header");
    t.rows.push_back(std::move(cells));
  }
  if (first) throw std::runtime_error("csv input is empty");
  return t;
}

CsvTable parse_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv: " + path);
  return parse_csv(in);
}

}  // namespace tfcl
