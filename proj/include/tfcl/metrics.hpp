#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "tfcl/stability.hpp"

namespace tfcl {

struct EvalRecord {
  long step = 0;
  std::vector<double> segment_acc;
  double total_acc = 0.0;
  double weighted_acc = 0.0;  // mean of per-class accuracies
  std::vector<double> segment_forgetting;  // best-so-far minus current
  bool consolidation_since_last = false;
  double window_mean = 0.0;
  double window_std = 0.0;
  std::vector<int> missing_classes;  // absent from the eval data
  std::vector<std::pair<int, int>> buffer_class_counts;
};

struct MetricsLog {
  std::string variant;
  std::uint64_t seed = 0;
  int segment_count = 0;
  std::vector<EvalRecord> records;
  std::vector<ConsolidationEvent> events;
  std::uint64_t omega_updates = 0;  // final importance update count
  long aborted_step = -1;           // -1 = ran to completion
  std::string fault;
};

// Round-trippable double formatting (17 significant digits).
std::string format_g17(double v);

std::string csv_header(int segment_count);
void append_csv(const MetricsLog& log, std::ostream& out);
void export_csv(const MetricsLog& log, const std::string& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(std::istream& in);
CsvTable parse_csv_file(const std::string& path);

}  // namespace tfcl
