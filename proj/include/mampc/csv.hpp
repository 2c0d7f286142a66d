#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mampc/lti.hpp"
#include "mampc/metrics.hpp"

namespace mampc {

/// Fixed-format floating-point printing used in every CSV artifact:
/// 12 significant digits, locale-independent.
std::string format_num(double v);

/// Simple comma-separated table with one header row, LF line endings.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

struct Dataset {
  Eigen::VectorXd t;
  Eigen::MatrixXd u;
  Eigen::MatrixXd y;
};
void write_dataset_csv(const std::string& path, const Dataset& d);
Dataset read_dataset_csv(const std::string& path);

/// Identified model plus the offsets removed during identification.
struct IdentifiedModel {
  LtiModel model;
  Eigen::VectorXd mean_u;
  Eigen::VectorXd mean_y;
};
void write_model_csv(const std::string& path, const IdentifiedModel& m);
IdentifiedModel read_model_csv(const std::string& path);

void write_log_csv(const std::string& path, const ClosedLoopLog& log);
ClosedLoopLog read_log_csv(const std::string& path);

}  // namespace mampc
