#include "mampc/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mampc {

namespace {

double parse_num(const std::string& s) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin)
    throw std::runtime_error("csv: cannot parse number from '" + s + "'");
  return v;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

std::string format_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out = open_out(path);
  for (size_t i = 0; i < table.header.size(); ++i)
    out << (i ? "," : "") << table.header[i];
  out << "\n";
  for (const auto& row : table.rows) {
    for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      table.header = split_line(line);
      first = false;
    } else {
      table.rows.push_back(split_line(line));
    }
  }
  if (first) throw std::runtime_error("csv: '" + path + "' is empty");
  return table;
}

void write_dataset_csv(const std::string& path, const Dataset& d) {
  const int m = static_cast<int>(d.u.cols());
  const int l = static_cast<int>(d.y.cols());
  CsvTable table;
  table.header.push_back("t");
  for (int c = 0; c < m; ++c) table.header.push_back("u" + std::to_string(c + 1));
  for (int c = 0; c < l; ++c) table.header.push_back("y" + std::to_string(c + 1));
  for (Eigen::Index k = 0; k < d.t.size(); ++k) {
    std::vector<std::string> row;
    row.push_back(format_num(d.t(k)));
    for (int c = 0; c < m; ++c) row.push_back(format_num(d.u(k, c)));
    for (int c = 0; c < l; ++c) row.push_back(format_num(d.y(k, c)));
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

Dataset read_dataset_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  int m = 0, l = 0;
  for (const auto& name : table.header) {
    if (name.rfind("u", 0) == 0) ++m;
    if (name.rfind("y", 0) == 0) ++l;
  }
  if (table.header.empty() || table.header[0] != "t" || m < 1 || l < 1)
    throw std::runtime_error("dataset csv: unexpected header in '" + path + "'");
  const int T = static_cast<int>(table.rows.size());
  Dataset d;
  d.t.resize(T);
  d.u.resize(T, m);
  d.y.resize(T, l);
  for (int k = 0; k < T; ++k) {
    const auto& row = table.rows[k];
    if (static_cast<int>(row.size()) != 1 + m + l)
      throw std::runtime_error("dataset csv: ragged row in '" + path + "'");
    d.t(k) = parse_num(row[0]);
    for (int c = 0; c < m; ++c) d.u(k, c) = parse_num(row[1 + c]);
    for (int c = 0; c < l; ++c) d.y(k, c) = parse_num(row[1 + m + c]);
  }
  return d;
}

namespace {

void append_matrix_row(CsvTable& table, const std::string& name,
                       const Eigen::MatrixXd& M) {
  std::vector<std::string> row{name};
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(format_num(M(i, j)));
  table.rows.push_back(std::move(row));
}

Eigen::MatrixXd parse_matrix_row(const std::vector<std::string>& row, int rows,
                                 int cols, const std::string& what) {
  if (static_cast<int>(row.size()) != 1 + rows * cols)
    throw std::runtime_error("model csv: wrong entry count for " + what);
  Eigen::MatrixXd M(rows, cols);
  int at = 1;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = parse_num(row[at++]);
  return M;
}

}  // namespace

void write_model_csv(const std::string& path, const IdentifiedModel& m) {
  CsvTable table;
  table.header = {"field", "values"};
  const int n = m.model.state_dim();
  const int mi = m.model.input_dim();
  const int l = m.model.output_dim();
  table.rows.push_back({"dims", std::to_string(n), std::to_string(mi), std::to_string(l)});
  table.rows.push_back({"dt", format_num(m.model.dt)});
  append_matrix_row(table, "A", m.model.A);
  append_matrix_row(table, "B", m.model.B);
  append_matrix_row(table, "C", m.model.C);
  append_matrix_row(table, "D", m.model.D);
  append_matrix_row(table, "mean_u", m.mean_u.transpose());
  append_matrix_row(table, "mean_y", m.mean_y.transpose());
  write_csv(path, table);
}

IdentifiedModel read_model_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  int n = -1, m = -1, l = -1;
  double dt = 0.0;
  Eigen::MatrixXd A, B, C, D, mu, my;
  for (const auto& row : table.rows) {
    if (row.empty()) continue;
    const std::string& name = row[0];
    if (name == "dims") {
      if (row.size() != 4) throw std::runtime_error("model csv: bad dims row");
      n = static_cast<int>(parse_num(row[1]));
      m = static_cast<int>(parse_num(row[2]));
      l = static_cast<int>(parse_num(row[3]));
    } else if (name == "dt") {
      dt = parse_num(row.at(1));
    } else if (n < 0) {
      throw std::runtime_error("model csv: dims row must come first");
    } else if (name == "A") {
      A = parse_matrix_row(row, n, n, "A");
    } else if (name == "B") {
      B = parse_matrix_row(row, n, m, "B");
    } else if (name == "C") {
      C = parse_matrix_row(row, l, n, "C");
    } else if (name == "D") {
      D = parse_matrix_row(row, l, m, "D");
    } else if (name == "mean_u") {
      mu = parse_matrix_row(row, 1, m, "mean_u");
    } else if (name == "mean_y") {
      my = parse_matrix_row(row, 1, l, "mean_y");
    } else {
      throw std::runtime_error("model csv: unknown field '" + name + "'");
    }
  }
  if (n < 0 || A.size() == 0 || B.size() == 0 || C.size() == 0 || D.size() == 0)
    throw std::runtime_error("model csv: incomplete file '" + path + "'");
  IdentifiedModel out{LtiModel(A, B, C, D, dt), mu.row(0).transpose(),
                      my.row(0).transpose()};
  return out;
}

void write_log_csv(const std::string& path, const ClosedLoopLog& log) {
  const int m = log.input_dim();
  const int l = log.output_dim();
  CsvTable table;
  table.header.push_back("k");
  for (int c = 0; c < l; ++c) table.header.push_back("r" + std::to_string(c + 1));
  for (int c = 0; c < l; ++c) table.header.push_back("y" + std::to_string(c + 1));
  for (int c = 0; c < m; ++c) table.header.push_back("u" + std::to_string(c + 1));
  table.header.insert(table.header.end(), {"controller", "alt_iterations", "objective"});
  for (const auto& step : log.steps) {
    std::vector<std::string> row;
    row.push_back(std::to_string(step.k));
    for (int c = 0; c < l; ++c) row.push_back(format_num(step.reference(c)));
    for (int c = 0; c < l; ++c) row.push_back(format_num(step.output(c)));
    for (int c = 0; c < m; ++c) row.push_back(format_num(step.input(c)));
    row.push_back(step.controller);
    row.push_back(std::to_string(step.alt_iterations));
    row.push_back(format_num(step.objective));
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

ClosedLoopLog read_log_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  int l = 0, m = 0;
  for (const auto& name : table.header) {
    if (name.size() >= 2 && name[0] == 'y') ++l;
    if (name.size() >= 2 && name[0] == 'u') ++m;
  }
  if (l < 1 || m < 1 || table.header.size() != static_cast<size_t>(1 + 2 * l + m + 3))
    throw std::runtime_error("log csv: unexpected header in '" + path + "'");
  ClosedLoopLog log;
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size())
      throw std::runtime_error("log csv: ragged row in '" + path + "'");
    LogStep step;
    step.k = static_cast<int>(parse_num(row[0]));
    step.reference.resize(l);
    step.output.resize(l);
    step.input.resize(m);
    int at = 1;
    for (int c = 0; c < l; ++c) step.reference(c) = parse_num(row[at++]);
    for (int c = 0; c < l; ++c) step.output(c) = parse_num(row[at++]);
    for (int c = 0; c < m; ++c) step.input(c) = parse_num(row[at++]);
    step.controller = row[at++];
    step.alt_iterations = static_cast<int>(parse_num(row[at++]));
    step.objective = parse_num(row[at++]);
    log.steps.push_back(std::move(step));
  }
  return log;
}

}  // namespace mampc
