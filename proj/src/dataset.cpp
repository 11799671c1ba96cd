#include "fairprobe/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace fairprobe::dataset {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  out = v;
  return true;
}

}  // namespace

Dataset load_csv(const std::string& path,
                 const std::map<std::string, AttrKind>& schema_hints,
                 const std::string& fav_column, const std::string& fav_value) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open input file: " + path);

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw std::runtime_error("empty input file: " + path);

  const std::vector<std::string> header = split_fields(lines[0]);
  std::set<std::string> seen;
  for (const auto& name : header) {
    if (name.empty()) throw std::runtime_error("empty column name in header");
    if (!seen.insert(name).second)
      throw std::runtime_error("duplicate column name '" + name + "'");
  }
  for (const auto& [name, kind] : schema_hints) {
    (void)kind;
    if (seen.find(name) == seen.end())
      throw std::runtime_error("schema hint for unknown column '" + name + "'");
  }

  Index fav_idx = -1;
  for (Index j = 0; j < static_cast<Index>(header.size()); ++j)
    if (header[j] == fav_column) fav_idx = j;
  if (fav_idx < 0)
    throw std::runtime_error("prediction column '" + fav_column + "' not found");

  const Index n = static_cast<Index>(lines.size()) - 1;
  if (n < 2) throw std::runtime_error("need at least 2 data rows, got " + std::to_string(n));

  std::vector<std::vector<std::string>> cells(n);
  for (Index i = 0; i < n; ++i) {
    cells[i] = split_fields(lines[i + 1]);
    if (cells[i].size() != header.size())
      throw std::runtime_error("row " + std::to_string(i) + " has " +
                               std::to_string(cells[i].size()) + " fields, expected " +
                               std::to_string(header.size()));
    for (Index j = 0; j < static_cast<Index>(header.size()); ++j)
      if (cells[i][j].empty())
        throw std::runtime_error("missing value at row " + std::to_string(i) +
                                 ", column '" + header[j] + "'");
  }

  Dataset data;
  data.n = n;
  data.fav = BoolArray(n);
  for (Index i = 0; i < n; ++i) data.fav[i] = (cells[i][fav_idx] == fav_value);

  for (Index j = 0; j < static_cast<Index>(header.size()); ++j) {
    if (j == fav_idx) continue;
    const std::string& name = header[j];

    AttrKind kind;
    const auto hint = schema_hints.find(name);
    if (hint != schema_hints.end()) {
      kind = hint->second;
    } else {
      bool all_numeric = true;
      double v;
      for (Index i = 0; i < n && all_numeric; ++i)
        all_numeric = parse_double(cells[i][j], v) && std::isfinite(v);
      kind = all_numeric ? AttrKind::continuous : AttrKind::categorical;
    }

    AttributeSpec spec;
    spec.name = name;
    spec.kind = kind;
    if (kind == AttrKind::continuous) {
      Eigen::VectorXd col(n);
      for (Index i = 0; i < n; ++i) {
        double v;
        if (!parse_double(cells[i][j], v))
          throw std::runtime_error("type mismatch at row " + std::to_string(i) +
                                   ", column '" + name + "': '" + cells[i][j] +
                                   "' is not numeric");
        if (!std::isfinite(v))
          throw std::runtime_error("non-finite value at row " + std::to_string(i) +
                                   ", column '" + name + "'");
        col[i] = v;
      }
      data.schema.push_back(std::move(spec));
      data.columns.emplace_back(std::move(col));
    } else {
      std::vector<std::int32_t> codes(n);
      std::unordered_map<std::string, std::int32_t> lookup;
      for (Index i = 0; i < n; ++i) {
        const std::string& cell = cells[i][j];
        auto it = lookup.find(cell);
        if (it == lookup.end()) {
          const auto code = static_cast<std::int32_t>(spec.values.size());
          spec.values.push_back(cell);
          it = lookup.emplace(cell, code).first;
        }
        codes[i] = it->second;
      }
      data.schema.push_back(std::move(spec));
      data.columns.emplace_back(std::move(codes));
    }
  }

  if (data.schema.empty())
    throw std::runtime_error("no attribute columns besides the prediction column");
  return data;
}

void mark_sensitive(Dataset& data, const std::vector<std::string>& names) {
  if (names.empty()) return;  // default: everything stays sensitive
  std::set<std::string> wanted(names.begin(), names.end());
  for (const auto& name : wanted) {
    bool known = false;
    for (const auto& spec : data.schema) known = known || spec.name == name;
    if (!known) throw std::invalid_argument("unknown attribute '" + name + "'");
  }
  for (auto& spec : data.schema)
    spec.sensitive = wanted.find(spec.name) != wanted.end();
}

FeatureMatrix encode(const Dataset& data, bool intercept) {
  const Index n = data.n;
  Index d = 0;
  for (const auto& spec : data.schema) {
    if (!spec.sensitive) continue;
    d += spec.kind == AttrKind::categorical
             ? static_cast<Index>(spec.values.size())
             : 1;
  }
  if (d == 0) throw std::invalid_argument("no sensitive attributes to encode");
  if (intercept) ++d;

  FeatureMatrix fm;
  fm.columns.resize(n, d);
  fm.colmap.reserve(d);
  fm.intercept = intercept;

  Index col = 0;
  for (Index ai = 0; ai < static_cast<Index>(data.schema.size()); ++ai) {
    const auto& spec = data.schema[ai];
    if (!spec.sensitive) continue;
    if (spec.kind == AttrKind::categorical) {
      const auto& codes = std::get<std::vector<std::int32_t>>(data.columns[ai]);
      for (std::int32_t v = 0; v < static_cast<std::int32_t>(spec.values.size()); ++v) {
        for (Index i = 0; i < n; ++i)
          fm.columns(i, col) = codes[i] == v ? 1.0 : 0.0;
        fm.colmap.push_back({ai, v, 0.0, 1.0});
        ++col;
      }
    } else {
      const auto& raw = std::get<Eigen::VectorXd>(data.columns[ai]);
      if (raw.minCoeff() == raw.maxCoeff()) {
        // Constant column: no scale to recover, encode as zeros.
        fm.columns.col(col).setZero();
        fm.colmap.push_back({ai, -1, raw[0], 1.0});
      } else {
        const double mean = raw.sum() / static_cast<double>(n);
        const double var =
            (raw.array() - mean).square().sum() / static_cast<double>(n);
        const double stddev = std::sqrt(var);
        fm.columns.col(col) = (raw.array() - mean) / stddev;
        fm.colmap.push_back({ai, -1, mean, stddev});
      }
      ++col;
    }
  }
  if (intercept) {
    fm.columns.col(col).setOnes();
    fm.colmap.push_back({kIntercept, -1, 0.0, 1.0});
  }
  return fm;
}

Eigen::VectorXd project_row(const FeatureMatrix& fm, Index row) {
  if (row < 0 || row >= fm.columns.rows())
    throw std::out_of_range("row index " + std::to_string(row) +
                            " out of range [0, " +
                            std::to_string(fm.columns.rows()) + ")");
  return fm.columns.row(row).transpose();
}

Index attribute_index(const Dataset& data, const std::string& name) {
  for (Index ai = 0; ai < static_cast<Index>(data.schema.size()); ++ai)
    if (data.schema[ai].name == name) return ai;
  throw std::invalid_argument("unknown attribute '" + name + "'");
}

}  // namespace fairprobe::dataset
