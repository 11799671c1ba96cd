#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "fairprobe/types.hpp"

namespace fairprobe::dataset {

enum class AttrKind { categorical, continuous };

struct AttributeSpec {
  std::string name;
  AttrKind kind = AttrKind::categorical;
  // Categorical only: declared values in first-appearance order. Cell codes
  // index into this list.
  std::vector<std::string> values;
  bool sensitive = true;
};

// Columnar storage: categorical attributes hold value codes, continuous
// attributes hold raw reals.
using ColumnData = std::variant<std::vector<std::int32_t>, Eigen::VectorXd>;

struct Dataset {
  std::vector<AttributeSpec> schema;
  std::vector<ColumnData> columns;  // parallel to schema
  BoolArray fav;                    // favorable prediction flag per row
  Index n = 0;
};

// Marker for feature-matrix columns that belong to no attribute (intercept).
inline constexpr Index kIntercept = -1;

struct ColumnInfo {
  Index attribute = kIntercept;  // schema index, kIntercept for the constant column
  std::int32_t value = -1;       // categorical value code, -1 for continuous
  double mean = 0.0;             // standardization parameters (0/1 for one-hot)
  double stddev = 1.0;
};

struct FeatureMatrix {
  Eigen::MatrixXd columns;         // n x d, one-hot + z-scored continuous
  std::vector<ColumnInfo> colmap;  // one entry per column
  bool intercept = false;
};

// Parses a comma-separated file (header row, no quoting) into a Dataset.
// Attribute kinds follow schema_hints where given; otherwise a column is
// continuous iff every cell parses as a finite number. The prediction column
// fav_column is consumed into the favorable flags (cell == fav_value) and is
// not part of the schema. Missing or non-finite cells are rejected.
Dataset load_csv(const std::string& path,
                 const std::map<std::string, AttrKind>& schema_hints,
                 const std::string& fav_column, const std::string& fav_value);

// Restricts the audit to the named attributes; everything else is ignored by
// encode(). Unknown names are an error.
void mark_sensitive(Dataset& data, const std::vector<std::string>& names);

// Builds the model-input matrix over the sensitive attributes: categorical
// attributes expand to one column per declared value, continuous attributes
// are z-scored with the population stddev. A constant continuous column gets
// stddev recorded as 1 and becomes all zeros. The optional trailing intercept
// column is all ones and maps to no attribute.
FeatureMatrix encode(const Dataset& data, bool intercept = true);

// One encoded row as a column vector. Bounds-checked.
Eigen::VectorXd project_row(const FeatureMatrix& fm, Index row);

// Schema index of a named attribute; throws if absent.
Index attribute_index(const Dataset& data, const std::string& name);

}  // namespace fairprobe::dataset
