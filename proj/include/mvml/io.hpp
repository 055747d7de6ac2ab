#pragma once

// On-disk formats.
//
// Dataset directory:
//   manifest.json  {"n": .., "c": .., "V": .., "aligned": true|false (optional, default true),
//                   "views": [{"name", "dim", "features_file", "labels_file", "missing_file"?}]}
//   features_file  headerless CSV, n rows x dim columns, decimal reals
//   labels_file    headerless CSV, n rows x c columns, integers in {-1, 0, 1}
//   missing_file   one 0/1 flag per line, n lines
// UTF-8, LF line endings. File names are relative to the directory.
//
// Weights file: JSON {"format": "mvml-weights", "version": 1, "c": c,
//                     "views": [{"dim": d, "values": [row-major d*c reals]}]}

#include "mvml/dataset.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace mvml {

MultiViewDataset load_dataset(const std::filesystem::path& dir);

/// Writes manifest.json plus view<i>_features.csv, view<i>_labels.csv and
/// view<i>_missing.txt.
void save_dataset(const MultiViewDataset& ds, const std::filesystem::path& dir);

void save_weights(const WeightStack& w, const std::filesystem::path& file);
WeightStack load_weights(const std::filesystem::path& file);

/// Headerless CSV of a matrix, shortest round-trip decimal form.
std::string matrix_to_csv(const Matrix& m);
void save_matrix_csv(const Matrix& m, const std::filesystem::path& file);

/// Writes to a sibling temporary file and renames it over the target.
void write_file_atomic(const std::filesystem::path& file, const std::string& contents);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double x);

} // namespace mvml
