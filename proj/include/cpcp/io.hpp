#pragma once

#include "cpcp/eval.hpp"
#include "cpcp/propagation.hpp"
#include "cpcp/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace cpcp {

/// Numeric table, one instance per line. The delimiter (comma, tab or
/// spaces) is taken from the first non-empty line. Blank lines are skipped.
Matrix read_feature_file(const std::filesystem::path& path);

/// One line per instance holding one or more integer labels separated by
/// commas or whitespace.
LabelSets read_label_file(const std::filesystem::path& path);

/// Lines of "i j label" with zero-based indices and label +1 (must-link) or
/// -1 (cannot-link). Lines starting with '#' are comments.
ConstraintSet read_constraints_file(const std::filesystem::path& path, Index n);

void write_constraints_file(const std::filesystem::path& path, const ConstraintSet& constraints);
void write_feature_file(const std::filesystem::path& path, const Matrix& values);
void write_label_file(const std::filesystem::path& path, const LabelSets& labels);
void write_assignment_file(const std::filesystem::path& path, const std::vector<int>& labels);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace cpcp
