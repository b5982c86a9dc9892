#pragma once

#include "apiknow/test_model.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace apiknow {

/// Surface spelling of generated tests. The spelling table covers the
/// target runtime's keywords.
struct EmitStyle {
  std::string indent = "    ";
  std::string module_prefix = "module_";
  std::string object_prefix = "var_";
  std::string none_literal = "None";
  std::string true_literal = "True";
  std::string false_literal = "False";
  std::string assertion = "assert {} is not None";
  std::string function_prefix = "test_";
};

/// Module path -> alias, numbered in sorted module order.
using ModuleAliases = std::map<std::string, std::string>;

ModuleAliases module_aliases(const TestSuite& suite, const EmitStyle& style = {});

/// Renders a literal value in the target syntax; throws Error(generation)
/// for values that have no literal spelling.
std::string render_value(const Value& value, const EmitStyle& style = {});

/// One self-contained test file. Throws Error(generation) on an empty test
/// or an unrenderable literal.
std::string emit_test(const TestCase& test, const ModuleAliases& aliases, const EmitStyle& style = {});
std::string emit_test(const TestCase& test, const EmitStyle& style = {});

std::string test_file_name(const TestSuite& suite, const TestCase& test);

/// Writes one file per test plus manifest.json (test id -> file and the
/// structured suite). Files listed by a previous manifest but no longer
/// part of the suite are removed. Returns the written paths, manifest last.
std::vector<std::filesystem::path> emit_suite(const TestSuite& suite, const std::filesystem::path& out_dir,
                                              const EmitStyle& style = {});

/// Reads the suite back from a directory written by emit_suite.
TestSuite load_suite(const std::filesystem::path& dir);

} // namespace apiknow
