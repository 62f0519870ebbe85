#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mksvm/param_space.hpp"

namespace mksvm {

/// Flat `key = value` text with optional `[section]` headers. Blank lines
/// and lines starting with '#' are ignored. Keys before the first section
/// belong to the top level.
///
///   # comment
///   budget = 64
///   [C]
///   lower = 0.1
struct TextDocument {
  using Entries = std::vector<std::pair<std::string, std::string>>;
  struct Section {
    std::string name;
    Entries entries;
  };

  Entries top;
  std::vector<Section> sections;

  static TextDocument parse(std::istream& in, const std::string& source = "<input>");
  static TextDocument read(const std::filesystem::path& path);
  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
};

/// Space file: one section per parameter with lower, upper, q and an
/// optional scale (linear by default). Section order is parameter order.
ParameterSpace space_from_document(const TextDocument& doc);
TextDocument space_to_document(const ParameterSpace& space);
ParameterSpace read_space(const std::filesystem::path& path);
void write_space(const ParameterSpace& space, const std::filesystem::path& path);

/// Configuration file: top-level `name = value` lines.
Configuration read_configuration(const std::filesystem::path& path);

}  // namespace mksvm
