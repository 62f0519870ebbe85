#include "mksvm/text_format.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "mksvm/error.hpp"
#include "mksvm/perfdb.hpp"

namespace mksvm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double number(const std::string& text, const std::string& what, std::size_t line) {
  const auto v = parse_double(text);
  if (!v) throw ParseError(what + ": '" + text + "' is not a number", line);
  return *v;
}

}  // namespace

TextDocument TextDocument::parse(std::istream& in, const std::string& source) {
  TextDocument doc;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw ParseError(source + ":" + std::to_string(lineno) + ": malformed section header", lineno);
      doc.sections.push_back({trim(line.substr(1, line.size() - 2)), {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(source + ":" + std::to_string(lineno) + ": expected 'key = value'", lineno);
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(source + ":" + std::to_string(lineno) + ": empty key", lineno);
    (doc.sections.empty() ? doc.top : doc.sections.back().entries).emplace_back(std::move(key), std::move(value));
  }
  return doc;
}

TextDocument TextDocument::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return parse(in, path.string());
}

void TextDocument::write(std::ostream& out) const {
  for (const auto& [k, v] : top) out << k << " = " << v << "\n";
  for (const auto& s : sections) {
    out << "\n[" << s.name << "]\n";
    for (const auto& [k, v] : s.entries) out << k << " = " << v << "\n";
  }
}

void TextDocument::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write(out);
}

ParameterSpace space_from_document(const TextDocument& doc) {
  if (doc.sections.empty()) throw ParseError("space file declares no parameters", 0);
  std::vector<ParameterDef> defs;
  for (const auto& s : doc.sections) {
    ParameterDef d;
    d.name = s.name;
    std::set<std::string> seen;
    for (const auto& [k, v] : s.entries) {
      const std::string what = "[" + s.name + "] " + k;
      if (!seen.insert(k).second) throw ParseError(what + " given twice", 0);
      if (k == "lower") d.lower = number(v, what, 0);
      else if (k == "upper") d.upper = number(v, what, 0);
      else if (k == "q") d.q = number(v, what, 0);
      else if (k == "scale") {
        if (v == "linear") d.scale = Scale::linear;
        else if (v == "log") d.scale = Scale::log;
        else throw ParseError(what + ": scale must be linear or log", 0);
      } else {
        throw ParseError("[" + s.name + "]: unknown key '" + k + "'", 0);
      }
    }
    for (const char* required : {"lower", "upper", "q"})
      if (!seen.count(required)) throw ParseError("[" + s.name + "]: missing '" + required + "'", 0);
    defs.push_back(std::move(d));
  }
  return ParameterSpace(std::move(defs));
}

TextDocument space_to_document(const ParameterSpace& space) {
  TextDocument doc;
  for (const auto& p : space.params()) {
    doc.sections.push_back({p.name,
                            {{"lower", format_double(p.lower)},
                             {"upper", format_double(p.upper)},
                             {"q", format_double(p.q)},
                             {"scale", p.scale == Scale::log ? "log" : "linear"}}});
  }
  return doc;
}

ParameterSpace read_space(const std::filesystem::path& path) { return space_from_document(TextDocument::read(path)); }

void write_space(const ParameterSpace& space, const std::filesystem::path& path) {
  space_to_document(space).save(path);
}

Configuration read_configuration(const std::filesystem::path& path) {
  const auto doc = TextDocument::read(path);
  if (!doc.sections.empty()) throw ParseError(path.string() + ": configuration files have no sections", 0);
  Configuration c;
  for (const auto& [k, v] : doc.top) {
    if (c.values.count(k)) throw ParseError(path.string() + ": '" + k + "' given twice", 0);
    c.values[k] = number(v, path.string() + ": " + k, 0);
  }
  return c;
}

}  // namespace mksvm
