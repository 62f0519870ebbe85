#include "mksvm/perfdb.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <sstream>

#include "mksvm/error.hpp"

namespace mksvm {

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

constexpr std::string_view kSpacePrefix = "# space: ";

}  // namespace

std::string space_fingerprint(const ParameterSpace& space) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&](std::string_view s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ull;
    }
  };
  for (const auto& p : space.params()) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "|%.17g|%.17g|%.17g|%s;", p.lower, p.upper, p.q,
                  p.scale == Scale::log ? "log" : "linear");
    mix(p.name);
    mix(buf);
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

PerformanceDatabase::PerformanceDatabase(const ParameterSpace& space)
    : space_(space), fingerprint_(space_fingerprint(space)) {
  for (const auto& p : space.params()) names_.push_back(p.name);
}

PerformanceDatabase::PerformanceDatabase(const PerformanceDatabase& o)
    : space_(o.space_), fingerprint_(o.fingerprint_), names_(o.names_), records_(o.records_) {}

PerformanceDatabase& PerformanceDatabase::operator=(const PerformanceDatabase& o) {
  if (this != &o) {
    space_ = o.space_;
    fingerprint_ = o.fingerprint_;
    names_ = o.names_;
    records_ = o.records_;
    sink_.reset();
  }
  return *this;
}

PerformanceDatabase::~PerformanceDatabase() = default;

std::string PerformanceDatabase::header() const {
  std::string h(kSpacePrefix);
  h += fingerprint_;
  h += "\nseq,worker,elapsed_s,objective";
  for (const auto& n : names_) h += "," + n;
  h += "\n";
  return h;
}

std::string PerformanceDatabase::line(const EvaluationRecord& r) const {
  std::string s = std::to_string(r.sequence_index) + "," + std::to_string(r.worker_id) + "," +
                  format_double(r.elapsed_seconds) + "," + format_double(r.objective);
  for (const auto& n : names_) s += "," + format_double(r.config.at(n));
  s += "\n";
  return s;
}

void PerformanceDatabase::attach(const std::filesystem::path& path) {
  auto out = std::make_unique<std::ofstream>(path, std::ios::trunc);
  if (!*out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  *out << header();
  for (const auto& r : records_) *out << line(r);
  out->flush();
  sink_ = std::move(out);
}

void PerformanceDatabase::append(EvaluationRecord r) {
  if (!records_.empty() && r.sequence_index <= records_.back().sequence_index)
    throw IntegrityError("sequence index " + std::to_string(r.sequence_index) + " does not follow " +
                         std::to_string(records_.back().sequence_index));
  if (space_) {
    try {
      space_->validate(r.config);
    } catch (const InvalidInput& e) {
      throw IntegrityError(std::string("record does not belong to this space: ") + e.what());
    }
  } else if (r.config.values.size() != names_.size()) {
    throw IntegrityError("record has the wrong number of parameters");
  }
  if (sink_) {
    *sink_ << line(r);
    sink_->flush();
    if (!*sink_) throw std::runtime_error("database write failed");
  }
  records_.push_back(std::move(r));
}

void PerformanceDatabase::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << header();
  for (const auto& r : records_) out << line(r);
  out.flush();
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

PerformanceDatabase PerformanceDatabase::load(const std::filesystem::path& path,
                                              const std::optional<ParameterSpace>& expected) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open database " + path.string(), 0);
  PerformanceDatabase db;
  std::string text;
  std::size_t lineno = 0;

  if (!std::getline(in, text) || text.rfind(kSpacePrefix, 0) != 0)
    throw ParseError(path.string() + ":1: expected '# space: <fingerprint>'", 1);
  ++lineno;
  db.fingerprint_ = text.substr(kSpacePrefix.size());

  if (!std::getline(in, text)) throw ParseError(path.string() + ":2: missing column header", 2);
  ++lineno;
  const auto cols = split_commas(text);
  static const std::vector<std::string> fixed{"seq", "worker", "elapsed_s", "objective"};
  if (cols.size() < fixed.size() || !std::equal(fixed.begin(), fixed.end(), cols.begin()))
    throw ParseError(path.string() + ":2: column header must start with seq,worker,elapsed_s,objective", 2);
  db.names_.assign(cols.begin() + 4, cols.end());

  if (expected) {
    if (space_fingerprint(*expected) != db.fingerprint_)
      throw IntegrityError(path.string() + ": space fingerprint " + db.fingerprint_ + " does not match " +
                           space_fingerprint(*expected));
    db.space_ = *expected;
  }

  while (std::getline(in, text)) {
    ++lineno;
    if (text.empty()) continue;
    const auto f = split_commas(text);
    const auto where = path.string() + ":" + std::to_string(lineno) + ": ";
    if (f.size() != cols.size())
      throw ParseError(where + "expected " + std::to_string(cols.size()) + " fields, got " +
                           std::to_string(f.size()),
                       lineno);
    EvaluationRecord r;
    const auto seq = parse_int<std::size_t>(f[0]);
    const auto worker = parse_int<int>(f[1]);
    const auto elapsed = parse_double(f[2]);
    const auto objective = parse_double(f[3]);
    if (!seq) throw ParseError(where + "bad seq '" + f[0] + "'", lineno, 0);
    if (!worker) throw ParseError(where + "bad worker '" + f[1] + "'", lineno, 1);
    if (!elapsed) throw ParseError(where + "bad elapsed_s '" + f[2] + "'", lineno, 2);
    if (!objective) throw ParseError(where + "bad objective '" + f[3] + "'", lineno, 3);
    r.sequence_index = *seq;
    r.worker_id = *worker;
    r.elapsed_seconds = *elapsed;
    r.objective = *objective;
    for (std::size_t i = 0; i < db.names_.size(); ++i) {
      const auto v = parse_double(f[4 + i]);
      if (!v) throw ParseError(where + "bad value '" + f[4 + i] + "' for " + db.names_[i], lineno, long(4 + i));
      r.config.values[db.names_[i]] = *v;
    }
    try {
      db.append(std::move(r));
    } catch (const IntegrityError& e) {
      throw IntegrityError(where + e.what());
    }
  }
  return db;
}

bool PerformanceDatabase::same_contents(const PerformanceDatabase& o) const {
  if (fingerprint_ != o.fingerprint_ || names_ != o.names_ || records_.size() != o.records_.size()) return false;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& a = records_[i];
    const auto& b = o.records_[i];
    if (a.config != b.config || a.objective != b.objective || a.elapsed_seconds != b.elapsed_seconds ||
        a.sequence_index != b.sequence_index || a.worker_id != b.worker_id)
      return false;
  }
  return true;
}

std::vector<std::pair<std::size_t, double>> running_best(const PerformanceDatabase& db) {
  if (db.empty()) throw InvalidInput("running_best: empty database");
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(db.size());
  double best = db.records().front().objective;
  for (const auto& r : db.records()) {
    best = std::max(best, r.objective);
    out.emplace_back(r.sequence_index, best);
  }
  return out;
}

}  // namespace mksvm
