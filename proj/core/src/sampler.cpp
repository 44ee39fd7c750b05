#include "ivmed/sampler.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include "ivmed/rng.hpp"

namespace ivmed {

void CellTable::add(int d, int z, int m, double y) {
  Cell& c = cells_[d][z][m];
  ++c.n;
  // Neumaier summation.
  const double t = c.sum + y;
  if (std::abs(c.sum) >= std::abs(y)) {
    c.carry += (c.sum - t) + y;
  } else {
    c.carry += (y - t) + c.sum;
  }
  c.sum = t;
}

std::uint64_t CellTable::total() const {
  std::uint64_t n = 0;
  for (int d = 0; d < 2; ++d)
    for (int z = 0; z < 2; ++z) n += count(d, z);
  return n;
}

CellTable tabulate(const Dataset& ds) {
  CellTable t;
  for (const auto& r : ds.rows) t.add(r.d, r.z, r.m, r.y);
  return t;
}

namespace {

class RowGenerator {
 public:
  RowGenerator(const Population& pop, std::uint64_t seed) : pop_(pop), key_(rng::derive_key({seed})) {
    cumulative_.reserve(pop.strata.size());
    double acc = 0.0;
    for (std::size_t s = 0; s < pop.strata.size(); ++s) {
      acc += pop.strata[s].weight;
      cumulative_.push_back(acc);
      if (pop.strata[s].weight > 0.0) fallback_ = s;
    }
  }

  Observation operator()(std::uint64_t row) const {
    rng::Stream stream(rng::derive_key({key_, row}));
    const Stratum& s = pop_.strata[pick_stratum(stream.uniform())];
    const int d = stream.uniform() < pop_.p_d ? 1 : 0;
    const int z = stream.uniform() < pop_.p_z ? 1 : 0;
    const double noise = stream.normal();
    const int m = s.response.at(d, z);
    return Observation{static_cast<std::uint8_t>(d), static_cast<std::uint8_t>(z), static_cast<std::uint8_t>(m),
                       s.outcomes.at(d, m) + s.noise_sd * noise};
  }

 private:
  std::size_t pick_stratum(double u) const {
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) return fallback_;  // u beyond the rounded total
    return static_cast<std::size_t>(it - cumulative_.begin());
  }

  const Population& pop_;
  std::uint64_t key_;
  std::vector<double> cumulative_;
  std::size_t fallback_ = 0;
};

void check_draw_args(const Population& pop, std::size_t n) {
  if (n == 0) throw DomainError("sample size must be at least 1");
  require_valid(pop);
}

}  // namespace

Dataset draw(const Population& pop, std::size_t n, std::uint64_t seed, DrawOptions opts) {
  check_draw_args(pop, n);
  const RowGenerator gen(pop, seed);
  Dataset ds;
  ds.seed = seed;
  ds.rows.resize(n);

  unsigned threads = opts.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opts.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  auto fill = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) ds.rows[i] = gen(i);
  };
  if (threads <= 1) {
    fill(0, n);
    return ds;
  }
  {
    std::vector<std::jthread> workers;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t begin = 0; begin < n; begin += chunk) {
      workers.emplace_back(fill, begin, std::min(n, begin + chunk));
    }
  }
  return ds;
}

CellTable draw_cells(const Population& pop, std::size_t n, std::uint64_t seed) {
  check_draw_args(pop, n);
  const RowGenerator gen(pop, seed);
  CellTable t;
  for (std::size_t i = 0; i < n; ++i) {
    const Observation o = gen(i);
    t.add(o.d, o.z, o.m, o.y);
  }
  return t;
}

void write_csv(std::ostream& out, const Dataset& ds) {
  out << "d,z,m,y\n";
  char buf[64];
  for (const auto& r : ds.rows) {
    auto res = std::to_chars(buf, buf + sizeof buf, r.y, std::chars_format::general, 17);
    out << int(r.d) << ',' << int(r.z) << ',' << int(r.m) << ',';
    out.write(buf, res.ptr - buf);
    out << '\n';
  }
}

std::string to_csv(const Dataset& ds) {
  std::ostringstream os;
  write_csv(os, ds);
  return os.str();
}

namespace {

[[noreturn]] void csv_error(std::size_t line, const std::string& what) {
  throw ParseError("csv line " + std::to_string(line) + ": " + what);
}

std::uint8_t parse_binary(std::string_view field, std::size_t line, const char* name) {
  if (field == "0") return 0;
  if (field == "1") return 1;
  csv_error(line, std::string(name) + " must be 0 or 1, got '" + std::string(field) + "'");
}

}  // namespace

Dataset read_csv(std::istream& in) {
  Dataset ds;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header_seen) {
      if (line != "d,z,m,y") csv_error(lineno, "expected header 'd,z,m,y'");
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;

    std::string_view rest(line);
    std::string_view fields[4];
    for (int k = 0; k < 4; ++k) {
      const auto comma = rest.find(',');
      if (k < 3) {
        if (comma == std::string_view::npos) csv_error(lineno, "expected 4 fields");
        fields[k] = rest.substr(0, comma);
        rest.remove_prefix(comma + 1);
      } else {
        if (comma != std::string_view::npos) csv_error(lineno, "expected 4 fields");
        fields[k] = rest;
      }
    }
    Observation o;
    o.d = parse_binary(fields[0], lineno, "d");
    o.z = parse_binary(fields[1], lineno, "z");
    o.m = parse_binary(fields[2], lineno, "m");
    const char* first = fields[3].data();
    const char* last = first + fields[3].size();
    auto [ptr, ec] = std::from_chars(first, last, o.y);
    if (ec != std::errc() || ptr != last || !std::isfinite(o.y)) {
      csv_error(lineno, "y is not a finite number: '" + std::string(fields[3]) + "'");
    }
    ds.rows.push_back(o);
  }
  if (!header_seen) throw ParseError("csv: empty input");
  if (ds.rows.empty()) throw ParseError("csv: no data rows");
  return ds;
}

}  // namespace ivmed
