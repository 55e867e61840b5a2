#include "mdvdrp/scenarios/historical_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

namespace mdvdrp::historical {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <class T>
bool parse(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string fmt_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, ptr};
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SimError("cannot open '" + path + "' for reading");
  return in;
}

}  // namespace

std::vector<OrderRecord> read_orders(std::istream& in, int days, const Rect& region) {
  std::vector<OrderRecord> out;
  std::vector<std::string> errors;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  const auto fail = [&](const std::string& why) {
    errors.push_back("line " + std::to_string(lineno) + ": " + why);
  };

  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view view = trim(line);
    if (!header) {
      if (view != kOrderHeader) {
        fail(std::string("expected header '") + kOrderHeader + "'");
        break;
      }
      header = true;
      continue;
    }
    if (view.empty()) continue;
    const auto fields = split(view, ',');
    if (fields.size() != 6) {
      fail("expected 6 fields, got " + std::to_string(fields.size()));
      continue;
    }
    OrderRecord r;
    if (!parse(fields[0], r.day) || r.day < 0 || r.day >= days) {
      fail("day must be an integer in [0, " + std::to_string(days) + ")");
      continue;
    }
    double v[5];
    bool ok = true;
    for (int i = 0; i < 5; ++i) ok = ok && parse(fields[static_cast<std::size_t>(i) + 1], v[i]) && std::isfinite(v[i]);
    if (!ok) {
      fail("non-numeric field");
      continue;
    }
    r.time_seconds = v[0];
    r.origin = {v[1], v[2]};
    r.destination = {v[3], v[4]};
    if (r.time_seconds < 0.0) {
      fail("time_seconds must be >= 0");
      continue;
    }
    if (!region.contains(r.origin) || !region.contains(r.destination)) {
      fail("coordinates outside the region");
      continue;
    }
    out.push_back(r);
  }
  if (!header && errors.empty()) {
    lineno = 1;
    fail("missing header");
  }
  if (!errors.empty()) {
    std::ostringstream os;
    os << "malformed historical order file (" << errors.size() << " error(s)):";
    for (std::size_t i = 0; i < errors.size() && i < 20; ++i) os << "\n  " << errors[i];
    throw SimError(os.str());
  }
  return out;
}

std::vector<OrderRecord> read_orders_file(const std::string& path, int days, const Rect& region) {
  auto in = open_in(path);
  return read_orders(in, days, region);
}

void write_orders(std::ostream& out, const std::vector<OrderRecord>& records) {
  out << kOrderHeader << '\n';
  for (const auto& r : records) {
    out << r.day << ',' << fmt_double(r.time_seconds) << ',' << fmt_double(r.origin.x) << ','
        << fmt_double(r.origin.y) << ',' << fmt_double(r.destination.x) << ',' << fmt_double(r.destination.y)
        << '\n';
  }
}

std::vector<std::vector<OrderSpec>> to_day_schemes(const std::vector<OrderRecord>& records, int days) {
  std::vector<std::vector<OrderSpec>> out(static_cast<std::size_t>(days));
  for (const auto& r : records) {
    OrderSpec spec;
    spec.created_at = r.time_seconds / 60.0;
    spec.origin = r.origin;
    spec.destination = r.destination;
    spec.price = distance(r.origin, r.destination);
    out[static_cast<std::size_t>(r.day)].push_back(spec);
  }
  return out;
}

PoissonGridTable read_grid(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  const auto fail = [&](const std::string& why) -> SimError {
    return SimError("poisson grid line " + std::to_string(lineno) + ": " + why);
  };

  bool magic = false;
  bool dims = false;
  PoissonGridTable table = PoissonGridTable::zeros(Rect{0.0, 0.0, 10.0, 10.0});
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    std::vector<std::string_view> f;
    for (auto tok : split(view, ' ')) {
      if (!trim(tok).empty()) f.push_back(trim(tok));
    }
    if (!magic) {
      if (f.size() != 2 || f[0] != "mdvdrp-poisson-grid") throw fail("missing 'mdvdrp-poisson-grid' header");
      int version = 0;
      if (!parse(f[1], version) || version != 1) throw fail("unsupported version");
      magic = true;
      continue;
    }
    if (f[0] == "region") {
      double v[4];
      if (f.size() != 5) throw fail("region needs 4 numbers");
      for (int i = 0; i < 4; ++i) {
        if (!parse(f[static_cast<std::size_t>(i) + 1], v[i])) throw fail("bad region value");
      }
      table.region = Rect{v[0], v[1], v[2], v[3]};
    } else if (f[0] == "dims") {
      int tx = 0, ty = 0, hours = 0;
      if (f.size() != 4 || !parse(f[1], tx) || !parse(f[2], ty) || !parse(f[3], hours)) throw fail("bad dims line");
      if (tx != PoissonGridTable::kTilesX || ty != PoissonGridTable::kTilesY || hours != PoissonGridTable::kHours) {
        throw fail("dimension mismatch: expected 20 20 24, got " + std::to_string(tx) + " " + std::to_string(ty) +
                   " " + std::to_string(hours));
      }
      dims = true;
    } else if (f[0] == "kappa") {
      if (!dims) throw fail("kappa entry before dims");
      int o = 0, d = 0, h = 0;
      double rate = 0.0;
      if (f.size() != 5 || !parse(f[1], o) || !parse(f[2], d) || !parse(f[3], h) || !parse(f[4], rate)) {
        throw fail("bad kappa entry");
      }
      if (o < 0 || o >= PoissonGridTable::kTiles || d < 0 || d >= PoissonGridTable::kTiles || h < 0 ||
          h >= PoissonGridTable::kHours) {
        throw fail("kappa index out of range");
      }
      table.kappa[PoissonGridTable::kappa_index(o, d, h)] = rate;
    } else if (f[0] == "driver") {
      if (!dims) throw fail("driver entry before dims");
      int tile = 0, h = 0;
      double rate = 0.0;
      if (f.size() != 4 || !parse(f[1], tile) || !parse(f[2], h) || !parse(f[3], rate)) {
        throw fail("bad driver entry");
      }
      if (tile < 0 || tile >= PoissonGridTable::kTiles || h < 0 || h >= PoissonGridTable::kHours) {
        throw fail("driver index out of range");
      }
      table.driver_rates[PoissonGridTable::driver_index(tile, h)] = rate;
    } else {
      throw fail("unknown record '" + std::string(f[0]) + "'");
    }
  }
  if (!magic) throw SimError("poisson grid: empty file");
  if (!dims) throw SimError("poisson grid: missing dims line");
  table.validate();
  return table;
}

PoissonGridTable read_grid_file(const std::string& path) {
  auto in = open_in(path);
  return read_grid(in);
}

void write_grid(std::ostream& out, const PoissonGridTable& table) {
  table.validate();
  out << "mdvdrp-poisson-grid 1\n";
  out << "region " << fmt_double(table.region.x0) << ' ' << fmt_double(table.region.y0) << ' '
      << fmt_double(table.region.x1) << ' ' << fmt_double(table.region.y1) << '\n';
  out << "dims " << PoissonGridTable::kTilesX << ' ' << PoissonGridTable::kTilesY << ' ' << PoissonGridTable::kHours
      << '\n';
  for (int o = 0; o < PoissonGridTable::kTiles; ++o) {
    for (int d = 0; d < PoissonGridTable::kTiles; ++d) {
      for (int h = 0; h < PoissonGridTable::kHours; ++h) {
        const double k = table.kappa[PoissonGridTable::kappa_index(o, d, h)];
        if (k != 0.0) out << "kappa " << o << ' ' << d << ' ' << h << ' ' << fmt_double(k) << '\n';
      }
    }
  }
  for (int tile = 0; tile < PoissonGridTable::kTiles; ++tile) {
    for (int h = 0; h < PoissonGridTable::kHours; ++h) {
      const double r = table.driver_rates[PoissonGridTable::driver_index(tile, h)];
      if (r != 0.0) out << "driver " << tile << ' ' << h << ' ' << fmt_double(r) << '\n';
    }
  }
}

}  // namespace mdvdrp::historical
