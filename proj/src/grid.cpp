#include "aquah/grid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "aquah/common.hpp"
#include "aquah/error.hpp"

namespace aquah {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

void check_spec(const GridSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1)
    throw ShapeError("grid needs at least one row and one column");
  if (!(spec.cell_size > 0) || !std::isfinite(spec.cell_size))
    throw ShapeError("cell size must be positive");
}

void require_match(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!a.matches(b))
    throw ShapeError(std::string(what) + ": grid " + std::to_string(a.rows) + "x" +
                     std::to_string(a.cols) + " does not match " + std::to_string(b.rows) + "x" +
                     std::to_string(b.cols));
}

std::string cell_name(const GridSpec& spec, std::size_t idx) {
  return "(" + std::to_string(idx / spec.cols) + ", " + std::to_string(idx % spec.cols) + ")";
}

}  // namespace

bool GridSpec::matches(const GridSpec& o) const {
  return rows == o.rows && cols == o.cols && std::abs(cell_size - o.cell_size) < 1e-9 * cell_size &&
         std::abs(origin_x - o.origin_x) < 1e-3 && std::abs(origin_y - o.origin_y) < 1e-3;
}

// ---------------------------------------------------------------------------
// Raster

Raster::Raster(GridSpec spec, std::vector<double> values) : spec_(spec), values_(std::move(values)) {
  check_spec(spec_);
  if (values_.size() != spec_.size())
    throw ShapeError("expected " + std::to_string(spec_.size()) + " values, got " +
                     std::to_string(values_.size()));
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (values_[i] != spec_.nodata && !std::isfinite(values_[i]))
      throw DataRangeError("non-finite value at cell " + cell_name(spec_, i));
}

Raster Raster::filled(const GridSpec& spec, double value) {
  check_spec(spec);
  return Raster(spec, std::vector<double>(spec.size(), value));
}

std::size_t Raster::valid_count() const {
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(), [&](double v) { return v != spec_.nodata; }));
}

// ---------------------------------------------------------------------------
// Direction codes

std::optional<D8Offset> d8_offset(std::uint8_t code) {
  for (const auto& n : kD8Neighbours)
    if (static_cast<std::uint8_t>(n.code) == code) return n;
  return std::nullopt;
}

bool is_d8_code(std::uint8_t code) { return code == 0 || d8_offset(code).has_value(); }

DirectionGrid::DirectionGrid(GridSpec spec, std::vector<std::uint8_t> codes,
                             std::vector<std::uint8_t> active)
    : spec_(spec), codes_(std::move(codes)), active_(std::move(active)) {
  check_spec(spec_);
  if (codes_.size() != spec_.size() || active_.size() != spec_.size())
    throw ShapeError("direction grid size does not match its spec");
  for (std::size_t i = 0; i < codes_.size(); ++i) {
    if (!is_d8_code(codes_[i]))
      throw DataRangeError("invalid D8 code " + std::to_string(codes_[i]) + " at cell " +
                           cell_name(spec_, i));
    if (!active_[i]) codes_[i] = 0;
  }
}

DirectionGrid::DirectionGrid(GridSpec spec, std::vector<std::uint8_t> codes)
    : DirectionGrid(spec, std::move(codes), std::vector<std::uint8_t>(spec.size(), 1)) {}

DirectionGrid DirectionGrid::from_raster(const Raster& ddm) {
  std::vector<std::uint8_t> codes(ddm.size(), 0), active(ddm.size(), 0);
  for (std::size_t i = 0; i < ddm.size(); ++i) {
    if (ddm.is_nodata(i)) continue;
    const double v = ddm.at(i);
    if (v < 0 || v > 255 || v != std::floor(v) || !is_d8_code(static_cast<std::uint8_t>(v)))
      throw DataRangeError("invalid D8 code " + text::exact(v) + " at cell " +
                           cell_name(ddm.spec(), i));
    codes[i] = static_cast<std::uint8_t>(v);
    active[i] = 1;
  }
  return DirectionGrid(ddm.spec(), std::move(codes), std::move(active));
}

Raster DirectionGrid::to_raster() const {
  std::vector<double> v(size());
  for (std::size_t i = 0; i < size(); ++i) v[i] = active(i) ? codes_[i] : spec_.nodata;
  return Raster(spec_, std::move(v));
}

std::optional<std::size_t> DirectionGrid::downstream(std::size_t idx) const {
  if (!active_[idx] || codes_[idx] == 0) return std::nullopt;
  const auto off = d8_offset(codes_[idx]);
  const long r = static_cast<long>(idx / spec_.cols) + off->drow;
  const long c = static_cast<long>(idx % spec_.cols) + off->dcol;
  if (!spec_.in_bounds(r, c)) return std::nullopt;
  const std::size_t j = spec_.index(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
  if (!active_[j]) return std::nullopt;
  return j;
}

double DirectionGrid::hop_length(std::size_t idx) const {
  const auto off = d8_offset(codes_[idx]);
  return (off && off->diagonal) ? spec_.cell_size * kSqrt2 : spec_.cell_size;
}

// ---------------------------------------------------------------------------
// Basin mask

BasinMask::BasinMask(GridSpec spec, std::vector<std::uint8_t> members, Cell outlet)
    : spec_(spec), members_(std::move(members)), outlet_(outlet) {
  check_spec(spec_);
  if (members_.size() != spec_.size()) throw ShapeError("mask size does not match its spec");
  if (!spec_.in_bounds(static_cast<long>(outlet.row), static_cast<long>(outlet.col)) ||
      !members_[spec_.index(outlet.row, outlet.col)])
    throw BoundsError("outlet cell is not a member of the basin mask");
  count_ = static_cast<std::size_t>(std::count_if(members_.begin(), members_.end(),
                                                  [](std::uint8_t m) { return m != 0; }));
}

// ---------------------------------------------------------------------------
// ESRI ASCII grid

Raster parse_ascii_grid(const std::string& body, const std::string& origin) {
  std::istringstream in(body);
  std::string line;
  std::size_t line_no = 0;
  GridSpec spec;
  bool have_rows = false, have_cols = false, have_x = false, have_y = false, have_cs = false;
  bool x_center = false, y_center = false, in_data = false;
  std::vector<double> values;

  auto fail = [&](const std::string& msg) {
    throw ParseError(origin + ":" + std::to_string(line_no) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = text::split_ws(line);
    if (tokens.empty()) continue;
    // Header lines start with a letter; the first line that does not is data.
    if (!in_data && std::isalpha(static_cast<unsigned char>(tokens[0][0]))) {
      if (tokens.size() != 2) fail("header line needs a key and one value");
      const std::string key = text::lower(tokens[0]);
      const auto value = text::to_double(tokens[1]);
      if (!value) fail("header value '" + tokens[1] + "' is not a number");
      if (key == "ncols") {
        if (*value < 1 || *value != std::floor(*value)) fail("ncols must be a positive integer");
        spec.cols = static_cast<std::size_t>(*value);
        have_cols = true;
      } else if (key == "nrows") {
        if (*value < 1 || *value != std::floor(*value)) fail("nrows must be a positive integer");
        spec.rows = static_cast<std::size_t>(*value);
        have_rows = true;
      } else if (key == "xllcorner" || key == "xllcenter") {
        spec.origin_x = *value;
        x_center = key == "xllcenter";
        have_x = true;
      } else if (key == "yllcorner" || key == "yllcenter") {
        spec.origin_y = *value;
        y_center = key == "yllcenter";
        have_y = true;
      } else if (key == "cellsize") {
        if (!(*value > 0)) fail("cellsize must be positive");
        spec.cell_size = *value;
        have_cs = true;
      } else if (key == "nodata_value") {
        spec.nodata = *value;
      } else {
        fail("unknown header key '" + tokens[0] + "'");
      }
      continue;
    }
    if (!in_data) {
      if (!have_rows || !have_cols || !have_x || !have_y || !have_cs)
        fail("header must declare ncols, nrows, xllcorner, yllcorner and cellsize");
      in_data = true;
      values.reserve(spec.size());
    }
    for (const auto& tok : tokens) {
      const auto v = text::to_double(tok);
      if (!v) fail("value '" + tok + "' is not a number");
      values.push_back(*v);
    }
  }
  if (!in_data) {
    if (!have_rows || !have_cols || !have_x || !have_y || !have_cs)
      fail("header must declare ncols, nrows, xllcorner, yllcorner and cellsize");
  }
  if (x_center) spec.origin_x -= spec.cell_size / 2;
  if (y_center) spec.origin_y -= spec.cell_size / 2;
  if (values.size() != spec.size())
    throw ShapeError(origin + ": header declares " + std::to_string(spec.rows) + "x" +
                     std::to_string(spec.cols) + " = " + std::to_string(spec.size()) +
                     " values, found " + std::to_string(values.size()));
  return Raster(spec, std::move(values));
}

Raster read_ascii_grid(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingDataError("missing grid " + path.string());
  return parse_ascii_grid(text::read_file(path), path.string());
}

std::string format_ascii_grid(const Raster& raster) {
  const auto& s = raster.spec();
  std::string out;
  out += "ncols " + std::to_string(s.cols) + "\n";
  out += "nrows " + std::to_string(s.rows) + "\n";
  out += "xllcorner " + text::exact(s.origin_x) + "\n";
  out += "yllcorner " + text::exact(s.origin_y) + "\n";
  out += "cellsize " + text::exact(s.cell_size) + "\n";
  out += "NODATA_value " + text::exact(s.nodata) + "\n";
  for (std::size_t r = 0; r < s.rows; ++r) {
    for (std::size_t c = 0; c < s.cols; ++c) {
      if (c) out += ' ';
      out += text::exact(raster(r, c));
    }
    out += '\n';
  }
  return out;
}

void write_ascii_grid(const std::filesystem::path& path, const Raster& raster) {
  text::write_file(path, format_ascii_grid(raster));
}

// ---------------------------------------------------------------------------
// Terrain algorithms

DirectionGrid d8_flow_directions(const Raster& dem) {
  const auto& s = dem.spec();
  if (dem.valid_count() == 0) throw EmptyInputError("DEM has no valid cells");
  std::vector<std::uint8_t> codes(dem.size(), 0), active(dem.size(), 0);
  const double diag = s.cell_size * kSqrt2;
  for (std::size_t r = 0; r < s.rows; ++r) {
    for (std::size_t c = 0; c < s.cols; ++c) {
      const std::size_t i = s.index(r, c);
      if (dem.is_nodata(i)) continue;
      active[i] = 1;
      const double z = dem.at(i);
      double best = 0.0;
      std::uint8_t best_code = 0;
      for (const auto& n : kD8Neighbours) {
        const long nr = static_cast<long>(r) + n.drow, nc = static_cast<long>(c) + n.dcol;
        if (!s.in_bounds(nr, nc)) continue;
        const std::size_t j = s.index(static_cast<std::size_t>(nr), static_cast<std::size_t>(nc));
        if (dem.is_nodata(j)) continue;
        const double slope = (z - dem.at(j)) / (n.diagonal ? diag : s.cell_size);
        if (slope > best) {
          best = slope;
          best_code = static_cast<std::uint8_t>(n.code);
        }
      }
      codes[i] = best_code;
    }
  }
  return DirectionGrid(s, std::move(codes), std::move(active));
}

std::vector<std::size_t> topological_order(const DirectionGrid& dirs,
                                           std::span<const std::uint8_t> members) {
  const std::size_t n = dirs.size();
  if (!members.empty() && members.size() != n) throw ShapeError("member mask size mismatch");
  auto in_set = [&](std::size_t i) { return dirs.active(i) && (members.empty() || members[i]); };

  std::vector<std::size_t> down(n, n);
  std::vector<std::uint32_t> indegree(n, 0);
  std::size_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_set(i)) continue;
    ++total;
    const auto d = dirs.downstream(i);
    if (d && in_set(*d)) {
      down[i] = *d;
      ++indegree[*d];
    }
  }

  std::vector<std::size_t> order;
  order.reserve(total);
  std::deque<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (in_set(i) && indegree[i] == 0) ready.push_back(i);
  while (!ready.empty()) {
    const std::size_t i = ready.front();
    ready.pop_front();
    order.push_back(i);
    if (down[i] != n && --indegree[down[i]] == 0) ready.push_back(down[i]);
  }
  if (order.size() != total) {
    for (std::size_t i = 0; i < n; ++i)
      if (in_set(i) && indegree[i] > 0)
        throw CycleError("flow directions contain a cycle through cell " +
                         cell_name(dirs.spec(), i));
  }
  return order;
}

Raster flow_accumulation(const DirectionGrid& dirs) {
  const auto order = topological_order(dirs);
  std::vector<double> acc(dirs.size(), dirs.spec().nodata);
  for (std::size_t i : order) acc[i] = 1.0;
  for (std::size_t i : order)
    if (const auto d = dirs.downstream(i)) acc[*d] += acc[i];
  return Raster(dirs.spec(), std::move(acc));
}

BasinMask delineate_basin(const DirectionGrid& dirs, Cell outlet) {
  const auto& s = dirs.spec();
  if (!s.in_bounds(static_cast<long>(outlet.row), static_cast<long>(outlet.col)))
    throw BoundsError("outlet (" + std::to_string(outlet.row) + ", " + std::to_string(outlet.col) +
                      ") is outside the " + std::to_string(s.rows) + "x" + std::to_string(s.cols) +
                      " grid");
  const std::size_t root = s.index(outlet.row, outlet.col);
  if (!dirs.active(root)) throw EmptyInputError("outlet cell is nodata");

  // Reverse adjacency in CSR form.
  const std::size_t n = dirs.size();
  std::vector<std::size_t> start(n + 1, 0), down(n, n);
  for (std::size_t i = 0; i < n; ++i)
    if (const auto d = dirs.downstream(i)) {
      down[i] = *d;
      ++start[*d + 1];
    }
  for (std::size_t i = 0; i < n; ++i) start[i + 1] += start[i];
  std::vector<std::size_t> upstream(start[n]);
  {
    auto fill = start;
    for (std::size_t i = 0; i < n; ++i)
      if (down[i] != n) upstream[fill[down[i]]++] = i;
  }

  std::vector<std::uint8_t> members(n, 0);
  std::vector<std::size_t> stack{root};
  members[root] = 1;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    for (std::size_t k = start[i]; k < start[i + 1]; ++k) {
      const std::size_t u = upstream[k];
      if (!members[u]) {
        members[u] = 1;
        stack.push_back(u);
      }
    }
  }
  return BasinMask(s, std::move(members), outlet);
}

Raster clip(const Raster& raster, const BasinMask& mask) {
  require_match(raster.spec(), mask.spec(), "clip");
  std::vector<double> out(raster.values().begin(), raster.values().end());
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!mask.contains(i)) out[i] = raster.nodata();
  return Raster(raster.spec(), std::move(out));
}

DirectionGrid clip(const DirectionGrid& dirs, const BasinMask& mask) {
  require_match(dirs.spec(), mask.spec(), "clip");
  std::vector<std::uint8_t> codes(dirs.codes().begin(), dirs.codes().end());
  std::vector<std::uint8_t> active(dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i) active[i] = dirs.active(i) && mask.contains(i);
  return DirectionGrid(dirs.spec(), std::move(codes), std::move(active));
}

ImperviousTable ImperviousTable::read(const std::filesystem::path& path) {
  ImperviousTable table;
  const auto kv = KeyValues::read(path);
  for (const auto& [k, v] : kv.entries()) {
    const auto frac = text::to_double(v);
    if (!frac || *frac < 0 || *frac > 1)
      throw DataRangeError(path.string() + ": impervious fraction for '" + k + "' must be in [0,1]");
    if (k == "default") {
      table.fallback = *frac;
      continue;
    }
    const auto cls = text::to_double(k);
    if (!cls || *cls != std::floor(*cls))
      throw ParseError(path.string() + ": class id '" + k + "' is not an integer");
    table.by_class[static_cast<long>(*cls)] = *frac;
  }
  return table;
}

double ImperviousTable::lookup(long cls) const {
  const auto it = by_class.find(cls);
  return it == by_class.end() ? fallback : it->second;
}

BasinDescriptors basin_descriptors(const Raster& dem, const Raster& fam, const BasinMask& mask,
                                   double channel_threshold_cells, const Raster* landcover,
                                   const ImperviousTable& table) {
  const auto& s = dem.spec();
  require_match(s, fam.spec(), "basin_descriptors (fam)");
  require_match(s, mask.spec(), "basin_descriptors (mask)");
  if (landcover) require_match(s, landcover->spec(), "basin_descriptors (landcover)");

  const double diag = s.cell_size * kSqrt2;
  std::size_t members = 0, channels = 0, covered = 0;
  double zmin = std::numeric_limits<double>::infinity(), zmax = -zmin;
  double slope_sum = 0.0, imperv_sum = 0.0;
  for (std::size_t r = 0; r < s.rows; ++r) {
    for (std::size_t c = 0; c < s.cols; ++c) {
      const std::size_t i = s.index(r, c);
      if (!mask.contains(i) || dem.is_nodata(i)) continue;
      ++members;
      const double z = dem.at(i);
      zmin = std::min(zmin, z);
      zmax = std::max(zmax, z);
      double steepest = 0.0;
      for (const auto& n : kD8Neighbours) {
        const long nr = static_cast<long>(r) + n.drow, nc = static_cast<long>(c) + n.dcol;
        if (!s.in_bounds(nr, nc)) continue;
        const std::size_t j = s.index(static_cast<std::size_t>(nr), static_cast<std::size_t>(nc));
        if (dem.is_nodata(j)) continue;
        steepest = std::max(steepest, (z - dem.at(j)) / (n.diagonal ? diag : s.cell_size));
      }
      slope_sum += steepest;
      if (fam.valid(i) && fam.at(i) >= channel_threshold_cells) ++channels;
      if (landcover && landcover->valid(i)) {
        imperv_sum += table.lookup(std::lround(landcover->at(i)));
        ++covered;
      }
    }
  }
  if (members == 0) throw EmptyInputError("basin mask has no cells with elevation data");

  BasinDescriptors d;
  d.area_km2 = static_cast<double>(members) * s.cell_area_km2();
  d.relief_m = zmax - zmin;
  d.mean_slope = slope_sum / static_cast<double>(members);
  d.drainage_density = static_cast<double>(channels) / static_cast<double>(members);
  d.impervious_fraction = covered ? imperv_sum / static_cast<double>(covered) : table.fallback;
  return d;
}

}  // namespace aquah
