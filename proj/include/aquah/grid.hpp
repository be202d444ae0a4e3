#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aquah {

/// Georeferencing shared by every layer of a basin. Rows run north to south
/// (row 0 is the top line of an ESRI ASCII grid).
struct GridSpec {
  std::size_t rows = 1;
  std::size_t cols = 1;
  double cell_size = 1.0;  // metres, square cells
  double origin_x = 0.0;   // lower-left corner
  double origin_y = 0.0;
  double nodata = -9999.0;

  std::size_t size() const { return rows * cols; }
  std::size_t index(std::size_t row, std::size_t col) const { return row * cols + col; }
  bool in_bounds(long row, long col) const {
    return row >= 0 && col >= 0 && row < static_cast<long>(rows) && col < static_cast<long>(cols);
  }
  /// Same shape and cell size; origins may differ by less than a millimetre.
  bool matches(const GridSpec& other) const;
  double cell_area_km2() const { return cell_size * cell_size / 1.0e6; }
};

struct Cell {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Immutable 2-D grid of reals with a nodata sentinel.
class Raster {
public:
  /// Throws ShapeError on bad dimensions or value count, DataRangeError on a
  /// non-finite value that is not the sentinel.
  Raster(GridSpec spec, std::vector<double> values);
  static Raster filled(const GridSpec& spec, double value);

  const GridSpec& spec() const { return spec_; }
  std::size_t rows() const { return spec_.rows; }
  std::size_t cols() const { return spec_.cols; }
  std::size_t size() const { return values_.size(); }
  double nodata() const { return spec_.nodata; }

  double operator()(std::size_t row, std::size_t col) const { return values_[spec_.index(row, col)]; }
  double at(std::size_t idx) const { return values_[idx]; }
  bool is_nodata(std::size_t idx) const { return values_[idx] == spec_.nodata; }
  bool valid(std::size_t idx) const { return !is_nodata(idx); }
  std::span<const double> values() const { return values_; }
  std::size_t valid_count() const;

private:
  GridSpec spec_;
  std::vector<double> values_;
};

/// D8 codes. Neighbour order E, SE, S, SW, W, NW, N, NE is also the tie-break order.
enum class D8 : std::uint8_t { Outlet = 0, E = 1, SE = 2, S = 4, SW = 8, W = 16, NW = 32, N = 64, NE = 128 };

struct D8Offset {
  D8 code;
  int drow;
  int dcol;
  bool diagonal;
};

inline constexpr std::array<D8Offset, 8> kD8Neighbours{{
    {D8::E, 0, 1, false},
    {D8::SE, 1, 1, true},
    {D8::S, 1, 0, false},
    {D8::SW, 1, -1, true},
    {D8::W, 0, -1, false},
    {D8::NW, -1, -1, true},
    {D8::N, -1, 0, false},
    {D8::NE, -1, 1, true},
}};

/// Offset for a non-outlet code; nullopt for 0 or an unknown code.
std::optional<D8Offset> d8_offset(std::uint8_t code);
bool is_d8_code(std::uint8_t code);

/// Per-cell D8 codes. Inactive cells (nodata in the source layer) carry code 0
/// and take no part in any traversal.
class DirectionGrid {
public:
  /// Throws ShapeError on size mismatch and DataRangeError on a code outside
  /// {0,1,2,4,...,128}. Acyclicity is checked by the traversals.
  DirectionGrid(GridSpec spec, std::vector<std::uint8_t> codes, std::vector<std::uint8_t> active);
  /// All cells active.
  DirectionGrid(GridSpec spec, std::vector<std::uint8_t> codes);
  /// From a drainage-direction raster in the same encoding.
  static DirectionGrid from_raster(const Raster& ddm);
  Raster to_raster() const;

  const GridSpec& spec() const { return spec_; }
  std::size_t size() const { return codes_.size(); }
  std::uint8_t code(std::size_t idx) const { return codes_[idx]; }
  std::uint8_t code(std::size_t row, std::size_t col) const { return codes_[spec_.index(row, col)]; }
  bool active(std::size_t idx) const { return active_[idx] != 0; }
  std::span<const std::uint8_t> codes() const { return codes_; }

  /// Receiving cell, or nullopt when the cell is an outlet, inactive, or
  /// points off the grid or into an inactive cell.
  std::optional<std::size_t> downstream(std::size_t idx) const;
  /// Length of the hop out of `idx` in metres (diagonals are cell_size*sqrt 2).
  double hop_length(std::size_t idx) const;

private:
  GridSpec spec_;
  std::vector<std::uint8_t> codes_;
  std::vector<std::uint8_t> active_;
};

/// Upstream closure of an outlet cell.
class BasinMask {
public:
  /// Throws ShapeError on size mismatch and BoundsError when the outlet is not
  /// a member.
  BasinMask(GridSpec spec, std::vector<std::uint8_t> members, Cell outlet);

  const GridSpec& spec() const { return spec_; }
  bool contains(std::size_t idx) const { return members_[idx] != 0; }
  bool contains(std::size_t row, std::size_t col) const { return contains(spec_.index(row, col)); }
  Cell outlet() const { return outlet_; }
  std::size_t count() const { return count_; }
  std::span<const std::uint8_t> members() const { return members_; }

private:
  GridSpec spec_;
  std::vector<std::uint8_t> members_;
  Cell outlet_;
  std::size_t count_ = 0;
};

struct BasinDescriptors {
  double area_km2 = 0;
  double relief_m = 0;
  double mean_slope = 0;
  double drainage_density = 0;
  double impervious_fraction = 0.05;
};

/// Land-cover class id -> impervious fraction.
struct ImperviousTable {
  std::map<long, double> by_class;
  double fallback = 0.05;

  /// key=value lines "class_id=fraction"; an optional "default=" key
  /// overrides the fallback.
  static ImperviousTable read(const std::filesystem::path& path);
  double lookup(long cls) const;
};

Raster parse_ascii_grid(const std::string& text, const std::string& origin = "<text>");
Raster read_ascii_grid(const std::filesystem::path& path);
std::string format_ascii_grid(const Raster& raster);
void write_ascii_grid(const std::filesystem::path& path, const Raster& raster);

/// Steepest descent over the 8 neighbours (drop / distance). Cells without a
/// strictly lower neighbour are outlets. Throws EmptyInputError when every
/// cell is nodata.
DirectionGrid d8_flow_directions(const Raster& dem);

/// Active cells ordered so that every cell precedes its downstream cell.
/// Only cells with members[idx] != 0 take part when `members` is non-empty.
/// Throws CycleError naming one cell on a cycle.
std::vector<std::size_t> topological_order(const DirectionGrid& dirs,
                                           std::span<const std::uint8_t> members = {});

/// Number of cells draining through each cell, itself included. Inactive
/// cells are nodata.
Raster flow_accumulation(const DirectionGrid& dirs);

/// Throws BoundsError for an outlet outside the grid, EmptyInputError when
/// the outlet cell is inactive.
BasinMask delineate_basin(const DirectionGrid& dirs, Cell outlet);

/// Non-members become nodata. Throws ShapeError on mismatched grids.
Raster clip(const Raster& raster, const BasinMask& mask);
/// Non-members become inactive.
DirectionGrid clip(const DirectionGrid& dirs, const BasinMask& mask);

/// Throws EmptyInputError when the mask is empty and ShapeError on
/// mismatched grids.
BasinDescriptors basin_descriptors(const Raster& dem, const Raster& fam, const BasinMask& mask,
                                   double channel_threshold_cells,
                                   const Raster* landcover = nullptr,
                                   const ImperviousTable& table = {});

}  // namespace aquah
