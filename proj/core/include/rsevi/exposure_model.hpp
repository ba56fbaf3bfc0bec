#pragma once

#include <variant>

namespace rsevi {

/// Row-wise exposure of a rolling-shutter frame: row 0 at t_start, row H-1
/// at t_end, rows evenly spaced in between.
struct RollingShutter {
  double t_start = 0.0;
  double t_end = 0.0;

  bool operator==(const RollingShutter&) const = default;
};

/// All rows exposed at a single instant.
struct GlobalShutter {
  double t_g = 0.0;

  bool operator==(const GlobalShutter&) const = default;
};

/// Exposure plane of a frame in (row, time) space. Exposure duration per row
/// is treated as instantaneous.
struct ExposureModel {
  std::variant<RollingShutter, GlobalShutter> kind;
  int height = 0;

  static ExposureModel rolling(double t_start, double t_end, int height);
  static ExposureModel global(double t_g, int height);

  bool is_rolling() const noexcept {
    return std::holds_alternative<RollingShutter>(kind);
  }
  /// Earliest / latest row time.
  double first_time() const noexcept;
  double last_time() const noexcept;
  /// Time of the (possibly fractional) row position h, linear in h.
  double time_at(double h) const noexcept;

  bool operator==(const ExposureModel&) const = default;
};

}  // namespace rsevi
