#pragma once

#include <optional>
#include <string>
#include <vector>

namespace rsevi::cli {

/// Timing metadata written by `simulate` so later stages can run on their
/// own. File names are relative to the manifest's directory.
struct RsFrameEntry {
  std::string frm;
  std::string pnm;
  double t_start = 0.0;
  double t_end = 0.0;
};

struct FieldEntry {
  std::string file;
  int first = 0;  ///< index of the pair's first RS frame
  int bins = 0;
};

struct Manifest {
  double gs_fps = 0.0;
  int height = 0;
  int width = 0;
  int channels = 1;
  double threshold = 0.0;
  double log_eps = 0.0;
  double rs_fps = 0.0;
  double rs_readout = 0.0;
  double rs_interval = 0.0;
  std::vector<RsFrameEntry> rs_frames;
  std::string events_file;
  std::size_t event_count = 0;
  double events_t_begin = 0.0;
  double events_t_end = 0.0;
  std::vector<FieldEntry> fields;
  std::optional<unsigned long long> seed;
};

void save_manifest(const Manifest& m, const std::string& path);
Manifest load_manifest(const std::string& path);

}  // namespace rsevi::cli
