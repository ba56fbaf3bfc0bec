#include "manifest.hpp"

#include <fstream>

#include "json.hpp"
#include "rsevi/error.hpp"

namespace rsevi::cli {

using nlohmann::ordered_json;

void save_manifest(const Manifest& m, const std::string& path) {
  ordered_json j;
  j["gs_fps"] = m.gs_fps;
  j["height"] = m.height;
  j["width"] = m.width;
  j["channels"] = m.channels;
  j["threshold"] = m.threshold;
  j["log_eps"] = m.log_eps;
  j["rs_fps"] = m.rs_fps;
  j["rs_readout"] = m.rs_readout;
  j["rs_interval"] = m.rs_interval;
  j["rs_frames"] = ordered_json::array();
  for (const RsFrameEntry& e : m.rs_frames)
    j["rs_frames"].push_back(
        {{"frm", e.frm}, {"pnm", e.pnm}, {"t_start", e.t_start}, {"t_end", e.t_end}});
  j["events"] = {{"file", m.events_file},
                 {"count", m.event_count},
                 {"t_begin", m.events_t_begin},
                 {"t_end", m.events_t_end}};
  j["fields"] = ordered_json::array();
  for (const FieldEntry& f : m.fields)
    j["fields"].push_back({{"file", f.file}, {"first", f.first}, {"bins", f.bins}});
  if (m.seed) j["seed"] = *m.seed;

  std::ofstream out(path, std::ios::trunc);
  if (!out) fail_input("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_input("cannot open: " + path);
  try {
    const auto j = ordered_json::parse(in);
    Manifest m;
    m.gs_fps = j.at("gs_fps").get<double>();
    m.height = j.at("height").get<int>();
    m.width = j.at("width").get<int>();
    m.channels = j.value("channels", 1);
    m.threshold = j.at("threshold").get<double>();
    m.log_eps = j.value("log_eps", 0.0);
    m.rs_fps = j.at("rs_fps").get<double>();
    m.rs_readout = j.at("rs_readout").get<double>();
    m.rs_interval = j.at("rs_interval").get<double>();
    for (const auto& e : j.at("rs_frames"))
      m.rs_frames.push_back({e.at("frm").get<std::string>(), e.value("pnm", std::string{}),
                             e.at("t_start").get<double>(), e.at("t_end").get<double>()});
    const auto& ev = j.at("events");
    m.events_file = ev.at("file").get<std::string>();
    m.event_count = ev.at("count").get<std::size_t>();
    m.events_t_begin = ev.at("t_begin").get<double>();
    m.events_t_end = ev.at("t_end").get<double>();
    if (j.contains("fields"))
      for (const auto& f : j.at("fields"))
        m.fields.push_back({f.at("file").get<std::string>(), f.at("first").get<int>(),
                            f.at("bins").get<int>()});
    if (j.contains("seed")) m.seed = j.at("seed").get<unsigned long long>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail_input("malformed manifest " + path + ": " + e.what());
  }
}

}  // namespace rsevi::cli
