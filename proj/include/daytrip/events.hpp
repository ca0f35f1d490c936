#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <zlib.h>

#include "daytrip/common.hpp"
#include "daytrip/csv.hpp"
#include "daytrip/numfmt.hpp"

namespace daytrip {

// Event taxonomy. Enum order doubles as the same-timestamp sort priority, so
// a person's act_end precedes its depart, a dropoff precedes its arrive, and
// stuck flags sort last.
enum class EventKind {
  act_end,
  depart,
  drt_request,
  drt_reject,
  drt_pickup,
  pt_board,
  link_enter,
  link_leave,
  pt_alight,
  drt_dropoff,
  arrive,
  act_start,
  charge_start,
  charge_end,
  stuck,
};

inline const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::act_end: return "act_end";
    case EventKind::depart: return "depart";
    case EventKind::drt_request: return "drt_request";
    case EventKind::drt_reject: return "drt_reject";
    case EventKind::drt_pickup: return "drt_pickup";
    case EventKind::pt_board: return "pt_board";
    case EventKind::link_enter: return "link_enter";
    case EventKind::link_leave: return "link_leave";
    case EventKind::pt_alight: return "pt_alight";
    case EventKind::drt_dropoff: return "drt_dropoff";
    case EventKind::arrive: return "arrive";
    case EventKind::act_start: return "act_start";
    case EventKind::charge_start: return "charge_start";
    case EventKind::charge_end: return "charge_end";
    case EventKind::stuck: return "stuck";
  }
  return "?";
}

inline EventKind parse_event_kind(const std::string& s) {
  for (int k = 0; k <= static_cast<int>(EventKind::stuck); ++k)
    if (s == event_kind_name(static_cast<EventKind>(k))) return static_cast<EventKind>(k);
  throw Error("unknown event kind: " + s);
}

struct Event {
  Time time = 0;
  EventKind kind = EventKind::act_end;
  PersonId person = -1;   // -1 for vehicle-only events
  std::string mode;       // depart/arrive/stuck legs
  std::string link;       // link id
  std::string vehicle;    // transit "route:dep" or DRT vehicle id
  std::string facility;   // act_start/act_end
  double distance = -1;   // arrive events: realized leg distance (meters)
  std::string info;       // activity type, rejection reason, etc.
};

// Canonical event comparison: time, then kind priority, then person, then
// insertion order (handled externally via stable_sort).
inline bool event_before(const Event& a, const Event& b) {
  if (a.time != b.time) return a.time < b.time;
  if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  return a.person < b.person;
}

inline void sort_events(std::vector<Event>& events) {
  std::stable_sort(events.begin(), events.end(), event_before);
}

// --- Streaming I/O (plain CSV or gzip, by file suffix) ---------------------

namespace detail {

inline bool gz_suffix(const std::string& path) {
  return path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
}

}  // namespace detail

class EventWriter {
 public:
  explicit EventWriter(const std::string& path) : path_(path) {
    if (detail::gz_suffix(path)) {
      gz_ = gzopen(path.c_str(), "wb");
      if (!gz_) throw Error("cannot open " + path + " for writing");
    } else {
      plain_.open(path);
      if (!plain_) throw Error("cannot open " + path + " for writing");
    }
    write_line("time,kind,person,mode,link,vehicle,facility,distance,info");
  }

  ~EventWriter() { close(); }

  void write(const Event& e) {
    std::string line = num(e.time);
    line += ',';
    line += event_kind_name(e.kind);
    line += ',';
    line += std::to_string(e.person);
    line += ',';
    line += e.mode;
    line += ',';
    line += e.link;
    line += ',';
    line += e.vehicle;
    line += ',';
    line += e.facility;
    line += ',';
    if (e.distance >= 0) line += num(e.distance);
    line += ',';
    line += e.info;
    write_line(line);
  }

  void write_all(const std::vector<Event>& events) {
    for (const auto& e : events) write(e);
  }

  void close() {
    if (gz_) {
      gzclose(gz_);
      gz_ = nullptr;
    }
    if (plain_.is_open()) plain_.close();
  }

 private:
  void write_line(const std::string& line) {
    if (gz_) {
      std::string l = line + "\n";
      if (gzwrite(gz_, l.data(), static_cast<unsigned>(l.size())) <= 0)
        throw Error("gzwrite failed on " + path_);
    } else {
      plain_ << line << '\n';
    }
  }

  std::string path_;
  std::ofstream plain_;
  gzFile gz_ = nullptr;
};

inline std::vector<Event> read_events(const std::string& path) {
  std::vector<std::string> lines;
  if (detail::gz_suffix(path)) {
    gzFile gz = gzopen(path.c_str(), "rb");
    if (!gz) throw Error("cannot open " + path);
    char buf[1 << 16];
    std::string pending;
    int n;
    while ((n = gzread(gz, buf, sizeof buf)) > 0) {
      pending.append(buf, n);
      size_t pos;
      while ((pos = pending.find('\n')) != std::string::npos) {
        lines.push_back(pending.substr(0, pos));
        pending.erase(0, pos + 1);
      }
    }
    gzclose(gz);
    if (!pending.empty()) lines.push_back(pending);
  } else {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
  }
  std::vector<Event> out;
  if (lines.empty()) return out;
  for (size_t i = 1; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty()) continue;
    std::vector<std::string> f;
    size_t start = 0;
    for (size_t j = 0; j <= line.size(); ++j) {
      if (j == line.size() || line[j] == ',') {
        f.push_back(line.substr(start, j - start));
        start = j + 1;
      }
    }
    if (f.size() != 9)
      throw Error(path + ":" + std::to_string(i + 1) + ": expected 9 event fields");
    Event e;
    e.time = std::stod(f[0]);
    e.kind = parse_event_kind(f[1]);
    e.person = std::stoll(f[2]);
    e.mode = f[3];
    e.link = f[4];
    e.vehicle = f[5];
    e.facility = f[6];
    e.distance = f[7].empty() ? -1 : std::stod(f[7]);
    e.info = f[8];
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace daytrip
