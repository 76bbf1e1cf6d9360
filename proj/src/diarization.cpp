#include "sldx/diarization.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sldx/error.hpp"
#include "sldx/text.hpp"

namespace sldx {

using json = nlohmann::json;

SpeakerRole RoleMap::role_of(const std::string& tag) const {
  auto it = roles.find(tag);
  return it == roles.end() ? SpeakerRole::Unknown : it->second;
}

std::vector<Utterance> import_role_labeled(std::span<const RawSegment> segments) {
  std::vector<Utterance> out;
  out.reserve(segments.size());
  for (const auto& seg : segments) {
    const std::string tag = text::ascii_lower(seg.speaker_tag);
    SpeakerRole role;
    if (tag == "examiner") {
      role = SpeakerRole::Examiner;
    } else if (tag == "patient") {
      role = SpeakerRole::Patient;
    } else {
      throw Error(ErrorCode::UnrecognizedTag, seg.speaker_tag);
    }
    out.push_back({role, seg.text, seg.start_ms, seg.end_ms, out.size()});
  }
  return out;
}

RoleMap assign_roles(std::span<const RawSegment> segments) {
  if (segments.empty()) throw Error(ErrorCode::EmptyTranscript, "no segments");
  std::vector<std::string> order;  // first-appearance order
  std::map<std::string, std::pair<std::size_t, std::size_t>> stats;  // questions, total
  for (const auto& seg : segments) {
    auto [it, fresh] = stats.try_emplace(seg.speaker_tag, 0, 0);
    if (fresh) order.push_back(seg.speaker_tag);
    it->second.second += 1;
    if (seg.text.find('?') != std::string::npos) it->second.first += 1;
  }
  if (order.size() != 2) {
    throw Error(ErrorCode::SpeakerCountUnsupported,
                std::to_string(order.size()) + " distinct speaker tags");
  }
  const auto& a = stats[order[0]];
  const auto& b = stats[order[1]];
  // Compare q_a/n_a with q_b/n_b exactly via cross-multiplication.
  const auto lhs = a.first * b.second;
  const auto rhs = b.first * a.second;
  const std::string& examiner = (rhs > lhs) ? order[1] : order[0];
  const std::string& patient = (examiner == order[0]) ? order[1] : order[0];

  RoleMap map;
  map.method = RoleMethod::InterrogativeHeuristic;
  map.roles[examiner] = SpeakerRole::Examiner;
  map.roles[patient] = SpeakerRole::Patient;
  return map;
}

RoleMap manual_roles(const std::string& examiner_tag, const std::string& patient_tag) {
  if (examiner_tag == patient_tag) {
    throw Error(ErrorCode::InvalidConfig, "examiner and patient tags must differ");
  }
  RoleMap map;
  map.method = RoleMethod::ManualOverride;
  map.roles[examiner_tag] = SpeakerRole::Examiner;
  map.roles[patient_tag] = SpeakerRole::Patient;
  return map;
}

Segmentation segment_by_boundaries(std::span<const RawSegment> segments, const RoleMap& roles,
                                   std::span<const ScenarioBoundary> bounds) {
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (bounds[i].start_ms > bounds[i].end_ms) {
      throw Error(ErrorCode::OverlappingBoundaries, "boundary with start after end");
    }
    if (i > 0 && bounds[i].start_ms < bounds[i - 1].end_ms) {
      throw Error(ErrorCode::OverlappingBoundaries,
                  "scenario " + std::to_string(bounds[i].scenario.value()) +
                      " overlaps or precedes the previous window");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (bounds[j].scenario == bounds[i].scenario) {
        throw Error(ErrorCode::OverlappingBoundaries, "scenario listed twice");
      }
    }
  }

  Segmentation out;
  for (const auto& seg : segments) {
    auto it = std::find_if(bounds.begin(), bounds.end(), [&](const ScenarioBoundary& b) {
      return seg.start_ms >= b.start_ms && seg.start_ms < b.end_ms;
    });
    if (it == bounds.end()) {
      ++out.dropped_count;
      continue;
    }
    const SpeakerRole role = roles.role_of(seg.speaker_tag);
    if (role == SpeakerRole::Unknown) {
      ++out.unknown_count;
      continue;
    }
    auto [dit, _] = out.dialogues.try_emplace(it->scenario, ScenarioDialogue{it->scenario, {}});
    auto& utts = dit->second.utterances;
    utts.push_back({role, seg.text, seg.start_ms, seg.end_ms, utts.size()});
  }
  return out;
}

std::vector<Utterance> merge_adjacent(const std::vector<Utterance>& utterances) {
  std::vector<Utterance> out;
  for (const auto& u : utterances) {
    if (!out.empty() && out.back().role == u.role) {
      Utterance& last = out.back();
      last.text += " ";
      last.text += u.text;
      if (u.start_ms) last.start_ms = last.start_ms ? std::min(*last.start_ms, *u.start_ms) : *u.start_ms;
      if (u.end_ms) last.end_ms = last.end_ms ? std::max(*last.end_ms, *u.end_ms) : *u.end_ms;
      continue;
    }
    out.push_back(u);
  }
  reindex(out);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedFile, path.string() + ": " + e.what());
  }
}

const json& array_field(const json& root, const char* key, const std::filesystem::path& path) {
  if (!root.is_object() || !root.contains(key) || !root[key].is_array()) {
    throw Error(ErrorCode::SchemaViolation, path.string() + ": expected array field '" + key + "'");
  }
  return root[key];
}

std::int64_t int_field(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj[key].is_number_integer()) {
    throw Error(ErrorCode::SchemaViolation, where + ": expected integer '" + key + "'");
  }
  return obj[key].get<std::int64_t>();
}

}  // namespace

std::vector<RawSegment> read_segments(const std::filesystem::path& path) {
  const json root = read_json(path);
  std::vector<RawSegment> out;
  std::int64_t prev_start = 0;
  for (const auto& s : array_field(root, "segments", path)) {
    const std::string where = path.string() + " segment " + std::to_string(out.size());
    RawSegment seg;
    const char* tag_key = s.contains("speaker") ? "speaker" : "speaker_tag";
    if (!s.contains(tag_key) || !s[tag_key].is_string() || !s.contains("text") || !s["text"].is_string()) {
      throw Error(ErrorCode::SchemaViolation, where + ": expected string speaker/speaker_tag and text");
    }
    seg.speaker_tag = s[tag_key].get<std::string>();
    seg.text = s["text"].get<std::string>();
    seg.start_ms = int_field(s, "start_ms", where);
    seg.end_ms = int_field(s, "end_ms", where);
    if (seg.start_ms < 0 || seg.start_ms > seg.end_ms) {
      throw Error(ErrorCode::SchemaViolation, where + ": need 0 <= start_ms <= end_ms");
    }
    if (seg.start_ms < prev_start) {
      throw Error(ErrorCode::SchemaViolation, where + ": segments not sorted by start_ms");
    }
    prev_start = seg.start_ms;
    out.push_back(std::move(seg));
  }
  return out;
}

std::vector<ScenarioBoundary> read_boundaries(const std::filesystem::path& path) {
  const json root = read_json(path);
  std::vector<ScenarioBoundary> out;
  for (const auto& b : array_field(root, "boundaries", path)) {
    const std::string where = path.string() + " boundary " + std::to_string(out.size());
    const auto id = int_field(b, "scenario_id", where);
    if (id < 1 || id > kScenarioCount) throw Error(ErrorCode::SchemaViolation, where + ": scenario_id not in 1..15");
    out.push_back({ScenarioId(static_cast<int>(id)), int_field(b, "start_ms", where), int_field(b, "end_ms", where)});
  }
  return out;
}

}  // namespace sldx
