#include "skelanon/formats.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace skelanon
{

using nlohmann::json;

namespace
{

bool is_ndjson(const std::filesystem::path& p)
{
  const auto ext = p.extension().string();
  return ext == ".ndjson" || ext == ".jsonl";
}

// Where a value sits in the input, for error messages.
struct Where
{
  std::string record;  // "frames[3]" or "line 4"
  std::optional<int> frame;

  [[noreturn]] void fail(const std::string& field, const std::string& problem) const
  {
    std::string prefix = record;
    if (frame) {
      prefix += fmt::format(" (frame {})", *frame);
    }
    throw SchemaError(fmt::format("{}: {}: {}", prefix, field, problem));
  }
};

const json& member(const json& obj, const char* key, const Where& w, const std::string& path)
{
  if (!obj.is_object()) {
    w.fail(path, "expected an object");
  }
  auto it = obj.find(key);
  if (it == obj.end()) {
    w.fail(path.empty() ? key : path + "." + key, "missing field");
  }
  return *it;
}

double number(const json& v, const Where& w, const std::string& path)
{
  if (!v.is_number()) {
    w.fail(path, "expected a number");
  }
  return v.get<double>();
}

int integer(const json& v, const Where& w, const std::string& path)
{
  if (!v.is_number_integer()) {
    w.fail(path, "expected an integer");
  }
  return v.get<int>();
}

const json& array(const json& v, const Where& w, const std::string& path)
{
  if (!v.is_array()) {
    w.fail(path, "expected an array");
  }
  return v;
}

BBox box_from_array(const json& v, const Where& w, const std::string& path)
{
  array(v, w, path);
  if (v.size() != 4) {
    w.fail(path, fmt::format("expected [x1, y1, x2, y2], got {} values", v.size()));
  }
  BBox b{number(v[0], w, path + "[0]"), number(v[1], w, path + "[1]"),
         number(v[2], w, path + "[2]"), number(v[3], w, path + "[3]")};
  if (!b.valid()) {
    w.fail(path, "requires x1 <= x2 and y1 <= y2");
  }
  return b;
}

json box_to_array(const BBox& b)
{
  return json::array({b.x_min, b.y_min, b.x_max, b.y_max});
}

// Splits a parsed document into frame records, checking the schema version
// and frame ordering.
template <typename Fn>
void for_each_record(const std::vector<std::pair<std::string, json>>& raw, Fn&& fn)
{
  std::optional<int> prev;
  for (const auto& [name, rec] : raw) {
    Where w{name, std::nullopt};
    if (!rec.is_object()) {
      w.fail("record", "expected an object");
    }
    if (auto it = rec.find("schema"); it != rec.end() && *it != kSchemaVersion) {
      w.fail("schema", fmt::format("unsupported schema {}", it->dump()));
    }
    const int frame = integer(member(rec, "frame", w, ""), w, "frame");
    w.frame = frame;
    if (prev && frame == *prev) {
      w.fail("frame", "duplicate frame");
    }
    if (prev && frame < *prev) {
      w.fail("frame", fmt::format("frames must be increasing (previous {})", *prev));
    }
    prev = frame;
    fn(w, rec, frame);
  }
}

std::vector<std::pair<std::string, json>> document_records(const json& doc)
{
  Where top{"document", std::nullopt};
  if (!doc.is_object()) {
    top.fail("document", "expected an object");
  }
  const json& schema = member(doc, "schema", top, "");
  if (schema != kSchemaVersion) {
    top.fail("schema", fmt::format("unsupported schema {}", schema.dump()));
  }
  const json& frames = array(member(doc, "frames", top, ""), top, "frames");
  std::vector<std::pair<std::string, json>> out;
  out.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    out.emplace_back(fmt::format("frames[{}]", i), frames[i]);
  }
  return out;
}

json make_document(std::vector<json> records)
{
  json frames = json::array();
  for (auto& r : records) {
    frames.push_back(std::move(r));
  }
  return json{{"schema", kSchemaVersion}, {"frames", std::move(frames)}};
}

std::vector<std::pair<std::string, json>> read_records(const std::filesystem::path& path)
{
  if (!is_ndjson(path)) {
    return document_records(read_json(path));
  }
  std::ifstream in(path);
  if (!in) {
    throw IoError(fmt::format("cannot open {}", path.string()));
  }
  std::vector<std::pair<std::string, json>> out;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      out.emplace_back(fmt::format("line {}", n), json::parse(line));
    } catch (const json::parse_error& e) {
      throw SchemaError(fmt::format("{}: line {}: {}", path.string(), n, e.what()));
    }
  }
  return out;
}

void write_records(const std::filesystem::path& path, const json& doc)
{
  if (!is_ndjson(path)) {
    write_json(path, doc);
    return;
  }
  std::string text;
  for (json rec : doc.at("frames")) {
    rec["schema"] = kSchemaVersion;
    text += rec.dump();
    text += '\n';
  }
  write_text(path, text);
}

PoseFile poses_from_records(const std::vector<std::pair<std::string, json>>& raw)
{
  PoseFile out;
  for_each_record(raw, [&](const Where& w, const json& rec, int frame) {
    PoseFrame pf;
    pf.frame = frame;
    const json& poses = array(member(rec, "poses", w, ""), w, "poses");
    for (std::size_t p = 0; p < poses.size(); ++p) {
      const std::string path = fmt::format("poses[{}]", p);
      const json& kps = array(member(poses[p], "keypoints", w, path), w, path + ".keypoints");
      if (kps.size() != kNumKeypoints) {
        w.fail(path + ".keypoints",
               fmt::format("expected {} keypoints, got {}", kNumKeypoints, kps.size()));
      }
      Pose pose;
      for (std::size_t k = 0; k < kNumKeypoints; ++k) {
        const std::string kp_path = fmt::format("{}.keypoints[{}]", path, k);
        const json& t = array(kps[k], w, kp_path);
        if (t.size() != 3) {
          w.fail(kp_path, "expected [x, y, confidence]");
        }
        Keypoint& kp = pose.keypoints[k];
        kp.x = number(t[0], w, kp_path);
        kp.y = number(t[1], w, kp_path);
        kp.confidence = number(t[2], w, kp_path);
        if (!(kp.confidence >= 0.0 && kp.confidence <= 1.0)) {
          w.fail(kp_path, fmt::format("confidence {} not in [0,1]", kp.confidence));
        }
      }
      pf.poses.push_back(pose);
    }
    out.push_back(std::move(pf));
  });
  return out;
}

DetectionFile detections_from_records(const std::vector<std::pair<std::string, json>>& raw)
{
  DetectionFile out;
  for_each_record(raw, [&](const Where& w, const json& rec, int frame) {
    DetectionFrame df;
    df.frame = frame;
    const json& boxes = array(member(rec, "boxes", w, ""), w, "boxes");
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      const std::string path = fmt::format("boxes[{}]", i);
      const json& b = boxes[i];
      Detection d;
      d.frame = frame;
      d.box.x_min = number(member(b, "x1", w, path), w, path + ".x1");
      d.box.y_min = number(member(b, "y1", w, path), w, path + ".y1");
      d.box.x_max = number(member(b, "x2", w, path), w, path + ".x2");
      d.box.y_max = number(member(b, "y2", w, path), w, path + ".y2");
      if (!d.box.valid()) {
        w.fail(path, "requires x1 <= x2 and y1 <= y2");
      }
      d.confidence = number(member(b, "confidence", w, path), w, path + ".confidence");
      if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
        w.fail(path + ".confidence", fmt::format("{} not in [0,1]", d.confidence));
      }
      const json& src = member(b, "source", w, path);
      const auto source = src.is_string() ? parse_source(src.get<std::string>()) : std::nullopt;
      if (!source) {
        w.fail(path + ".source", "expected \"face\" or \"head\"");
      }
      d.source = *source;
      if (auto it = b.find("track_id"); it != b.end() && !it->is_null()) {
        d.track_id = integer(*it, w, path + ".track_id");
      }
      df.boxes.push_back(d);
    }
    out.push_back(std::move(df));
  });
  return out;
}

LabelFile labels_from_records(const std::vector<std::pair<std::string, json>>& raw)
{
  LabelFile out;
  for_each_record(raw, [&](const Where& w, const json& rec, int frame) {
    LabelRecord lr;
    lr.frame = frame;
    const json& faces = array(member(rec, "faces", w, ""), w, "faces");
    for (std::size_t i = 0; i < faces.size(); ++i) {
      lr.faces.push_back(box_from_array(faces[i], w, fmt::format("faces[{}]", i)));
    }
    const json& heads = array(member(rec, "heads", w, ""), w, "heads");
    for (std::size_t i = 0; i < heads.size(); ++i) {
      lr.heads.push_back(box_from_array(heads[i], w, fmt::format("heads[{}]", i)));
    }
    if (auto it = rec.find("links"); it != rec.end() && !it->is_null()) {
      array(*it, w, "links");
      std::vector<std::pair<std::size_t, std::size_t>> links;
      std::vector<bool> linked(lr.faces.size(), false);
      for (std::size_t i = 0; i < it->size(); ++i) {
        const std::string path = fmt::format("links[{}]", i);
        const json& l = array((*it)[i], w, path);
        if (l.size() != 2) {
          w.fail(path, "expected [face_idx, head_idx]");
        }
        const int f = integer(l[0], w, path + "[0]");
        const int h = integer(l[1], w, path + "[1]");
        if (f < 0 || static_cast<std::size_t>(f) >= lr.faces.size()) {
          w.fail(path, fmt::format("face index {} out of range", f));
        }
        if (h < 0 || static_cast<std::size_t>(h) >= lr.heads.size()) {
          w.fail(path, fmt::format("head index {} out of range", h));
        }
        if (linked[f]) {
          w.fail(path, fmt::format("face {} linked more than once", f));
        }
        linked[f] = true;
        links.emplace_back(f, h);
      }
      lr.links = std::move(links);
    }
    out.push_back(std::move(lr));
  });
  return out;
}

}  // namespace

json poses_to_json(const PoseFile& poses)
{
  std::vector<json> records;
  for (const PoseFrame& pf : poses) {
    json arr = json::array();
    for (const Pose& p : pf.poses) {
      json kps = json::array();
      for (const Keypoint& k : p.keypoints) {
        kps.push_back(json::array({k.x, k.y, k.confidence}));
      }
      arr.push_back(json{{"keypoints", std::move(kps)}});
    }
    records.push_back(json{{"frame", pf.frame}, {"poses", std::move(arr)}});
  }
  return make_document(std::move(records));
}

PoseFile poses_from_json(const json& doc)
{
  return poses_from_records(document_records(doc));
}

json detections_to_json(const DetectionFile& dets)
{
  std::vector<json> records;
  for (const DetectionFrame& df : dets) {
    json arr = json::array();
    for (const Detection& d : df.boxes) {
      json b{{"x1", d.box.x_min},     {"y1", d.box.y_min},
             {"x2", d.box.x_max},     {"y2", d.box.y_max},
             {"confidence", d.confidence}, {"source", std::string(to_string(d.source))}};
      if (d.track_id) {
        b["track_id"] = *d.track_id;
      }
      arr.push_back(std::move(b));
    }
    records.push_back(json{{"frame", df.frame}, {"boxes", std::move(arr)}});
  }
  return make_document(std::move(records));
}

DetectionFile detections_from_json(const json& doc)
{
  return detections_from_records(document_records(doc));
}

json labels_to_json(const LabelFile& labels)
{
  std::vector<json> records;
  for (const LabelRecord& lr : labels) {
    json faces = json::array(), heads = json::array();
    for (const BBox& b : lr.faces) {
      faces.push_back(box_to_array(b));
    }
    for (const BBox& b : lr.heads) {
      heads.push_back(box_to_array(b));
    }
    json rec{{"frame", lr.frame}, {"faces", std::move(faces)}, {"heads", std::move(heads)}};
    if (lr.links) {
      json links = json::array();
      for (const auto& [f, h] : *lr.links) {
        links.push_back(json::array({f, h}));
      }
      rec["links"] = std::move(links);
    }
    records.push_back(std::move(rec));
  }
  return make_document(std::move(records));
}

LabelFile labels_from_json(const json& doc)
{
  return labels_from_records(document_records(doc));
}

PoseFile load_poses(const std::filesystem::path& path)
{
  return poses_from_records(read_records(path));
}

void save_poses(const std::filesystem::path& path, const PoseFile& poses)
{
  write_records(path, poses_to_json(poses));
}

DetectionFile load_detections(const std::filesystem::path& path)
{
  return detections_from_records(read_records(path));
}

void save_detections(const std::filesystem::path& path, const DetectionFile& dets)
{
  write_records(path, detections_to_json(dets));
}

LabelFile load_labels(const std::filesystem::path& path)
{
  return labels_from_records(read_records(path));
}

void save_labels(const std::filesystem::path& path, const LabelFile& labels)
{
  write_records(path, labels_to_json(labels));
}

std::vector<LabeledFrame> to_labeled_frames(const LabelFile& labels)
{
  std::vector<LabeledFrame> out;
  out.reserve(labels.size());
  for (const LabelRecord& lr : labels) {
    out.push_back(make_labeled_frame(lr.frame, lr.faces, lr.heads,
                                     lr.links.value_or(decltype(lr.links)::value_type{})));
  }
  return out;
}

json report_to_json(const EvalReport& report)
{
  const EvalCounts& c = report.counts;
  return json{{"schema", kSchemaVersion},
              {"face_and_head",
               {{"both", c.both},
                {"face", c.face_only},
                {"head", c.head_only_of_pair},
                {"none", c.none_of_pair}}},
              {"head_only", {{"head", c.head_match}, {"none", c.head_none}}},
              {"fp_count", c.fp_count},
              {"frames", report.frames},
              {"seconds", report.seconds},
              {"throughput_fps", report.throughput_fps}};
}

EvalCounts counts_from_json(const json& j)
{
  try {
    EvalCounts c;
    c.both = j.at("face_and_head").at("both").get<long>();
    c.face_only = j.at("face_and_head").at("face").get<long>();
    c.head_only_of_pair = j.at("face_and_head").at("head").get<long>();
    c.none_of_pair = j.at("face_and_head").at("none").get<long>();
    c.head_match = j.at("head_only").at("head").get<long>();
    c.head_none = j.at("head_only").at("none").get<long>();
    c.fp_count = j.at("fp_count").get<long>();
    return c;
  } catch (const json::exception& e) {
    throw SchemaError(fmt::format("report: {}", e.what()));
  }
}

json curve_to_json(const std::vector<MissingRatePoint>& curve)
{
  json arr = json::array();
  for (const MissingRatePoint& p : curve) {
    arr.push_back(json{{"threshold", p.threshold},
                       {"total", p.total},
                       {"missed", p.missed},
                       {"percent", p.percent ? json(*p.percent) : json(nullptr)}});
  }
  return arr;
}

json read_json(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError(fmt::format("cannot open {}", path.string()));
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_json(const std::filesystem::path& path, const json& doc)
{
  write_text(path, doc.dump(2) + "\n");
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError(fmt::format("cannot write {}", path.string()));
  }
  out << text;
  if (!out) {
    throw IoError(fmt::format("write failed for {}", path.string()));
  }
}

}  // namespace skelanon
