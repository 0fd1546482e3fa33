// skelanon: head/face anonymization post-processing on interchange JSON.
//
//   skelanon infer-heads --poses poses.json --output out/
//   skelanon fuse --heads heads.json --faces faces.json --output out/
//   skelanon track --detections fused.json --output out/
//   skelanon evaluate --detections fused.json --labels labels.json --output out/
//   skelanon sweep --detections fused.json --labels labels.json --param alpha
//   skelanon anonymize --images frames/ --detections fused.json --output out/
//   skelanon synth --seed 7 --output scene/
//   skelanon run --config pipeline.json
//
// Exit status is 0 on success; failures print {"error": {...}} on stderr.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "skelanon/config.hpp"
#include "skelanon/pipeline.hpp"
#include "skelanon/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace skelanon;

namespace
{

struct GlobalOptions
{
  std::string config;
  std::string output{"out"};
  unsigned jobs{1};
  std::string log_level{"info"};
};

json config_doc(const GlobalOptions& g)
{
  return g.config.empty() ? json::object() : read_json(g.config);
}

// Section of the --config document, or an empty object.
json section(const json& doc, const char* key)
{
  auto it = doc.find(key);
  return it == doc.end() ? json::object() : *it;
}

fs::path out_file(const GlobalOptions& g, const std::string& explicit_path, const char* name)
{
  return explicit_path.empty() ? fs::path(g.output) / name : fs::path(explicit_path);
}

int fail(std::string_view kind, const std::string& message, int code)
{
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
  return code;
}

std::vector<double> parse_list(const std::string& csv)
{
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t end = std::min(csv.find(',', start), csv.size());
    const std::string item = csv.substr(start, end - start);
    if (!item.empty()) {
      try {
        out.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw ConfigError(fmt::format("cannot parse \"{}\" as a number", item));
      }
    }
    start = end + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Head and face anonymization toolkit"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config, "JSON config file");
  app.add_option("--output", g.output, "Output directory");
  app.add_option("--jobs", g.jobs, "Worker threads (0 = all cores)");
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error, off");

  // infer-heads
  std::string poses_path, heads_out;
  auto* infer = app.add_subcommand("infer-heads", "Infer head boxes from a pose file");
  infer->add_option("--poses", poses_path, "Pose file")->required();
  infer->add_option("--out", heads_out, "Output detection file (default <output>/heads.json)");

  // fuse
  std::string heads_path, faces_path, fused_out, fusion_name;
  std::optional<double> gamma;
  auto* fuse_cmd = app.add_subcommand("fuse", "Fuse head and face detections");
  fuse_cmd->add_option("--heads", heads_path, "Head detection file")->required();
  fuse_cmd->add_option("--faces", faces_path, "Face detection file")->required();
  fuse_cmd->add_option("--fusion", fusion_name,
                       "keep-both, keep-head, keep-face or by-confidence");
  fuse_cmd->add_option("--gamma", gamma, "Containment threshold in (0,1]");
  fuse_cmd->add_option("--out", fused_out, "Output file (default <output>/fused.json)");

  // track
  std::string track_in, track_out;
  auto* track_cmd = app.add_subcommand("track", "Track detections over the sequence");
  track_cmd->add_option("--detections", track_in, "Detection file")->required();
  track_cmd->add_option("--out", track_out, "Output file (default <output>/tracked.json)");

  // evaluate
  std::string eval_dets, eval_labels, eval_name{"detections"}, curve_list;
  std::optional<double> alpha, beta, size_filter;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score detections against face/head labels");
  eval_cmd->add_option("--detections", eval_dets, "Detection file")->required();
  eval_cmd->add_option("--labels", eval_labels, "Label file")->required();
  eval_cmd->add_option("--alpha", alpha, "Face criterion threshold");
  eval_cmd->add_option("--beta", beta, "Head criterion threshold");
  eval_cmd->add_option("--size-filter", size_filter, "Minimum head max dimension, px");
  eval_cmd->add_option("--missing-rate", curve_list,
                       "Comma-separated head-size thresholds for the missing-rate curve");
  eval_cmd->add_option("--name", eval_name, "Row label in the text table");

  // sweep
  std::string sweep_dets, sweep_labels, sweep_param{"alpha"}, sweep_values;
  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep alpha or beta, other threshold fixed");
  sweep_cmd->add_option("--detections", sweep_dets, "Detection file")->required();
  sweep_cmd->add_option("--labels", sweep_labels, "Label file")->required();
  sweep_cmd->add_option("--param", sweep_param, "alpha or beta")
      ->check(CLI::IsMember({"alpha", "beta"}));
  sweep_cmd->add_option("--values", sweep_values, "Comma-separated values (default 0.1..0.9)");

  // anonymize
  std::string images, anon_dets, method;
  auto* anon_cmd = app.add_subcommand("anonymize", "Blur or pixelate detection regions");
  anon_cmd->add_option("--images", images, "Image directory or pattern like img_%06d.png")
      ->required();
  anon_cmd->add_option("--detections", anon_dets, "Detection file")->required();
  anon_cmd->add_option("--method", method, "blur or pixelate");

  // synth
  std::optional<std::uint64_t> seed;
  std::optional<int> frames, pedestrians;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic labeled scene");
  synth_cmd->add_option("--seed", seed, "Random seed");
  synth_cmd->add_option("--frames", frames, "Frame count");
  synth_cmd->add_option("--pedestrians", pedestrians, "Pedestrian count");

  // run
  auto* run_cmd = app.add_subcommand("run", "Run the stages listed in --config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);  // --help
    }
    return fail("usage", e.what(), 2);
  }

  spdlog::set_default_logger(spdlog::default_logger()->clone("skelanon"));
  spdlog::set_level(spdlog::level::from_str(g.log_level));
  // diagnostics go to stderr, results to stdout
  spdlog::default_logger()->sinks().clear();
  spdlog::default_logger()->sinks().push_back(
      std::make_shared<spdlog::sinks::stderr_color_sink_mt>());

  try {
    const json cfg = config_doc(g);

    if (*infer) {
      const auto params = head_params_from_json(section(cfg, "head_inference"));
      const auto out = out_file(g, heads_out, "heads.json");
      save_detections(out, infer_heads_stage(load_poses(poses_path), params, g.jobs));
      spdlog::info("wrote {}", out.string());
    } else if (*fuse_cmd) {
      FusionConfig fc = fusion_from_json(section(cfg, "fusion"));
      if (!fusion_name.empty()) {
        const auto s = parse_fusion_strategy(fusion_name);
        if (!s) {
          throw ConfigError(fmt::format("unknown fusion strategy \"{}\"", fusion_name));
        }
        fc.strategy = *s;
      }
      if (gamma) {
        fc.gamma = *gamma;
      }
      const auto out = out_file(g, fused_out, "fused.json");
      save_detections(out, fuse_stage(load_detections(heads_path), load_detections(faces_path),
                                       fc, g.jobs));
      spdlog::info("wrote {}", out.string());
    } else if (*track_cmd) {
      const auto tc = tracker_from_json(section(cfg, "tracker"));
      const auto out = out_file(g, track_out, "tracked.json");
      save_detections(out, track_stage(load_detections(track_in), tc));
      spdlog::info("wrote {}", out.string());
    } else if (*eval_cmd) {
      EvalConfig ec = eval_from_json(section(cfg, "evaluation"));
      if (alpha) {
        ec.alpha = *alpha;
      }
      if (beta) {
        ec.beta = *beta;
      }
      if (size_filter) {
        ec.size_filter = *size_filter;
      }
      ec.validate();
      const auto dets = load_detections(eval_dets);
      const auto labels = to_labeled_frames(load_labels(eval_labels));
      const EvalReport report = evaluate_sequence(dets, labels, ec, g.jobs);
      json doc = report_to_json(report);
      doc["evaluation"] = to_json(ec);
      if (!curve_list.empty()) {
        doc["missing_rate"] = curve_to_json(missing_rate_curve(dets, labels, ec, parse_list(curve_list)));
      }
      const fs::path out(g.output);
      write_json(out / "report.json", doc);
      const std::string table = format_report_table({{eval_name, report}});
      write_text(out / "report.txt", table);
      std::cout << table;
    } else if (*sweep_cmd) {
      const EvalConfig ec = eval_from_json(section(cfg, "evaluation"));
      const auto values = sweep_values.empty() ? default_sweep_values() : parse_list(sweep_values);
      const auto which = sweep_param == "alpha" ? SweepParameter::Alpha : SweepParameter::Beta;
      const std::string csv =
          format_sweep_csv(threshold_sweep(load_detections(sweep_dets),
                                           to_labeled_frames(load_labels(sweep_labels)), which,
                                           values, ec));
      write_text(fs::path(g.output) / fmt::format("sweep_{}.csv", sweep_param), csv);
      std::cout << csv;
    } else if (*anon_cmd) {
      AnonymizeConfig ac = anonymize_from_json(section(cfg, "anonymize"));
      if (!method.empty()) {
        const auto m = parse_anonymize_method(method);
        if (!m) {
          throw ConfigError(fmt::format("unknown anonymization method \"{}\"", method));
        }
        ac.method = *m;
      }
      const auto dets = load_detections(anon_dets);
      std::vector<int> frame_ids;
      for (const auto& df : dets) {
        frame_ids.push_back(df.frame);
      }
      const int n = anonymize_stage(list_image_frames(images, frame_ids), dets, ac, g.output, g.jobs);
      spdlog::info("anonymized {} images into {}", n, g.output);
    } else if (*synth_cmd) {
      ScenarioConfig sc = scenario_from_json(cfg.contains("scenario") ? cfg["scenario"] : cfg);
      if (seed) {
        sc.seed = *seed;
      }
      if (frames) {
        sc.frames = *frames;
      }
      if (pedestrians) {
        sc.pedestrians = *pedestrians;
      }
      write_scene(g.output, generate(sc));
      spdlog::info("wrote synthetic scene to {}", g.output);
    } else if (*run_cmd) {
      if (g.config.empty()) {
        throw ConfigError("run requires --config");
      }
      PipelineConfig pc = load_pipeline_config(g.config);
      if (app.get_option("--output")->count() > 0) {
        pc.output = g.output;
      }
      if (app.get_option("--jobs")->count() > 0) {
        pc.jobs = g.jobs;
      }
      const PipelineResult result = run_pipeline(pc);
      if (result.report) {
        std::cout << format_report_table({{"pipeline", *result.report}});
      }
    }
  } catch (const Error& e) {
    return fail(e.kind(), e.what(), 1);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 0;
}
