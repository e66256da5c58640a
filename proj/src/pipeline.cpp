/*
 * Config-driven pipeline: scene -> GF tensor -> CSM -> steering -> maps ->
 * criteria -> exports, plus the criteria-delta comparison of two runs.
 */
#include "gfbeam/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "gfbeam/errors.hpp"
#include "gfbeam/util.hpp"
#include "gfbeam/wav.hpp"
#include "json.hpp"

namespace gfb {

namespace {

using nlohmann::ordered_json;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

SteeringParams steering_from_json(const ordered_json& j) {
  if (j.contains("preset")) {
    const std::string p = j["preset"].get<std::string>();
    if (p == "I") return SteeringParams::from_preset(SteeringPreset::kI);
    if (p == "II") return SteeringParams::from_preset(SteeringPreset::kII);
    if (p == "III") return SteeringParams::from_preset(SteeringPreset::kIII);
    if (p == "IV") return SteeringParams::from_preset(SteeringPreset::kIV);
    throw Error(ErrorCode::kConfig, "unknown steering preset '" + p + "'");
  }
  SteeringParams params;
  params.alpha = j.at("alpha").get<double>();
  params.beta = j.at("beta").get<double>();
  return params;
}

WelchParams welch_from_json(const ordered_json& j) {
  WelchParams params;
  params.block_len = j.value("block_len", std::size_t{4096});
  params.overlap = j.value("overlap", 0.5);
  const std::string window = j.value("window", "hann");
  if (window == "hann") {
    params.window = Window::kHann;
  } else if (window == "rect") {
    params.window = Window::kRect;
  } else {
    throw Error(ErrorCode::kConfig, "unknown window '" + window + "'");
  }
  const std::string norm = j.value("normalization", "amplitude-corrected");
  if (norm == "amplitude-corrected") {
    params.normalization = Normalization::kAmplitudeCorrected;
  } else if (norm == "none") {
    params.normalization = Normalization::kNone;
  } else {
    throw Error(ErrorCode::kConfig, "unknown normalization '" + norm + "'");
  }
  return params;
}

}  // namespace

std::vector<double> default_frequency_sweep() {
  std::vector<double> freqs;
  for (int f = 120; f <= 2040; f += 120) freqs.push_back(f);
  for (int f = 480; f <= 1080; f += 30) {
    if (f % 120 != 0) freqs.push_back(f);
  }
  std::sort(freqs.begin(), freqs.end());
  return freqs;
}

RunConfig run_config_from_json_file(const std::string& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_text_file(path));
  } catch (const ordered_json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("run config parse: ") + e.what());
  }

  RunConfig config;
  config.scene_path = j.at("scene").get<std::string>();

  if (!j.contains("gf")) throw Error(ErrorCode::kConfig, "run config needs a gf source");
  const auto& gf = j["gf"];
  const std::string gf_source = gf.at("source").get<std::string>();
  if (gf_source == "freefield") {
    config.gf_source = GfSource::kFreefield;
  } else if (gf_source == "ism") {
    config.gf_source = GfSource::kIsm;
    config.ism_max_order = gf.value("max_order", 3);
  } else if (gf_source == "import") {
    config.gf_source = GfSource::kImport;
    config.gf_import_path = gf.at("path").get<std::string>();
  } else {
    throw Error(ErrorCode::kConfig, "unknown gf source '" + gf_source + "'");
  }

  if (j.contains("steering_gf")) {
    const auto& sg = j["steering_gf"];
    const std::string source = sg.at("source").get<std::string>();
    if (source == "freefield") {
      config.steering_gf_source = GfSource::kFreefield;
    } else if (source == "ism") {
      config.steering_gf_source = GfSource::kIsm;
      config.steering_ism_max_order = sg.value("max_order", 3);
    } else if (source == "import") {
      config.steering_gf_source = GfSource::kImport;
      config.steering_gf_import_path = sg.at("path").get<std::string>();
    } else {
      throw Error(ErrorCode::kConfig, "unknown steering_gf source '" + source + "'");
    }
  }

  if (!j.contains("csm")) throw Error(ErrorCode::kConfig, "run config needs a csm source");
  const auto& csm = j["csm"];
  const std::string csm_source = csm.at("source").get<std::string>();
  const bool has_wav_keys = csm.contains("path") || csm.contains("welch");
  const bool has_synth_keys = csm.contains("source_index") || csm.contains("amplitude");
  if (csm_source == "synthetic") {
    if (has_wav_keys) {
      throw Error(ErrorCode::kConfig, "synthetic csm config carries wav keys");
    }
    config.csm_source = CsmSource::kSynthetic;
    if (csm.contains("source_index")) {
      config.synthetic_source_index = csm["source_index"].get<std::size_t>();
    }
    if (csm.contains("amplitude")) {
      if (csm["amplitude"].is_array()) {
        config.synthetic_amplitude = {csm["amplitude"][0].get<double>(),
                                      csm["amplitude"][1].get<double>()};
      } else {
        config.synthetic_amplitude = {csm["amplitude"].get<double>(), 0.0};
      }
    }
  } else if (csm_source == "wav") {
    if (has_synth_keys) {
      throw Error(ErrorCode::kConfig, "wav csm config carries synthetic keys");
    }
    config.csm_source = CsmSource::kWav;
    config.wav_path = csm.at("path").get<std::string>();
    config.csv_sample_rate = csm.value("sample_rate", 0.0);
    if (csm.contains("welch")) config.welch = welch_from_json(csm["welch"]);
  } else {
    throw Error(ErrorCode::kConfig, "unknown csm source '" + csm_source + "'");
  }

  if (j.contains("steering")) config.steering = steering_from_json(j["steering"]);

  if (j.contains("frequencies")) {
    const auto& f = j["frequencies"];
    if (f.is_array()) {
      config.frequencies = f.get<std::vector<double>>();
    } else {
      const double start = f.at("start").get<double>();
      const double stop = f.at("stop").get<double>();
      const double step = f.at("step").get<double>();
      if (step <= 0.0) throw Error(ErrorCode::kConfig, "frequency step must be > 0");
      for (double v = start; v <= stop + 1e-9; v += step) config.frequencies.push_back(v);
    }
  }

  if (j.contains("mask") && j["mask"].is_object()) {
    const auto& rect = j["mask"].at("rect");
    MaskRect mask;
    mask.u_min = rect.at("u_min").get<double>();
    mask.u_max = rect.at("u_max").get<double>();
    mask.v_min = rect.at("v_min").get<double>();
    mask.v_max = rect.at("v_max").get<double>();
    config.mask = mask;
  }

  config.diagonal_removal = j.value("diagonal_removal", false);
  if (j.contains("true_power")) config.true_power = j["true_power"].get<double>();
  config.output_dir = j.value("output_dir", "out");
  return config;
}

namespace {

ordered_json config_to_json(const RunConfig& config) {
  ordered_json j;
  j["scene"] = config.scene_path;
  switch (config.gf_source) {
    case GfSource::kFreefield: j["gf"] = {{"source", "freefield"}}; break;
    case GfSource::kIsm:
      j["gf"] = {{"source", "ism"}, {"max_order", config.ism_max_order}};
      break;
    case GfSource::kImport:
      j["gf"] = {{"source", "import"}, {"path", config.gf_import_path}};
      break;
  }
  if (config.steering_gf_source) {
    switch (*config.steering_gf_source) {
      case GfSource::kFreefield: j["steering_gf"] = {{"source", "freefield"}}; break;
      case GfSource::kIsm:
        j["steering_gf"] = {{"source", "ism"}, {"max_order", config.steering_ism_max_order}};
        break;
      case GfSource::kImport:
        j["steering_gf"] = {{"source", "import"}, {"path", config.steering_gf_import_path}};
        break;
    }
  }
  if (config.csm_source == CsmSource::kSynthetic) {
    ordered_json csm = {{"source", "synthetic"}};
    if (config.synthetic_source_index) csm["source_index"] = *config.synthetic_source_index;
    if (config.synthetic_amplitude) {
      csm["amplitude"] = {config.synthetic_amplitude->real(),
                          config.synthetic_amplitude->imag()};
    }
    j["csm"] = csm;
  } else {
    j["csm"] = {{"source", "wav"},
                {"path", config.wav_path},
                {"welch",
                 {{"block_len", config.welch.block_len},
                  {"overlap", config.welch.overlap},
                  {"window", config.welch.window == Window::kHann ? "hann" : "rect"},
                  {"normalization", config.welch.normalization == Normalization::kAmplitudeCorrected
                                        ? "amplitude-corrected"
                                        : "none"}}}};
  }
  j["steering"] = {{"label", config.steering.label()},
                   {"alpha", config.steering.alpha},
                   {"beta", config.steering.beta}};
  j["frequencies"] = config.frequencies;
  if (config.mask) {
    j["mask"] = {{"rect",
                  {{"u_min", config.mask->u_min},
                   {"u_max", config.mask->u_max},
                   {"v_min", config.mask->v_min},
                   {"v_max", config.mask->v_max}}}};
  }
  j["diagonal_removal"] = config.diagonal_removal;
  if (config.true_power) j["true_power"] = *config.true_power;
  j["output_dir"] = config.output_dir;
  return j;
}

std::vector<std::uint8_t> mask_from_rect(const FocusGrid& grid, const MaskRect& rect) {
  std::vector<std::uint8_t> mask(grid.size(), 0);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const double u = static_cast<double>(n % grid.nu) * grid.spacing;
    const double v = static_cast<double>(n / grid.nu) * grid.spacing;
    mask[n] = (u >= rect.u_min && u <= rect.u_max && v >= rect.v_min && v <= rect.v_max) ? 1 : 0;
  }
  return mask;
}

std::string frequency_tag(double f) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", f);
  std::string tag(buf);
  for (char& c : tag) {
    if (c == '.') c = 'p';
  }
  return tag;
}

ordered_json criteria_to_json(const MapCriteria& c) {
  ordered_json j;
  j["frequency"] = c.frequency;
  j["spatial_deviation_m"] = c.spatial_deviation;
  j["level_error_db"] = c.level_error;
  j["resolution_b_m"] = c.resolution_b;
  j["msr_db"] = c.msr;
  j["spr_db"] = c.spr;
  j["flags"] = flag_names(c.flags);
  return j;
}

}  // namespace

RunResult run_pipeline(const RunConfig& config) {
  Scene scene = scene_from_json_file(config.scene_path);
  const auto diagnostics = validate_scene(scene);
  for (const auto& d : diagnostics) {
    if (d.severity == DiagnosticSeverity::kError) {
      throw Error(ErrorCode::kConfig, "scene: " + d.code + ": " + d.message);
    }
  }

  const std::vector<double> frequencies =
      config.frequencies.empty() ? default_frequency_sweep() : config.frequencies;

  if (config.mask) scene.grid.mask = mask_from_rect(scene.grid, *config.mask);

  auto build_tensor = [&](GfSource source, int max_order, const std::string& import_path) {
    GfTensor tensor;
    switch (source) {
      case GfSource::kFreefield:
        tensor =
            evaluate_gf_tensor(FreefieldProvider(scene.speed_of_sound), scene, frequencies);
        break;
      case GfSource::kIsm:
        tensor = evaluate_gf_tensor(
            IsmProvider(scene.speed_of_sound, scene.reflectors, max_order), scene, frequencies);
        break;
      case GfSource::kImport:
        tensor = import_gf_file(import_path, scene, frequencies);
        break;
    }
    for (const auto& d : validate_gf_tensor(tensor)) {
      if (d.severity == DiagnosticSeverity::kError) {
        throw Error(ErrorCode::kNonfiniteValue, "gf tensor: " + d.code + ": " + d.message);
      }
    }
    return tensor;
  };

  const GfTensor tensor = build_tensor(config.gf_source, config.ism_max_order,
                                       config.gf_import_path);
  const SteeringSet steering =
      config.steering_gf_source
          ? build_steering(build_tensor(*config.steering_gf_source,
                                        config.steering_ism_max_order,
                                        config.steering_gf_import_path),
                           config.steering)
          : build_steering(tensor, config.steering);
  auto grid = std::make_shared<const FocusGrid>(scene.grid);

  // Sub-runs: one per source position (synthetic default), or the single
  // configured cell, or the single scene source for measured records.
  struct SubRun {
    std::size_t grid_index;
    std::complex<double> amplitude;
  };
  std::vector<SubRun> sub_runs;
  if (config.csm_source == CsmSource::kSynthetic) {
    if (config.synthetic_source_index) {
      if (*config.synthetic_source_index >= scene.grid.size()) {
        throw Error(ErrorCode::kIndexRange, "synthetic source index outside the grid");
      }
      sub_runs.push_back({*config.synthetic_source_index,
                          config.synthetic_amplitude.value_or(std::complex<double>{1.0, 0.0})});
    } else {
      if (scene.sources.empty()) {
        throw Error(ErrorCode::kConfig, "synthetic run needs scene sources or source_index");
      }
      for (const auto& source : scene.sources) {
        sub_runs.push_back({scene.grid.nearest_index(source.position),
                            config.synthetic_amplitude.value_or(source.amplitude)});
      }
    }
  } else {
    if (scene.sources.size() != 1) {
      throw Error(ErrorCode::kConfig, "wav runs need exactly one scene source as ground truth");
    }
    sub_runs.push_back({scene.grid.nearest_index(scene.sources[0].position),
                        scene.sources[0].amplitude});
  }

  Csm measured;
  if (config.csm_source == CsmSource::kWav) {
    TimeRecord record;
    if (config.wav_path.size() >= 4 &&
        config.wav_path.compare(config.wav_path.size() - 4, 4, ".csv") == 0) {
      record = read_csv_record(config.wav_path, config.csv_sample_rate);
    } else {
      record = read_wav(config.wav_path);
    }
    if (record.n_channels != scene.array.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "record channels do not match the array");
    }
    measured = welch_csm(record, config.welch, frequencies);
  }

  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);

  RunResult result;
  result.frequencies = frequencies;

  for (const SubRun& sub : sub_runs) {
    Csm csm = config.csm_source == CsmSource::kSynthetic
                  ? synthetic_csm(tensor, sub.grid_index, sub.amplitude)
                  : measured;
    if (config.diagonal_removal) csm = remove_diagonal(csm);

    const Vec3 source_position = scene.grid.point(sub.grid_index);
    double true_power;
    bool have_true_power = true;
    if (config.true_power) {
      true_power = *config.true_power;
    } else if (config.csm_source == CsmSource::kSynthetic) {
      true_power = std::norm(sub.amplitude);
    } else {
      true_power = 1.0;
      have_true_power = false;  // measured loudspeaker strength unknown
    }

    const std::string source_dir =
        config.output_dir + "/source_" + std::to_string(sub.grid_index);
    fs::create_directories(source_dir);

    std::vector<SourceMap> maps;
    std::vector<MapCriteria> criteria;
    maps.reserve(frequencies.size());
    for (std::size_t q = 0; q < frequencies.size(); ++q) {
      SourceMap map = dirty_map(csm, q, steering, q, grid);
      MapCriteria c = evaluate_criteria(map, source_position, true_power);
      if (!have_true_power) c.level_error = std::numeric_limits<double>::quiet_NaN();
      criteria.push_back(c);
      export_map_csv(source_dir + "/map_" + frequency_tag(frequencies[q]) + "Hz.csv", map);
      maps.push_back(std::move(map));
    }
    export_maps_binary(source_dir + "/maps.map1", maps);

    result.source_indices.push_back(sub.grid_index);
    result.per_source.push_back(std::move(criteria));
  }

  result.aggregate = aggregate(result.per_source);

  ordered_json criteria_json;
  criteria_json["speed_of_sound"] = scene.speed_of_sound;
  criteria_json["gf_provenance"] = tensor.provenance;
  criteria_json["steering_gf_provenance"] = steering.gf_provenance;
  criteria_json["steering"] = {{"label", config.steering.label()},
                               {"alpha", config.steering.alpha},
                               {"beta", config.steering.beta}};
  criteria_json["frequencies"] = frequencies;
  criteria_json["sources"] = ordered_json::array();
  for (std::size_t s = 0; s < result.source_indices.size(); ++s) {
    const Vec3 p = scene.grid.point(result.source_indices[s]);
    criteria_json["sources"].push_back(
        {{"index", result.source_indices[s]}, {"position", {p.x, p.y, p.z}}});
  }
  criteria_json["per_source"] = ordered_json::array();
  for (std::size_t s = 0; s < result.per_source.size(); ++s) {
    ordered_json entry;
    entry["source_index"] = result.source_indices[s];
    entry["criteria"] = ordered_json::array();
    for (const MapCriteria& c : result.per_source[s]) {
      entry["criteria"].push_back(criteria_to_json(c));
    }
    criteria_json["per_source"].push_back(entry);
  }
  criteria_json["aggregate"] = ordered_json::array();
  for (const AggregateCriteria& a : result.aggregate) {
    criteria_json["aggregate"].push_back({{"frequency", a.frequency},
                                          {"spatial_deviation_m", a.spatial_deviation},
                                          {"level_error_db", a.level_error},
                                          {"resolution_b_m", a.resolution_b},
                                          {"msr_db", a.msr},
                                          {"spr_db", a.spr},
                                          {"flag_count", a.flag_count}});
  }

  result.criteria_path = config.output_dir + "/criteria.json";
  {
    std::ofstream out(result.criteria_path);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + result.criteria_path);
    out << criteria_json.dump(2) << "\n";
  }

  const std::string config_dump = config_to_json(config).dump();
  const std::string scene_dump = read_text_file(config.scene_path);
  ordered_json manifest;
  manifest["tool"] = "gfbeam";
  manifest["version"] = "0.1.0";
  manifest["config_hash"] = hex64(fnv1a64(config_dump.data(), config_dump.size()));
  manifest["scene_hash"] = hex64(fnv1a64(scene_dump.data(), scene_dump.size()));
  manifest["gf_provenance"] = tensor.provenance;
  manifest["csm_source"] = config.csm_source == CsmSource::kSynthetic ? "synthetic" : "wav";
  manifest["steering"] = config.steering.label();
  manifest["n_frequencies"] = frequencies.size();
  manifest["n_sources"] = result.source_indices.size();
  manifest["diagonal_removal"] = config.diagonal_removal;
  result.manifest_path = config.output_dir + "/manifest.json";
  {
    std::ofstream out(result.manifest_path);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + result.manifest_path);
    out << manifest.dump(2) << "\n";
  }

  return result;
}

namespace {

struct LoadedCriteria {
  double speed_of_sound = 0.0;
  std::vector<double> frequencies;
  std::vector<AggregateCriteria> aggregate;
};

LoadedCriteria load_criteria(const std::string& run_dir) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_text_file(run_dir + "/criteria.json"));
  } catch (const ordered_json::exception& e) {
    throw Error(ErrorCode::kFormatMismatch,
                "criteria.json parse in " + run_dir + ": " + e.what());
  }
  LoadedCriteria loaded;
  loaded.speed_of_sound = j.at("speed_of_sound").get<double>();
  loaded.frequencies = j.at("frequencies").get<std::vector<double>>();
  for (const auto& a : j.at("aggregate")) {
    AggregateCriteria agg;
    agg.frequency = a.at("frequency").get<double>();
    auto number = [&a](const char* key) {
      const auto& v = a.at(key);
      return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
    };
    agg.spatial_deviation = number("spatial_deviation_m");
    agg.level_error = number("level_error_db");
    agg.resolution_b = number("resolution_b_m");
    agg.msr = number("msr_db");
    agg.spr = number("spr_db");
    agg.flag_count = a.at("flag_count").get<std::size_t>();
    loaded.aggregate.push_back(agg);
  }
  return loaded;
}

}  // namespace

std::vector<CompareRow> compare_runs(const std::string& run_dir_a,
                                     const std::string& run_dir_b) {
  const LoadedCriteria a = load_criteria(run_dir_a);
  const LoadedCriteria b = load_criteria(run_dir_b);
  if (a.frequencies.size() != b.frequencies.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "runs have different frequency axes");
  }
  for (std::size_t q = 0; q < a.frequencies.size(); ++q) {
    if (std::abs(a.frequencies[q] - b.frequencies[q]) > 1e-9) {
      throw Error(ErrorCode::kDimensionMismatch, "runs have different frequency axes");
    }
  }

  // Undefined (all-flagged) aggregates compare as zero when both sides are
  // undefined; a one-sided NaN stays NaN.
  auto delta = [](double va, double vb) {
    if (std::isnan(va) && std::isnan(vb)) return 0.0;
    return vb - va;
  };
  std::vector<CompareRow> rows(a.frequencies.size());
  for (std::size_t q = 0; q < rows.size(); ++q) {
    CompareRow& row = rows[q];
    row.frequency = a.frequencies[q];
    const AggregateCriteria& ca = a.aggregate[q];
    const AggregateCriteria& cb = b.aggregate[q];
    row.d_spatial_deviation = delta(ca.spatial_deviation, cb.spatial_deviation);
    row.d_level_error = delta(ca.level_error, cb.level_error);
    row.d_resolution_b = delta(ca.resolution_b, cb.resolution_b);
    const double lambda_a = a.speed_of_sound / row.frequency;
    const double lambda_b = b.speed_of_sound / row.frequency;
    row.resolution_over_wavelength_a = ca.resolution_b / lambda_a;
    row.resolution_over_wavelength_b = cb.resolution_b / lambda_b;
    row.d_msr = delta(ca.msr, cb.msr);
    row.d_spr = delta(ca.spr, cb.spr);
  }
  return rows;
}

void write_compare_report(const std::string& path, const std::vector<CompareRow>& rows) {
  ordered_json j = ordered_json::array();
  for (const CompareRow& row : rows) {
    j.push_back({{"frequency", row.frequency},
                 {"d_spatial_deviation_m", row.d_spatial_deviation},
                 {"d_level_error_db", row.d_level_error},
                 {"d_resolution_b_m", row.d_resolution_b},
                 {"resolution_over_wavelength_a", row.resolution_over_wavelength_a},
                 {"resolution_over_wavelength_b", row.resolution_over_wavelength_b},
                 {"d_msr_db", row.d_msr},
                 {"d_spr_db", row.d_spr}});
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << j.dump(2) << "\n";

  // CSV sibling for plotting.
  const std::string csv_path =
      path.size() > 5 && path.compare(path.size() - 5, 5, ".json") == 0
          ? path.substr(0, path.size() - 5) + ".csv"
          : path + ".csv";
  std::ofstream csv(csv_path);
  if (!csv) throw Error(ErrorCode::kIo, "cannot write " + csv_path);
  csv << "frequency,d_spatial_deviation_m,d_level_error_db,d_resolution_b_m,"
         "resolution_over_wavelength_a,resolution_over_wavelength_b,d_msr_db,d_spr_db\n";
  char line[256];
  for (const CompareRow& row : rows) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  row.frequency, row.d_spatial_deviation, row.d_level_error,
                  row.d_resolution_b, row.resolution_over_wavelength_a,
                  row.resolution_over_wavelength_b, row.d_msr, row.d_spr);
    csv << line;
  }
}

}  // namespace gfb
