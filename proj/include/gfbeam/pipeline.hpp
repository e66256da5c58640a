#ifndef GFBEAM_PIPELINE_HPP
#define GFBEAM_PIPELINE_HPP

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "gfbeam/metrics.hpp"

namespace gfb {

enum class GfSource { kFreefield, kIsm, kImport };
enum class CsmSource { kSynthetic, kWav };

struct MaskRect {
  double u_min = 0.0, u_max = 0.0;  // m along axis1 from the grid origin
  double v_min = 0.0, v_max = 0.0;  // m along axis2
};

// One pipeline run: scene -> GF tensor -> CSM(s) -> steering -> maps ->
// criteria -> exports. Parsed from JSON (schema in the README); CLI flags
// override individual fields.
struct RunConfig {
  std::string scene_path;

  GfSource gf_source = GfSource::kIsm;
  int ism_max_order = 3;
  std::string gf_import_path;

  // Steering may use a different GF than the synthetic propagation (e.g.
  // free-field steering against ISM CSMs); defaults to the gf source.
  std::optional<GfSource> steering_gf_source;
  int steering_ism_max_order = 3;
  std::string steering_gf_import_path;

  CsmSource csm_source = CsmSource::kSynthetic;
  // Synthetic runs default to one sub-run per scene source; setting an
  // explicit index restricts to that single grid cell.
  std::optional<std::size_t> synthetic_source_index;
  std::optional<std::complex<double>> synthetic_amplitude;
  std::string wav_path;
  double csv_sample_rate = 0.0;  // required when wav_path ends in .csv
  WelchParams welch;

  SteeringParams steering = SteeringParams::from_preset(SteeringPreset::kI);
  std::vector<double> frequencies;  // empty = default sweep
  std::optional<MaskRect> mask;     // overrides the scene grid mask
  bool diagonal_removal = false;
  std::optional<double> true_power;  // linear; level-error reference for wav runs

  std::string output_dir = "out";
};

RunConfig run_config_from_json_file(const std::string& path);

// 120..2040 Hz step 120, densified with step 30 in [480, 1080].
std::vector<double> default_frequency_sweep();

struct RunResult {
  std::vector<double> frequencies;
  std::vector<std::size_t> source_indices;  // snapped grid cells
  std::vector<std::vector<MapCriteria>> per_source;
  std::vector<AggregateCriteria> aggregate;
  std::string criteria_path;
  std::string manifest_path;
};

// Executes the run and writes maps, criteria.json and manifest.json to
// config.output_dir. Outputs are deterministic for identical config+inputs.
RunResult run_pipeline(const RunConfig& config);

struct CompareRow {
  double frequency = 0.0;
  double d_spatial_deviation = 0.0;
  double d_level_error = 0.0;
  double d_resolution_b = 0.0;
  double resolution_over_wavelength_a = 0.0;  // b/lambda per run
  double resolution_over_wavelength_b = 0.0;
  double d_msr = 0.0;
  double d_spr = 0.0;
};

// Criteria deltas (run B minus run A) per frequency, read back from two run
// directories; resolution is also reported normalized by the wavelength.
std::vector<CompareRow> compare_runs(const std::string& run_dir_a,
                                     const std::string& run_dir_b);
void write_compare_report(const std::string& path, const std::vector<CompareRow>& rows);

}  // namespace gfb

#endif
