// Command-line front end: config-driven runs, run comparison, GF tensor
// export and scene validation.
#include <complex>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gfbeam/errors.hpp"
#include "gfbeam/pipeline.hpp"
#include "gfbeam/util.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& out_override,
            const std::string& preset, double alpha, double beta, bool have_alpha_beta,
            const std::vector<double>& freqs, int diag_removal) {
  gfb::RunConfig config = gfb::run_config_from_json_file(config_path);
  if (!out_override.empty()) config.output_dir = out_override;
  if (!preset.empty()) {
    gfb::SteeringPreset p;
    if (preset == "I") p = gfb::SteeringPreset::kI;
    else if (preset == "II") p = gfb::SteeringPreset::kII;
    else if (preset == "III") p = gfb::SteeringPreset::kIII;
    else if (preset == "IV") p = gfb::SteeringPreset::kIV;
    else throw gfb::Error(gfb::ErrorCode::kConfig, "unknown preset " + preset);
    config.steering = gfb::SteeringParams::from_preset(p);
  } else if (have_alpha_beta) {
    config.steering = gfb::SteeringParams{};
    config.steering.alpha = alpha;
    config.steering.beta = beta;
  }
  if (!freqs.empty()) config.frequencies = freqs;
  if (diag_removal >= 0) config.diagonal_removal = diag_removal != 0;

  const gfb::RunResult result = gfb::run_pipeline(config);
  std::printf("run complete: %zu sources x %zu frequencies\n",
              result.source_indices.size(), result.frequencies.size());
  std::printf("criteria: %s\nmanifest: %s\n", result.criteria_path.c_str(),
              result.manifest_path.c_str());
  return 0;
}

int cmd_compare(const std::string& dir_a, const std::string& dir_b, const std::string& out) {
  const auto rows = gfb::compare_runs(dir_a, dir_b);
  gfb::write_compare_report(out, rows);
  std::printf("compare report (%zu frequencies): %s\n", rows.size(), out.c_str());
  return 0;
}

int cmd_gf_export(const std::string& scene_path, const std::string& provider, int max_order,
                  const std::vector<double>& freqs, const std::string& out) {
  const gfb::Scene scene = gfb::scene_from_json_file(scene_path);
  gfb::GfTensor tensor;
  if (provider == "freefield") {
    tensor = gfb::evaluate_gf_tensor(gfb::FreefieldProvider(scene.speed_of_sound), scene, freqs);
  } else if (provider == "ism") {
    tensor = gfb::evaluate_gf_tensor(
        gfb::IsmProvider(scene.speed_of_sound, scene.reflectors, max_order), scene, freqs);
  } else {
    throw gfb::Error(gfb::ErrorCode::kConfig, "unknown provider " + provider);
  }
  gfb::export_gf_file(out, tensor);
  std::printf("wrote %zu x %zu x %zu tensor to %s\n", tensor.n_freq(), tensor.n_focus,
              tensor.n_mics, out.c_str());
  return 0;
}

int cmd_validate(const std::string& scene_path) {
  const gfb::Scene scene = gfb::scene_from_json_file(scene_path);
  const auto diagnostics = gfb::validate_scene(scene);
  for (const auto& d : diagnostics) {
    std::printf("%s %s: %s\n",
                d.severity == gfb::DiagnosticSeverity::kError ? "error" : "warning",
                d.code.c_str(), d.message.c_str());
  }
  if (diagnostics.empty()) {
    std::printf("scene ok: %zu mics, %zu x %zu grid, %zu reflectors, %zu sources\n",
                scene.array.size(), scene.grid.nu, scene.grid.nv, scene.reflectors.size(),
                scene.sources.size());
  }
  for (const auto& d : diagnostics) {
    if (d.severity == gfb::DiagnosticSeverity::kError) return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Beamforming with tailored Green's functions"};
  app.require_subcommand(1);

  std::string config_path, out_path, preset;
  double alpha = 0.0, beta = 1.0;
  std::vector<double> freqs;
  int diag_removal = -1;

  CLI::App* run = app.add_subcommand("run", "execute a pipeline run from a JSON config");
  run->add_option("--config", config_path, "run config JSON")->required();
  run->add_option("--out", out_path, "output directory (overrides config)");
  run->add_option("--preset", preset, "steering preset I|II|III|IV");
  auto* alpha_opt = run->add_option("--alpha", alpha, "steering alpha");
  auto* beta_opt = run->add_option("--beta", beta, "steering beta");
  run->add_option("--freq", freqs, "frequency list in Hz (overrides config)");
  run->add_flag("--diagonal-removal,!--no-diagonal-removal",
                [&diag_removal](std::int64_t count) { diag_removal = count > 0 ? 1 : 0; },
                "zero the CSM diagonal before mapping");

  std::string dir_a, dir_b, report_path = "compare.json";
  CLI::App* compare = app.add_subcommand("compare", "criteria deltas between two run dirs");
  compare->add_option("dir_a", dir_a, "first run directory")->required();
  compare->add_option("dir_b", dir_b, "second run directory")->required();
  compare->add_option("--out", report_path, "report path (.json; .csv written alongside)");

  std::string scene_path, provider = "ism", gf_out = "gf.gft";
  int max_order = 3;
  CLI::App* gf_export = app.add_subcommand("gf-export", "evaluate and export a GF tensor");
  gf_export->add_option("--scene", scene_path, "scene config JSON")->required();
  gf_export->add_option("--provider", provider, "freefield|ism");
  gf_export->add_option("--max-order", max_order, "ISM reflection order");
  gf_export->add_option("--freq", freqs, "frequency list in Hz")->required();
  gf_export->add_option("--out", gf_out, "output file (.gft binary or .csv)");

  std::string validate_scene_path;
  CLI::App* validate = app.add_subcommand("validate", "check a scene config");
  validate->add_option("--scene", validate_scene_path, "scene config JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(config_path, out_path, preset, alpha, beta,
                     alpha_opt->count() > 0 || beta_opt->count() > 0, freqs, diag_removal);
    }
    if (compare->parsed()) return cmd_compare(dir_a, dir_b, report_path);
    if (gf_export->parsed()) {
      return cmd_gf_export(scene_path, provider, max_order, freqs, gf_out);
    }
    if (validate->parsed()) return cmd_validate(validate_scene_path);
  } catch (const gfb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
