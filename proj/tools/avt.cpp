// avt: audio-visual-text dataset builder.
//
//   avt [--config FILE] [options] extract <video or dir>...
//   avt [--config FILE] [options] caption
//   avt [--config FILE] [options] pack
//   avt [--config FILE] [options] stats words|amplitude|adi
//   avt [--config FILE] [options] show-config
//
// Exit codes: 0 success, 1 usage, 2 no usable input, 3 stage failure.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "avt/avt.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitNoInput = 2;
constexpr int kExitStage = 3;

int exit_code_for(avt::ErrorKind kind) {
  switch (kind) {
    case avt::ErrorKind::InvalidArgument: return kExitUsage;
    case avt::ErrorKind::NoInput: return kExitNoInput;
    default: return kExitStage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Builds audio-image-text pair datasets from video files."};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file;
  app.add_option("--config", config_file, "flat key = value config file; flags override it")
      ->check(CLI::ExistingFile);

  // Every config key except `input` becomes a flag of the same name.
  const avt::RunConfig defaults;
  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> flags;
  for (const auto& [key, value] : defaults.entries()) {
    if (key == "input" || key == "audio-as-path" || flags.contains(key)) continue;
    flags[key] = app.add_option("--" + key, flag_values[key])->default_str(value)->type_name("");
  }
  bool audio_as_path = false;
  CLI::Option* audio_flag =
      app.add_flag("--audio-as-path,!--no-audio-as-path", audio_as_path, "store WAV paths in the audio column");

  std::vector<std::string> inputs;
  auto* extract = app.add_subcommand("extract", "extract image/audio pairs from videos");
  extract->add_option("inputs", inputs, "video files or directories");
  auto* caption = app.add_subcommand("caption", "caption every extracted pair");
  auto* pack = app.add_subcommand("pack", "write CSV/zip shards and the manifest");
  auto* stats = app.add_subcommand("stats", "dataset statistics");
  std::string which;
  stats->add_option("which", which, "words, amplitude or adi")
      ->required()
      ->check(CLI::IsMember({"words", "amplitude", "adi"}));
  auto* show = app.add_subcommand("show-config", "print the effective configuration");
  for (auto* sub : {extract, caption, pack, stats, show}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    avt::RunConfig cfg;
    if (!config_file.empty()) avt::apply_config_text(cfg, avt::read_text_file(config_file));
    for (const auto& [key, opt] : flags) {
      if (opt->count() > 0) cfg.set(key, flag_values[key]);
    }
    if (audio_flag->count() > 0) cfg.audio_as_path = audio_as_path;
    if (!inputs.empty()) cfg.inputs = inputs;
    cfg.validate();

    if (*show) {
      std::cout << cfg.serialize();
    } else if (*extract) {
      const auto summary = avt::run_extract(cfg);
      std::cout << "extract: " << summary.videos_ok() << " videos ok, "
                << summary.videos.size() - summary.videos_ok() << " skipped, " << summary.total_pairs
                << " pairs\n";
    } else if (*caption) {
      const auto summary = avt::run_caption(cfg);
      std::cout << "caption: " << summary.records.size() << " captioned, " << summary.drops.size()
                << " dropped\n";
    } else if (*pack) {
      const auto manifest = avt::run_pack(cfg);
      std::cout << "pack: " << manifest.total_pairs << " records, " << manifest.csv_shards.size() << " csv, "
                << manifest.zip_shards.size() << " zip\n";
    } else if (*stats) {
      const auto kind = which == "words"       ? avt::StatsKind::Words
                        : which == "amplitude" ? avt::StatsKind::Amplitude
                                               : avt::StatsKind::Adi;
      std::cout << "stats: wrote " << avt::run_stats(cfg, kind).string() << "\n";
    }
  } catch (const avt::Error& e) {
    std::cerr << "avt: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "avt: " << e.what() << "\n";
    return kExitStage;
  }
  return 0;
}
