// nlosforge: command-line driver for every pipeline stage.
//
// Exit codes: 0 success, 2 usage, 3 I/O or file format, 4 validation or
// shape mismatch, 5 numerical failure, 1 anything else.

#include <omp.h>

#include <CLI11.hpp>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "nlos/io.hpp"
#include "nlos/mae.hpp"
#include "nlos/masking.hpp"
#include "nlos/metrics.hpp"
#include "nlos/noise.hpp"
#include "nlos/recon.hpp"
#include "nlos/renderer.hpp"
#include "nlos/scenes.hpp"
#include "spec_text.hpp"

namespace fs = std::filesystem;
using namespace nlos;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t env_seed() {
  const char* s = std::getenv("NLOS_FORGE_SEED");
  if (!s || !*s) return 0;
  char* end = nullptr;
  errno = 0;
  const auto v = std::strtoull(s, &end, 10);
  if (errno != 0 || *end != '\0' || s[0] == '-') throw UsageError("NLOS_FORGE_SEED must be a non-negative integer");
  return v;
}

struct GeometryFlags {
  std::optional<std::size_t> nx, ny, bins;
  std::optional<double> bin_width_ps, wall_width, wall_height;

  void add(CLI::App* app) {
    app->add_option("--nx", nx, "Scan points along x");
    app->add_option("--ny", ny, "Scan points along y");
    app->add_option("--bins", bins, "Time bins per histogram");
    app->add_option("--bin-width-ps", bin_width_ps, "Time bin width in picoseconds");
    app->add_option("--wall-width", wall_width, "Relay wall width in meters");
    app->add_option("--wall-height", wall_height, "Relay wall height in meters");
  }

  // Spec-file geometry first, flags on top.
  ScanGeometry resolve(const nlosforge::SpecText* spec) const {
    ScanGeometry g;
    if (spec)
      if (const auto* t = spec->find("geometry")) nlosforge::apply_geometry(*t, g);
    if (nx) g.nx = *nx;
    if (ny) g.ny = *ny;
    if (bins) g.n_bins = *bins;
    if (bin_width_ps) g.bin_width = *bin_width_ps * 1e-12;
    if (wall_width) g.wall_width = *wall_width;
    if (wall_height) g.wall_height = *wall_height;
    g.validate();
    return g;
  }
};

RenderOptions render_options(const nlosforge::SpecText& spec) {
  RenderOptions o;
  if (const auto* t = spec.find("render")) nlosforge::apply_render(*t, o);
  return o;
}

void write_output_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    io::write_text(path, text);
}

// Class indices come from integer manifest labels.
std::vector<std::size_t> manifest_labels(const std::vector<ManifestRow>& rows) {
  std::vector<std::size_t> out;
  for (const auto& r : rows) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(r.label, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (r.label.empty() || pos != r.label.size())
      throw ValidationError("manifest row " + r.file + ": label '" + r.label + "' is not a class index");
    out.push_back(v);
  }
  return out;
}

std::vector<TransientVolume> load_manifest_volumes(const fs::path& manifest, const std::vector<ManifestRow>& rows) {
  std::vector<TransientVolume> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(io::read_transient(manifest.parent_path() / r.file));
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"nlosforge: confocal NLOS transient simulation, completion and reconstruction"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  app.add_option("--threads", threads, "Cap on worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  const std::uint64_t default_seed = env_seed();
  std::function<void()> action;

  // render
  auto* render = app.add_subcommand("render", "Render a scene spec into a transient volume");
  std::string scene_path, render_out;
  bool render_normalize = false;
  std::uint64_t render_seed = default_seed;
  GeometryFlags render_geo;
  render->add_option("--scene", scene_path, "Scene spec file")->required();
  render->add_option("-o,--out", render_out, "Output .trnv")->required();
  render->add_option("--seed", render_seed, "Seed for scenes that do not set one");
  render->add_flag("--normalize", render_normalize, "Scale each histogram to unit peak");
  render_geo.add(render);
  render->callback([&] {
    action = [&] {
      const auto spec = nlosforge::read_spec_file(scene_path);
      const auto specs = nlosforge::scene_specs(spec, render_seed);
      if (specs.empty()) throw ValidationError("scene file has no [[scene]] tables");
      HiddenScene scene;
      for (const auto& s : specs) {
        const auto part = generate_scene(s);
        scene.points.insert(scene.points.end(), part.points.begin(), part.points.end());
      }
      auto v = render_confocal(scene, render_geo.resolve(&spec), render_options(spec));
      if (render_normalize) v = normalize_per_transient(v);
      io::write_transient(render_out, v);
    };
  });

  // noise
  auto* noise = app.add_subcommand("noise", "Apply SPAD jitter, bias and Poisson noise");
  std::string noise_in, noise_out;
  NoiseParams np;
  np.seed = default_seed;
  double jitter_ps = 128.0;
  bool jitter_only = false;
  noise->add_option("--in", noise_in, "Input .trnv")->required();
  noise->add_option("-o,--out", noise_out, "Output .trnv")->required();
  noise->add_option("--jitter-fwhm-ps", jitter_ps, "Gaussian jitter FWHM in picoseconds")->capture_default_str();
  noise->add_option("--bias", np.bias, "Constant expected counts per bin")->capture_default_str();
  noise->add_option("--photon-scale", np.photon_scale, "Intensity to expected photon count")->capture_default_str();
  noise->add_option("--seed", np.seed, "Noise seed");
  noise->add_flag("--jitter-only", jitter_only, "Convolve with the jitter kernel without sampling");
  noise->callback([&] {
    action = [&] {
      np.jitter_fwhm = jitter_ps * 1e-12;
      const auto v = io::read_transient(noise_in);
      io::write_transient(noise_out, jitter_only ? apply_jitter(v, np) : apply_spad_noise(v, np));
    };
  });

  // mask make / apply
  auto* mask = app.add_subcommand("mask", "Scanning-pattern masks");
  mask->require_subcommand(1);
  auto* mask_make = mask->add_subcommand("make", "Create a random or regular mask");
  std::size_t mask_ny = 0, mask_nx = 0, mask_stride = 0;
  std::optional<double> mask_ratio;
  std::uint64_t mask_seed = default_seed;
  std::string mask_like, mask_out;
  mask_make->add_option("--ny", mask_ny, "Scan points along y");
  mask_make->add_option("--nx", mask_nx, "Scan points along x");
  mask_make->add_option("--like", mask_like, "Take ny and nx from this .trnv");
  auto* ratio_opt = mask_make->add_option("--ratio", mask_ratio, "Masked fraction in [0, 1)");
  auto* stride_opt = mask_make->add_option("--stride", mask_stride, "Keep every stride-th point in x and y");
  ratio_opt->excludes(stride_opt);
  mask_make->add_option("--seed", mask_seed, "Mask seed");
  mask_make->add_option("-o,--out", mask_out, "Output .spmk")->required();
  mask_make->callback([&] {
    action = [&] {
      if (!mask_like.empty()) {
        const auto v = io::read_transient(mask_like);
        mask_ny = v.ny();
        mask_nx = v.nx();
      }
      if (mask_ny == 0 || mask_nx == 0) throw UsageError("mask make: give --ny and --nx, or --like");
      if (!mask_ratio && mask_stride == 0) throw UsageError("mask make: give --ratio or --stride");
      const auto m = mask_ratio ? make_random_mask(mask_ny, mask_nx, *mask_ratio, mask_seed)
                                : make_regular_mask(mask_ny, mask_nx, mask_stride);
      io::write_mask(mask_out, m);
    };
  });
  auto* mask_apply = mask->add_subcommand("apply", "Blank or fill the masked scan points");
  std::string apply_in, apply_mask, apply_out;
  FillMode fill = FillMode::Zero;
  const std::map<std::string, FillMode> fill_names{{"zero", FillMode::Zero}, {"nearest", FillMode::Nearest}};
  mask_apply->add_option("--in", apply_in, "Input .trnv")->required();
  mask_apply->add_option("--mask", apply_mask, "Mask .spmk")->required();
  mask_apply->add_option("--fill", fill, "zero or nearest")->transform(CLI::CheckedTransformer(fill_names));
  mask_apply->add_option("-o,--out", apply_out, "Output .trnv")->required();
  mask_apply->callback([&] {
    action = [&] {
      io::write_transient(apply_out, fill_masked(io::read_transient(apply_in), io::read_mask(apply_mask), fill));
    };
  });

  // dataset gen
  auto* dataset = app.add_subcommand("dataset", "Procedural datasets");
  dataset->require_subcommand(1);
  auto* gen = dataset->add_subcommand("gen", "Render every scene in a spec file and write a manifest");
  std::string gen_specs, gen_out;
  std::uint64_t gen_seed = default_seed;
  GeometryFlags gen_geo;
  gen->add_option("--specs", gen_specs, "Spec file with [[scene]] tables")->required();
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--seed", gen_seed, "Seed for scenes that do not set one");
  gen_geo.add(gen);
  gen->callback([&] {
    action = [&] {
      const auto spec = nlosforge::read_spec_file(gen_specs);
      const auto specs = nlosforge::scene_specs(spec, gen_seed);
      const auto report = generate_dataset(specs, gen_geo.resolve(&spec), gen_out, render_options(spec));
      std::cout << "rendered " << report.rendered << ", skipped " << report.skipped << ", failed "
                << report.failures.size() << "\n";
      for (const auto& f : report.failures) std::cerr << "failed: " << f << "\n";
      if (!report.failures.empty()) throw ValidationError(std::to_string(report.failures.size()) + " scenes failed");
    };
  });

  // train
  auto* train = app.add_subcommand("train", "Pretrain the masked autoencoder on a manifest");
  std::string train_manifest, train_config = "tiny", train_out, train_log;
  mae::TrainOptions topts;
  topts.seed = default_seed;
  std::optional<double> train_lr, train_warmup, train_wd;
  train->add_option("--manifest", train_manifest, "Dataset manifest.csv")->required();
  train->add_option("--config", train_config, "tiny, full or gradcheck")->capture_default_str();
  train->add_option("--epochs", topts.epochs, "Epochs")->capture_default_str();
  train->add_option("--batch", topts.batch_size, "Batch size")->capture_default_str();
  train->add_option("--seed", topts.seed, "Initialization and shuffling seed");
  train->add_option("--ratio", topts.mask_ratio, "Masking ratio (default from config)");
  train->add_option("--lr", train_lr, "Base learning rate");
  train->add_option("--warmup", train_warmup, "Warm-up epochs");
  train->add_option("--weight-decay", train_wd, "AdamW weight decay");
  train->add_option("-o,--out", train_out, "Output checkpoint .mrmt")->required();
  train->add_option("--log", train_log, "Per-epoch loss CSV");
  train->callback([&] {
    action = [&] {
      if (train_lr) topts.optimizer.base_lr = *train_lr;
      if (train_warmup) topts.optimizer.warmup_epochs = *train_warmup;
      if (train_wd) topts.optimizer.weight_decay = *train_wd;
      const auto rows = read_manifest(train_manifest);
      if (rows.empty()) throw ValidationError("train: manifest is empty");
      const auto samples = load_manifest_volumes(train_manifest, rows);
      auto config = config_preset(train_config);
      config.ny = samples.front().ny();
      config.nx = samples.front().nx();
      config.n_bins = samples.front().n_bins();
      auto model = mae::Model<float>::init(config, topts.seed);
      std::ostringstream log;
      log.precision(10);
      log << "epoch,loss,lr\n";
      const auto history = mae::train(model, samples, topts);
      for (const auto& e : history) log << e.epoch << ',' << e.mean_loss << ',' << e.lr << '\n';
      io::write_checkpoint(train_out, mae::to_checkpoint(model));
      if (!train_log.empty()) io::write_text(train_log, log.str());
      if (!history.empty())
        std::cout << "loss " << history.front().mean_loss << " -> " << history.back().mean_loss << "\n";
    };
  });

  // complete
  auto* complete = app.add_subcommand("complete", "Predict masked histograms with a trained model");
  std::string comp_in, comp_mask, comp_ckpt, comp_out;
  complete->add_option("--in", comp_in, "Input .trnv")->required();
  complete->add_option("--mask", comp_mask, "Mask .spmk")->required();
  complete->add_option("--ckpt", comp_ckpt, "Checkpoint .mrmt")->required();
  complete->add_option("-o,--out", comp_out, "Output .trnv")->required();
  complete->callback([&] {
    action = [&] {
      const auto model = mae::from_checkpoint<float>(io::read_checkpoint(comp_ckpt));
      const auto r = mae::forward(model, io::read_transient(comp_in), io::read_mask(comp_mask));
      io::write_transient(comp_out, r.completed);
    };
  });

  // reconstruct
  auto* recon = app.add_subcommand("reconstruct", "Reconstruct a hidden volume");
  std::string rec_in, rec_out, rec_pgm, rec_depth;
  ReconOptions ropts;
  const std::map<std::string, ReconMethod> methods{
      {"bp", ReconMethod::Backprojection}, {"lct", ReconMethod::LightCone}, {"fk", ReconMethod::FkMigration}};
  recon->add_option("--in", rec_in, "Input .trnv")->required();
  recon->add_option("--method", ropts.method, "bp, lct or fk")->transform(CLI::CheckedTransformer(methods))->required();
  recon->add_option("--out", rec_out, "Output directory for volume.rcnv");
  recon->add_option("--export-pgm", rec_pgm, "Normalized max projection along depth");
  recon->add_option("--export-depth", rec_depth, "Depth of the per-pixel maximum, scaled by the maximum range");
  recon->add_option("--snr", ropts.lct_snr, "LCT Wiener signal-to-noise ratio")->capture_default_str();
  recon->add_option("--nz", ropts.nz, "Backprojection depth samples");
  recon->add_option("--z-min", ropts.z_min, "Backprojection grid start (m)");
  recon->add_option("--z-max", ropts.z_max, "Backprojection grid end (m)");
  recon->add_flag("--laplacian", ropts.laplacian_filter, "Backprojection depth Laplacian filter");
  recon->add_flag("!--no-attenuation", ropts.attenuation_compensation, "Disable r^4 compensation in backprojection");
  recon->callback([&] {
    action = [&] {
      if (rec_out.empty() && rec_pgm.empty() && rec_depth.empty())
        throw UsageError("reconstruct: give at least one of --out, --export-pgm, --export-depth");
      const auto v = io::read_transient(rec_in);
      const auto r = reconstruct(v, ropts);
      if (!rec_out.empty()) {
        std::error_code ec;
        fs::create_directories(rec_out, ec);
        if (ec) throw IoError("cannot create " + rec_out + ": " + ec.message());
        io::write_recon(fs::path(rec_out) / "volume.rcnv", r);
      }
      if (!rec_pgm.empty()) io::export_pgm(rec_pgm, normalize_image(max_projection(r)));
      if (!rec_depth.empty())
        io::export_pgm(rec_depth, normalize_image(depth_from_argmax(r), v.geometry().max_range()));
    };
  });

  // eval / eval image
  auto* eval = app.add_subcommand("eval", "Compare transient volumes or images");
  std::string ev_ref, ev_cand, ev_out, ev_mask;
  double ev_range = 1.0;
  bool ev_wide = false;
  eval->add_option("--ref", ev_ref, "Reference .trnv");
  eval->add_option("--cand", ev_cand, "Candidate .trnv");
  eval->add_option("--mask", ev_mask, "Only score the masked points of this .spmk");
  eval->add_option("--data-range", ev_range, "Dynamic range for PSNR and SSIM")->capture_default_str();
  eval->add_option("-o,--out", ev_out, "Metrics CSV (stdout when omitted)");
  eval->add_flag("--wide", ev_wide, "One header row instead of metric,value rows");
  auto* ev_image = eval->add_subcommand("image", "Compare two PGM images");
  std::string im_ref, im_cand, im_out;
  ev_image->add_option("--ref", im_ref, "Reference .pgm")->required();
  ev_image->add_option("--cand", im_cand, "Candidate .pgm")->required();
  ev_image->add_option("-o,--out", im_out, "Metrics CSV (stdout when omitted)");
  eval->callback([&] {
    if (ev_image->parsed()) {
      action = [&] {
        const auto a = io::read_pgm(im_ref), b = io::read_pgm(im_cand);
        const auto r = evaluate(a.view(), b.view(), 1.0);
        write_output_text(im_out, ev_wide ? to_csv_wide(r) : to_csv_long(r));
      };
      return;
    }
    action = [&] {
      if (ev_ref.empty() || ev_cand.empty()) throw UsageError("eval: --ref and --cand are required");
      const auto a = io::read_transient(ev_ref), b = io::read_transient(ev_cand);
      MetricReport r;
      if (ev_mask.empty()) {
        r = evaluate(a, b, ev_range);
      } else {
        const auto m = io::read_mask(ev_mask);
        check_mask_matches(a, m);
        r = evaluate_subset(a, b, m.masked_indices(), ev_range);
      }
      write_output_text(ev_out, ev_wide ? to_csv_wide(r) : to_csv_long(r));
    };
  });

  // classify train / predict
  auto* classify = app.add_subcommand("classify", "Frozen-encoder classification head");
  classify->require_subcommand(1);
  auto* cl_train = classify->add_subcommand("train", "Fit a linear head on top of a pretrained encoder");
  std::string cl_manifest, cl_ckpt, cl_out;
  mae::FinetuneOptions fopts;
  fopts.seed = default_seed;
  double cl_ratio = 0.0;
  std::uint64_t cl_mask_seed = 0;
  cl_train->add_option("--manifest", cl_manifest, "Labeled manifest.csv")->required();
  cl_train->add_option("--ckpt", cl_ckpt, "Pretrained checkpoint")->required();
  cl_train->add_option("-o,--out", cl_out, "Output checkpoint with head")->required();
  cl_train->add_option("--epochs", fopts.epochs, "Head epochs")->capture_default_str();
  cl_train->add_option("--lr", fopts.lr, "Head learning rate")->capture_default_str();
  cl_train->add_option("--seed", fopts.seed, "Head seed");
  cl_train->add_option("--ratio", cl_ratio, "Masking ratio seen by the encoder")->capture_default_str();
  cl_train->add_option("--mask-seed", cl_mask_seed, "Seed of the encoder mask")->capture_default_str();
  cl_train->callback([&] {
    action = [&] {
      auto model = mae::from_checkpoint<float>(io::read_checkpoint(cl_ckpt));
      const auto rows = read_manifest(cl_manifest);
      if (rows.empty()) throw ValidationError("classify: manifest is empty");
      const auto labels = manifest_labels(rows);
      const auto vols = load_manifest_volumes(cl_manifest, rows);
      const std::size_t n_classes = *std::max_element(labels.begin(), labels.end()) + 1;
      mae::init_classifier(model, n_classes, fopts.seed);
      const auto mask = make_random_mask(model.config.ny, model.config.nx, cl_ratio, cl_mask_seed);
      const auto log = mae::finetune_head(model, vols, labels, mask, fopts);
      io::write_checkpoint(cl_out, mae::to_checkpoint(model));
      std::cout << "classes " << n_classes << ", train accuracy " << log.train_accuracy << "\n";
    };
  });
  auto* cl_pred = classify->add_subcommand("predict", "Predict classes with a head checkpoint");
  std::string pr_ckpt, pr_in, pr_manifest, pr_out;
  double pr_ratio = 0.0;
  std::uint64_t pr_mask_seed = 0;
  cl_pred->add_option("--ckpt", pr_ckpt, "Checkpoint with a classification head")->required();
  auto* pr_in_opt = cl_pred->add_option("--in", pr_in, "Single .trnv");
  cl_pred->add_option("--manifest", pr_manifest, "Manifest of volumes")->excludes(pr_in_opt);
  cl_pred->add_option("-o,--out", pr_out, "Predictions CSV (stdout when omitted)");
  cl_pred->add_option("--ratio", pr_ratio, "Masking ratio seen by the encoder")->capture_default_str();
  cl_pred->add_option("--mask-seed", pr_mask_seed, "Seed of the encoder mask")->capture_default_str();
  cl_pred->callback([&] {
    action = [&] {
      if (pr_in.empty() == pr_manifest.empty()) throw UsageError("classify predict: give --in or --manifest");
      const auto model = mae::from_checkpoint<float>(io::read_checkpoint(pr_ckpt));
      const auto mask = make_random_mask(model.config.ny, model.config.nx, pr_ratio, pr_mask_seed);
      std::vector<ManifestRow> rows;
      std::vector<TransientVolume> vols;
      if (!pr_in.empty()) {
        rows.push_back({fs::path(pr_in).filename().string(), 0, "", ""});
        vols.push_back(io::read_transient(pr_in));
      } else {
        rows = read_manifest(pr_manifest);
        vols = load_manifest_volumes(pr_manifest, rows);
      }
      std::ostringstream out;
      out << "file,predicted,label\n";
      std::size_t labeled = 0, correct = 0;
      for (std::size_t i = 0; i < vols.size(); ++i) {
        const auto logits = mae::classify(model, vols[i], mask);
        const auto pred = static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
        out << rows[i].file << ',' << pred << ',' << rows[i].label << '\n';
        if (!rows[i].label.empty()) {
          ++labeled;
          if (rows[i].label == std::to_string(pred)) ++correct;
        }
      }
      write_output_text(pr_out, out.str());
      if (labeled > 0 && !pr_out.empty())
        std::cout << "accuracy " << static_cast<double>(correct) / static_cast<double>(labeled) << "\n";
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (threads > 0) omp_set_num_threads(threads);
  if (action) action();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
