// Command-line front end: dictionary learning, matching, evaluation, label
// transfer, and synthetic pair generation.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ufl/dictionary.hpp"
#include "ufl/encode.hpp"
#include "ufl/eval.hpp"
#include "ufl/flow_io.hpp"
#include "ufl/manifest.hpp"
#include "ufl/matching.hpp"
#include "ufl/synth.hpp"
#include "ufl/util.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::string dict_path;
  ufl::EncoderConfig encoder;
  ufl::MatchParams params;
  std::string scheme = "kt";
};

void add_match_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--dict", f.dict_path, "dictionary file")->required();
  cmd->add_option("--alpha", f.params.alpha, "smoothness weight");
  cmd->add_option("--gamma", f.params.gamma, "smoothness truncation (grid steps)");
  cmd->add_option("--lambda", f.params.lambda, "data truncation (default: estimated)");
  cmd->add_option("--levels", f.params.levels, "pyramid levels");
  cmd->add_option("--bp-iters", f.params.bp_iters, "BP iterations");
  cmd->add_option("--stride", f.params.candidate_stride, "translation grid stride");
  cmd->add_flag("--pixel", f.params.pixel_layer, "run the per-pixel refinement");
  cmd->add_option("--pixel-radius", f.params.pixel_radius,
                  "pixel search radius (default: pool width)");
  cmd->add_option("--scheme", f.scheme, "encoding scheme: kt, sa, omp");
  cmd->add_option("--beta", f.encoder.beta, "SA smoothing factor");
  cmd->add_option("--sparsity", f.encoder.k, "OMP sparsity");
  cmd->add_option("--pixel-patch", f.encoder.pixel_patch_width, "pixel patch width");
  cmd->add_option("--pool", f.encoder.pool_width, "pooling width");
  cmd->add_option("--seed", f.params.seed, "random seed");
}

std::string pixel_flow_path(const std::string& patch_path) {
  const fs::path p(patch_path);
  fs::path out = p.parent_path() / p.stem();
  out += ".pixel";
  out += p.extension().empty() ? fs::path(".uflf") : p.extension();
  return out.string();
}

std::vector<std::string> list_images(const std::string& dir) {
  static const std::set<std::string> kExts = {".png", ".pgm", ".ppm"};
  std::vector<std::string> files;
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir);
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (kExts.count(ext) != 0) files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no images (.png/.pgm/.ppm) in " + dir);
  return files;
}

int cmd_learn_dict(const std::string& image_dir, const std::string& out_path, int dict_size,
                   int patches, const std::string& method, int iters, int sparsity,
                   int patch_width, double epsilon, std::uint64_t seed) {
  const std::vector<std::string> files = list_images(image_dir);
  std::vector<ufl::Image> images;
  images.reserve(files.size());
  for (const std::string& f : files) images.push_back(ufl::load_image(f));

  if (patches < dict_size) {
    throw std::runtime_error("need at least as many patches as codewords");
  }
  ufl::PatchBatch batch = ufl::extract_random_patches(images, patch_width, patches, seed);
  ufl::normalize_patches(batch);
  const ufl::WhiteningTransform whitening = ufl::fit_whitening(batch, epsilon);
  ufl::apply_whitening(whitening, batch);

  ufl::LearnStats stats;
  const ufl::Dictionary dict =
      ufl::learn_dictionary(batch, whitening, ufl::parse_dict_method(method), dict_size, iters,
                            sparsity, seed, &stats);
  ufl::save_dictionary(dict, out_path);

  std::cout << "patches=" << batch.count << "\n";
  std::cout << "objective="
            << (stats.objective.empty() ? "0" : ufl::format_g17(stats.objective.back())) << "\n";
  std::cout << "dictionary=" << out_path << "\n";
  return 0;
}

int cmd_match(const std::string& test_path, const std::string& exemplar_path, CommonFlags& f,
              const std::string& out_path, const std::string& report_path) {
  f.encoder.scheme = ufl::parse_encode_scheme(f.scheme);
  const ufl::Dictionary dict = ufl::load_dictionary(f.dict_path);
  const ufl::Image test = ufl::load_image(test_path);
  const ufl::Image exemplar = ufl::load_image(exemplar_path);

  const ufl::MatchResult res = ufl::match(test, exemplar, dict, f.encoder, f.params);
  ufl::save_flow(res.patch_flow, out_path);
  std::string pixel_path;
  if (res.pixel_flow) {
    pixel_path = pixel_flow_path(out_path);
    ufl::save_flow(*res.pixel_flow, pixel_path);
  }

  std::ostringstream report;
  report << "energy=" << ufl::format_g17(res.grid_energy) << "\n"
         << "energy_zero=" << ufl::format_g17(res.grid_energy_zero) << "\n"
         << "energy_argmin=" << ufl::format_g17(res.grid_energy_argmin) << "\n"
         << "lambda_patch=" << ufl::format_g17(res.lambda_patch) << "\n"
         << "lambda_pixel=" << ufl::format_g17(res.lambda_pixel) << "\n"
         << "ms_encode=" << ufl::format_g17(res.times.encode_ms) << "\n"
         << "ms_pool=" << ufl::format_g17(res.times.pool_ms) << "\n"
         << "ms_grid=" << ufl::format_g17(res.times.grid_ms) << "\n"
         << "ms_patch=" << ufl::format_g17(res.times.patch_ms) << "\n"
         << "ms_pixel=" << ufl::format_g17(res.times.pixel_ms) << "\n"
         << "patch_flow=" << out_path << "\n";
  if (!pixel_path.empty()) report << "pixel_flow=" << pixel_path << "\n";

  std::cout << report.str();
  if (!report_path.empty()) ufl::write_file_atomic(report_path, report.str());
  return 0;
}

int cmd_eval(const std::string& manifest_path, CommonFlags& f, const std::string& out_path) {
  f.encoder.scheme = ufl::parse_encode_scheme(f.scheme);
  const ufl::Dictionary dict = ufl::load_dictionary(f.dict_path);
  const ufl::PairManifest manifest = ufl::load_manifest(manifest_path);

  std::string csv = "pair,lt_acc,iou,loc_err,ms_patch,ms_pixel\n";
  double sum_lt = 0.0;
  int lt_count = 0;
  for (const ufl::PairEntry& entry : manifest.pairs) {
    const ufl::Image test = ufl::load_image(entry.test);
    const ufl::Image exemplar = ufl::load_image(entry.exemplar);
    const ufl::MatchResult res = ufl::match(test, exemplar, dict, f.encoder, f.params);
    const ufl::FlowField pixel_flow =
        res.pixel_flow ? *res.pixel_flow
                       : ufl::upsample_patch_flow(res.patch_flow, f.encoder.pool_width,
                                                  test.width, test.height);

    std::string lt_text, iou_text, loc_text;
    if (!entry.test_labels.empty() && !entry.exemplar_labels.empty()) {
      const ufl::LabelMap truth = ufl::load_label_pgm(entry.test_labels);
      const ufl::LabelMap ex_labels = ufl::load_label_pgm(entry.exemplar_labels);
      const ufl::LabelMap output = ufl::transfer_labels(pixel_flow, ex_labels);
      const double lt = ufl::lt_acc({{&output, &truth}});
      lt_text = ufl::format_g17(lt);
      sum_lt += lt;
      ++lt_count;

      std::set<int> classes;
      for (const int v : truth.labels) {
        if (v > 0) classes.insert(v);
      }
      if (!classes.empty()) {
        double sum_iou = 0.0;
        for (const int c : classes) sum_iou += ufl::iou(output, truth, c);
        iou_text = ufl::format_g17(sum_iou / static_cast<double>(classes.size()));
      }
    }
    if (entry.box_test && entry.box_exemplar) {
      loc_text = ufl::format_g17(ufl::loc_err(pixel_flow, *entry.box_test, *entry.box_exemplar));
    }

    const double ms_patch = res.times.encode_ms + res.times.pool_ms + res.times.grid_ms +
                            res.times.patch_ms;
    csv += fs::path(entry.test).filename().string() + "," + lt_text + "," + iou_text + "," +
           loc_text + "," + ufl::format_g17(ms_patch) + "," +
           ufl::format_g17(res.times.pixel_ms) + "\n";
  }

  if (out_path.empty()) {
    std::cout << csv;
  } else {
    ufl::write_file_atomic(out_path, csv);
    std::cout << "pairs=" << manifest.pairs.size() << "\n";
    if (lt_count > 0) std::cout << "mean_lt_acc=" << ufl::format_g17(sum_lt / lt_count) << "\n";
    std::cout << "csv=" << out_path << "\n";
  }
  return 0;
}

int cmd_transfer(const std::string& flow_path, const std::string& labels_path,
                 const std::string& out_path, int pool_width) {
  ufl::FlowField flow = ufl::load_flow(flow_path);
  if (flow.granularity == ufl::FlowGranularity::patch) {
    flow = ufl::upsample_patch_flow(flow, pool_width, flow.width * pool_width,
                                    flow.height * pool_width);
  }
  const ufl::LabelMap ex_labels = ufl::load_label_pgm(labels_path);
  const ufl::LabelMap out = ufl::transfer_labels(flow, ex_labels);
  ufl::save_label_pgm(out, out_path);
  std::cout << "labels=" << out_path << "\n";
  return 0;
}

int cmd_synth(const std::string& kind, int width, int height, int du, int dv, std::uint64_t seed,
              const std::string& out_dir) {
  ufl::SynthPair pair;
  if (kind == "shift") {
    pair = ufl::synth_shift_pair(width, height, du, dv, seed);
  } else if (kind == "warp-free") {
    pair = ufl::synth_identity_pair(width, height, seed);
  } else if (kind == "noise") {
    pair = ufl::synth_noise_pair(width, height, seed);
  } else {
    throw std::runtime_error("unknown synth kind (want shift, warp-free, noise): " + kind);
  }

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  ufl::save_pgm(pair.test, (dir / "test.pgm").string());
  ufl::save_pgm(pair.exemplar, (dir / "exemplar.pgm").string());
  ufl::save_label_pgm(pair.test_labels, (dir / "test_labels.pgm").string());
  ufl::save_label_pgm(pair.exemplar_labels, (dir / "exemplar_labels.pgm").string());
  ufl::save_flow(pair.true_flow, (dir / "truth.uflf").string());

  ufl::PairManifest manifest;
  ufl::PairEntry entry;
  entry.test = "test.pgm";
  entry.exemplar = "exemplar.pgm";
  entry.test_labels = "test_labels.pgm";
  entry.exemplar_labels = "exemplar_labels.pgm";
  entry.box_test = pair.box_test;
  entry.box_exemplar = pair.box_exemplar;
  manifest.pairs.push_back(entry);
  ufl::save_manifest(manifest, (dir / "manifest.csv").string());

  std::cout << "dir=" << out_dir << "\n"
            << "du=" << pair.du << "\n"
            << "dv=" << pair.dv << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dense correspondence across scenes via unsupervised patch features"};
  app.require_subcommand(1);

  // learn-dict
  auto* learn = app.add_subcommand("learn-dict", "learn a codebook from an image directory");
  std::string image_dir, dict_out, method = "kmeans";
  int dict_size = 100, patches = 1000000, iters = 20, sparsity = 10, patch_width = 11;
  double epsilon = 0.1;
  std::uint64_t learn_seed = 0;
  learn->add_option("images", image_dir, "directory of training images")->required();
  learn->add_option("--out", dict_out, "output dictionary path")->required();
  learn->add_option("--dict-size", dict_size, "codewords M");
  learn->add_option("--patches", patches, "training patches N");
  learn->add_option("--method", method, "kmeans, ksvd, or random");
  learn->add_option("--iters", iters, "learning iterations");
  learn->add_option("--sparsity", sparsity, "K-SVD coding sparsity");
  learn->add_option("--pixel-patch", patch_width, "patch width in pixels");
  learn->add_option("--epsilon", epsilon, "whitening regularizer");
  learn->add_option("--seed", learn_seed, "random seed");

  // match
  auto* match_cmd = app.add_subcommand("match", "match a test image against an exemplar");
  std::string test_path, exemplar_path, flow_out = "flow.uflf", report_path;
  CommonFlags match_flags;
  match_cmd->add_option("test", test_path, "test image")->required();
  match_cmd->add_option("exemplar", exemplar_path, "exemplar image")->required();
  add_match_flags(match_cmd, match_flags);
  match_cmd->add_option("--out", flow_out, "patch flow output path");
  match_cmd->add_option("--report", report_path, "also write the key=value report here");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "run matching + label transfer over a manifest");
  std::string manifest_path, csv_out;
  CommonFlags eval_flags;
  eval_cmd->add_option("manifest", manifest_path, "CSV manifest of pairs")->required();
  add_match_flags(eval_cmd, eval_flags);
  eval_cmd->add_option("--out", csv_out, "write the CSV here instead of stdout");

  // transfer
  auto* transfer_cmd = app.add_subcommand("transfer", "transfer labels through a saved flow");
  std::string transfer_flow, transfer_labels, transfer_out = "transferred.pgm";
  int transfer_pool = 7;
  transfer_cmd->add_option("--flow", transfer_flow, "flow file")->required();
  transfer_cmd->add_option("--labels", transfer_labels, "exemplar label PGM")->required();
  transfer_cmd->add_option("--out", transfer_out, "output label PGM");
  transfer_cmd->add_option("--pool", transfer_pool, "pool width for patch-flow upsampling");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a ground-truth pair");
  std::string synth_kind = "shift", synth_out;
  int synth_w = 64, synth_h = 64, synth_du = 3, synth_dv = 0;
  std::uint64_t synth_seed = 0;
  synth_cmd->add_option("--kind", synth_kind, "shift, warp-free, or noise");
  synth_cmd->add_option("--width", synth_w, "image width");
  synth_cmd->add_option("--height", synth_h, "image height");
  synth_cmd->add_option("--du", synth_du, "horizontal shift");
  synth_cmd->add_option("--dv", synth_dv, "vertical shift");
  synth_cmd->add_option("--seed", synth_seed, "random seed");
  synth_cmd->add_option("--out", synth_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (learn->parsed()) {
      return cmd_learn_dict(image_dir, dict_out, dict_size, patches, method, iters, sparsity,
                            patch_width, epsilon, learn_seed);
    }
    if (match_cmd->parsed()) {
      return cmd_match(test_path, exemplar_path, match_flags, flow_out, report_path);
    }
    if (eval_cmd->parsed()) return cmd_eval(manifest_path, eval_flags, csv_out);
    if (transfer_cmd->parsed()) {
      return cmd_transfer(transfer_flow, transfer_labels, transfer_out, transfer_pool);
    }
    if (synth_cmd->parsed()) {
      return cmd_synth(synth_kind, synth_w, synth_h, synth_du, synth_dv, synth_seed, synth_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
