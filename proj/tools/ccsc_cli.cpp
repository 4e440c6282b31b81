// ccsc: command-line front end for training, denoising, simulation and
// evaluation. Exit codes: 0 success, 1 I/O failure, 2 invalid arguments or
// data.

#include <png.h>

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ccsc/ccsc.hpp"
#include "ccsc/io.hpp"
#include "ccsc/render.hpp"

namespace fs = std::filesystem;
using namespace ccsc;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitInvalid = 2;

std::vector<std::uint8_t> encode_png(const Rgb8Image& img) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) throw IoError("png: cannot create writer");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png: cannot create info struct");
  }
  std::vector<std::uint8_t> out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png: encoding failed");
  }
  png_set_write_fn(
      png, &out,
      [](png_structp p, png_bytep data, png_size_t n) {
        auto* buf = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
        buf->insert(buf->end(), data, data + n);
      },
      nullptr);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.cols), static_cast<png_uint_32>(img.rows), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t r = 0; r < img.rows; ++r) {
    png_write_row(png, const_cast<png_bytep>(img.pixels.data() + 3 * img.cols * r));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void write_png(const fs::path& path, const ComplexImage& img) {
  io::write_file_atomic(path, encode_png(render_phase(img)));
}

std::string format_trace(const AdmmTrace& trace) {
  std::ostringstream out;
  out << "# iteration objective primal_residual dual_residual\n" << std::setprecision(17);
  for (const auto& r : trace.records) {
    out << r.iteration << ' ' << r.objective << ' ' << r.primal_residual << ' ' << r.dual_residual << '\n';
  }
  return out.str();
}

std::vector<fs::path> list_rasters(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a readable directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".cimg") files.push_back(entry.path());
  }
  if (ec) throw IoError("cannot list " + dir.string());
  std::sort(files.begin(), files.end());
  return files;
}

FilterBank load_dictionary(const fs::path& path) {
  io::DictionaryFile file = io::read_dictionary(path);
  for (const auto& w : file.warnings) std::cerr << "warning: " << w << '\n';
  return std::move(file.bank);
}

struct TrainArgs {
  std::string input;
  std::string out;
  std::string trace;
  TrainConfig config;
};

int run_train(const TrainArgs& a) {
  TrainingBatch batch;
  for (const auto& f : list_rasters(a.input)) batch.images.push_back(io::read_raster(f));
  if (batch.images.empty()) throw ConfigError("no .cimg rasters in " + a.input);
  for (std::size_t k = 1; k < batch.size(); ++k) {
    if (!batch.images[k].same_shape(batch.images[0])) {
      throw DimensionError("training rasters have mixed dimensions: " +
                           shape_string(batch.images[0].rows(), batch.images[0].cols()) + " vs " +
                           shape_string(batch.images[k].rows(), batch.images[k].cols()));
    }
  }
  const TrainResult r = ccdl_train(batch, a.config);
  io::write_dictionary(a.out, r.bank);
  const std::string trace_path = a.trace.empty() ? a.out + ".trace.txt" : a.trace;
  io::write_text_atomic(trace_path, format_trace(r.trace));
  if (r.degenerate_projection) std::cerr << "warning: a filter collapsed and was reset to an impulse\n";
  std::cout << "trained " << r.bank.num_filters() << " filters of size " << r.bank.filter_size()
            << " on " << batch.size() << " images; objective " << r.trace.records.front().objective
            << " -> " << r.trace.records.back().objective << '\n';
  return 0;
}

struct DenoiseArgs {
  std::string input;
  std::string dict;
  std::string out;
  std::string png;
  std::string trace;
  double lambda = 2.5;
  double mu = 5.0;
  double rho = 0.0;  ///< 0: derive from lambda
  double tol = 1e-3;
  int iters = 200;
};

SolverConfig solver_config(double lambda, double mu, double rho, double tol, int iters) {
  SolverConfig c;
  c.lambda = lambda;
  c.mu = mu;
  c.rho = rho > 0.0 ? rho : SolverConfig::default_rho(lambda);
  c.tol = tol;
  c.max_iters = iters;
  return c;
}

int run_denoise(const DenoiseArgs& a) {
  const ComplexImage image = io::read_raster(a.input);
  const FilterBank bank = load_dictionary(a.dict);
  const SolverConfig c = solver_config(a.lambda, a.mu, a.rho, a.tol, a.iters);
  const EncodeResult r = encode(image, bank, c);
  const ComplexImage restored = convolve_sum(bank, r.coefficients);
  io::write_raster(a.out, restored);
  if (!a.png.empty()) write_png(a.png, restored);
  if (!a.trace.empty()) io::write_text_atomic(a.trace, format_trace(r.trace));
  std::cout << (a.mu == 0.0 ? "comcsc" : "comcsc-gr") << ": " << r.trace.iterations() << " iterations, "
            << (r.trace.converged ? "converged" : "stopped at iteration cap") << '\n';
  return 0;
}

struct SimulateArgs {
  std::string pattern = "step";
  std::size_t rows = 256;
  std::size_t cols = 256;
  std::vector<double> coherence{0.3};
  std::uint64_t seed = 0;
  std::uint64_t noise_seed = 0;
  std::string truth;
  std::string noisy;
  std::string coherence_out;
};

int run_simulate(const SimulateArgs& a) {
  PatternSpec spec;
  spec.kind = parse_pattern_kind(a.pattern);
  spec.rows = a.rows;
  spec.cols = a.cols;
  spec.seed = a.seed;
  spec.coherence = {a.coherence.front(), a.coherence.back()};
  const SyntheticScene scene = make_pattern(spec);
  io::write_raster(a.truth, scene.clean());
  io::write_raster(a.noisy, simulate_interferogram(scene, a.noise_seed));
  if (!a.coherence_out.empty()) io::write_real_raster(a.coherence_out, scene.coherence);
  return 0;
}

struct TrainingSetArgs {
  std::string out_dir;
  std::size_t count = 8;
  std::size_t size = 64;
  std::uint64_t seed = 1;
};

int run_training_set(const TrainingSetArgs& a) {
  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) throw IoError("cannot create " + a.out_dir);
  const auto images = make_training_set(a.size, a.size, a.count, a.seed);
  for (std::size_t k = 0; k < images.size(); ++k) {
    std::ostringstream name;
    name << "train_" << std::setw(3) << std::setfill('0') << k << ".cimg";
    io::write_raster(fs::path(a.out_dir) / name.str(), images[k]);
  }
  return 0;
}

struct MetricsArgs {
  std::string truth;
  std::string estimate;
  std::string residual_out;
  std::string colinearity_out;
  std::string histogram_out;
  std::size_t window = 7;
  std::size_t bins = 50;
};

int run_metrics(const MetricsArgs& a) {
  const ComplexImage truth = io::read_raster(a.truth);
  const ComplexImage estimate = io::read_raster(a.estimate);
  const MetricReport report = evaluate(truth, estimate, a.window, a.bins);
  std::cout << "PSNR: ";
  if (std::isinf(report.psnr_db)) {
    std::cout << "inf";
  } else {
    std::cout << std::fixed << std::setprecision(2) << report.psnr_db;
  }
  std::cout << " dB\n";
  if (!a.residual_out.empty()) io::write_real_raster(a.residual_out, report.residual_phase);
  if (!a.colinearity_out.empty()) io::write_real_raster(a.colinearity_out, report.colinearity);
  if (!a.histogram_out.empty()) {
    std::ostringstream csv;
    csv << "bin_low,bin_high,density\n" << std::setprecision(17);
    const auto& h = report.colinearity_histogram;
    for (std::size_t b = 0; b < h.density.size(); ++b) {
      csv << static_cast<double>(b) * h.bin_width << ',' << static_cast<double>(b + 1) * h.bin_width << ','
          << h.density[b] << '\n';
    }
    io::write_text_atomic(a.histogram_out, csv.str());
  }
  return 0;
}

struct McArgs {
  std::string out;
  std::string dict;
  std::vector<std::string> methods{"identity", "boxcar"};
  StepExperimentConfig config;
  std::size_t boxcar_window = 5;
  double lambda = 2.5;
  double mu = 5.0;
  double rho = 0.0;
  double tol = 1e-3;
  int iters = 200;
};

int run_mc_step(const McArgs& a) {
  std::vector<NamedFilter> methods;
  FilterBank bank;
  const bool needs_dict = std::any_of(a.methods.begin(), a.methods.end(), [](const std::string& m) {
    return m == "comcsc" || m == "comcsc-gr";
  });
  if (needs_dict) {
    if (a.dict.empty()) throw ConfigError("methods comcsc/comcsc-gr need --dict");
    bank = load_dictionary(a.dict);
    if (bank.filter_size() > a.config.rows || bank.filter_size() > a.config.length) {
      throw DimensionError("filter size exceeds the step scene");
    }
  }
  for (const auto& name : a.methods) {
    if (name == "identity") {
      methods.push_back({name, [](const ComplexImage& s) { return s; }});
    } else if (name == "boxcar") {
      const std::size_t w = a.boxcar_window;
      methods.push_back({name, [w](const ComplexImage& s) { return boxcar_filter(s, w); }});
    } else if (name == "comcsc" || name == "comcsc-gr") {
      const SolverConfig c = solver_config(a.lambda, name == "comcsc" ? 0.0 : a.mu, a.rho, a.tol, a.iters);
      methods.push_back({name, [c, &bank](const ComplexImage& s) { return denoise(s, bank, c); }});
    } else {
      throw ConfigError("unknown method '" + name + "'");
    }
  }
  const auto profiles = mc_step_experiment(a.config, methods);
  std::ostringstream csv;
  csv << "column";
  for (const auto& p : profiles) csv << ',' << p.name << "_mean," << p.name << "_std";
  csv << '\n' << std::setprecision(17);
  for (std::size_t c = 0; c < a.config.length; ++c) {
    csv << c;
    for (const auto& p : profiles) csv << ',' << p.mean[c] << ',' << p.std[c];
    csv << '\n';
  }
  io::write_text_atomic(a.out, csv.str());
  return 0;
}

struct ConvertArgs {
  std::string input;
  std::string output;
};

int run_convert(const ConvertArgs& a) {
  const auto in_ext = fs::path(a.input).extension();
  const auto out_ext = fs::path(a.output).extension();
  if (in_ext == ".cimg" && out_ext == ".csv") {
    io::write_text_atomic(a.output, io::raster_to_csv(io::read_raster(a.input)));
  } else if (in_ext == ".csv" && out_ext == ".cimg") {
    const auto bytes = io::read_file(a.input);
    io::write_raster(a.output, io::raster_from_csv(std::string(bytes.begin(), bytes.end())));
  } else {
    throw ConfigError("convert needs one .cimg and one .csv path");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Complex convolutional sparse coding for interferometric phase restoration"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "learn a dictionary from a directory of .cimg rasters");
  t->add_option("--input", train.input, "directory of training rasters")->required();
  t->add_option("--out", train.out, "output dictionary (.cdic)")->required();
  t->add_option("--trace", train.trace, "objective trace file (default: <out>.trace.txt)");
  t->add_option("--filters", train.config.num_filters, "number of filters M")->capture_default_str();
  t->add_option("--filter-size", train.config.filter_size, "filter side L")->capture_default_str();
  t->add_option("--lambda", train.config.lambda, "l1 weight")->capture_default_str();
  t->add_option("--rho", train.config.rho, "coding ADMM penalty")->capture_default_str();
  t->add_option("--sigma", train.config.sigma, "dictionary ADMM penalty")->capture_default_str();
  t->add_option("--iters", train.config.outer_iters, "outer iterations")->capture_default_str();
  t->add_option("--seed", train.config.seed, "initialization seed")->capture_default_str();
  t->add_option("--threads", train.config.threads, "worker threads")->capture_default_str();

  DenoiseArgs den;
  auto* d = app.add_subcommand("denoise", "restore a noisy interferogram");
  d->add_option("--input", den.input, "noisy raster (.cimg)")->required();
  d->add_option("--dict", den.dict, "dictionary (.cdic)")->required();
  d->add_option("--out", den.out, "restored raster (.cimg)")->required();
  d->add_option("--png", den.png, "also write an HSV phase render");
  d->add_option("--trace", den.trace, "per-iteration ADMM trace file");
  d->add_option("--lambda", den.lambda, "l1 weight")->capture_default_str();
  d->add_option("--mu", den.mu, "gradient weight, 0 for plain ComCSC")->capture_default_str();
  d->add_option("--rho", den.rho, "ADMM penalty (default 10 * lambda)");
  d->add_option("--tol", den.tol, "relative residual tolerance")->capture_default_str();
  d->add_option("--iters", den.iters, "iteration cap")->capture_default_str();

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "write a synthetic truth/noisy interferogram pair");
  s->add_option("--pattern", sim.pattern, "step, ramp, peaks, shear_plane, squares, mountain_like")
      ->capture_default_str();
  s->add_option("--rows", sim.rows)->capture_default_str();
  s->add_option("--cols", sim.cols)->capture_default_str();
  s->add_option("--coherence", sim.coherence, "constant value, or leftmost and rightmost values")
      ->expected(1, 2)
      ->capture_default_str();
  s->add_option("--seed", sim.seed, "pattern seed")->capture_default_str();
  s->add_option("--noise-seed", sim.noise_seed, "speckle seed")->capture_default_str();
  s->add_option("--truth", sim.truth, "clean raster (.cimg)")->required();
  s->add_option("--noisy", sim.noisy, "noisy raster (.cimg)")->required();
  s->add_option("--coherence-out", sim.coherence_out, "coherence map raster (.cimg)");

  TrainingSetArgs ts;
  auto* tset = app.add_subcommand("training-set", "write clean synthetic training rasters");
  tset->add_option("--out-dir", ts.out_dir)->required();
  tset->add_option("--count", ts.count)->capture_default_str();
  tset->add_option("--size", ts.size)->capture_default_str();
  tset->add_option("--seed", ts.seed)->capture_default_str();

  MetricsArgs met;
  auto* m = app.add_subcommand("metrics", "PSNR and colinearity of an estimate");
  m->add_option("--truth", met.truth)->required();
  m->add_option("--estimate", met.estimate)->required();
  m->add_option("--residual", met.residual_out, "residual phase raster (.cimg)");
  m->add_option("--colinearity", met.colinearity_out, "colinearity raster (.cimg)");
  m->add_option("--histogram", met.histogram_out, "colinearity density (.csv)");
  m->add_option("--window", met.window)->capture_default_str();
  m->add_option("--bins", met.bins)->capture_default_str();

  McArgs mc;
  auto* mcs = app.add_subcommand("mc-step", "Monte-Carlo step-function profiles");
  mcs->add_option("--out", mc.out, "profile CSV")->required();
  mcs->add_option("--methods", mc.methods, "identity, boxcar, comcsc, comcsc-gr")->delimiter(',');
  mcs->add_option("--dict", mc.dict, "dictionary for comcsc methods");
  mcs->add_option("--trials", mc.config.trials)->capture_default_str();
  mcs->add_option("--coherence", mc.config.coherence)->capture_default_str();
  mcs->add_option("--rows", mc.config.rows)->capture_default_str();
  mcs->add_option("--length", mc.config.length)->capture_default_str();
  mcs->add_option("--seed", mc.config.seed)->capture_default_str();
  mcs->add_option("--threads", mc.config.threads)->capture_default_str();
  mcs->add_option("--window", mc.boxcar_window, "boxcar window")->capture_default_str();
  mcs->add_option("--lambda", mc.lambda)->capture_default_str();
  mcs->add_option("--mu", mc.mu)->capture_default_str();
  mcs->add_option("--rho", mc.rho, "ADMM penalty (default 10 * lambda)");
  mcs->add_option("--tol", mc.tol)->capture_default_str();
  mcs->add_option("--iters", mc.iters)->capture_default_str();

  ConvertArgs conv;
  auto* c = app.add_subcommand("convert", "convert between .cimg and .csv");
  c->add_option("--input", conv.input)->required();
  c->add_option("--output", conv.output)->required();

  std::string render_in, render_out;
  auto* r = app.add_subcommand("render", "HSV phase render of a raster");
  r->add_option("--input", render_in)->required();
  r->add_option("--out", render_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (t->parsed()) return run_train(train);
    if (d->parsed()) return run_denoise(den);
    if (s->parsed()) return run_simulate(sim);
    if (tset->parsed()) return run_training_set(ts);
    if (m->parsed()) return run_metrics(met);
    if (mcs->parsed()) return run_mc_step(mc);
    if (c->parsed()) return run_convert(conv);
    if (r->parsed()) {
      write_png(render_out, io::read_raster(render_in));
      return 0;
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}
