#include "sparta/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sparta/dsl.hpp"
#include "sparta/error.hpp"
#include "sparta/exec.hpp"
#include "sparta/ingest.hpp"
#include "sparta/ir.hpp"
#include "sparta/kernels.hpp"
#include "sparta/reorder.hpp"

namespace sparta::cli {

namespace fs = std::filesystem;

namespace {

std::size_t env_threads() {
  const char* v = std::getenv("SPARTA_THREADS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) throw SemanticError("SPARTA_THREADS must be a positive integer");
  return static_cast<std::size_t>(n);
}

exec::ExecConfig exec_config(std::size_t threads) {
  exec::ExecConfig cfg;
  cfg.workers = threads;
  cfg.mode = threads > 1 ? exec::Mode::Parallel : exec::Mode::Sequential;
  return cfg;
}

/// Preset name, or an attribute list such as "D,CU" or "{D,CU}".
std::vector<FormatAttr> parse_format(const std::string& text, std::size_t rank) {
  if (is_preset_name(text)) return preset_attrs(text, rank);
  std::string body = text;
  if (!body.empty() && body.front() == '{') body.erase(0, 1);
  if (!body.empty() && body.back() == '}') body.pop_back();
  std::vector<FormatAttr> attrs;
  std::stringstream ss(body);
  for (std::string item; std::getline(ss, item, ',');) {
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }),
               item.end());
    attrs.push_back(parse_attr(item));
  }
  check_attr_chain(attrs, rank);
  return attrs;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename T>
std::string join(const std::vector<T>& v, const char* sep = ",") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    if constexpr (std::is_same_v<T, double>) {
      s += ingest::format_value(v[i]);
    } else {
      s += std::to_string(v[i]);
    }
  }
  return s;
}

// -- run --------------------------------------------------------------------

struct RunArgs {
  std::string program;
  std::size_t threads = 0;
  bool reorder = false;
  std::size_t iters = reorder::kDefaultMaxIters;
  bool dump_ir = false;
  bool dump_loops = false;
  std::string out_path;
};

int cmd_run(const RunArgs& a, std::ostream& out) {
  const ir::TaModule module = ir::lower_ast(dsl::parse(read_text(a.program)));
  if (a.dump_ir) out << ir::dump(module);
  if (a.dump_loops) {
    for (const auto& nest : exec::compile_module(module)) out << codegen::render(nest);
  }

  exec::ProgramOptions options;
  options.exec = exec_config(a.threads);
  options.reorder = a.reorder;
  options.reorder_iters = a.iters;
  options.base_dir = fs::path(a.program).parent_path();
  const auto results = exec::run_program(module, options);

  std::vector<std::string> outputs;
  for (const auto& op : module.ops) {
    if (const auto* tc = std::get_if<ir::TensorOp>(&op)) {
      const auto& name = tc->operands[ir::kOut];
      if (std::find(outputs.begin(), outputs.end(), name) == outputs.end()) outputs.push_back(name);
    }
  }
  if (a.out_path.empty()) {
    if (a.dump_ir || a.dump_loops) return 0;
    for (const auto& name : outputs) {
      const auto& t = results.at(name);
      out << name << ":\n";
      ingest::write_dense(t.vals(), t.shape(), out);
    }
    return 0;
  }
  if (outputs.size() == 1) {
    const auto& t = results.at(outputs.front());
    ingest::write_dense(t.vals(), t.shape(), a.out_path);
    return 0;
  }
  std::error_code ec;
  fs::create_directories(a.out_path, ec);
  if (ec) throw IoError("cannot create directory '" + a.out_path + "': " + ec.message());
  for (const auto& name : outputs) {
    const auto& t = results.at(name);
    ingest::write_dense(t.vals(), t.shape(), fs::path(a.out_path) / (name + ".txt"));
  }
  return 0;
}

// -- bench ------------------------------------------------------------------

struct BenchArgs {
  std::string kernel;
  std::string input;
  std::string format;
  std::size_t threads = 0;
  std::size_t repeats = 25;
  std::string csv;
  bool reorder = false;
  std::size_t iters = reorder::kDefaultMaxIters;
  std::size_t mode = 2;
  index_t inner = 32;
};

struct Timing {
  double mean = 0.0;
  double min = 0.0;
};

Timing time_kernel(const kernels::Prepared& p, const exec::ExecConfig& cfg, std::size_t repeats) {
  using clock = std::chrono::steady_clock;
  (void)p.run(cfg);  // warm-up
  double sum = 0.0;
  double best = 0.0;
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto t0 = clock::now();
    const auto result = p.run(cfg);
    const double s = std::chrono::duration<double>(clock::now() - t0).count();
    sum += s;
    best = r == 0 ? s : std::min(best, s);
  }
  return {sum / static_cast<double>(repeats), best};
}

std::string fmt_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", s);
  return buf;
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  const auto kernel = kernels::parse_kernel(a.kernel);
  if (!kernel) throw SemanticError("unknown kernel '" + a.kernel + "' (expected spmv, spmm, ttv or ttm)");
  if (a.repeats < 1) throw SemanticError("--repeats must be at least 1");
  const std::size_t rank = kernels::sparse_rank(*kernel);
  const std::string format = a.format.empty() ? (rank == 2 ? "CSR" : "CSF") : a.format;
  const auto attrs = parse_format(format, rank);

  CooTensor coo = ingest::read_any(a.input);
  if (coo.rank() != rank) {
    throw SemanticError(std::string(kernels::to_string(*kernel)) + " needs a rank-" +
                        std::to_string(rank) + " input, '" + a.input + "' has rank " +
                        std::to_string(coo.rank()));
  }
  if (a.reorder) coo = reorder::apply_permutations(coo, reorder::lexi_order(coo, a.iters));
  const auto dshape = kernels::dense_operand_shape(*kernel, coo.shape(), a.inner, a.mode);
  std::size_t dsize = 1;
  for (index_t e : dshape) dsize *= e;
  const kernels::Prepared prepared = kernels::prepare(
      *kernel, compress(coo, attrs), SpTensor::dense(dshape, std::vector<double>(dsize, 1.0)), a.mode);

  std::ostringstream rows;
  rows << "kernel,input,format,mode,workers,repeats,mean_s,min_s\n";
  auto row = [&](const char* mode, std::size_t workers, const Timing& t) {
    rows << kernels::to_string(*kernel) << ',' << a.input << ',' << format << ',' << mode << ','
         << workers << ',' << a.repeats << ',' << fmt_seconds(t.mean) << ',' << fmt_seconds(t.min)
         << '\n';
  };
  row("seq", 1, time_kernel(prepared, exec_config(1), a.repeats));
  if (a.threads > 1) row("par", a.threads, time_kernel(prepared, exec_config(a.threads), a.repeats));

  if (a.csv.empty()) {
    out << rows.str();
  } else {
    std::ofstream f(a.csv);
    if (!f) throw IoError("cannot write '" + a.csv + "'");
    f << rows.str();
  }
  return 0;
}

// -- convert / reorder / inspect --------------------------------------------

CooTensor load(const std::string& path, const std::string& from) {
  if (from.empty()) return ingest::read_any(path);
  if (from == "mtx") return ingest::read_matrix_market(path);
  if (from == "tns") return ingest::read_frostt(path);
  if (from == "spt") return decompress(ingest::read_sptensor(path));
  throw SemanticError("unknown input kind '" + from + "' (expected mtx, tns or spt)");
}

struct ConvertArgs {
  std::string input;
  std::string from;
  std::string to = "COO";
  std::string out_path;
};

int cmd_convert(const ConvertArgs& a, std::ostream& out) {
  const CooTensor coo = load(a.input, a.from);
  const auto attrs = parse_format(a.to, coo.rank());
  const SpTensor sp = compress(coo, attrs);
  if (a.out_path.empty()) {
    ingest::write_sptensor(sp, out);
  } else if (fs::path(a.out_path).extension() == ".tns") {
    ingest::write_coo(decompress(sp), a.out_path);
  } else {
    ingest::write_sptensor(sp, a.out_path);
  }
  return 0;
}

struct ReorderArgs {
  std::string input;
  std::size_t iters = reorder::kDefaultMaxIters;
  std::string out_path;
};

int cmd_reorder(const ReorderArgs& a, std::ostream& out) {
  if (a.iters < 1) throw SemanticError("--iters must be at least 1");
  const CooTensor coo = ingest::read_any(a.input);
  const auto perms = reorder::lexi_order(coo, a.iters);
  const CooTensor reordered = reorder::apply_permutations(coo, perms);
  out << "metric before: " << ingest::format_value(reorder::clustering_metric(coo)) << '\n';
  out << "metric after: " << ingest::format_value(reorder::clustering_metric(reordered)) << '\n';
  for (std::size_t m = 0; m < perms.size(); ++m) {
    out << "mode " << m << ": " << (reorder::is_identity(perms[m]) ? "identity" : join(perms[m], " "))
        << '\n';
  }
  if (!a.out_path.empty()) ingest::write_coo(reordered, a.out_path);
  return 0;
}

struct InspectArgs {
  std::string input;
  std::string format;
};

int cmd_inspect(const InspectArgs& a, std::ostream& out) {
  SpTensor sp;
  if (fs::path(a.input).extension() == ".spt") {
    sp = ingest::read_sptensor(a.input);
    if (!a.format.empty()) sp = compress(decompress(sp), parse_format(a.format, sp.rank()));
  } else {
    const CooTensor coo = ingest::read_any(a.input);
    sp = compress(coo, parse_format(a.format.empty() ? "COO" : a.format, coo.rank()));
  }
  out << "shape " << join(sp.shape(), " ") << '\n';
  out << "format " << format_attrs(sp.attrs()) << '\n';
  for (std::size_t l = 0; l < sp.rank(); ++l) {
    const auto& d = sp.dim(l);
    out << "level " << l << ' ' << to_string(d.attr) << ":";
    if (d.attr != FormatAttr::S) out << " pos=[" << join(d.pos) << "]";
    if (d.attr != FormatAttr::D) out << " crd=[" << join(d.crd) << "]";
    out << '\n';
  }
  out << "vals=[" << join(sp.vals()) << "]\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse tensor algebra compiler and runtime", "sparta"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Compile and execute a tensor-algebra program");
  run_cmd->add_option("program", run.program, "Program file (.ta)")->required();
  run_cmd->add_option("--threads", run.threads, "Worker threads (default: SPARTA_THREADS or 1)");
  run_cmd->add_flag("--reorder", run.reorder, "Reorder input tensors before execution");
  run_cmd->add_option("--iters", run.iters, "Reordering iterations")->capture_default_str();
  run_cmd->add_flag("--dump-ir", run.dump_ir, "Print the lowered module");
  run_cmd->add_flag("--dump-loops", run.dump_loops, "Print the generated loop nests");
  run_cmd->add_option("--out", run.out_path, "Write product outputs here");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time a kernel on one input");
  bench_cmd->add_option("kernel", bench.kernel, "spmv, spmm, ttv or ttm")->required();
  bench_cmd->add_option("input", bench.input, "Input file or synth:banded:N:NNZ")->required();
  bench_cmd->add_option("--format", bench.format, "Storage format of the sparse operand");
  bench_cmd->add_option("--threads", bench.threads, "Also time a parallel run with N workers");
  bench_cmd->add_option("--repeats", bench.repeats, "Timed repetitions")->capture_default_str();
  bench_cmd->add_option("--csv", bench.csv, "Write CSV rows to this file instead of stdout");
  bench_cmd->add_flag("--reorder", bench.reorder, "Reorder the input before timing");
  bench_cmd->add_option("--iters", bench.iters, "Reordering iterations")->capture_default_str();
  bench_cmd->add_option("--mode", bench.mode, "Contracted mode for ttv/ttm")->capture_default_str();
  bench_cmd->add_option("--inner", bench.inner, "Inner extent of the dense operand")->capture_default_str();

  ConvertArgs convert;
  auto* convert_cmd = app.add_subcommand("convert", "Re-encode a tensor in another format");
  convert_cmd->add_option("input", convert.input, "Input file")->required();
  convert_cmd->add_option("--from", convert.from, "Input kind: mtx, tns or spt (default: by extension)");
  convert_cmd->add_option("--to", convert.to, "Target format")->capture_default_str();
  convert_cmd->add_option("--out", convert.out_path, "Output file (.tns for coordinates, else level dump)");

  ReorderArgs reorder_args;
  auto* reorder_cmd = app.add_subcommand("reorder", "Reorder a tensor and report the clustering metric");
  reorder_cmd->add_option("input", reorder_args.input, "Input file")->required();
  reorder_cmd->add_option("--iters", reorder_args.iters, "Maximum iterations")->capture_default_str();
  reorder_cmd->add_option("--out", reorder_args.out_path, "Write the reordered tensor (coordinate text)");

  InspectArgs inspect;
  auto* inspect_cmd = app.add_subcommand("inspect", "Print the level arrays of a tensor");
  inspect_cmd->add_option("input", inspect.input, "Input file")->required();
  inspect_cmd->add_option("--format", inspect.format, "Storage format (default: stored format or COO)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::Semantic);
  }

  try {
    const std::size_t threads_default = env_threads();
    if (run_cmd->parsed()) {
      if (run.threads == 0) run.threads = threads_default;
      return cmd_run(run, out);
    }
    if (bench_cmd->parsed()) {
      if (bench.threads == 0) bench.threads = threads_default;
      return cmd_bench(bench, out);
    }
    if (convert_cmd->parsed()) return cmd_convert(convert, out);
    if (reorder_cmd->parsed()) return cmd_reorder(reorder_args, out);
    if (inspect_cmd->parsed()) return cmd_inspect(inspect, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::Runtime);
  }
  return 0;
}

}  // namespace sparta::cli
