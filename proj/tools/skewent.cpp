// Copyright 2026 The skewent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// skewent: entropy, mutual information, relative entropy, sampling, density
// evaluation and entropy curves from the command line.
//
// Exit status: 0 success, 2 bad input (parse or validation), 3 numerical
// failure, 1 anything else.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "skewent/distributions.hpp"
#include "skewent/entropy.hpp"
#include "skewent/information.hpp"
#include "skewent/io.hpp"
#include "skewent/oracle.hpp"
#include "skewent/rng.hpp"
#include "skewent/version.hpp"

namespace fs = std::filesystem;
using namespace skewent;

namespace {

struct Common {
  std::vector<std::string> specs;
  std::uint64_t samples = 100000;
  std::uint64_t seed = 0;
  bool oracle = false;
  std::string out;
  bool bits = false;
  unsigned workers = 0;
  std::string manifest;
};

// Root stream for a command: the seed is split by command so that the same
// seed gives unrelated draws in, say, entropy and sample.
RngStream command_stream(std::uint64_t seed, std::uint64_t tag) { return RngStream(seed).child(tag); }

enum CommandTag : std::uint64_t { kEntropy = 1, kMutinfo, kKl, kSample, kCurve };

McOptions mc_options(const Common& c) {
  McOptions o;
  o.n_samples = static_cast<std::size_t>(c.samples);
  o.workers = c.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : c.workers;
  return o;
}

double unit(const Common& c) { return c.bits ? 1.0 / kLn2 : 1.0; }

std::string estimate_column(const Common& c) { return c.bits ? "estimate_bits" : "estimate_nats"; }

void require_finite(const McEstimate& e) {
  if (!std::isfinite(e.value) || !std::isfinite(e.std_error))
    throw Error(ErrorKind::NonConvergent, "estimate is not finite");
}

io::LoadedSpec load_one(const Common& c) {
  if (c.specs.size() != 1) throw Error(ErrorKind::Parse, "this command takes exactly one --spec");
  return io::load_spec(c.specs.front());
}

std::vector<std::string> estimate_header(const Common& c) {
  std::vector<std::string> h{estimate_column(c), "std_error", "closed_form_part", "mc_part", "n_samples", "seed"};
  if (c.oracle) {
    h.push_back("oracle_value");
    h.push_back("abs_diff");
  }
  return h;
}

void append_estimate(std::vector<io::Cell>& row, const Common& c, const McEstimate& e,
                     std::optional<double> oracle_value) {
  const double u = unit(c);
  row.insert(row.end(), {e.value * u, e.std_error * u, e.closed_form_part * u, e.mc_part * u,
                         static_cast<std::uint64_t>(e.n_samples), c.seed});
  if (c.oracle) {
    row.push_back(*oracle_value * u);
    row.push_back(std::abs(e.value - *oracle_value) * u);
  }
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// ---------------------------------------------------------------------------
// Commands. Each writes its CSV into `out`.

void cmd_entropy(const Common& c, std::ostream& out) {
  const auto spec = load_one(c);
  const auto est = entropy_mc(spec.dist, command_stream(c.seed, kEntropy), mc_options(c));
  require_finite(est);
  std::optional<double> oracle;
  if (c.oracle) oracle = entropy_quadrature(spec.dist);
  io::CsvWriter w(out);
  w.header(concat({"family", "n", "m"}, estimate_header(c)));
  std::vector<io::Cell> row{spec.family, static_cast<std::uint64_t>(dimension(spec.dist)),
                            static_cast<std::uint64_t>(skew_dimension(spec.dist))};
  append_estimate(row, c, est, oracle);
  w.row(row);
}

void cmd_mutinfo(const Common& c, std::optional<std::size_t> n1_flag, std::ostream& out) {
  const auto spec = load_one(c);
  const auto n1 = n1_flag ? n1_flag : spec.partition;
  if (!n1)
    throw Error(ErrorKind::InvalidPartition, "mutual information needs --partition N1 or a \"partition\" key");
  const auto part = Partition::create(dimension(spec.dist), *n1);
  const auto est = mutual_information(spec.dist, part, command_stream(c.seed, kMutinfo), mc_options(c));
  require_finite(est);
  std::optional<double> oracle;
  if (c.oracle) {
    const auto& delta = std::holds_alternative<Cfusn>(spec.dist) ? std::get<Cfusn>(spec.dist).delta
                                                                 : std::get<Lcfusn>(spec.dist).delta;
    oracle = mi_quadrature(delta, part);
  }
  io::CsvWriter w(out);
  w.header(concat({"family", "n", "m", "n1"}, estimate_header(c)));
  std::vector<io::Cell> row{spec.family, static_cast<std::uint64_t>(dimension(spec.dist)),
                            static_cast<std::uint64_t>(skew_dimension(spec.dist)),
                            static_cast<std::uint64_t>(*n1)};
  append_estimate(row, c, est, oracle);
  w.row(row);
}

void cmd_kl(const Common& c, const std::string& direction, const std::string& method, std::ostream& out) {
  if (c.specs.size() != 2) throw Error(ErrorKind::Parse, "kl takes two specs: --spec F --spec G");
  auto f = io::load_spec(c.specs[0]);
  auto g = io::load_spec(c.specs[1]);
  if (direction == "reverse") std::swap(f, g);
  if (dimension(f.dist) != dimension(g.dist))
    throw Error(ErrorKind::DimensionMismatch, "the two specs differ in dimension");
  const auto stream = command_stream(c.seed, kKl);
  const auto opts = mc_options(c);

  // the LCFUSN / LSN pair sharing (mu, Sigma) has a dedicated estimator
  std::string used = "direct";
  McEstimate est;
  const auto* fz = std::get_if<Lcfusn>(&f.dist);
  const auto* gz = std::get_if<Lcfusn>(&g.dist);
  if (method != "direct" && f.family == "lcfusn" && g.lsn && detail::same_location_scale(fz->ls, g.lsn->ls())) {
    est = kl_lcfusn_vs_lsn(*fz, *g.lsn, stream, opts, KlDirection::LcfusnToLsn);
    used = "lcfusn-lsn";
  } else if (method != "direct" && g.family == "lcfusn" && f.lsn && detail::same_location_scale(gz->ls, f.lsn->ls())) {
    est = kl_lcfusn_vs_lsn(*gz, *f.lsn, stream, opts, KlDirection::LsnToLcfusn);
    used = "lcfusn-lsn";
  } else if (method == "lcfusn-lsn") {
    throw Error(ErrorKind::MismatchedLocationScale,
                "--method lcfusn-lsn needs an LCFUSN and an LSN spec with the same mu and Sigma");
  } else {
    est = kl_direct(f.dist, g.dist, stream, opts);
  }
  require_finite(est);
  std::optional<double> oracle;
  if (c.oracle) oracle = kl_quadrature(f.dist, g.dist);
  io::CsvWriter w(out);
  w.header(concat({"family_f", "family_g", "n", "method"}, estimate_header(c)));
  std::vector<io::Cell> row{f.family, g.family, static_cast<std::uint64_t>(dimension(f.dist)), used};
  append_estimate(row, c, est, oracle);
  w.row(row);
}

void cmd_sample(const Common& c, std::ostream& out) {
  const auto spec = load_one(c);
  if (c.samples == 0) throw Error(ErrorKind::InvalidParameter, "--samples must be positive");
  const auto draws = sharded_observations(command_stream(c.seed, kSample), static_cast<std::size_t>(c.samples),
                                          mc_options(c).workers,
                                          [&](RandomStream& rs) { return sample_one(spec.dist, rs); });
  const auto n = dimension(spec.dist);
  io::CsvWriter w(out);
  std::vector<std::string> header;
  for (std::size_t i = 1; i <= n; ++i) header.push_back("x" + std::to_string(i));
  w.header(header);
  for (const auto& x : draws) {
    std::vector<io::Cell> row(x.data(), x.data() + x.size());
    w.row(row);
  }
}

void cmd_density(const Common& c, const std::string& points_path, std::ostream& out) {
  const auto spec = load_one(c);
  const Matrix points = io::read_csv_matrix(points_path);
  const auto n = dimension(spec.dist);
  if (static_cast<std::size_t>(points.cols()) != n)
    throw Error(ErrorKind::DimensionMismatch, points_path + ": expected " + std::to_string(n) + " columns, found " +
                                                  std::to_string(points.cols()));
  io::CsvWriter w(out);
  std::vector<std::string> header;
  for (std::size_t i = 1; i <= n; ++i) header.push_back("x" + std::to_string(i));
  header.push_back("log_pdf");
  w.header(header);
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    const Vector x = points.row(r).transpose();
    double lp = 0.0;
    try {
      lp = log_pdf(spec.dist, x);
    } catch (const Error& e) {
      throw Error(e.kind(), points_path + ": data row " + std::to_string(r + 1) + ": " + e.message());
    }
    std::vector<io::Cell> row(x.data(), x.data() + x.size());
    row.push_back(lp);
    w.row(row);
  }
}

struct CurveArgs {
  std::string family;
  std::string grid;
  std::string grid2;
  std::vector<double> sigma2{1.0};
  double mu = 0.0;
};

void write_plot_script(const CurveArgs& a, const std::vector<double>& sigma2, const fs::path& csv) {
  fs::path gp = csv;
  gp += ".gp";
  std::ofstream s(gp, std::ios::binary);
  if (!s) throw Error(ErrorKind::Parse, gp.string() + ":0: cannot write plot script");
  const std::string data = csv.filename().string();
  s << "# gnuplot script; run from the directory holding " << data << "\n";
  s << "set datafile separator ','\n";
  if (a.family == "cfusn12") {
    s << "set xlabel 'delta1'\nset ylabel 'delta2'\nset zlabel 'entropy'\n";
    s << "set dgrid3d 30,30\nset hidden3d\n";
    s << "splot '" << data << "' every ::1 using 2:3:5 with lines title 'CFUSN_{1,2}'\n";
    return;
  }
  s << "set xlabel 'alpha'\nset ylabel 'entropy'\nset key top right\n";
  s << "plot ";
  for (std::size_t i = 0; i < sigma2.size(); ++i) {
    if (i) s << ", \\\n     ";
    s << "'" << data << "' every ::1 using 4:($3==" << io::format_double(sigma2[i]) << "?$5:1/0) with lines title 'sigma^2="
      << io::format_double(sigma2[i]) << "'";
  }
  s << "\n";
}

void cmd_curve(const Common& c, const CurveArgs& a, std::ostream& out) {
  const auto stream = command_stream(c.seed, kCurve);
  const auto opts = mc_options(c);
  io::CsvWriter w(out);
  const double u = unit(c);
  auto tail = [&](const McEstimate& e) {
    return std::vector<io::Cell>{e.value * u, e.std_error * u, e.closed_form_part * u, e.mc_part * u,
                                 static_cast<std::uint64_t>(e.n_samples), c.seed};
  };
  const std::vector<std::string> est_cols{estimate_column(c), "std_error", "closed_form_part", "mc_part",
                                          "n_samples", "seed"};
  for (double s2 : a.sigma2)
    if (!(s2 > 0.0)) throw Error(ErrorKind::InvalidParameter, "--sigma2 values must be positive");
  if (a.family == "sn" || a.family == "lsn") {
    const auto alphas = io::parse_grid(a.grid, "--grid");
    std::vector<std::vector<double>> grid;
    for (double v : alphas) grid.push_back({v});
    const auto fam = a.family == "sn" ? CurveFamily::SkewNormal : CurveFamily::LogSkewNormal;
    w.header(concat({"family", "mu", "sigma2", "alpha"}, est_cols));
    for (double s2 : a.sigma2) {
      const auto points = entropy_curve(fam, grid, {a.mu, std::sqrt(s2)}, stream, opts);
      for (const auto& p : points) {
        require_finite(p.estimate);
        auto row = std::vector<io::Cell>{a.family, a.mu, s2, p.coords[0]};
        const auto t = tail(p.estimate);
        row.insert(row.end(), t.begin(), t.end());
        w.row(row);
      }
    }
  } else if (a.family == "cfusn12") {
    const auto d1 = io::parse_grid(a.grid, "--grid");
    const auto d2 = io::parse_grid(a.grid2.empty() ? a.grid : a.grid2, "--grid2");
    std::vector<std::vector<double>> grid;
    for (double x : d1)
      for (double y : d2) grid.push_back({x, y});
    if (a.sigma2.size() != 1) throw Error(ErrorKind::Parse, "cfusn12 curves take a single --sigma2");
    w.header(concat({"family", "delta1", "delta2", "sigma2"}, est_cols));
    const auto points = entropy_curve(CurveFamily::Cfusn12, grid, {a.mu, std::sqrt(a.sigma2[0])}, stream, opts);
    for (const auto& p : points) {
      require_finite(p.estimate);
      auto row = std::vector<io::Cell>{a.family, p.coords[0], p.coords[1], a.sigma2[0]};
      const auto t = tail(p.estimate);
      row.insert(row.end(), t.begin(), t.end());
      w.row(row);
    }
  } else {
    throw Error(ErrorKind::Parse, "--family must be sn, lsn or cfusn12");
  }
  if (!c.out.empty()) write_plot_script(a, a.sigma2, c.out);
}

// ---------------------------------------------------------------------------

void add_common(CLI::App* sub, Common& c, bool samples, bool seed, bool oracle, bool bits) {
  sub->add_option("--spec", c.specs, "distribution spec (JSON)");
  if (samples) sub->add_option("--samples", c.samples, "Monte Carlo sample count")->capture_default_str();
  if (seed) sub->add_option("--seed", c.seed, "root seed")->capture_default_str();
  if (oracle) sub->add_flag("--oracle", c.oracle, "add a quadrature reference value (n <= 2)");
  if (bits) sub->add_flag("--bits", c.bits, "report in bits instead of nats");
  sub->add_option("--out", c.out, "output CSV (default stdout)");
  sub->add_option("--manifest", c.manifest, "run manifest path (default <out>.manifest.json)");
  sub->add_option("--workers", c.workers, "worker threads (default: hardware concurrency)");
}

/// Arguments as recorded in the manifest: spec and point paths made absolute
/// so a replay works from any directory.
std::vector<std::string> portable_args(std::vector<std::string> args) {
  for (std::size_t i = 0; i + 1 < args.size(); ++i)
    if (args[i] == "--spec" || args[i] == "--points") args[i + 1] = fs::absolute(args[i + 1]).lexically_normal().string();
  return args;
}

int run(const std::vector<std::string>& args);

int replay(const std::string& manifest_path, const std::string& out_override) {
  const auto m = io::read_manifest(manifest_path);
  auto args = m.args;
  if (!out_override.empty()) {
    // the new output gets its own manifest next to it
    auto mf = std::find(args.begin(), args.end(), "--manifest");
    if (mf != args.end()) args.erase(mf, std::min(mf + 2, args.end()));
    auto it = std::find(args.begin(), args.end(), "--out");
    if (it != args.end() && it + 1 != args.end())
      *(it + 1) = out_override;
    else {
      args.push_back("--out");
      args.push_back(out_override);
    }
  }
  return run(args);
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Entropy, mutual information and relative entropy for skew-normal families"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Common c;

  auto* entropy = app.add_subcommand("entropy", "Shannon entropy of one distribution");
  add_common(entropy, c, true, true, true, true);

  auto* mutinfo = app.add_subcommand("mutinfo", "mutual information between two blocks of a canonical LCFUSN");
  add_common(mutinfo, c, true, true, true, true);
  std::optional<std::size_t> partition;
  mutinfo->add_option("--partition", partition, "size n1 of the first block");

  auto* kl = app.add_subcommand("kl", "relative entropy D(f||g) between two distributions");
  add_common(kl, c, true, true, true, true);
  std::string direction = "forward";
  std::string method = "auto";
  kl->add_option("--direction", direction, "forward: D(f||g); reverse: D(g||f)")
      ->check(CLI::IsMember({"forward", "reverse"}))
      ->capture_default_str();
  kl->add_option("--method", method, "auto, direct or lcfusn-lsn")
      ->check(CLI::IsMember({"auto", "direct", "lcfusn-lsn"}))
      ->capture_default_str();

  auto* sample = app.add_subcommand("sample", "draw samples");
  add_common(sample, c, true, true, false, false);

  auto* density = app.add_subcommand("density", "log-density at the points of a CSV file");
  add_common(density, c, false, false, false, false);
  std::string points;
  density->add_option("--points", points, "CSV of evaluation points, one per row")->required();

  auto* curve = app.add_subcommand("curve", "entropy along a parameter grid");
  add_common(curve, c, true, true, false, true);
  CurveArgs ca;
  curve->add_option("--family", ca.family, "sn, lsn or cfusn12")->required();
  curve->add_option("--grid", ca.grid, "start:stop:step over alpha (sn, lsn) or delta1 (cfusn12)")->required();
  curve->add_option("--grid2", ca.grid2, "grid over delta2 (cfusn12; default: same as --grid)");
  curve->add_option("--sigma2", ca.sigma2, "scale(s) sigma^2, comma separated")->delimiter(',');
  curve->add_option("--mu", ca.mu, "location")->capture_default_str();

  auto* rep = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  std::string manifest_in;
  std::string replay_out;
  rep->add_option("manifest", manifest_in, "manifest JSON")->required();
  rep->add_option("--out", replay_out, "write here instead of the recorded output");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    std::cout << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "skewent: " << e.what() << "\n";
    return 2;
  }

  if (rep->parsed()) return replay(manifest_in, replay_out);

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  std::ostringstream buf;
  try {
    if (command != "curve" && c.specs.empty()) throw Error(ErrorKind::Parse, "--spec is required");
    if (command == "entropy") cmd_entropy(c, buf);
    else if (command == "mutinfo") cmd_mutinfo(c, partition, buf);
    else if (command == "kl") cmd_kl(c, direction, method, buf);
    else if (command == "sample") cmd_sample(c, buf);
    else if (command == "density") cmd_density(c, points, buf);
    else cmd_curve(c, ca, buf);
  } catch (const Error& e) {
    std::cerr << "skewent " << command << ": " << e.what() << "\n";
    return e.is_validation() ? 2 : 3;
  }

  if (c.out.empty()) {
    std::cout << buf.str();
    std::cout.flush();
  } else {
    std::ofstream f(c.out, std::ios::binary);
    if (!f) {
      std::cerr << "skewent: cannot write " << c.out << "\n";
      return 2;
    }
    f << buf.str();
  }

  std::string manifest_path = c.manifest;
  if (manifest_path.empty() && !c.out.empty()) manifest_path = c.out + ".manifest.json";
  if (!manifest_path.empty()) {
    io::RunManifest m;
    m.command = command;
    for (const auto& s : c.specs) m.spec_files.push_back(fs::absolute(s).lexically_normal().string());
    m.seed = c.seed;
    m.n_samples = command == "density" ? 0 : c.samples;
    m.timestamp = io::utc_timestamp();
    m.output = c.out;
    m.args = portable_args(args);
    io::write_manifest(m, manifest_path);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(std::vector<std::string>(argv + 1, argv + argc));
  } catch (const Error& e) {
    std::cerr << "skewent: " << e.what() << "\n";
    return e.is_validation() ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "skewent: " << e.what() << "\n";
    return 1;
  }
}
