#include "mlda/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mlda {

namespace {

using nlohmann::json;

constexpr std::array<char, 8> kBinMagic = {'M', 'L', 'D', 'A', 'M', 'A', 'T', 'B'};

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::array<char, 64> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

double parse_double(std::string_view tok, const std::filesystem::path& path, int row, int col) {
  // Trim surrounding spaces; std::from_chars is locale-independent.
  while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
  while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r'))
    tok.remove_suffix(1);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    fail(path, "row " + std::to_string(row) + ", column " + std::to_string(col) +
                   ": not a number: '" + std::string(tok) + "'");
  return out;
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out = (out << 8) | ((v >> (8 * i)) & 0xff);
  return out;
}

json model_to_json(const DiscriminantModel& model, const ModelMetadata& meta) {
  json jb = json::array();
  for (Eigen::Index i = 0; i < model.b_hat.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < model.b_hat.cols(); ++j) row.push_back(model.b_hat(i, j));
    jb.push_back(std::move(row));
  }
  json js = json::array();
  for (Eigen::Index i = 0; i < model.singulars.size(); ++i) js.push_back(model.singulars(i));
  return json{{"format_version", 1},
              {"p", model.b_hat.rows()},
              {"q", model.b_hat.cols()},
              {"b_hat", std::move(jb)},
              {"beta0_tilde", model.beta0_tilde},
              {"omega", model.omega},
              {"rank", model.rank},
              {"singulars", std::move(js)},
              {"fit",
               {{"loss", loss_name(meta.loss)},
                {"penalty", penalty_name(meta.penalty)},
                {"iterations", model.diagnostics.iterations},
                {"converged", model.diagnostics.converged},
                {"final_objective", model.diagnostics.final_objective},
                {"grad_map_norm", model.diagnostics.grad_map_norm},
                {"solver_beta0", model.diagnostics.solver_beta0},
                {"flipped", model.diagnostics.flipped},
                {"seed", meta.seed}}}};
}

}  // namespace

std::string shape_name(Shape s) {
  switch (s) {
    case Shape::cross: return "cross";
    case Shape::triangle: return "triangle";
    default: return "butterfly";
  }
}

Shape shape_from_name(const std::string& name) {
  if (name == "cross") return Shape::cross;
  if (name == "triangle") return Shape::triangle;
  if (name == "butterfly") return Shape::butterfly;
  throw std::invalid_argument("unknown shape: " + name);
}

std::string loss_name(Loss l) { return l == Loss::squared ? "squared" : "logistic"; }

Loss loss_from_name(const std::string& name) {
  if (name == "squared") return Loss::squared;
  if (name == "logistic") return Loss::logistic;
  throw std::invalid_argument("unknown loss: " + name);
}

std::string penalty_name(Penalty p) { return p == Penalty::nuclear ? "nuclear" : "lasso"; }

Penalty penalty_from_name(const std::string& name) {
  if (name == "nuclear") return Penalty::nuclear;
  if (name == "lasso") return Penalty::lasso;
  throw std::invalid_argument("unknown penalty: " + name);
}

Mat load_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open file");
  std::vector<std::vector<double>> rows;
  std::string line;
  Eigen::Index ncols = -1;
  int data_row = 0;
  while (std::getline(in, line)) {
    std::string_view view(line);
    while (!view.empty() && (view.front() == ' ' || view.front() == '\t')) view.remove_prefix(1);
    if (view.empty() || view == "\r" || view.front() == '#') continue;
    ++data_row;
    std::vector<double> row;
    std::string_view rest(line);
    int col = 0;
    while (true) {
      const std::size_t comma = rest.find(',');
      const std::string_view tok = rest.substr(0, comma);
      ++col;
      row.push_back(parse_double(tok, path, data_row, col));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (ncols < 0) ncols = static_cast<Eigen::Index>(row.size());
    if (static_cast<Eigen::Index>(row.size()) != ncols)
      fail(path, "row " + std::to_string(data_row) + " has " + std::to_string(row.size()) +
                     " fields, expected " + std::to_string(ncols));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(path, "no data rows");
  Mat m(static_cast<Eigen::Index>(rows.size()), ncols);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < ncols; ++j) m(i, j) = rows[i][j];
  return m;
}

void save_matrix_csv(const Mat& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // binary: "\n" line ends everywhere
  if (!out) fail(path, "cannot open file for writing");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) fail(path, "write failed");
}

void save_matrix_bin(const Mat& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open file for writing");
  out.write(kBinMagic.data(), kBinMagic.size());
  const std::uint64_t p = to_little(static_cast<std::uint64_t>(m.rows()));
  const std::uint64_t q = to_little(static_cast<std::uint64_t>(m.cols()));
  out.write(reinterpret_cast<const char*>(&p), 8);
  out.write(reinterpret_cast<const char*>(&q), 8);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::uint64_t bits;
      const double v = m(i, j);
      std::memcpy(&bits, &v, 8);
      bits = to_little(bits);
      out.write(reinterpret_cast<const char*>(&bits), 8);
    }
  if (!out) fail(path, "write failed");
}

Mat load_matrix_bin(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  if (bytes.size() < 24 || std::memcmp(bytes.data(), kBinMagic.data(), 8) != 0)
    fail(path, "not a packed matrix file");
  std::uint64_t p = 0, q = 0;
  std::memcpy(&p, bytes.data() + 8, 8);
  std::memcpy(&q, bytes.data() + 16, 8);
  p = to_little(p);
  q = to_little(q);
  if (p == 0 || q == 0 || bytes.size() != 24 + 8 * p * q) fail(path, "truncated matrix payload");
  Mat m(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
  const char* cursor = bytes.data() + 24;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::uint64_t bits;
      std::memcpy(&bits, cursor, 8);
      bits = to_little(bits);
      double v;
      std::memcpy(&v, &bits, 8);
      m(i, j) = v;
      cursor += 8;
    }
  return m;
}

Mat load_matrix_any(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) fail(path, "cannot open file");
  std::array<char, 8> head{};
  probe.read(head.data(), head.size());
  if (probe.gcount() == 8 && std::memcmp(head.data(), kBinMagic.data(), 8) == 0)
    return load_matrix_bin(path);
  return load_matrix_csv(path);
}

void render_pgm(const Mat& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open file for writing");
  const double lo = m.minCoeff();
  const double hi = m.maxCoeff();
  out << "P5\n" << m.cols() << ' ' << m.rows() << "\n255\n";
  std::string bytes;
  bytes.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = hi > lo ? 255.0 * (hi - m(i, j)) / (hi - lo) : 128.0;
      bytes.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v))));
    }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(path, "write failed");
}

std::uint64_t fnv1a64(const void* bytes, std::size_t len) {
  const auto* data = static_cast<const unsigned char*>(bytes);
  std::uint64_t hash = 14695981039346656037ull;
  for (std::size_t i = 0; i < len; ++i) {
    hash ^= data[i];
    hash *= 1099511628211ull;
  }
  return hash;
}

std::uint64_t file_checksum(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  return fnv1a64(bytes.data(), bytes.size());
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file_bytes(path));
  } catch (const json::exception& e) {
    fail(path, std::string("manifest parse error: ") + e.what());
  }
  try {
    DatasetManifest manifest;
    manifest.format_version = j.at("format_version").get<int>();
    if (manifest.format_version != 1)
      fail(path, "unsupported manifest format_version " + std::to_string(manifest.format_version));
    manifest.p = j.at("p").get<Eigen::Index>();
    manifest.q = j.at("q").get<Eigen::Index>();
    for (const json& je : j.at("entries")) {
      ManifestEntry entry;
      entry.matrix_path = je.at("path").get<std::string>();
      entry.label = je.at("label").get<int>();
      if (entry.label != 1 && entry.label != 2)
        fail(path, entry.matrix_path + ": label must be 1 or 2");
      if (je.contains("checksum"))
        entry.checksum = std::stoull(je.at("checksum").get<std::string>(), nullptr, 16);
      manifest.entries.push_back(std::move(entry));
    }
    return manifest;
  } catch (const json::exception& e) {
    fail(path, std::string("manifest field error: ") + e.what());
  }
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  json entries = json::array();
  for (const ManifestEntry& e : manifest.entries) {
    json je{{"path", e.matrix_path}, {"label", e.label}};
    if (e.checksum) {
      std::ostringstream hex;
      hex << std::hex << *e.checksum;
      je["checksum"] = hex.str();
    }
    entries.push_back(std::move(je));
  }
  const json j{{"format_version", manifest.format_version},
               {"p", manifest.p},
               {"q", manifest.q},
               {"entries", std::move(entries)}};
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open file for writing");
  out << j.dump(2) << '\n';
  if (!out) fail(path, "write failed");
}

Dataset load_dataset(const std::filesystem::path& manifest_path) {
  const DatasetManifest manifest = load_manifest(manifest_path);
  if (manifest.entries.empty()) fail(manifest_path, "manifest lists no matrices");
  const std::filesystem::path base = manifest_path.parent_path();
  std::vector<Mat> samples;
  std::vector<int> labels;
  samples.reserve(manifest.entries.size());
  for (const ManifestEntry& entry : manifest.entries) {
    const std::filesystem::path file = base / entry.matrix_path;
    if (entry.checksum && file_checksum(file) != *entry.checksum)
      fail(file, "checksum mismatch");
    Mat m = load_matrix_any(file);
    if (m.rows() != manifest.p || m.cols() != manifest.q)
      fail(file, "expected a " + std::to_string(manifest.p) + "x" + std::to_string(manifest.q) +
                     " matrix, got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    samples.push_back(std::move(m));
    labels.push_back(entry.label);
  }
  return Dataset(std::move(samples), std::move(labels));
}

void save_dataset(const Dataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  DatasetManifest manifest;
  manifest.p = data.rows();
  manifest.q = data.cols();
  for (int i = 0; i < data.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "m%05d.csv", i);
    const std::filesystem::path file = dir / name;
    save_matrix_csv(data.sample(i), file);
    manifest.entries.push_back({name, data.label(i), file_checksum(file)});
  }
  save_manifest(manifest, dir / "manifest.json");
}

void save_model(const DiscriminantModel& model, const ModelMetadata& meta,
                const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open file for writing");
  out << model_to_json(model, meta).dump(2) << '\n';
  if (!out) fail(path, "write failed");
}

std::pair<DiscriminantModel, ModelMetadata> load_model(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file_bytes(path));
  } catch (const json::exception& e) {
    fail(path, std::string("model parse error: ") + e.what());
  }
  try {
    if (j.at("format_version").get<int>() != 1) fail(path, "unsupported model format_version");
    DiscriminantModel model;
    const auto p = j.at("p").get<Eigen::Index>();
    const auto q = j.at("q").get<Eigen::Index>();
    model.b_hat.resize(p, q);
    const json& jb = j.at("b_hat");
    if (static_cast<Eigen::Index>(jb.size()) != p) fail(path, "b_hat row count mismatch");
    for (Eigen::Index i = 0; i < p; ++i) {
      const json& row = jb.at(i);
      if (static_cast<Eigen::Index>(row.size()) != q) fail(path, "b_hat column count mismatch");
      for (Eigen::Index jj = 0; jj < q; ++jj) model.b_hat(i, jj) = row.at(jj).get<double>();
    }
    model.beta0_tilde = j.at("beta0_tilde").get<double>();
    model.omega = j.at("omega").get<double>();
    model.rank = j.at("rank").get<int>();
    const json& js = j.at("singulars");
    model.singulars.resize(static_cast<Eigen::Index>(js.size()));
    for (Eigen::Index i = 0; i < model.singulars.size(); ++i)
      model.singulars(i) = js.at(i).get<double>();
    const json& jf = j.at("fit");
    ModelMetadata meta;
    meta.loss = loss_from_name(jf.at("loss").get<std::string>());
    meta.penalty = penalty_from_name(jf.at("penalty").get<std::string>());
    meta.seed = jf.at("seed").get<std::uint64_t>();
    model.diagnostics.iterations = jf.at("iterations").get<int>();
    model.diagnostics.converged = jf.at("converged").get<bool>();
    model.diagnostics.final_objective = jf.at("final_objective").get<double>();
    model.diagnostics.grad_map_norm = jf.at("grad_map_norm").get<double>();
    model.diagnostics.solver_beta0 = jf.at("solver_beta0").get<double>();
    model.diagnostics.flipped = jf.at("flipped").get<bool>();
    return {std::move(model), meta};
  } catch (const json::exception& e) {
    fail(path, std::string("model field error: ") + e.what());
  }
}

void save_predictions(const std::vector<Prediction>& preds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open file for writing");
  out << "index,true_label,pred_label,score\n";
  for (const Prediction& p : preds)
    out << p.index << ',' << p.true_label << ',' << p.pred_label << ','
        << format_double(p.score) << '\n';
  if (!out) fail(path, "write failed");
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open file");
  std::vector<Prediction> preds;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (row == 1 || line.empty() || line == "\r") continue;  // header
    std::istringstream ss(line);
    Prediction p;
    char c1, c2, c3;
    ss >> p.index >> c1 >> p.true_label >> c2 >> p.pred_label >> c3;
    std::string score_tok;
    std::getline(ss, score_tok);
    if (!ss || c1 != ',' || c2 != ',' || c3 != ',')
      fail(path, "row " + std::to_string(row) + ": malformed prediction line");
    p.score = parse_double(score_tok, path, row, 4);
    preds.push_back(p);
  }
  if (preds.empty()) fail(path, "no predictions");
  return preds;
}

void write_mc_report(const EvalReport& report, const McReportConfig& cfg,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open file for writing");
  out << "format_version 1\n";
  out << "[study]\n";
  out << "shape " << shape_name(cfg.study.signal.shape) << '\n';
  out << "p " << cfg.study.signal.p << '\n';
  out << "q " << cfg.study.signal.q << '\n';
  out << "amplitude " << format_double(cfg.study.signal.amplitude) << '\n';
  out << "n " << cfg.study.n << '\n';
  out << "pi1 " << format_double(cfg.study.pi1) << '\n';
  out << "pi2 " << format_double(cfg.study.pi2) << '\n';
  out << "rho " << format_double(cfg.study.rho) << '\n';
  out << "test_size " << cfg.study.test_size << '\n';
  out << "replicates " << cfg.study.replicates << '\n';
  out << "seed " << cfg.study.seed << '\n';
  out << "[fit]\n";
  out << "loss " << loss_name(cfg.fit.loss) << '\n';
  out << "penalty " << penalty_name(cfg.fit.penalty) << '\n';
  out << "max_iter " << cfg.fit.max_iter << '\n';
  out << "rel_tol " << format_double(cfg.fit.rel_tol) << '\n';
  out << "grid_size " << cfg.grid_k << '\n';
  out << "grid_span " << format_double(cfg.grid_span) << '\n';
  out << "[results]\n";
  out << "replicates_completed " << report.per_replicate_rates.size() << '\n';
  out << "replicates_failed " << report.failed_replicates << '\n';
  out << "mean_rate " << format_double(report.mean_rate) << '\n';
  out << "std_error " << (std::isnan(report.std_error) ? "NA" : format_double(report.std_error))
      << '\n';
  out << "mean_rank " << format_double(report.mean_rank) << '\n';
  out << "mean_frob_error " << format_double(report.mean_frob_error) << '\n';
  out << "bayes_error " << format_double(bayes_error(cfg.study)) << '\n';
  out << "[per_replicate]\n";
  out << "replicate rate rank frob_error selected_omega\n";
  for (std::size_t i = 0; i < report.per_replicate_rates.size(); ++i)
    out << i << ' ' << format_double(report.per_replicate_rates[i]) << ' '
        << report.per_replicate_ranks[i] << ' ' << format_double(report.per_replicate_frob[i])
        << ' ' << format_double(report.per_replicate_omegas[i]) << '\n';
  if (!out) fail(path, "write failed");
}

}  // namespace mlda
