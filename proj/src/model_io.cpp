// Model file layout:
//
//   AUTOMSC-MODEL\n
//   version <u32>\n
//   header <bytes>\n
//   payload <bytes>\n
//   <header: UTF-8 JSON>
//   <payload: little-endian IEEE-754 doubles>
//   crc32 <8 lowercase hex digits>\n
//
// The payload holds the K x V weights in row-major order, then the K
// intercepts, then the V idf values. The CRC-32 covers header and payload.

#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>
#include <zlib.h>

#include "automsc/classifier.hpp"
#include "automsc/error.hpp"
#include "automsc/io.hpp"

namespace automsc {

namespace {

constexpr std::string_view kMagic = "AUTOMSC-MODEL";

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

double get_f64(const std::string& in, std::size_t& pos) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  pos += 8;
  return std::bit_cast<double>(bits);
}

std::uint32_t crc32_of(std::string_view a, std::string_view b) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(a.data()), static_cast<uInt>(a.size()));
  crc = crc32(crc, reinterpret_cast<const Bytef*>(b.data()), static_cast<uInt>(b.size()));
  return static_cast<std::uint32_t>(crc);
}

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

const char* status_name(LbfgsStatus s) {
  switch (s) {
    case LbfgsStatus::Converged: return "converged";
    case LbfgsStatus::MaxIterations: return "max_iterations";
    case LbfgsStatus::LineSearchFailed: return "line_search_failed";
    case LbfgsStatus::NonFinite: return "non_finite";
  }
  return "unknown";
}

LbfgsStatus status_from(const std::string& s) {
  if (s == "converged") return LbfgsStatus::Converged;
  if (s == "max_iterations") return LbfgsStatus::MaxIterations;
  if (s == "line_search_failed") return LbfgsStatus::LineSearchFailed;
  if (s == "non_finite") return LbfgsStatus::NonFinite;
  throw Error(ErrorKind::CorruptFile, "unknown training status '" + s + "'");
}

struct Serialized {
  std::string header;
  std::string payload;
};

Serialized serialize(const TrainedModel& m) {
  nlohmann::ordered_json h;
  h["method_id"] = m.method_id;
  h["variant"] = {{"id", m.variant.id},
                  {"uses_title", m.variant.uses_title},
                  {"uses_text", m.variant.uses_text},
                  {"uses_mscs", m.variant.uses_mscs}};
  h["preprocessing"] = {{"strip_math", m.preprocessing.strip_math}};
  h["classes"] = m.classes;
  h["training_size"] = m.training_size;
  h["hyperparams"] = {{"tolerance", m.hyperparams.tolerance},
                      {"regularization_c", m.hyperparams.regularization_c},
                      {"max_iterations", m.hyperparams.max_iterations},
                      {"fit_intercept", m.hyperparams.fit_intercept},
                      {"lbfgs_memory", m.hyperparams.lbfgs_memory}};
  h["training"] = {{"status", status_name(m.summary.status)},
                   {"iterations", m.summary.iterations},
                   {"final_loss", m.summary.final_loss},
                   {"gradient_max_norm", m.summary.gradient_max_norm},
                   {"loss_history", m.summary.loss_history}};
  h["vocabulary"] = {{"n_docs", m.vocabulary.n_docs()},
                     {"terms", m.vocabulary.terms()},
                     {"df", m.vocabulary.document_frequency()}};
  h["shape"] = {{"rows", m.weights.rows()}, {"cols", m.weights.cols()}};

  Serialized s;
  s.header = h.dump();
  s.payload.reserve(static_cast<std::size_t>(8 * (m.weights.size() + m.intercepts.size() +
                                                  m.vocabulary.idf().size())));
  for (Eigen::Index r = 0; r < m.weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.weights.cols(); ++c) put_f64(s.payload, m.weights(r, c));
  }
  for (Eigen::Index i = 0; i < m.intercepts.size(); ++i) put_f64(s.payload, m.intercepts[i]);
  for (Eigen::Index i = 0; i < m.vocabulary.idf().size(); ++i) put_f64(s.payload, m.vocabulary.idf()[i]);
  return s;
}

[[noreturn]] void corrupt(const std::string& what) { throw Error(ErrorKind::CorruptFile, what); }

std::string read_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) corrupt(std::string("truncated before ") + what);
  return line;
}

std::size_t parse_count(const std::string& line, std::string_view key) {
  if (line.size() <= key.size() + 1 || line.compare(0, key.size(), key) != 0 ||
      line[key.size()] != ' ') {
    corrupt("expected '" + std::string(key) + " <n>', got '" + line + "'");
  }
  std::size_t value = 0;
  for (std::size_t i = key.size() + 1; i < line.size(); ++i) {
    if (line[i] < '0' || line[i] > '9') corrupt("bad number in '" + line + "'");
    value = value * 10 + static_cast<std::size_t>(line[i] - '0');
  }
  return value;
}

std::string read_exact(std::istream& in, std::size_t n, const char* what) {
  std::string buf(n, '\0');
  in.read(buf.data(), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) corrupt(std::string("truncated ") + what);
  return buf;
}

}  // namespace

void save_model(const TrainedModel& m, std::ostream& out) {
  const Serialized s = serialize(m);
  out << kMagic << '\n'
      << "version " << TrainedModel::kFormatVersion << '\n'
      << "header " << s.header.size() << '\n'
      << "payload " << s.payload.size() << '\n';
  out.write(s.header.data(), static_cast<std::streamsize>(s.header.size()));
  out.write(s.payload.data(), static_cast<std::streamsize>(s.payload.size()));
  out << "crc32 " << hex32(crc32_of(s.header, s.payload)) << '\n';
  if (!out) throw Error(ErrorKind::Io, "failed writing model");
}

TrainedModel load_model(std::istream& in) {
  if (read_line(in, "magic") != kMagic) corrupt("not a model file (bad magic)");
  const std::size_t version = parse_count(read_line(in, "version"), "version");
  if (version != TrainedModel::kFormatVersion) {
    throw Error(ErrorKind::VersionMismatch, "model format version " + std::to_string(version) +
                                                " is not supported (expected " +
                                                std::to_string(TrainedModel::kFormatVersion) + ")");
  }
  const std::size_t header_bytes = parse_count(read_line(in, "header size"), "header");
  const std::size_t payload_bytes = parse_count(read_line(in, "payload size"), "payload");
  const std::string header = read_exact(in, header_bytes, "header");
  const std::string payload = read_exact(in, payload_bytes, "payload");
  const std::string trailer = read_line(in, "checksum");
  if (trailer != "crc32 " + hex32(crc32_of(header, payload))) corrupt("checksum mismatch");

  TrainedModel m;
  try {
    const auto h = nlohmann::json::parse(header);
    m.method_id = h.at("method_id").get<std::string>();
    const auto& v = h.at("variant");
    m.variant = {v.at("id").get<std::string>(), v.at("uses_title").get<bool>(),
                 v.at("uses_text").get<bool>(), v.at("uses_mscs").get<bool>()};
    m.preprocessing.strip_math = h.at("preprocessing").at("strip_math").get<bool>();
    m.classes = h.at("classes").get<std::vector<Subject>>();
    m.training_size = h.at("training_size").get<std::int64_t>();
    const auto& hp = h.at("hyperparams");
    m.hyperparams = {hp.at("tolerance").get<double>(), hp.at("regularization_c").get<double>(),
                     hp.at("max_iterations").get<int>(), hp.at("fit_intercept").get<bool>(),
                     hp.at("lbfgs_memory").get<int>()};
    const auto& tr = h.at("training");
    m.summary.status = status_from(tr.at("status").get<std::string>());
    m.summary.iterations = tr.at("iterations").get<int>();
    m.summary.final_loss = tr.at("final_loss").get<double>();
    m.summary.gradient_max_norm = tr.at("gradient_max_norm").get<double>();
    m.summary.loss_history = tr.at("loss_history").get<std::vector<double>>();

    const auto rows = h.at("shape").at("rows").get<Eigen::Index>();
    const auto cols = h.at("shape").at("cols").get<Eigen::Index>();
    const auto& vj = h.at("vocabulary");
    auto terms = vj.at("terms").get<std::vector<std::string>>();
    auto df = vj.at("df").get<std::vector<std::int64_t>>();
    const auto n_terms = static_cast<Eigen::Index>(terms.size());

    if (rows < 0 || cols < 0 ||
        payload.size() != static_cast<std::size_t>(8 * (rows * cols + rows + n_terms))) {
      corrupt("payload size disagrees with header shape");
    }
    if (static_cast<std::size_t>(rows) != m.classes.size()) {
      throw Error(ErrorKind::DimensionMismatch, "weights have " + std::to_string(rows) +
                                                    " rows for " + std::to_string(m.classes.size()) +
                                                    " classes");
    }
    std::size_t pos = 0;
    m.weights.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m.weights(r, c) = get_f64(payload, pos);
    }
    m.intercepts.resize(rows);
    for (Eigen::Index i = 0; i < rows; ++i) m.intercepts[i] = get_f64(payload, pos);
    Eigen::VectorXd idf(n_terms);
    for (Eigen::Index i = 0; i < n_terms; ++i) idf[i] = get_f64(payload, pos);
    m.vocabulary = Vocabulary(std::move(terms), std::move(df), vj.at("n_docs").get<std::int64_t>(),
                              std::move(idf));
  } catch (const nlohmann::json::exception& e) {
    corrupt(std::string("bad header: ") + e.what());
  }

  if (static_cast<Eigen::Index>(m.vocabulary.size()) != m.weights.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "model has " + std::to_string(m.weights.cols()) +
                                                  " weight columns but a vocabulary of " +
                                                  std::to_string(m.vocabulary.size()) + " terms");
  }
  return m;
}

void save_model(const TrainedModel& m, const std::string& path) {
  AtomicFile file(path, std::ios::binary);
  save_model(m, file.stream());
  file.commit();
}

TrainedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open model '" + path + "'");
  return load_model(in);
}

std::string model_version(const TrainedModel& m) {
  const Serialized s = serialize(m);
  return "v" + std::to_string(TrainedModel::kFormatVersion) + "-" + hex32(crc32_of(s.header, s.payload));
}

}  // namespace automsc
