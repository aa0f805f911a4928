#pragma once
//
// JSON file formats.
//
//   InstanceFile     {"n", "k", "blocks"}: blocks[i][j][r][c] = [re, im]
//   CertificateFile  {"d", "k", "widths", "alphas", "diags", "claimed_cost"}:
//                    alphas[l][r][c] = [re, im], diags[l][e][r][c] = [re, im]
//
// Doubles are written in shortest round-trip form, so write-then-read is
// bit-exact.
//

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "oplength/certificate.hpp"
#include "oplength/pipeline.hpp"
#include "oplength/simhom.hpp"

namespace oplength::io {

using json = nlohmann::json;

/// Malformed or inconsistent file content.
class FormatError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw FormatError("expected a complex value [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline CMatrix matrix_from_json(const json& j, Index rows, Index cols) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows) throw FormatError("matrix has the wrong number of rows");
  CMatrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) throw FormatError("matrix row has the wrong length");
    for (Index c = 0; c < cols; ++c) m(r, c) = complex_from_json(row[static_cast<std::size_t>(c)]);
  }
  return m;
}

// Row count of a nested array, with its first row's length as column count.
inline std::pair<Index, Index> matrix_shape(const json& j) {
  if (!j.is_array()) throw FormatError("expected a matrix");
  const Index rows = static_cast<Index>(j.size());
  const Index cols = rows > 0 && j[0].is_array() ? static_cast<Index>(j[0].size()) : 0;
  return {rows, cols};
}

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  return j.at(key);
}

template <class T>
T required(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad field '") + key + "': " + e.what());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

inline json instance_to_json(const BlockMatrix& x) {
  json blocks = json::array();
  for (Index i = 0; i < x.block_rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < x.block_cols(); ++j) row.push_back(detail::matrix_to_json(x.block(i, j).matrix()));
    blocks.push_back(std::move(row));
  }
  return {{"n", x.block_rows()}, {"k", x.order()}, {"blocks", std::move(blocks)}};
}

inline BlockMatrix instance_from_json(const json& j) {
  const auto n = detail::required<Index>(j, "n");
  const auto k = detail::required<Index>(j, "k");
  if (n < 1 || k < 1) throw FormatError("instance: n and k must be positive");
  const auto& blocks = detail::field(j, "blocks");
  if (!blocks.is_array() || static_cast<Index>(blocks.size()) != n) throw FormatError("instance: expected n block rows");
  BlockMatrix x(n, n, k);
  for (Index i = 0; i < n; ++i) {
    const auto& row = blocks[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != n) throw FormatError("instance: expected n blocks per row");
    for (Index jj = 0; jj < n; ++jj)
      x.set_block(i, jj, AlgebraElement(detail::matrix_from_json(row[static_cast<std::size_t>(jj)], k, k)));
  }
  return x;
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

inline json certificate_to_json(const FactorizationCertificate& c) {
  json alphas = json::array();
  for (const auto& a : c.alphas()) alphas.push_back(detail::matrix_to_json(a.matrix()));
  json diags = json::array();
  for (const auto& D : c.diags()) {
    json entries = json::array();
    for (const auto& e : D.entries()) entries.push_back(detail::matrix_to_json(e.matrix()));
    diags.push_back(std::move(entries));
  }
  return {{"d", c.depth()},
          {"k", c.order()},
          {"widths", c.widths()},
          {"alphas", std::move(alphas)},
          {"diags", std::move(diags)},
          {"claimed_cost", c.claimed_cost()}};
}

inline FactorizationCertificate certificate_from_json(const json& j) {
  const auto d = detail::required<int>(j, "d");
  const auto k = detail::required<Index>(j, "k");
  const auto widths = detail::required<std::vector<Index>>(j, "widths");
  const auto claimed = detail::required<double>(j, "claimed_cost");
  if (d < 1 || k < 1) throw FormatError("certificate: d and k must be positive");
  if (static_cast<int>(widths.size()) != d + 2) throw FormatError("certificate: expected d + 2 widths");
  const auto& aj = detail::field(j, "alphas");
  const auto& dj = detail::field(j, "diags");
  if (!aj.is_array() || static_cast<int>(aj.size()) != d + 1) throw FormatError("certificate: expected d + 1 alphas");
  if (!dj.is_array() || static_cast<int>(dj.size()) != d) throw FormatError("certificate: expected d diagonals");

  std::vector<ScalarMatrix> alphas;
  for (int l = 0; l <= d; ++l)
    alphas.emplace_back(detail::matrix_from_json(aj[static_cast<std::size_t>(l)], widths[static_cast<std::size_t>(l)],
                                                 widths[static_cast<std::size_t>(l) + 1]));
  std::vector<DiagonalMatrix> diags;
  for (int l = 0; l < d; ++l) {
    const auto& entries = dj[static_cast<std::size_t>(l)];
    if (!entries.is_array() || static_cast<Index>(entries.size()) != widths[static_cast<std::size_t>(l) + 1])
      throw FormatError("certificate: diagonal " + std::to_string(l + 1) + " has the wrong size");
    std::vector<AlgebraElement> es;
    for (const auto& e : entries) es.emplace_back(detail::matrix_from_json(e, k, k));
    diags.emplace_back(k, std::move(es));
  }
  return FactorizationCertificate(k, std::move(alphas), std::move(diags), claimed);
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline json to_json(const VerificationReport& r) {
  return {{"recon_error", r.recon_error}, {"cost", r.cost}, {"lower", r.lower}, {"ratio", r.ratio}, {"pass", r.pass}};
}

inline json to_json(const PipelineReport& r) {
  json j = {{"n", r.n},         {"k", r.k},         {"epsilon", r.epsilon},         {"K", r.near_cost},
            {"depth", r.depth}, {"cost", r.cost},   {"bound", r.bound},             {"recon_error", r.recon_error},
            {"pass", r.pass},   {"elapsed_ms", r.elapsed_ms}};
  j["seed"] = r.seed ? json(*r.seed) : json(nullptr);
  return j;
}

inline json to_json(const UniformityReport& r) {
  return {{"construction", r.construction}, {"n", r.n},
          {"k", r.k},                       {"trials", r.trials},
          {"widths", r.widths},             {"digest", r.digest},
          {"identical", r.identical},       {"differing_trial", r.differing_trial},
          {"first_difference", r.first_difference}};
}

inline json to_json(const HaagerupReport& r) {
  return {{"lower", r.lower},
          {"oracle", r.oracle},
          {"level", r.level},
          {"restarts", r.restarts},
          {"found_at_level", r.estimate.found_at_level},
          {"consistent", r.consistent},
          {"target_applies", r.target_applies},
          {"target_met", r.target_met}};
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write '" + path + "'");
  out << j.dump() << '\n';
}

inline BlockMatrix read_instance(const std::string& path) { return instance_from_json(read_json_file(path)); }
inline void write_instance(const std::string& path, const BlockMatrix& x) { write_json_file(path, instance_to_json(x)); }
inline FactorizationCertificate read_certificate(const std::string& path) {
  return certificate_from_json(read_json_file(path));
}
inline void write_certificate(const std::string& path, const FactorizationCertificate& c) {
  write_json_file(path, certificate_to_json(c));
}

}  // namespace oplength::io
