// Copyright 2026 The hshrtf Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Fitted models, decoding, and the HSHC / SHMB binary formats.
//
// HSHC (little-endian):
//   "HSHC" | version u16 | flags u16 (bit 0 = psi_symmetric) | n_max u16 |
//   l_max u16 | m_max u16 | reserved u16 | sample_rate f64 | count u32 |
//   coefficients f64 x count (canonical (n, l, m) order) | metadata length u32
//   | metadata (UTF-8 "key=value\n" lines) | CRC-32 of all preceding bytes u32
//
// SHMB uses the same framing:
//   "SHMB" | version u16 | flags u16 | sh_order u16 | reserved u16 |
//   sample_rate f64 | num_bins u32 | count u32 | coefficients f64 x count
//   (bin-major, (l, m) lexicographic within a bin) | metadata length u32 |
//   metadata | CRC-32 u32
//
// The metadata block always starts with "mapping=<mode>"; the remaining lines
// are the model's provenance record in key order.

#ifndef HSHRTF_MODEL_HPP_
#define HSHRTF_MODEL_HPP_

#include <Eigen/Core>

#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hshrtf/basis.hpp"
#include "hshrtf/coords.hpp"
#include "hshrtf/error.hpp"

namespace hshrtf {

inline constexpr std::uint16_t kModelFormatVersion = 1;
inline constexpr std::string_view kHshMagic = "HSHC";
inline constexpr std::string_view kShMagic = "SHMB";

using Provenance = std::map<std::string, std::string>;

// HSH coefficients (dB domain) plus everything needed to decode them.
class CoefficientSet {
 public:
  CoefficientSet(IndexSet index_set, std::vector<double> coefficients,
                 double sample_rate,
                 MappingMode mapping_mode = MappingMode::kLinearHalfSphere,
                 Provenance provenance = {})
      : index_set_(std::move(index_set)),
        coefficients_(std::move(coefficients)),
        mapping_(sample_rate, mapping_mode),
        provenance_(std::move(provenance)) {
    if (coefficients_.size() != index_set_.size()) {
      throw InvalidArgument("CoefficientSet: " +
                            std::to_string(coefficients_.size()) +
                            " coefficients for " +
                            std::to_string(index_set_.size()) + " indices");
    }
    for (double c : coefficients_) {
      if (!std::isfinite(c)) {
        throw InvalidArgument("CoefficientSet: non-finite coefficient");
      }
    }
  }

  const IndexSet& index_set() const noexcept { return index_set_; }
  std::span<const double> coefficients() const noexcept { return coefficients_; }
  double sample_rate() const noexcept { return mapping_.sample_rate(); }
  MappingMode mapping_mode() const noexcept { return mapping_.mode(); }
  const FrequencyMapping& mapping() const noexcept { return mapping_; }
  const Provenance& provenance() const noexcept { return provenance_; }

  /// Coefficient of idx, or 0 when idx is not part of the set.
  double coefficient(const HshIndex& idx) const {
    const auto pos = index_set_.find(idx);
    return pos ? coefficients_[*pos] : 0.0;
  }

 private:
  IndexSet index_set_;
  std::vector<double> coefficients_;
  FrequencyMapping mapping_;
  Provenance provenance_;
};

// Per-bin real-SH model: coefficients(bin, sh_slot(l, m)).
class ShModel {
 public:
  ShModel(int sh_order, double sample_rate, Eigen::MatrixXd coefficients,
          Provenance provenance = {})
      : sh_order_(sh_order),
        sample_rate_(sample_rate),
        coefficients_(std::move(coefficients)),
        provenance_(std::move(provenance)) {
    if (sh_order < 0 || sh_order > kMaxOrder) {
      throw InvalidArgument("ShModel: sh_order out of range");
    }
    if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
      throw InvalidArgument("ShModel: sample rate must be positive");
    }
    if (coefficients_.cols() != static_cast<Eigen::Index>(sh_count(sh_order))) {
      throw InvalidArgument("ShModel: coefficient matrix has " +
                            std::to_string(coefficients_.cols()) +
                            " columns, expected " +
                            std::to_string(sh_count(sh_order)));
    }
    if (!coefficients_.allFinite()) {
      throw InvalidArgument("ShModel: non-finite coefficient");
    }
  }

  int sh_order() const noexcept { return sh_order_; }
  double sample_rate() const noexcept { return sample_rate_; }
  int num_bins() const noexcept { return static_cast<int>(coefficients_.rows()); }
  const Eigen::MatrixXd& coefficients() const noexcept { return coefficients_; }
  const Provenance& provenance() const noexcept { return provenance_; }
  std::size_t coefficient_count() const {
    return static_cast<std::size_t>(coefficients_.size());
  }

 private:
  int sh_order_;
  double sample_rate_;
  Eigen::MatrixXd coefficients_;
  Provenance provenance_;
};

namespace detail {

// Groups an index set by its (n, l) radial factor and (l, m) SH slot, which
// lets product grids be evaluated as R(psi) x Y(phi, theta).
struct FactoredLayout {
  std::vector<std::pair<int, int>> radial_pairs;  // unique (n, l)
  std::vector<std::size_t> pair_of;               // per index
  std::vector<std::size_t> slot_of;               // per index
  std::size_t sh_slots = 0;

  explicit FactoredLayout(const IndexSet& set) {
    std::map<std::pair<int, int>, std::size_t> pos;
    pair_of.reserve(set.size());
    slot_of.reserve(set.size());
    for (const HshIndex& idx : set) {
      auto [it, inserted] =
          pos.emplace(std::make_pair(idx.n, idx.l), radial_pairs.size());
      if (inserted) radial_pairs.emplace_back(idx.n, idx.l);
      pair_of.push_back(it->second);
      slot_of.push_back(sh_slot(idx.l, idx.m));
    }
    sh_slots = sh_count(set.l_max());
  }
};

// psis.size() x radial_pairs.size() matrix of radial factors.
inline Eigen::MatrixXd radial_matrix(const IndexSet& set,
                                     const FactoredLayout& layout,
                                     std::span<const double> psis) {
  Eigen::MatrixXd r(static_cast<Eigen::Index>(psis.size()),
                    static_cast<Eigen::Index>(layout.radial_pairs.size()));
  const int lw = set.l_max() + 1;
  std::vector<double> table(
      static_cast<std::size_t>((set.n_max() + 1) * lw));
  for (std::size_t j = 0; j < psis.size(); ++j) {
    eval_radial_table(set, psis[j], table);
    for (std::size_t p = 0; p < layout.radial_pairs.size(); ++p) {
      const auto [n, l] = layout.radial_pairs[p];
      r(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(p)) =
          table[static_cast<std::size_t>(n * lw + l)];
    }
  }
  return r;
}

// dirs.size() x sh_count(order) matrix of real SH values.
inline Eigen::MatrixXd sh_matrix(int order,
                                 std::span<const SphericalAngles> dirs) {
  Eigen::MatrixXd y(static_cast<Eigen::Index>(dirs.size()),
                    static_cast<Eigen::Index>(sh_count(order)));
  std::vector<double> row(sh_count(order));
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    eval_sh_row(order, dirs[d].phi, dirs[d].theta, row);
    for (std::size_t s = 0; s < row.size(); ++s) {
      y(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(s)) = row[s];
    }
  }
  return y;
}

}  // namespace detail

/// Model value at an arbitrary point of the 3-sphere (psi in [0, pi]).
inline double evaluate(const CoefficientSet& model, const Direction4D& at) {
  const auto row =
      eval_basis_row(model.index_set(), at.phi(), at.theta(), at.psi());
  const auto c = model.coefficients();
  double sum = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) sum += c[j] * row[j];
  return sum;
}

/// Magnitude in dB at direction (phi, theta) and frequency f in
/// [0, sample_rate / 2].
inline double decode(const CoefficientSet& model, double phi, double theta,
                     double f) {
  return evaluate(model,
                  Direction4D(phi, theta, freq_to_psi(f, model.mapping())));
}

/// dirs.size() x freqs.size() matrix with element (i, j) equal to
/// decode(model, dirs[i], freqs[j]).
inline Eigen::MatrixXd decode_grid(const CoefficientSet& model,
                                   std::span<const SphericalAngles> dirs,
                                   std::span<const double> freqs) {
  std::vector<double> psis;
  psis.reserve(freqs.size());
  for (double f : freqs) psis.push_back(freq_to_psi(f, model.mapping()));
  std::vector<SphericalAngles> checked;
  checked.reserve(dirs.size());
  for (const auto& d : dirs) {
    const Direction4D v(d.phi, d.theta, 0.0);
    checked.push_back({v.phi(), v.theta()});
  }
  if (dirs.empty() || freqs.empty()) {
    return Eigen::MatrixXd(static_cast<Eigen::Index>(dirs.size()),
                           static_cast<Eigen::Index>(freqs.size()));
  }
  const IndexSet& set = model.index_set();
  const detail::FactoredLayout layout(set);
  const Eigen::MatrixXd r = detail::radial_matrix(set, layout, psis);
  const Eigen::MatrixXd y = detail::sh_matrix(set.l_max(), checked);
  // q(slot, freq) = sum of alpha_i R_i(freq) over indices sharing the slot.
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(layout.sh_slots), r.rows());
  const auto c = model.coefficients();
  for (std::size_t i = 0; i < set.size(); ++i) {
    q.row(static_cast<Eigen::Index>(layout.slot_of[i])) +=
        c[i] * r.col(static_cast<Eigen::Index>(layout.pair_of[i])).transpose();
  }
  return y * q;
}

/// SH value at (phi, theta) using the coefficient row of bin_index.
inline double decode_sh(const ShModel& model, double phi, double theta,
                        int bin_index) {
  if (bin_index < 0 || bin_index >= model.num_bins()) {
    throw InvalidArgument("decode_sh: bin " + std::to_string(bin_index) +
                          " outside [0, " + std::to_string(model.num_bins()) +
                          ")");
  }
  const Direction4D v(phi, theta, 0.0);
  const auto row = eval_sh_row(model.sh_order(), v.phi(), v.theta());
  double sum = 0.0;
  for (std::size_t s = 0; s < row.size(); ++s) {
    sum += model.coefficients()(bin_index, static_cast<Eigen::Index>(s)) *
           row[s];
  }
  return sum;
}

/// dirs.size() x num_bins reconstruction of an SH model.
inline Eigen::MatrixXd decode_sh_grid(const ShModel& model,
                                      std::span<const SphericalAngles> dirs) {
  const Eigen::MatrixXd y = detail::sh_matrix(model.sh_order(), dirs);
  return y * model.coefficients().transpose();
}

// ---------------------------------------------------------------------------
// Serialization

/// CRC-32 (IEEE 802.3, reflected polynomial 0xEDB88320).
inline std::uint32_t crc32(std::span<const std::uint8_t> bytes,
                           std::uint32_t crc = 0) {
  static constexpr auto kTable = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  crc = ~crc;
  for (std::uint8_t b : bytes) crc = kTable[(crc ^ b) & 0xFFu] ^ (crc >> 8);
  return ~crc;
}

namespace detail {

class ByteWriter {
 public:
  void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  void finish() { u32(crc32(buf_)); }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> data, std::string_view what)
      : data_(data), what_(what) {}

  std::span<const std::uint8_t> take(std::size_t n, const char* field) {
    if (data_.size() - pos_ < n) {
      throw FormatError(std::string(what_) + ": truncated payload while reading " +
                        field);
    }
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint16_t u16(const char* field) {
    auto s = take(2, field);
    return static_cast<std::uint16_t>(s[0] | (s[1] << 8));
  }
  std::uint32_t u32(const char* field) {
    auto s = take(4, field);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | s[static_cast<std::size_t>(i)];
    return v;
  }
  double f64(const char* field) {
    auto s = take(8, field);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | s[static_cast<std::size_t>(i)];
    return std::bit_cast<double>(v);
  }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::string_view what_;
};

inline std::string encode_metadata(MappingMode mode, const Provenance& prov) {
  std::string out = std::string("mapping=") + to_string(mode) + "\n";
  for (const auto& [key, value] : prov) {
    if (key.empty() || key == "mapping" ||
        key.find_first_of("=\n") != std::string::npos ||
        value.find('\n') != std::string::npos) {
      throw InvalidArgument("metadata entry '" + key +
                            "' cannot be serialized");
    }
    out += key + "=" + value + "\n";
  }
  return out;
}

inline std::pair<MappingMode, Provenance> decode_metadata(
    std::string_view text, std::string_view what) {
  Provenance prov;
  MappingMode mode = MappingMode::kLinearHalfSphere;
  bool have_mapping = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw FormatError(std::string(what) + ": malformed metadata line '" +
                        std::string(line) + "'");
    }
    std::string key(line.substr(0, eq));
    std::string value(line.substr(eq + 1));
    if (key == "mapping") {
      if (value != to_string(MappingMode::kLinearHalfSphere)) {
        throw FormatError(std::string(what) + ": unknown frequency mapping '" +
                          value + "'");
      }
      have_mapping = true;
      continue;
    }
    prov[std::move(key)] = std::move(value);
  }
  if (!have_mapping) {
    throw FormatError(std::string(what) + ": metadata lacks mapping entry");
  }
  return {mode, std::move(prov)};
}

inline std::uint16_t checked_u16(int v, const char* field) {
  if (v < 0 || v > 0xFFFF) {
    throw InvalidArgument(std::string(field) + " does not fit in 16 bits");
  }
  return static_cast<std::uint16_t>(v);
}

// Checks magic and version; returns a reader positioned after the version.
inline ByteReader open_frame(std::span<const std::uint8_t> data,
                             std::string_view magic, std::string_view what) {
  if (data.size() < 4 ||
      std::memcmp(data.data(), magic.data(), magic.size()) != 0) {
    throw FormatError(std::string(what) + ": bad magic, expected '" +
                      std::string(magic) + "'");
  }
  ByteReader reader(data, what);
  reader.take(4, "magic");
  const std::uint16_t version = reader.u16("version");
  if (version != kModelFormatVersion) {
    throw FormatError(std::string(what) + ": unsupported format version " +
                      std::to_string(version) + " (expected " +
                      std::to_string(kModelFormatVersion) + ")");
  }
  return reader;
}

// Reads the trailing CRC and verifies it against everything before it.
inline void close_frame(ByteReader& reader, std::span<const std::uint8_t> data,
                        std::string_view what) {
  const std::size_t body = reader.position();
  const std::uint32_t stored = reader.u32("checksum");
  if (reader.remaining() != 0) {
    throw FormatError(std::string(what) + ": trailing bytes after checksum");
  }
  const std::uint32_t actual = crc32(data.first(body));
  if (stored != actual) {
    throw FormatError(std::string(what) + ": checksum mismatch (stored " +
                      std::to_string(stored) + ", computed " +
                      std::to_string(actual) + ")");
  }
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize(const CoefficientSet& model) {
  const IndexSet& set = model.index_set();
  detail::ByteWriter w;
  w.bytes(kHshMagic);
  w.u16(kModelFormatVersion);
  w.u16(set.psi_symmetric() ? 1 : 0);
  w.u16(detail::checked_u16(set.n_max(), "n_max"));
  w.u16(detail::checked_u16(set.l_max(), "l_max"));
  w.u16(detail::checked_u16(set.m_max(), "m_max"));
  w.u16(0);
  w.f64(model.sample_rate());
  w.u32(static_cast<std::uint32_t>(model.coefficients().size()));
  for (double c : model.coefficients()) w.f64(c);
  const std::string meta =
      detail::encode_metadata(model.mapping_mode(), model.provenance());
  w.u32(static_cast<std::uint32_t>(meta.size()));
  w.bytes(meta);
  w.finish();
  return w.take();
}

inline CoefficientSet deserialize_coefficient_set(
    std::span<const std::uint8_t> data, std::string_view what = "HSHC") {
  auto r = detail::open_frame(data, kHshMagic, what);
  const std::uint16_t flags = r.u16("flags");
  if ((flags & ~1u) != 0) {
    throw FormatError(std::string(what) + ": unknown flag bits set");
  }
  const int n_max = r.u16("n_max");
  const int l_max = r.u16("l_max");
  const int m_max = r.u16("m_max");
  if (r.u16("reserved") != 0) {
    throw FormatError(std::string(what) + ": reserved header field is nonzero");
  }
  const double fs = r.f64("sample_rate");
  const std::uint32_t count = r.u32("coefficient count");
  IndexSet set;
  try {
    set = build_index_set(n_max, l_max, m_max, (flags & 1u) != 0);
  } catch (const Error& e) {
    throw FormatError(std::string(what) + ": invalid index limits: " + e.what());
  }
  if (count != set.size()) {
    throw FormatError(std::string(what) + ": coefficient count " +
                      std::to_string(count) + " does not match index set size " +
                      std::to_string(set.size()));
  }
  if (r.remaining() / 8 < count) {
    throw FormatError(std::string(what) + ": truncated payload while reading coefficients");
  }
  std::vector<double> coeffs(count);
  for (auto& c : coeffs) c = r.f64("coefficients");
  const std::uint32_t meta_len = r.u32("metadata length");
  auto meta = r.take(meta_len, "metadata");
  detail::close_frame(r, data, what);
  auto [mode, prov] = detail::decode_metadata(
      std::string_view(reinterpret_cast<const char*>(meta.data()), meta.size()),
      what);
  try {
    return CoefficientSet(std::move(set), std::move(coeffs), fs, mode,
                          std::move(prov));
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

inline std::vector<std::uint8_t> serialize(const ShModel& model) {
  detail::ByteWriter w;
  w.bytes(kShMagic);
  w.u16(kModelFormatVersion);
  w.u16(0);
  w.u16(detail::checked_u16(model.sh_order(), "sh_order"));
  w.u16(0);
  w.f64(model.sample_rate());
  w.u32(static_cast<std::uint32_t>(model.num_bins()));
  w.u32(static_cast<std::uint32_t>(model.coefficient_count()));
  const auto& c = model.coefficients();
  for (Eigen::Index b = 0; b < c.rows(); ++b) {
    for (Eigen::Index s = 0; s < c.cols(); ++s) w.f64(c(b, s));
  }
  const std::string meta = detail::encode_metadata(
      MappingMode::kLinearHalfSphere, model.provenance());
  w.u32(static_cast<std::uint32_t>(meta.size()));
  w.bytes(meta);
  w.finish();
  return w.take();
}

inline ShModel deserialize_sh_model(std::span<const std::uint8_t> data,
                                    std::string_view what = "SHMB") {
  auto r = detail::open_frame(data, kShMagic, what);
  if (r.u16("flags") != 0) {
    throw FormatError(std::string(what) + ": unknown flag bits set");
  }
  const int order = r.u16("sh_order");
  if (r.u16("reserved") != 0) {
    throw FormatError(std::string(what) + ": reserved header field is nonzero");
  }
  const double fs = r.f64("sample_rate");
  const std::uint32_t bins = r.u32("num_bins");
  const std::uint32_t count = r.u32("coefficient count");
  if (order > kMaxOrder ||
      static_cast<std::uint64_t>(bins) * sh_count(order) != count) {
    throw FormatError(std::string(what) + ": coefficient count " +
                      std::to_string(count) + " inconsistent with order " +
                      std::to_string(order) + " and " + std::to_string(bins) +
                      " bins");
  }
  if (r.remaining() / 8 < count) {
    throw FormatError(std::string(what) + ": truncated payload while reading coefficients");
  }
  Eigen::MatrixXd c(static_cast<Eigen::Index>(bins),
                    static_cast<Eigen::Index>(sh_count(order)));
  for (Eigen::Index b = 0; b < c.rows(); ++b) {
    for (Eigen::Index s = 0; s < c.cols(); ++s) c(b, s) = r.f64("coefficients");
  }
  const std::uint32_t meta_len = r.u32("metadata length");
  auto meta = r.take(meta_len, "metadata");
  detail::close_frame(r, data, what);
  auto [mode, prov] = detail::decode_metadata(
      std::string_view(reinterpret_cast<const char*>(meta.data()), meta.size()),
      what);
  (void)mode;
  try {
    return ShModel(order, fs, std::move(c), std::move(prov));
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path + ": cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::string& path,
                             std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(path + ": cannot open file for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError(path + ": write failed");
}

inline void save_model(const CoefficientSet& model, const std::string& path) {
  write_file_bytes(path, serialize(model));
}

inline CoefficientSet load_model(const std::string& path) {
  return deserialize_coefficient_set(read_file_bytes(path), path);
}

inline void save_sh_model(const ShModel& model, const std::string& path) {
  write_file_bytes(path, serialize(model));
}

inline ShModel load_sh_model(const std::string& path) {
  return deserialize_sh_model(read_file_bytes(path), path);
}

}  // namespace hshrtf

#endif  // HSHRTF_MODEL_HPP_
