#include "rankshape/trajectory_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "rankshape/error.hpp"

namespace rankshape {

namespace {

constexpr char kMagic[4] = {'H', 'S', 'T', 'B'};
constexpr std::size_t kHeaderBytes = 16;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(std::span<const std::byte> bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(std::to_integer<unsigned>(bytes[at + static_cast<std::size_t>(i)])) << (8 * i);
  }
  return v;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string encode_hstb(const Trajectory& h, const std::optional<std::string>& metadata) {
  const auto t = static_cast<std::uint32_t>(h.rows());
  const auto d = static_cast<std::uint32_t>(h.dim());
  std::string out;
  out.reserve(kHeaderBytes + 4ull * t * d + (metadata ? metadata->size() + 4 : 0));
  out.append(kMagic, 4);
  put_u32(out, kHstbVersion);
  put_u32(out, t);
  put_u32(out, d);
  for (Eigen::Index r = 0; r < h.rows(); ++r) {
    for (Eigen::Index c = 0; c < h.dim(); ++c) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(h.values()(r, c))));
    }
  }
  if (metadata) {
    put_u32(out, static_cast<std::uint32_t>(metadata->size()));
    out.append(*metadata);
  }
  return out;
}

TrajectoryFile decode_hstb(std::span<const std::byte> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::kBadMagic, "expected \"HSTB\"");
  }
  if (bytes.size() < kHeaderBytes) throw Error(ErrorCode::kTruncatedPayload, "header is incomplete");
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kHstbVersion) {
    throw Error(ErrorCode::kUnsupportedVersion, "version " + std::to_string(version));
  }
  const std::uint32_t t = get_u32(bytes, 8);
  const std::uint32_t d = get_u32(bytes, 12);
  if (t == 0 || d == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "T and d must be >= 1, got " + std::to_string(t) + "x" + std::to_string(d));
  }
  const std::uint64_t payload = 4ull * t * d;
  if (bytes.size() - kHeaderBytes < payload) {
    throw Error(ErrorCode::kTruncatedPayload, "expected " + std::to_string(payload) + " payload bytes, found " +
                                                  std::to_string(bytes.size() - kHeaderBytes));
  }

  Eigen::MatrixXd values(t, d);
  std::size_t at = kHeaderBytes;
  for (std::uint32_t r = 0; r < t; ++r) {
    for (std::uint32_t c = 0; c < d; ++c, at += 4) {
      const float v = std::bit_cast<float>(get_u32(bytes, at));
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kNonFiniteValue, "row " + std::to_string(r + 1) + ", column " + std::to_string(c + 1));
      }
      values(r, c) = v;
    }
  }

  std::optional<std::string> metadata;
  const std::size_t rest = bytes.size() - at;
  if (rest > 0) {
    if (rest < 4) throw Error(ErrorCode::kTruncatedPayload, "metadata length is incomplete");
    const std::uint32_t len = get_u32(bytes, at);
    at += 4;
    if (bytes.size() - at != len) {
      throw Error(ErrorCode::kTruncatedPayload, "metadata block expected " + std::to_string(len) + " bytes, found " +
                                                    std::to_string(bytes.size() - at));
    }
    metadata.emplace(reinterpret_cast<const char*>(bytes.data() + at), len);
  }
  return {Trajectory(std::move(values)), std::move(metadata)};
}

Trajectory parse_csv_trajectory(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;

    std::vector<double> row;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      const std::string_view cell = trim(rest.substr(0, comma));
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ", column " + std::to_string(row.size() + 1) +
                                           ": not a number: \"" + std::string(cell) + "\"");
      }
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kNonFiniteValue,
                    "row " + std::to_string(rows.size() + 1) + ", column " + std::to_string(row.size() + 1));
      }
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::kDimensionMismatch, "row " + std::to_string(rows.size() + 1) + " has " +
                                                     std::to_string(row.size()) + " columns, expected " +
                                                     std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::kDimensionMismatch, "no rows");

  Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return Trajectory(std::move(values));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_trajectory(const std::filesystem::path& path, const Trajectory& h,
                      const std::optional<std::string>& metadata) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  if (path.extension() == ".csv") {
    char buf[32];
    for (Eigen::Index r = 0; r < h.rows(); ++r) {
      for (Eigen::Index c = 0; c < h.dim(); ++c) {
        const auto res = std::to_chars(buf, buf + sizeof buf, h.values()(r, c));
        if (c > 0) out << ',';
        out.write(buf, res.ptr - buf);
      }
      out << '\n';
    }
  } else {
    const std::string bytes = encode_hstb(h, metadata);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

TrajectoryFile read_trajectory_file(const std::filesystem::path& path) {
  const std::string data = read_text_file(path);
  if (path.extension() == ".csv") return {parse_csv_trajectory(data), std::nullopt};
  return decode_hstb(std::as_bytes(std::span(data.data(), data.size())));
}

Trajectory read_trajectory(const std::filesystem::path& path) { return read_trajectory_file(path).matrix; }

}  // namespace rankshape
