#include "subconv/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace subconv::io {

namespace {

static_assert(sizeof(double) == 8);

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t offset) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  return v;
}

}  // namespace

std::string encode_vector(const Vector& v) {
  std::string out;
  out.reserve(8 * (v.size() + 1));
  put_u64(out, static_cast<std::uint64_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) put_u64(out, std::bit_cast<std::uint64_t>(v[i]));
  return out;
}

Vector decode_vector(const std::string& bytes) {
  if (bytes.size() < 8) throw InvalidArgument("decode_vector: missing length header");
  const std::uint64_t n = get_u64(bytes, 0);
  if ((bytes.size() - 8) / 8 != n || (bytes.size() - 8) % 8 != 0)
    throw InvalidArgument("decode_vector: payload size does not match header");
  Vector v(static_cast<Eigen::Index>(n));
  for (std::uint64_t i = 0; i < n; ++i) v[i] = std::bit_cast<double>(get_u64(bytes, 8 + 8 * i));
  return v;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_vector(const std::filesystem::path& path, const Vector& v) { write_text(path, encode_vector(v)); }

Vector read_vector(const std::filesystem::path& path) { return decode_vector(read_text(path)); }

std::string mask_to_json(const SelectorMask& mask) {
  nlohmann::ordered_json j;
  j["n"] = mask.n;
  j["delta"] = mask.delta;
  j["seed"] = mask.seed;
  std::vector<std::size_t> one_based;
  one_based.reserve(mask.omega.size());
  for (std::size_t i : mask.omega) one_based.push_back(i + 1);
  j["omega"] = one_based;
  return j.dump();
}

SelectorMask mask_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const auto n = j.at("n").get<std::size_t>();
  std::vector<std::size_t> omega;
  for (const auto& idx : j.at("omega")) {
    const auto one_based = idx.get<std::size_t>();
    if (one_based < 1 || one_based > n) throw InvalidArgument("mask: index out of range");
    omega.push_back(one_based - 1);
  }
  return mask_from_indices(n, std::move(omega), j.value("delta", 1.0), j.value("seed", std::uint64_t{0}));
}

std::string matrix_to_json(const Matrix& a) {
  nlohmann::ordered_json j;
  j["rows"] = a.rows();
  j["cols"] = a.cols();
  std::vector<double> data;
  data.reserve(a.size());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index k = 0; k < a.cols(); ++k) data.push_back(a(i, k));
  j["data"] = data;
  return j.dump();
}

Matrix matrix_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size())
    throw InvalidArgument("matrix: data length does not match rows*cols");
  Matrix a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k) a(i, k) = data[static_cast<std::size_t>(i * cols + k)];
  return a;
}

}  // namespace subconv::io
