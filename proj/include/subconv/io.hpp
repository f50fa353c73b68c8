#pragma once

// File formats.
//   vector: uint64 little-endian length, then that many little-endian IEEE-754 doubles
//   mask:   JSON {"n": .., "delta": .., "seed": .., "omega": [1-based indices]}
//   matrix: JSON {"rows": .., "cols": .., "data": [row-major values]}

#include <filesystem>
#include <string>
#include <vector>

#include "subconv/measurement.hpp"
#include "subconv/types.hpp"

namespace subconv::io {

std::string encode_vector(const Vector& v);
Vector decode_vector(const std::string& bytes);

void write_vector(const std::filesystem::path& path, const Vector& v);
Vector read_vector(const std::filesystem::path& path);

std::string mask_to_json(const SelectorMask& mask);
SelectorMask mask_from_json(const std::string& text);

std::string matrix_to_json(const Matrix& a);
Matrix matrix_from_json(const std::string& text);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace subconv::io
