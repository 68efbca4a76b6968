#pragma once

#include <filesystem>

#include "sublift/types.hpp"

namespace sublift {

// 8-bit grayscale PGM (P5 binary or P2 ASCII); values are mapped to [0, 1]
// by dividing by maxval.
ScalarField read_pgm(const std::filesystem::path& path);

// Binary P5, value v stored as round(255 * v) clamped to [0, 255].
void write_pgm(const std::filesystem::path& path, const ScalarField& image);

// Grayscale PFM ("Pf"). Rows are stored bottom-to-top; a negative scale
// marks little-endian data.
ScalarField read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const ScalarField& image);

// Picks the reader from the file extension (.pgm / .pfm).
ScalarField read_image(const std::filesystem::path& path);

}  // namespace sublift
