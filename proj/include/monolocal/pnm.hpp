#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "monolocal/image.hpp"

namespace monolocal::pnm {

// Binary PGM (P5) / PPM (P6), maxval 255. Without comments the writer emits the
// canonical form "P6\n<w> <h>\n255\n<bytes>"; the reader also accepts '#' comment lines in the
// header and hands them back (without the leading '#') when asked.
RasterImage decode(const std::string& bytes, std::vector<std::string>* comments = nullptr);
std::string encode(const RasterImage& img, const std::vector<std::string>& comments = {});

RasterImage read(const std::filesystem::path& path, std::vector<std::string>* comments = nullptr);
void write(const std::filesystem::path& path, const RasterImage& img,
           const std::vector<std::string>& comments = {});

// Value of the first header comment of the form "key=value" (spaces trimmed).
std::string find_tag(const std::vector<std::string>& comments, const std::string& key);

}  // namespace monolocal::pnm
