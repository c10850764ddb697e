#include "monolocal/pnm.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace monolocal::pnm {

namespace {

class HeaderReader {
 public:
  HeaderReader(const std::string& bytes, std::vector<std::string>* comments)
      : bytes_(bytes), comments_(comments) {}

  std::string token() {
    skip_space_and_comments();
    std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      if (bytes_[pos_] == '#') break;
      ++pos_;
    }
    if (start == pos_) throw Error(ErrorCode::ParseError, "truncated PNM header");
    return bytes_.substr(start, pos_ - start);
  }

  int integer() {
    std::string t = token();
    for (char c : t) {
      if (!std::isdigit(static_cast<unsigned char>(c))) {
        throw Error(ErrorCode::ParseError, "bad PNM header integer '" + t + "'");
      }
    }
    if (t.size() > 9) throw Error(ErrorCode::ParseError, "PNM header integer too large");
    return std::stoi(t);
  }

  // Exactly one whitespace byte separates the maxval from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw Error(ErrorCode::ParseError, "missing whitespace before PNM raster");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      char c = bytes_[pos_];
      if (c == '#') {
        std::size_t end = bytes_.find('\n', pos_);
        if (end == std::string::npos) end = bytes_.size();
        if (comments_) comments_->push_back(bytes_.substr(pos_ + 1, end - pos_ - 1));
        pos_ = end;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  std::vector<std::string>* comments_;
  std::size_t pos_ = 0;
};

}  // namespace

RasterImage decode(const std::string& bytes, std::vector<std::string>* comments) {
  HeaderReader header(bytes, comments);
  const std::string magic = header.token();
  int channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw Error(ErrorCode::ParseError, "unsupported PNM magic '" + magic + "'");
  }
  const int width = header.integer();
  const int height = header.integer();
  const int maxval = header.integer();
  if (width < 1 || height < 1) throw Error(ErrorCode::ParseError, "PNM dimensions must be >= 1");
  if (maxval != 255) throw Error(ErrorCode::ParseError, "only maxval 255 is supported");
  const std::size_t start = header.raster_start();
  const std::size_t need = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() - start < need) throw Error(ErrorCode::ParseError, "truncated PNM raster");

  RasterImage img(width, height, channels);
  auto dst = img.data();
  for (std::size_t i = 0; i < need; ++i) dst[i] = static_cast<std::uint8_t>(bytes[start + i]);
  return img;
}

std::string encode(const RasterImage& img, const std::vector<std::string>& comments) {
  std::ostringstream os;
  os << (img.channels() == 1 ? "P5" : "P6") << '\n';
  for (const auto& c : comments) {
    if (c.find('\n') != std::string::npos) throw Error(ErrorCode::InvalidArgument, "PNM comment contains a newline");
    os << '#' << c << '\n';
  }
  os << img.width() << ' ' << img.height() << '\n'
     << 255 << '\n';
  std::string out = os.str();
  out.append(reinterpret_cast<const char*>(img.data().data()), img.data().size());
  return out;
}

RasterImage read(const std::filesystem::path& path, std::vector<std::string>* comments) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode(buf.str(), comments);
}

void write(const std::filesystem::path& path, const RasterImage& img, const std::vector<std::string>& comments) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  const std::string bytes = encode(img, comments);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

std::string find_tag(const std::vector<std::string>& comments, const std::string& key) {
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  for (const auto& c : comments) {
    const auto eq = c.find('=');
    if (eq == std::string::npos) continue;
    if (trim(c.substr(0, eq)) == key) return trim(c.substr(eq + 1));
  }
  return {};
}

}  // namespace monolocal::pnm
