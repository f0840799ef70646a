#include "lesionseg/io_image.hpp"

#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cmath>

namespace lesionseg {

Raster load_image(const std::filesystem::path& file) {
  cv::Mat img = cv::imread(file.string(), cv::IMREAD_COLOR);
  if (img.empty()) throw IoError("cannot read image " + file.string());
  Raster r(3, img.rows, img.cols);
  for (int y = 0; y < img.rows; ++y) {
    const auto* row = img.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.cols; ++x) {
      r.at(0, y, x) = row[x][2];  // BGR → RGB
      r.at(1, y, x) = row[x][1];
      r.at(2, y, x) = row[x][0];
    }
  }
  return r;
}

MaskRaster load_mask(const std::filesystem::path& file) {
  cv::Mat img = cv::imread(file.string(), cv::IMREAD_GRAYSCALE);
  if (img.empty()) throw IoError("cannot read mask " + file.string());
  MaskRaster m(img.rows, img.cols);
  for (int y = 0; y < img.rows; ++y) {
    const auto* row = img.ptr<uint8_t>(y);
    for (int x = 0; x < img.cols; ++x) m.at(y, x) = row[x] ? 1 : 0;
  }
  return m;
}

void save_image_8bit(const std::filesystem::path& file, const Raster& r) {
  if (r.channels != 3 && r.channels != 1)
    throw InputError("save_image_8bit expects 1 or 3 channels");
  cv::Mat img(r.height, r.width, CV_8UC3);
  for (int y = 0; y < r.height; ++y) {
    auto* row = img.ptr<cv::Vec3b>(y);
    for (int x = 0; x < r.width; ++x) {
      const int cr = 0, cg = r.channels == 3 ? 1 : 0,
                cb = r.channels == 3 ? 2 : 0;
      row[x][2] = (uint8_t)std::clamp(std::lround(r.at(cr, y, x)), 0l, 255l);
      row[x][1] = (uint8_t)std::clamp(std::lround(r.at(cg, y, x)), 0l, 255l);
      row[x][0] = (uint8_t)std::clamp(std::lround(r.at(cb, y, x)), 0l, 255l);
    }
  }
  if (!cv::imwrite(file.string(), img))
    throw IoError("cannot write image " + file.string());
}

void save_image_16bit(const std::filesystem::path& file, const Raster& r,
                      double scale) {
  if (r.channels != 3) throw InputError("save_image_16bit expects 3 channels");
  cv::Mat img(r.height, r.width, CV_16UC3);
  for (int y = 0; y < r.height; ++y) {
    auto* row = img.ptr<cv::Vec3w>(y);
    for (int x = 0; x < r.width; ++x)
      for (int c = 0; c < 3; ++c)
        row[x][2 - c] = (uint16_t)std::clamp(
            std::lround(r.at(c, y, x) * scale), 0l, 65535l);
  }
  if (!cv::imwrite(file.string(), img))
    throw IoError("cannot write image " + file.string());
}

void save_mask(const std::filesystem::path& file, const MaskRaster& m) {
  cv::Mat img(m.height, m.width, CV_8UC1);
  for (int y = 0; y < m.height; ++y) {
    auto* row = img.ptr<uint8_t>(y);
    for (int x = 0; x < m.width; ++x) row[x] = m.at(y, x) ? 255 : 0;
  }
  if (!cv::imwrite(file.string(), img))
    throw IoError("cannot write mask " + file.string());
}

}  // namespace lesionseg
