#include <algorithm>
#include <cmath>
#include <cstdio>

#include <Eigen/Eigenvalues>
#include <png.h>

#include "s5dscr/metrics.hpp"

namespace s5dscr::metrics {

PcaBasis fit_pca(const Cube& ref) {
  S5DSCR_CHECK(ref.channels >= 3, ErrorCode::InvalidArgument, "PCA visualization needs at least 3 channels");
  const std::size_t C = ref.channels, n = ref.plane_size();
  S5DSCR_CHECK(n >= 2, ErrorCode::DegeneratePca, "PCA needs at least two pixels");

  Eigen::MatrixXd X(n, C);
  for (std::size_t c = 0; c < C; ++c) {
    const auto p = ref.plane(c);
    for (std::size_t i = 0; i < n; ++i) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = p[i];
  }
  const Eigen::RowVectorXd mean = X.colwise().mean();
  X.rowwise() -= mean;
  const Eigen::MatrixXd cov = (X.transpose() * X) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  S5DSCR_CHECK(eig.info() == Eigen::Success, ErrorCode::DegeneratePca, "eigen decomposition failed");

  const double top = eig.eigenvalues()(static_cast<Eigen::Index>(C - 1));
  S5DSCR_CHECK(top > 1e-20, ErrorCode::DegeneratePca, "reference cube has zero variance");

  PcaBasis basis;
  basis.mean.assign(mean.data(), mean.data() + C);
  for (std::size_t k = 0; k < 3; ++k) {
    const auto col = static_cast<Eigen::Index>(C - 1 - k);
    Eigen::VectorXd v = eig.eigenvectors().col(col);
    // Sign convention: largest-magnitude entry positive.
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    basis.components.emplace_back(v.data(), v.data() + C);
    basis.variances.push_back(std::max(0.0, eig.eigenvalues()(col)));
    const Eigen::VectorXd proj = X * v;
    basis.ranges.emplace_back(proj.minCoeff(), proj.maxCoeff());
  }
  return basis;
}

RgbImage pca_rgb(const PcaBasis& basis, const Cube& display) {
  S5DSCR_CHECK(display.channels == basis.mean.size(), ErrorCode::ShapeMismatch,
               "display cube channel count differs from the PCA basis");
  RgbImage img;
  img.width = display.width;
  img.height = display.height;
  img.pixels.assign(img.width * img.height * 3, 0);
  const std::size_t n = display.plane_size();
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& comp = basis.components[k];
    const auto [lo, hi] = basis.ranges[k];
    for (std::size_t i = 0; i < n; ++i) {
      double p = 0.0;
      for (std::size_t c = 0; c < display.channels; ++c) p += (display.plane(c)[i] - basis.mean[c]) * comp[c];
      const double t = hi > lo ? (p - lo) / (hi - lo) : 0.0;
      img.pixels[i * 3 + k] = static_cast<std::uint8_t>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0));
    }
  }
  return img;
}

RgbImage pca_rgb(const Cube& ref, const Cube& display) { return pca_rgb(fit_pca(ref), display); }

void write_png(const RgbImage& image, const std::filesystem::path& path) {
  S5DSCR_CHECK(image.width > 0 && image.height > 0 && image.pixels.size() == image.width * image.height * 3,
               ErrorCode::InvalidArgument, "malformed RGB image");
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  S5DSCR_CHECK(fp != nullptr, ErrorCode::Io, "cannot open " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw Error(ErrorCode::Io, "PNG encoding failed for " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t y = 0; y < image.height; ++y)
    png_write_row(png, const_cast<png_bytep>(&image.pixels[y * image.width * 3]));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

}  // namespace s5dscr::metrics
