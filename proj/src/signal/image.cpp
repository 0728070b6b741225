#include "pmfgn/signal/image.hpp"

#include "pmfgn/error.hpp"

namespace pmfgn::signal {

PatchGrid preprocess_image(const corpus::Image& image) {
  if (image.width != corpus::kImageSize || image.height != corpus::kImageSize ||
      image.data.size() != static_cast<std::size_t>(image.width) * image.height) {
    throw ValidationError("image must be 64x64 grayscale, got " + std::to_string(image.width) + "x" +
                          std::to_string(image.height));
  }
  PatchGrid grid;
  grid.pixels.resize(image.height, image.width);
  for (int r = 0; r < image.height; ++r)
    for (int c = 0; c < image.width; ++c) grid.pixels(r, c) = image.at(r, c) / 255.0;
  return grid;
}

}  // namespace pmfgn::signal
