#pragma once

#include <string>
#include <vector>

namespace bundlescope::extraction {

// Bundled 319-entry English stop list (also shipped as
// data/stopwords_en.txt). Used only for the routinary-fraction
// diagnostic; classification itself never consults it.
const std::vector<std::string>& english_stopwords();

}  // namespace bundlescope::extraction
