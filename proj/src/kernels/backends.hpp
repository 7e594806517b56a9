#pragma once

#include "streamcap/kernels.hpp"

namespace streamcap::kernels {

extern const Backend kScalarBackend;
#ifdef STREAMCAP_HAVE_AVX2
extern const Backend kAvx2Backend;
bool avx2_supported();
#endif
#ifdef STREAMCAP_HAVE_NEON
extern const Backend kNeonBackend;
#endif

}  // namespace streamcap::kernels
