#include <cstdlib>
#include <cstring>

#include "backends.hpp"

namespace streamcap::kernels {

const Backend& scalar_backend() { return kScalarBackend; }

namespace {

const Backend& pick() {
    const char* force = std::getenv("STREAMCAP_FORCE_SCALAR");
    if (force && std::strcmp(force, "0") != 0) return kScalarBackend;
#ifdef STREAMCAP_HAVE_AVX2
    if (avx2_supported()) return kAvx2Backend;
#endif
#ifdef STREAMCAP_HAVE_NEON
    return kNeonBackend;
#endif
    return kScalarBackend;
}

}  // namespace

const Backend& active_backend() {
    static const Backend& chosen = pick();
    return chosen;
}

}  // namespace streamcap::kernels
