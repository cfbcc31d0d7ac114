#include "itinerant/kernels.hpp"

#include <stdexcept>

namespace itinerant::kernels {
namespace {

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Ops* pick_auto() {
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_supported())
        return &avx2_ops;
#endif
    return &scalar_ops;
}

const Ops*& current() {
    static const Ops* ops = pick_auto();
    return ops;
}

} // namespace

const Ops& active() { return *current(); }

void select(const std::string& name) {
    if (name == "auto") {
        current() = pick_auto();
    } else if (name == "scalar") {
        current() = &scalar_ops;
    } else if (name == "avx2") {
#if defined(__x86_64__) || defined(_M_X64)
        if (!avx2_supported())
            throw std::invalid_argument("avx2 kernels not supported on this CPU");
        current() = &avx2_ops;
#else
        throw std::invalid_argument("avx2 kernels not available on this target");
#endif
    } else {
        throw std::invalid_argument("unknown kernel set: " + name);
    }
}

std::vector<std::string> available() {
    std::vector<std::string> names = {"scalar"};
    if (avx2_supported())
        names.push_back("avx2");
    return names;
}

} // namespace itinerant::kernels
