#include "ajsim/parallel.hpp"

#include <cstdlib>
#include <string>

namespace ajsim {

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("AJSIM_THREADS"); env != nullptr && *env != '\0') {
        try {
            const unsigned long v = std::stoul(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
            // fall through to the hardware default
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace ajsim
