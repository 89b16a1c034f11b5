#include "oseen/parallel.hpp"

namespace oseen {

std::atomic<bool>& interrupt_flag() {
    static std::atomic<bool> flag{false};
    return flag;
}

}  // namespace oseen
