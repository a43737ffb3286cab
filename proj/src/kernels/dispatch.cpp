#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "backends.hpp"
#include "pushrl/util/log.hpp"

namespace pushrl::kernels {

namespace {

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Ops* table_for(Backend b) {
    switch (b) {
        case Backend::scalar: return detail::scalar_table();
        case Backend::avx2:
            return cpu_has_avx2_fma() ? detail::avx2_table() : nullptr;
        case Backend::neon: return detail::neon_table();
    }
    return nullptr;
}

Backend widest_supported() {
    if (table_for(Backend::avx2)) return Backend::avx2;
    if (table_for(Backend::neon)) return Backend::neon;
    return Backend::scalar;
}

bool backend_from_string(const std::string& name, Backend& out) {
    if (name == "scalar") out = Backend::scalar;
    else if (name == "avx2") out = Backend::avx2;
    else if (name == "neon") out = Backend::neon;
    else return false;
    return true;
}

Backend initial_backend() {
    if (const char* env = std::getenv("PUSHRL_KERNELS")) {
        const std::string name(env);
        Backend b;
        if (name != "auto" && backend_from_string(name, b) && table_for(b)) {
            return b;
        }
        if (name != "auto") {
            log::warn("PUSHRL_KERNELS=" + name +
                      " not usable here, falling back to auto selection");
        }
    }
    return widest_supported();
}

std::atomic<const Ops*> g_active{nullptr};
std::atomic<Backend> g_active_backend{Backend::scalar};

const Ops* active_table() {
    const Ops* t = g_active.load(std::memory_order_acquire);
    if (t) return t;
    const Backend b = initial_backend();
    t = table_for(b);
    g_active_backend.store(b, std::memory_order_relaxed);
    g_active.store(t, std::memory_order_release);
    return t;
}

}  // namespace

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
    }
    return "?";
}

std::vector<Backend> supported_backends() {
    std::vector<Backend> result{Backend::scalar};
    if (table_for(Backend::neon)) result.push_back(Backend::neon);
    if (table_for(Backend::avx2)) result.push_back(Backend::avx2);
    return result;
}

const Ops& ops() { return *active_table(); }

Backend active_backend() {
    active_table();
    return g_active_backend.load(std::memory_order_relaxed);
}

const Ops& ops(Backend b) {
    const Ops* t = table_for(b);
    if (!t) {
        throw std::runtime_error(std::string("kernel backend not usable: ") +
                                 backend_name(b));
    }
    return *t;
}

void force_backend(const std::string& name) {
    Backend b;
    if (name == "auto") {
        b = widest_supported();
    } else if (!backend_from_string(name, b)) {
        throw std::runtime_error("unknown kernel backend: " + name);
    }
    const Ops* t = table_for(b);
    if (!t) {
        throw std::runtime_error(std::string("kernel backend not usable: ") +
                                 backend_name(b));
    }
    g_active_backend.store(b, std::memory_order_relaxed);
    g_active.store(t, std::memory_order_release);
}

}  // namespace pushrl::kernels
