#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "coopsense/simd/kernels.hpp"

namespace coopsense::simd {

#ifndef COOPSENSE_HAVE_AVX2
const KernelTable* avx2_kernels() { return nullptr; }
#endif

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::kScalar: return "scalar";
        case Isa::kAvx2: return "avx2";
    }
    return "unknown";
}

bool isa_supported(Isa isa) {
    switch (isa) {
        case Isa::kScalar: return true;
        case Isa::kAvx2:
#if defined(__x86_64__) || defined(__i386__)
            return avx2_kernels() != nullptr && __builtin_cpu_supports("avx2");
#else
            return false;
#endif
    }
    return false;
}

namespace {

const KernelTable& table_for(Isa isa) {
    if (isa == Isa::kAvx2 && isa_supported(Isa::kAvx2)) return *avx2_kernels();
    return scalar_kernels();
}

Isa detect() {
    if (const char* env = std::getenv("COOPSENSE_ISA")) {
        const std::string v(env);
        if (v == "scalar") return Isa::kScalar;
        if (v == "avx2" && isa_supported(Isa::kAvx2)) return Isa::kAvx2;
    }
    return isa_supported(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar;
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> table{&table_for(detect())};
    return table;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

Isa active_isa() { return active().isa; }

void set_active_isa(Isa isa) {
    if (!isa_supported(isa)) {
        throw std::invalid_argument("ISA not supported on this machine: " +
                                    std::string(isa_name(isa)));
    }
    current().store(&table_for(isa), std::memory_order_relaxed);
}

}  // namespace coopsense::simd
