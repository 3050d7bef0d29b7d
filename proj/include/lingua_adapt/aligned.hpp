#pragma once

#include <cstddef>
#include <new>
#include <vector>

namespace lingua_adapt {

// Fixed 64-byte alignment keeps vectorized reductions in the same order
// from run to run, so training is bit-reproducible.
template <typename T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t kAlign{64};

    AlignedAllocator() noexcept = default;
    template <typename U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

    template <typename U>
    bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using FloatVec = std::vector<float, AlignedAllocator<float>>;

} // namespace lingua_adapt
