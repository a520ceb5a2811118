// SPDX-License-Identifier: Apache-2.0
#include "fft.hpp"

#include <new>

namespace nfrm::detail {

std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

FftPlan::FftPlan(std::size_t n, std::size_t batch, Direction dir) : n_(n), batch_(batch)
{
    std::lock_guard lock(fftw_planner_mutex());
    buffer_ = fftw_alloc_complex(n * batch);
    if (!buffer_)
        throw std::bad_alloc();
    const int len = static_cast<int>(n);
    plan_ = fftw_plan_many_dft(1, &len, static_cast<int>(batch), buffer_, nullptr, 1, len, buffer_, nullptr, 1, len,
                               dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!plan_) {
        fftw_free(buffer_);
        throw std::bad_alloc();
    }
}

FftPlan::~FftPlan()
{
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(buffer_);
}

} // namespace nfrm::detail
