// SPDX-License-Identifier: Apache-2.0
// Thin RAII wrapper over FFTW plans. Planning is serialized because the FFTW
// planner is not re-entrant; execution on distinct buffers is.
#pragma once

#include <complex>
#include <cstddef>
#include <mutex>

#include <fftw3.h>

namespace nfrm::detail {

std::mutex& fftw_planner_mutex();

/// Batched in-place 1-D transform of `batch` contiguous rows of length `n`.
class FftPlan {
public:
    enum class Direction { forward, backward };

    FftPlan(std::size_t n, std::size_t batch, Direction dir);
    ~FftPlan();
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    std::complex<double>* data() { return reinterpret_cast<std::complex<double>*>(buffer_); }
    std::size_t size() const { return n_; }
    std::size_t batch() const { return batch_; }

    void execute() { fftw_execute(plan_); }

private:
    std::size_t n_;
    std::size_t batch_;
    fftw_complex* buffer_ = nullptr;
    fftw_plan plan_ = nullptr;
};

} // namespace nfrm::detail
