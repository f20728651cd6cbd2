#include "xrminfo/core/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <memory>

namespace xrminfo {
namespace {

struct PlanDeleter {
    void operator()(fftw_plan_s *p) const noexcept { fftw_destroy_plan(p); }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

std::vector<Complex> run(std::span<const Complex> in, int rank, const int *dims, FftDirection dir) {
    std::vector<Complex> out(in.begin(), in.end());
    if (out.empty()) return out;
    auto *buf = reinterpret_cast<fftw_complex *>(out.data());
    const int sign = dir == FftDirection::Forward ? FFTW_FORWARD : FFTW_BACKWARD;
    // FFTW_ESTIMATE does not touch the buffer during planning and yields a
    // deterministic plan.
    Plan plan(fftw_plan_dft(rank, dims, buf, buf, sign, FFTW_ESTIMATE));
    fftw_execute(plan.get());
    if (dir == FftDirection::Inverse) {
        const double scale = 1.0 / static_cast<double>(out.size());
        std::for_each(out.begin(), out.end(), [scale](Complex &c) { c *= scale; });
    }
    return out;
}

} // namespace

std::vector<Complex> fft1d(std::span<const Complex> in, FftDirection dir) {
    const int n = static_cast<int>(in.size());
    return run(in, 1, &n, dir);
}

std::vector<Complex> fft2d(std::span<const Complex> in, std::size_t rows, std::size_t cols,
                           FftDirection dir) {
    const int dims[2] = {static_cast<int>(rows), static_cast<int>(cols)};
    return run(in, 2, dims, dir);
}

} // namespace xrminfo
