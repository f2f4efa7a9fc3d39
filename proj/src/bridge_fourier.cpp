#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

#include "itosim/error.hpp"
#include "itosim/iterint.hpp"

namespace itosim::iterint {

namespace {

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [n, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(int n) {
        std::lock_guard lock(mutex_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return it->second;
        std::vector<double> in(static_cast<std::size_t>(n));
        std::vector<std::complex<double>> out(static_cast<std::size_t>(n / 2 + 1));
        fftw_plan plan = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (plan == nullptr) throw Error("fftw: could not create plan");
        plans_.emplace(n, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<int, fftw_plan> plans_;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

struct Coefficients {
    std::vector<double> a;  // a_1..a_p
    std::vector<double> b;
    double half_a0 = 0.0;
};

// Fourier coefficients of the bridge W_t - (t/delta) W_delta of the
// piecewise-linear path, on [0, delta].
Coefficients bridge_coefficients(std::span<const double> sub, double delta, std::size_t p) {
    const std::size_t n = sub.size();
    const double h = delta / static_cast<double>(n);
    thread_local std::vector<double> slope;
    thread_local std::vector<std::complex<double>> spectrum;
    slope.resize(n);
    spectrum.resize(n / 2 + 1);
    double w = 0.0;
    double area = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        slope[k] = sub[k] / h;
        area += h * (w + 0.5 * sub[k]);
        w += sub[k];
    }
    fftw_execute_dft_r2c(plan_cache().get(static_cast<int>(n)), slope.data(),
                         reinterpret_cast<fftw_complex*>(spectrum.data()));

    Coefficients c;
    c.a.resize(p);
    c.b.resize(p);
    c.half_a0 = (area - w * delta / 2.0) / delta;
    for (std::size_t r = 1; r <= p; ++r) {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(n);
        const double omega = 2.0 * std::numbers::pi * static_cast<double>(r) / delta;
        const double er = std::cos(theta) - 1.0;
        const double ei = std::sin(theta);
        const double xr = spectrum[r].real();
        const double xi = -spectrum[r].imag();
        const double scale = 2.0 / (delta * omega * omega);
        c.a[r - 1] = scale * (er * xr - ei * xi);
        c.b[r - 1] = scale * (er * xi + ei * xr);
    }
    return c;
}

}  // namespace

FourierAux bridge_fourier_aux(std::span<const double> sub1, std::span<const double> sub2, double delta,
                              std::size_t p) {
    if (p == 0) throw ConfigError("levy_fourier: p must be >= 1");
    if (sub1.size() != sub2.size()) throw ConfigError("bridge_fourier_aux: channel lengths differ");
    if (2 * p >= sub1.size())
        throw ConfigError("bridge_fourier_aux: p must be below half the number of sub-increments");
    if (!(delta > 0.0)) throw ConfigError("bridge_fourier_aux: delta must be positive");

    FourierAux aux = FourierAux::zeros(p);
    const double tail_scale = std::sqrt(delta * levy_rho(p));
    const std::span<const double> subs[2] = {sub1, sub2};
    for (int j = 0; j < 2; ++j) {
        const Coefficients c = bridge_coefficients(subs[j], delta, p);
        double head = c.half_a0;
        for (std::size_t r = 1; r <= p; ++r) {
            const double norm = -std::numbers::sqrt2 * std::numbers::pi * static_cast<double>(r) / std::sqrt(delta);
            aux.zeta[j][r - 1] = norm * c.a[r - 1];
            aux.eta[j][r - 1] = norm * c.b[r - 1];
            head += c.a[r - 1];
        }
        aux.mu[j] = head / tail_scale;
    }
    return aux;
}

}  // namespace itosim::iterint
