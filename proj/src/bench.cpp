#include "tmids/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <sched.h>
#include <sys/resource.h>

#include "tmids/error.hpp"

namespace tmids {

namespace {

using Clock = std::chrono::steady_clock;

double micros(Clock::duration d) { return std::chrono::duration<double, std::micro>(d).count(); }

double cpu_seconds() {
    rusage ru{};
    if (getrusage(RUSAGE_SELF, &ru) != 0) return -1.0;
    auto secs = [](const timeval& tv) { return static_cast<double>(tv.tv_sec) + static_cast<double>(tv.tv_usec) * 1e-6; };
    return secs(ru.ru_utime) + secs(ru.ru_stime);
}

void pin_to_current_cpu() {
    const int cpu = sched_getcpu();
    if (cpu < 0) return;
    cpu_set_t set;
    CPU_ZERO(&set);
    CPU_SET(cpu, &set);
    sched_setaffinity(0, sizeof set, &set);
}

void summarize(const std::vector<double>& xs, double& mean, double& sd) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    mean = sum / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / static_cast<double>(xs.size()));
}

}  // namespace

long peak_memory_kb() {
    rusage ru{};
    if (getrusage(RUSAGE_SELF, &ru) != 0) return 0;
    return ru.ru_maxrss;
}

BenchReport bench(const ModelBundle& model, const Matrix& raw_samples, const BenchOptions& options) {
    if (options.iters == 0) throw ConfigError("bench needs iters >= 1");
    if (raw_samples.rows() == 0) throw InputError("bench needs at least one sample row");
    if (options.pin_cpu) pin_to_current_cpu();

    const auto& pre = model.preprocessor;
    const auto& machine = model.machine;
    std::vector<LiteralVector> lits;
    lits.reserve(raw_samples.rows());
    for (std::size_t i = 0; i < raw_samples.rows(); ++i) lits.push_back(pre.literals(raw_samples.row(i)));

    volatile int sink = 0;
    for (std::size_t i = 0; i < options.warmup; ++i) {
        const auto r = i % raw_samples.rows();
        sink = sink + machine.predict(options.include_binarization ? pre.literals(raw_samples.row(r)) : lits[r]).predicted;
    }

    std::vector<double> model_us, full_us;
    model_us.reserve(options.iters);
    if (options.include_binarization) full_us.reserve(options.iters);
    const double cpu0 = cpu_seconds();
    const auto wall0 = Clock::now();
    for (std::size_t i = 0; i < options.iters; ++i) {
        const auto r = i % raw_samples.rows();
        double transform_us = 0.0;
        if (options.include_binarization) {
            const auto t0 = Clock::now();
            const auto fresh = pre.literals(raw_samples.row(r));
            transform_us = micros(Clock::now() - t0);
            sink = sink + static_cast<int>(fresh.size() & 1);
        }
        const auto t0 = Clock::now();
        sink = sink + machine.predict(lits[r]).predicted;
        const double us = micros(Clock::now() - t0);
        model_us.push_back(us);
        if (options.include_binarization) full_us.push_back(transform_us + us);
    }
    const double wall = std::chrono::duration<double>(Clock::now() - wall0).count();
    const double cpu1 = cpu_seconds();

    BenchReport rep;
    rep.samples_measured = model_us.size();
    summarize(model_us, rep.mean_us, rep.std_us);
    const auto [mn, mx] = std::minmax_element(model_us.begin(), model_us.end());
    rep.min_us = *mn;
    rep.max_us = *mx;
    rep.includes_binarization = options.include_binarization;
    if (options.include_binarization) summarize(full_us, rep.mean_us_with_binarization, rep.std_us_with_binarization);
    rep.peak_memory_kb = peak_memory_kb();
    // rusage ticks are coarser than one short run, so cap the single-thread ratio
    if (cpu0 >= 0.0 && cpu1 >= 0.0 && wall > 0.0) rep.cpu_percent = std::clamp(100.0 * (cpu1 - cpu0) / wall, 0.0, 100.0);
    rep.model_size_kb = static_cast<double>(serialize_model(model).size()) / 1024.0;
    return rep;
}

}  // namespace tmids
