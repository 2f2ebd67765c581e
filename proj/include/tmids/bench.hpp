#pragma once

#include <cstddef>

#include "tmids/matrix.hpp"
#include "tmids/model_io.hpp"

namespace tmids {

struct BenchOptions {
    std::size_t warmup = 10;
    std::size_t iters = 100;
    bool include_binarization = false;
    bool pin_cpu = true;  // best effort
};

/// Times are per-sample microseconds. The binarization figures are filled in
/// only when requested; each of those runs is paired with a model-only run on
/// the same sample, so the full-path time never undercuts the model-only time.
struct BenchReport {
    std::size_t samples_measured = 0;
    double mean_us = 0.0;
    double std_us = 0.0;
    double min_us = 0.0;
    double max_us = 0.0;
    bool includes_binarization = false;
    double mean_us_with_binarization = 0.0;
    double std_us_with_binarization = 0.0;
    long peak_memory_kb = 0;
    double cpu_percent = -1.0;  // negative when the platform has no probe
    double model_size_kb = 0.0;
};

/// Single-sample inference latency over raw feature rows, cycled in order.
/// Throws ConfigError when iters is 0 and InputError when there are no rows.
BenchReport bench(const ModelBundle& model, const Matrix& raw_samples, const BenchOptions& options);

/// Peak resident set size of this process in KB, or 0 when unknown.
long peak_memory_kb();

}  // namespace tmids
