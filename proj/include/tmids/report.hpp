#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "json.hpp"

#include "tmids/bench.hpp"
#include "tmids/dataset.hpp"
#include "tmids/machine.hpp"
#include "tmids/metrics.hpp"
#include "tmids/pipeline.hpp"

namespace tmids {

nlohmann::json to_json(const CleanReport& r);
nlohmann::json to_json(const BalanceReport& r, std::span<const std::string> class_names = {});
nlohmann::json to_json(const TrainReport& r);
nlohmann::json to_json(const MetricsReport& r, std::span<const std::string> class_names = {});
nlohmann::json to_json(const CVReport& r);
/// Column names follow the edge deployment table: inference_time_us,
/// memory_kb, cpu_percent, model_size_kb.
nlohmann::json to_json(const BenchReport& r);

/// One row per class, then macro and weighted rows.
void write_metrics_csv(const MetricsReport& r, std::span<const std::string> class_names, std::ostream& out);
void write_bench_csv(const BenchReport& r, std::ostream& out);

}  // namespace tmids
