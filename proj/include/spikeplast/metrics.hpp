#ifndef SPIKEPLAST_METRICS_HPP
#define SPIKEPLAST_METRICS_HPP

#include <string>

#include "spikeplast/pipeline.hpp"

namespace spikeplast {

// Append-only run log, one row per record; writes the header on first use.
void append_metrics_csv(const std::string& path, const MetricsRecord& rec);

// 10x10 confusion counts plus an abstained column, one file per call.
void write_confusion_csv(const std::string& path, const MetricsRecord& rec);

// JSON fragment used by the per-run summary.
std::string metrics_to_json(const MetricsRecord& rec);

} // namespace spikeplast

#endif // SPIKEPLAST_METRICS_HPP
