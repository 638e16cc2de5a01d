#include "spikeplast/metrics.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>

namespace spikeplast {

void append_metrics_csv(const std::string& path, const MetricsRecord& rec) {
    const bool fresh = !std::filesystem::exists(path);
    std::ofstream f(path, std::ios::app);
    if (!f) throw data_error("cannot write metrics CSV: " + path);
    if (fresh) {
        f << "epoch,split,accuracy,wall_seconds";
        for (int c = 0; c < 10; ++c) f << ",acc_class_" << c;
        f << ",abstained\n";
    }
    std::int64_t abst = 0;
    for (auto a : rec.abstained) abst += a;
    f << rec.epoch << ',' << rec.split << ',' << rec.accuracy << ',' << rec.wall_seconds;
    for (int c = 0; c < 10; ++c) f << ',' << rec.per_class[c];
    f << ',' << abst << '\n';
}

void write_confusion_csv(const std::string& path, const MetricsRecord& rec) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw data_error("cannot write confusion CSV: " + path);
    f << "true_class";
    for (int c = 0; c < 10; ++c) f << ",pred_" << c;
    f << ",abstained\n";
    for (int r = 0; r < 10; ++r) {
        f << r;
        for (int c = 0; c < 10; ++c) f << ',' << rec.confusion[r][c];
        f << ',' << rec.abstained[r] << '\n';
    }
}

std::string metrics_to_json(const MetricsRecord& rec) {
    nlohmann::json j;
    j["epoch"] = rec.epoch;
    j["split"] = rec.split;
    j["accuracy"] = rec.accuracy;
    j["wall_seconds"] = rec.wall_seconds;
    j["per_class_accuracy"] = rec.per_class;
    j["confusion"] = rec.confusion;
    j["abstained"] = rec.abstained;
    return j.dump();
}

} // namespace spikeplast
