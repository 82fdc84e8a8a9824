// SPDX-FileCopyrightText: 2026 The voxnt Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxnt/metrics.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

namespace voxnt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

nlohmann::json number_or_null(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }

double ratio(std::uint64_t num, std::uint64_t den) {
    return den == 0 ? kNaN : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::uint16_t num_classes)
    : num_classes_(num_classes), cells_(static_cast<std::size_t>(num_classes) * num_classes, 0) {
    if (num_classes < 1) throw ConfigError("confusion matrix needs at least one class");
}

std::uint64_t ConfusionMatrix::evaluated_voxels() const {
    std::uint64_t sum = 0;
    for (auto c : cells_) sum += c;
    return sum;
}

std::uint64_t ConfusionMatrix::row_sum(std::uint16_t truth) const {
    std::uint64_t sum = 0;
    for (std::uint16_t p = 0; p < num_classes_; ++p) sum += cell(truth, p);
    return sum;
}

std::uint64_t ConfusionMatrix::col_sum(std::uint16_t pred) const {
    std::uint64_t sum = 0;
    for (std::uint16_t t = 0; t < num_classes_; ++t) sum += cell(t, pred);
    return sum;
}

void ConfusionMatrix::add(std::uint16_t truth, std::uint16_t pred, std::uint64_t count) {
    if (truth >= num_classes_ || pred >= num_classes_) {
        throw ValidationError("confusion entry (" + std::to_string(truth) + ", " + std::to_string(pred) +
                              ") outside " + std::to_string(num_classes_) + " classes");
    }
    cells_[static_cast<std::size_t>(truth) * num_classes_ + pred] += count;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
    if (other.num_classes_ != num_classes_) {
        throw ShapeError("cannot merge confusion matrices over " + std::to_string(num_classes_) + " and " +
                         std::to_string(other.num_classes_) + " classes");
    }
    for (std::size_t n = 0; n < cells_.size(); ++n) cells_[n] += other.cells_[n];
    ignored_ += other.ignored_;
}

void accumulate(ConfusionMatrix& cm, const VoxelGrid& truth, const VoxelGrid& pred) {
    if (!(truth.dims() == pred.dims())) {
        throw ShapeError("truth " + truth.dims().to_string() + " and prediction " + pred.dims().to_string() +
                         " have different dims");
    }
    if (truth.num_classes() != cm.num_classes() || pred.num_classes() != cm.num_classes()) {
        throw ShapeError("class count mismatch: matrix " + std::to_string(cm.num_classes()) + ", truth " +
                         std::to_string(truth.num_classes()) + ", prediction " +
                         std::to_string(pred.num_classes()));
    }
    const auto t = truth.labels();
    const auto p = pred.labels();
    for (std::size_t n = 0; n < p.size(); ++n) {
        if (p[n] == kIgnoreLabel) {
            throw ValidationError("prediction holds the ignore label at flat index " + std::to_string(n));
        }
    }
    // Validated in a separate pass so a bad prediction leaves the matrix untouched.
    ConfusionMatrix local(cm.num_classes());
    for (std::size_t n = 0; n < t.size(); ++n) {
        if (t[n] == kIgnoreLabel) {
            local.add_ignored(1);
            continue;
        }
        local.add(t[n], p[n]);
    }
    cm.merge(local);
}

MetricsReport finalize(const ConfusionMatrix& cm) {
    MetricsReport r;
    const std::uint16_t k = cm.num_classes();
    r.ignored_voxels = cm.ignored_voxels();
    r.evaluated_voxels = cm.evaluated_voxels();
    r.per_class_iou.assign(k > 0 ? k - 1 : 0, kNaN);
    if (r.evaluated_voxels == 0) {
        r.valid = false;
        r.occupancy_iou = r.occupancy_precision = r.occupancy_recall = r.miou = kNaN;
        return r;
    }
    r.valid = true;

    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (std::uint16_t t = 0; t < k; ++t) {
        for (std::uint16_t p = 0; p < k; ++p) {
            const auto c = cm.cell(t, p);
            const bool t_occ = t != kEmptyClass;
            const bool p_occ = p != kEmptyClass;
            if (t_occ && p_occ) tp += c;
            else if (!t_occ && p_occ) fp += c;
            else if (t_occ && !p_occ) fn += c;
        }
    }
    // A scene with nothing occupied in truth or prediction is a perfect geometric match.
    r.occupancy_iou = (tp + fp + fn) == 0 ? 1.0 : ratio(tp, tp + fp + fn);
    r.occupancy_precision = ratio(tp, tp + fp);
    r.occupancy_recall = ratio(tp, tp + fn);

    double sum = 0.0;
    std::uint32_t present = 0;
    for (std::uint16_t c = 1; c < k; ++c) {
        const auto inter = cm.cell(c, c);
        const auto uni = cm.row_sum(c) + cm.col_sum(c) - inter;
        if (uni == 0) continue;
        const double iou = static_cast<double>(inter) / static_cast<double>(uni);
        r.per_class_iou[c - 1] = iou;
        sum += iou;
        ++present;
    }
    r.miou = present ? sum / present : kNaN;
    return r;
}

std::string metrics_to_json(const MetricsReport& report, int indent) {
    nlohmann::json per_class = nlohmann::json::array();
    for (double v : report.per_class_iou) per_class.push_back(number_or_null(v));
    nlohmann::json j = {{"valid", report.valid},
                        {"occupancy_iou", number_or_null(report.occupancy_iou)},
                        {"occupancy_precision", number_or_null(report.occupancy_precision)},
                        {"occupancy_recall", number_or_null(report.occupancy_recall)},
                        {"per_class_iou", per_class},
                        {"miou", number_or_null(report.miou)},
                        {"ignored_voxels", report.ignored_voxels},
                        {"evaluated_voxels", report.evaluated_voxels}};
    return j.dump(indent);
}

L1Result regression_l1(const NormalizedOffsetField& pred, const NormalizedOffsetField& truth,
                       std::optional<std::span<const std::uint8_t>> mask) {
    if (!(pred.dims() == truth.dims())) {
        throw ShapeError("prediction " + pred.dims().to_string() + " and target " + truth.dims().to_string() +
                         " offset fields differ");
    }
    if (mask && mask->size() != pred.dims().total()) {
        throw ShapeError("regression mask has " + std::to_string(mask->size()) + " entries, field has " +
                         std::to_string(pred.dims().total()) + " voxels");
    }
    const auto p = pred.values();
    const auto t = truth.values();
    L1Result r;
    for (std::uint64_t v = 0; v < pred.dims().total(); ++v) {
        if (mask && !(*mask)[v]) continue;
        for (std::size_t c = 0; c < 6; ++c) r.sum += std::abs(p[v * 6 + c] - t[v * 6 + c]);
        r.elements += 6;
    }
    r.mean = r.elements ? r.sum / static_cast<double>(r.elements) : kNaN;
    return r;
}

}  // namespace voxnt
