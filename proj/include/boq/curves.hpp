#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "boq/forest.hpp"
#include "boq/trainer.hpp"

namespace boq {

/// Epochs where the dev loss sits at least 0.1 above its best earlier value
/// while the training loss is below its value at that earlier epoch.
std::vector<bool> overfit_flags(const std::vector<EpochRecord>& history);

/// epoch,train_loss,train_acc,dev_loss,dev_acc,overfit
std::string history_csv(const std::vector<EpochRecord>& history);
std::vector<EpochRecord> parse_history_csv(const std::string& text);

/// trees,oob_error
std::string oob_csv(const std::vector<OobPoint>& points);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace boq
