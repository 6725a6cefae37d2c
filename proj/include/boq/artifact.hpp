#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "json.hpp"

#include "boq/forest.hpp"
#include "boq/linear_svm.hpp"
#include "boq/mlp.hpp"
#include "boq/naive_bayes.hpp"
#include "boq/tcn.hpp"

namespace boq {

inline constexpr const char* kToolkitVersion = "0.1.0";
inline constexpr std::uint32_t kArtifactVersion = 1;

enum class ModelKind { nb, svm, rf, mlp, tcn };
std::string to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);
bool is_neural(ModelKind kind);
/// Default artifact file name: model.json for NB/SVM, model.bin otherwise.
std::string artifact_file_name(ModelKind kind);

using AnyModel = std::variant<NaiveBayesModel, LinearSvmModel, Forest, MlpModel, TcnModel>;

/// A trained model and its manifest. The manifest must hold at least
/// "kind", "vocab_hash", "labels" and "class_counts".
struct ModelArtifact {
  ModelKind kind = ModelKind::nb;
  nlohmann::json manifest;
  AnyModel model;
};

/// NB and SVM are written as versioned JSON; forests and neural models as a
/// "BOQM" container: magic, u32 version, u64 manifest length, manifest JSON,
/// binary payload (float32 tensors or tree nodes). Little-endian.
void save_artifact(const std::filesystem::path& path, const ModelArtifact& artifact);
/// Throws FormatError when the file is not a readable artifact.
ModelArtifact load_artifact(const std::filesystem::path& path);

/// Rounds every stored weight to float32 so that the in-memory model matches
/// what a saved artifact reloads to.
void quantize_to_float32(AnyModel& model);

}  // namespace boq
