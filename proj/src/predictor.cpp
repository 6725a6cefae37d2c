#include "boq/predictor.hpp"

#include "boq/error.hpp"
#include "boq/trainer.hpp"

namespace boq {

Predictor::Predictor(ModelArtifact artifact, Vocabulary vocab) : artifact_(std::move(artifact)), vocab_(std::move(vocab)) {
  const auto& m = artifact_.manifest;
  const std::string expected = m.at("vocab_hash").get<std::string>();
  if (vocab_.hash() != expected)
    throw ConfigError("vocabulary hash " + vocab_.hash() + " does not match the model's " + expected);
  labels_ = m.at("labels").get<std::vector<std::string>>();
  auto counts = m.at("class_counts").get<std::vector<std::size_t>>();
  if (counts.size() != labels_.size() || labels_.empty()) throw FormatError("manifest labels and class_counts disagree");
  std::size_t total = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    total += counts[i];
    if (counts[i] > counts[static_cast<std::size_t>(prior_label_)]) prior_label_ = static_cast<int>(i);
  }
  prior_share_ = total ? static_cast<double>(counts[static_cast<std::size_t>(prior_label_)]) / static_cast<double>(total) : 0.0;
  if (m.contains("weighting")) weighting_ = parse_weighting(m.at("weighting").get<std::string>());
  if (m.contains("seq_len")) seq_len_ = m.at("seq_len").get<std::size_t>();

  const bool wants_sequence = artifact_.kind == ModelKind::tcn;
  if ((vocab_.mode() == VocabMode::sequence) != wants_sequence)
    throw ConfigError("vocabulary mode does not suit a " + to_string(artifact_.kind) + " model");
}

Predictor Predictor::load(const std::filesystem::path& model, const std::optional<std::filesystem::path>& vocab) {
  ModelArtifact a = load_artifact(model);
  auto vpath = vocab ? *vocab : model.parent_path() / "vocab.json";
  return Predictor(std::move(a), Vocabulary::load(vpath));
}

std::string Predictor::confidence_kind() const {
  switch (artifact_.kind) {
    case ModelKind::nb: return "posterior";
    case ModelKind::svm: return "softmax-margin";
    case ModelKind::rf: return "vote-share";
    default: return "softmax";
  }
}

LabeledPrediction Predictor::predict_tokens(const std::vector<std::string>& tokens) const {
  CleanDoc doc{tokens, 0, 0};
  Prediction p;
  bool empty = false;
  if (artifact_.kind == ModelKind::tcn) {
    PaddedSequence seq = encode_sequence(doc, vocab_, seq_len_);
    empty = seq.real_length() == 0;
    if (!empty) {
      const auto& m = std::get<TcnModel>(artifact_.model);
      p = predictions_from_probs(softmax(m.forward({&seq}, false, 0, nullptr))).front();
    }
  } else {
    SparseVector x = vectorize_bow(doc, vocab_, weighting_);
    empty = x.nnz() == 0;
    if (!empty) {
      switch (artifact_.kind) {
        case ModelKind::nb: p = nb_predict_one(std::get<NaiveBayesModel>(artifact_.model), x); break;
        case ModelKind::svm: p = svm_predict_one(std::get<LinearSvmModel>(artifact_.model), x); break;
        case ModelKind::rf: p = forest_predict_one(std::get<Forest>(artifact_.model), x); break;
        case ModelKind::mlp: {
          const auto& m = std::get<MlpModel>(artifact_.model);
          p = predictions_from_probs(softmax(m.forward({&x}, false, 0, nullptr))).front();
          break;
        }
        default: break;
      }
    }
  }
  LabeledPrediction out;
  if (empty) {
    out.label = prior_label_;
    out.confidence = prior_share_;
    out.note = "no-signal";
  } else {
    out.label = p.label;
    out.confidence = p.confidence;
  }
  out.code = labels_.at(static_cast<std::size_t>(out.label));
  return out;
}

LabeledPrediction Predictor::predict_text(std::string_view description) const {
  return predict_tokens(clean_text(description));
}

std::vector<LabeledPrediction> Predictor::predict_texts(const std::vector<std::string>& descriptions) const {
  std::vector<LabeledPrediction> out;
  out.reserve(descriptions.size());
  for (const auto& d : descriptions) out.push_back(predict_text(d));
  return out;
}

MetricsReport evaluate_docs(const Predictor& predictor, const std::vector<CleanDoc>& docs, const std::string& scope) {
  std::vector<int> truth, pred;
  std::size_t no_signal = 0;
  for (const auto& d : docs) {
    auto p = predictor.predict_tokens(d.tokens);
    no_signal += p.note == "no-signal";
    truth.push_back(d.label_index);
    pred.push_back(p.label);
  }
  MetricsReport r = metrics(confusion(truth, pred, predictor.labels().size()), predictor.labels());
  r.scope = scope;
  if (no_signal) r.notes.push_back(std::to_string(no_signal) + " records had no usable tokens and got the prior class");
  return r;
}

}  // namespace boq
