#include "boq/artifact.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "boq/error.hpp"

namespace boq {

static_assert(std::endian::native == std::endian::little, "artifact I/O assumes a little-endian host");

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::nb: return "nb";
    case ModelKind::svm: return "svm";
    case ModelKind::rf: return "rf";
    case ModelKind::mlp: return "mlp";
    case ModelKind::tcn: return "tcn";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "nb") return ModelKind::nb;
  if (text == "svm") return ModelKind::svm;
  if (text == "rf") return ModelKind::rf;
  if (text == "mlp") return ModelKind::mlp;
  if (text == "tcn") return ModelKind::tcn;
  throw ConfigError("model must be one of nb, svm, rf, mlp, tcn; got '" + std::string(text) + "'");
}

bool is_neural(ModelKind kind) { return kind == ModelKind::mlp || kind == ModelKind::tcn; }

std::string artifact_file_name(ModelKind kind) {
  return kind == ModelKind::nb || kind == ModelKind::svm ? "model.json" : "model.bin";
}

namespace {

constexpr char kMagic[4] = {'B', 'O', 'Q', 'M'};

// JSON has no infinities; -inf log priors travel as null.
nlohmann::json encode_doubles(const std::vector<double>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (double d : v) a.push_back(std::isfinite(d) ? nlohmann::json(d) : nlohmann::json(nullptr));
  return a;
}

std::vector<double> decode_doubles(const nlohmann::json& a) {
  std::vector<double> v;
  for (const auto& e : a) v.push_back(e.is_null() ? -std::numeric_limits<double>::infinity() : e.get<double>());
  return v;
}

nlohmann::json encode_matrix(const Tensor& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < t.dim(0); ++i)
    rows.push_back(std::vector<double>(t.data() + i * t.dim(1), t.data() + (i + 1) * t.dim(1)));
  return rows;
}

Tensor decode_matrix(const nlohmann::json& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.at(0).size();
  Tensor t({r, c});
  for (std::size_t i = 0; i < r; ++i) {
    auto row = rows.at(i).get<std::vector<double>>();
    if (row.size() != c) throw FormatError("ragged weight matrix in artifact");
    std::copy(row.begin(), row.end(), t.data() + i * c);
  }
  return t;
}

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  template <class T>
  void pod(const T& v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  Reader(const char* data, std::size_t size) : p_(data), end_(data + size) {}
  template <class T>
  T pod() {
    T v;
    bytes(&v, sizeof(T));
    return v;
  }
  void bytes(void* dst, std::size_t n) {
    if (static_cast<std::size_t>(end_ - p_) < n) throw FormatError("artifact payload is truncated");
    std::memcpy(dst, p_, n);
    p_ += n;
  }
  std::size_t count(std::size_t elem_size) {
    auto n = pod<std::uint64_t>();
    if (elem_size > 0 && n > static_cast<std::uint64_t>(end_ - p_) / elem_size)
      throw FormatError("artifact payload is truncated");
    return static_cast<std::size_t>(n);
  }
  bool done() const { return p_ == end_; }

 private:
  const char* p_;
  const char* end_;
};

void write_tensor(Writer& w, const Tensor& t) {
  w.pod(static_cast<std::uint32_t>(t.rank()));
  for (auto d : t.shape()) w.pod(static_cast<std::uint64_t>(d));
  std::vector<float> f(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) f[i] = static_cast<float>(t[i]);
  w.bytes(f.data(), f.size() * sizeof(float));
}

Tensor read_tensor(Reader& r, const std::vector<std::size_t>& expected, const std::string& name) {
  const auto rank = r.pod<std::uint32_t>();
  std::vector<std::size_t> shape(rank);
  for (auto& d : shape) d = static_cast<std::size_t>(r.pod<std::uint64_t>());
  if (shape != expected)
    throw FormatError("tensor " + name + " has shape " + shape_string(shape) + ", expected " + shape_string(expected));
  std::vector<float> f(element_count(shape));
  r.bytes(f.data(), f.size() * sizeof(float));
  Tensor t(shape);
  for (std::size_t i = 0; i < f.size(); ++i) t[i] = f[i];
  return t;
}

void write_forest(Writer& w, const Forest& f) {
  w.pod(static_cast<std::uint64_t>(f.trees.size()));
  for (const auto& t : f.trees) {
    w.pod(static_cast<std::uint64_t>(t.nodes.size()));
    for (const auto& n : t.nodes) {
      w.pod(n.feature);
      w.pod(n.threshold);
      w.pod(n.left);
      w.pod(n.right);
    }
    w.pod(static_cast<std::uint64_t>(t.leaves.size()));
    for (const auto& e : t.leaves) {
      w.pod(e.label);
      w.pod(e.count);
    }
    w.pod(static_cast<std::uint64_t>(t.oob.size()));
    for (int id : t.oob) w.pod(static_cast<std::int32_t>(id));
  }
}

Forest read_forest(Reader& r, const nlohmann::json& arch) {
  Forest f;
  f.n_features = arch.at("n_features").get<std::size_t>();
  f.n_classes = arch.at("n_classes").get<std::size_t>();
  f.n_records = arch.at("n_records").get<std::size_t>();
  f.max_features = arch.at("max_features").get<int>();
  f.seed = arch.at("seed").get<std::uint64_t>();
  f.bootstrap = arch.at("bootstrap").get<bool>();
  const std::size_t n_trees = r.count(8);
  for (std::size_t i = 0; i < n_trees; ++i) {
    Tree t;
    t.nodes.resize(r.count(16));
    for (auto& n : t.nodes) {
      n.feature = r.pod<std::int32_t>();
      n.threshold = r.pod<float>();
      n.left = r.pod<std::int32_t>();
      n.right = r.pod<std::int32_t>();
    }
    t.leaves.resize(r.count(8));
    for (auto& e : t.leaves) {
      e.label = r.pod<std::int32_t>();
      e.count = r.pod<std::int32_t>();
    }
    t.oob.resize(r.count(4));
    for (auto& id : t.oob) id = r.pod<std::int32_t>();
    // Structural checks so a corrupt file cannot send traversal out of bounds.
    if (t.nodes.empty()) throw FormatError("tree without nodes");
    for (const auto& n : t.nodes) {
      if (n.feature >= 0) {
        if (static_cast<std::size_t>(n.feature) >= f.n_features || n.left <= 0 || n.right <= 0 ||
            static_cast<std::size_t>(n.left) >= t.nodes.size() || static_cast<std::size_t>(n.right) >= t.nodes.size())
          throw FormatError("tree node out of range");
      } else if (n.left < 0 || n.right <= 0 || static_cast<std::size_t>(n.left + n.right) > t.leaves.size()) {
        throw FormatError("leaf histogram out of range");
      }
    }
    for (const auto& e : t.leaves)
      if (e.label < 0 || static_cast<std::size_t>(e.label) >= f.n_classes || e.count <= 0)
        throw FormatError("leaf entry out of range");
    f.trees.push_back(std::move(t));
  }
  return f;
}

nlohmann::json architecture(const AnyModel& model) {
  if (const auto* f = std::get_if<Forest>(&model))
    return {{"n_features", f->n_features}, {"n_classes", f->n_classes}, {"n_records", f->n_records},
            {"max_features", f->max_features}, {"seed", f->seed}, {"bootstrap", f->bootstrap},
            {"n_trees", f->trees.size()}};
  if (const auto* m = std::get_if<MlpModel>(&model))
    return {{"input_dim", m->input_dim()}, {"hidden", m->hidden()}, {"n_classes", m->n_classes()},
            {"activation", "relu"}, {"dropout", 0.0}};
  if (const auto* t = std::get_if<TcnModel>(&model)) return t->config().to_json();
  return nlohmann::json::object();
}

}  // namespace

void save_artifact(const std::filesystem::path& path, const ModelArtifact& a) {
  nlohmann::json manifest = a.manifest;
  manifest["kind"] = to_string(a.kind);
  manifest["architecture"] = architecture(a.model);
  manifest["toolkit_version"] = kToolkitVersion;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());

  if (a.kind == ModelKind::nb || a.kind == ModelKind::svm) {
    nlohmann::json weights;
    if (a.kind == ModelKind::nb) {
      const auto& m = std::get<NaiveBayesModel>(a.model);
      weights = {{"alpha", m.alpha},
                 {"class_log_prior", encode_doubles(m.class_log_prior)},
                 {"feature_log_prob", encode_matrix(m.feature_log_prob)}};
    } else {
      const auto& m = std::get<LinearSvmModel>(a.model);
      weights = {{"reg_lambda", m.reg_lambda}, {"bias", m.bias}, {"weights", encode_matrix(m.weights)}};
    }
    nlohmann::json doc = {{"format", "boq-model"}, {"version", kArtifactVersion}, {"manifest", manifest},
                          {"weights", weights}};
    out << doc.dump() << '\n';
  } else {
    const std::string header = manifest.dump();
    Writer w(out);
    w.bytes(kMagic, 4);
    w.pod(kArtifactVersion);
    w.pod(static_cast<std::uint64_t>(header.size()));
    w.bytes(header.data(), header.size());
    if (a.kind == ModelKind::rf) {
      write_forest(w, std::get<Forest>(a.model));
    } else if (a.kind == ModelKind::mlp) {
      for (const auto* t : std::get<MlpModel>(a.model).parameters()) write_tensor(w, *t);
    } else {
      for (const auto* t : std::get<TcnModel>(a.model).all_tensors()) write_tensor(w, *t);
    }
  }
  if (!out) throw Error("failed writing " + path.string());
}

ModelArtifact load_artifact(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open model file " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  ModelArtifact a;
  try {
    if (data.size() >= 4 && std::memcmp(data.data(), kMagic, 4) == 0) {
      Reader r(data.data() + 4, data.size() - 4);
      const auto version = r.pod<std::uint32_t>();
      if (version != kArtifactVersion) throw FormatError("unsupported artifact version " + std::to_string(version));
      std::string header(r.count(1), '\0');
      r.bytes(header.data(), header.size());
      a.manifest = nlohmann::json::parse(header);
      a.kind = parse_model_kind(a.manifest.at("kind").get<std::string>());
      const auto& arch = a.manifest.at("architecture");
      if (a.kind == ModelKind::rf) {
        a.model = read_forest(r, arch);
      } else if (a.kind == ModelKind::mlp) {
        MlpModel m(arch.at("input_dim").get<std::size_t>(), arch.at("hidden").get<std::vector<std::size_t>>(),
                   arch.at("n_classes").get<std::size_t>(), 0);
        auto names = m.parameter_names();
        auto params = m.parameters();
        for (std::size_t i = 0; i < params.size(); ++i) *params[i] = read_tensor(r, params[i]->shape(), names[i]);
        a.model = std::move(m);
      } else if (a.kind == ModelKind::tcn) {
        TcnModel m(TcnConfig::from_json(arch), 0);
        auto names = m.all_tensor_names();
        auto params = m.all_tensors();
        for (std::size_t i = 0; i < params.size(); ++i) *params[i] = read_tensor(r, params[i]->shape(), names[i]);
        a.model = std::move(m);
      } else {
        throw FormatError("binary artifact for a JSON model kind");
      }
      if (!r.done()) throw FormatError("trailing bytes after the artifact payload");
    } else {
      auto doc = nlohmann::json::parse(data);
      if (doc.value("format", "") != "boq-model") throw FormatError("not a boq model file");
      if (doc.at("version").get<std::uint32_t>() != kArtifactVersion)
        throw FormatError("unsupported artifact version");
      a.manifest = doc.at("manifest");
      a.kind = parse_model_kind(a.manifest.at("kind").get<std::string>());
      const auto& w = doc.at("weights");
      if (a.kind == ModelKind::nb) {
        NaiveBayesModel m;
        m.alpha = w.at("alpha").get<double>();
        m.class_log_prior = decode_doubles(w.at("class_log_prior"));
        m.feature_log_prob = decode_matrix(w.at("feature_log_prob"));
        if (m.feature_log_prob.dim(0) != m.class_log_prior.size()) throw FormatError("NB weights disagree in class count");
        a.model = std::move(m);
      } else if (a.kind == ModelKind::svm) {
        LinearSvmModel m;
        m.reg_lambda = w.at("reg_lambda").get<double>();
        m.bias = w.at("bias").get<std::vector<double>>();
        m.weights = decode_matrix(w.at("weights"));
        if (m.weights.dim(0) != m.bias.size()) throw FormatError("SVM weights disagree in class count");
        a.model = std::move(m);
      } else {
        throw FormatError("JSON artifact for a binary model kind");
      }
    }
    for (const char* key : {"vocab_hash", "labels", "class_counts"})
      if (!a.manifest.contains(key)) throw FormatError(std::string("manifest lacks '") + key + "'");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("unreadable model manifest in " + path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw FormatError("unreadable model manifest in " + path.string() + ": " + e.what());
  }
  return a;
}

void quantize_to_float32(AnyModel& model) {
  auto round_all = [](auto&& tensors) {
    for (Tensor* t : tensors)
      for (double& v : t->values()) v = static_cast<double>(static_cast<float>(v));
  };
  if (auto* m = std::get_if<MlpModel>(&model)) round_all(m->parameters());
  if (auto* t = std::get_if<TcnModel>(&model)) round_all(t->all_tensors());
}

}  // namespace boq
