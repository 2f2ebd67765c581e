#include "tmids/model_io.hpp"

#include <fstream>
#include <sstream>

#include "tmids/binary_io.hpp"
#include "tmids/error.hpp"
#include "tmids/fsutil.hpp"

namespace tmids {

namespace {

constexpr char kModelMagic[8] = {'T', 'M', 'I', 'D', 'S', 'M', 'D', 'L'};

constexpr char kHex[] = "0123456789abcdef";

int hex_value(char ch) {
    if (ch >= '0' && ch <= '9') return ch - '0';
    if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
    if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
    throw StructuralError("model JSON: bad hex digit in automaton states");
}

}  // namespace

void ModelBundle::validate() const {
    if (machine.feature_count() != preprocessor.bit_width())
        throw StructuralError("model expects " + std::to_string(machine.feature_count()) + " feature bits, binarizer emits " +
                              std::to_string(preprocessor.bit_width()));
    if (static_cast<int>(class_names.size()) != machine.num_classes())
        throw StructuralError("model has " + std::to_string(machine.num_classes()) + " classes but " +
                              std::to_string(class_names.size()) + " class names");
}

void write_model(const ModelBundle& bundle, std::ostream& out) {
    bundle.validate();
    BinaryWriter w(out);
    w.raw(kModelMagic, sizeof kModelMagic);
    w.u32(kModelFormatVersion);
    w.u32(kFlagPopulationStd);
    bundle.machine.serialize(out);
    const auto& p = bundle.preprocessor;
    w.u32(static_cast<std::uint32_t>(p.feature_names().size()));
    for (std::size_t f = 0; f < p.feature_names().size(); ++f) {
        w.str(p.feature_names()[f]);
        w.f64(p.standardizer().mean()[f]);
        w.f64(p.standardizer().stddev()[f]);
        const auto cuts = p.binner().thresholds(f);
        w.u32(static_cast<std::uint32_t>(cuts.size()));
        for (double c : cuts) w.f64(c);
    }
    w.u32(static_cast<std::uint32_t>(p.binner().n_bins()));
    w.u32(static_cast<std::uint32_t>(bundle.class_names.size()));
    for (const auto& name : bundle.class_names) w.str(name);
    if (!out) throw IoError("model write failed");
}

ModelBundle read_model(std::istream& in) {
    BinaryReader r(in);
    char magic[sizeof kModelMagic];
    r.read(magic, sizeof magic);
    if (!std::equal(std::begin(magic), std::end(magic), std::begin(kModelMagic)))
        throw StructuralError("not a model file (bad magic)");
    const auto version = r.u32();
    if (version != kModelFormatVersion)
        throw StructuralError("unsupported model format version " + std::to_string(version));
    const auto flags = r.u32();
    if ((flags & kFlagPopulationStd) == 0) throw StructuralError("model file uses an unsupported standardization");
    auto machine = TsetlinMachine::deserialize(in);
    const auto features = r.u32();
    if (features > (1u << 20)) throw StructuralError("model file: feature count out of range");
    std::vector<std::string> names;
    std::vector<double> mean, stddev;
    std::vector<std::vector<double>> cuts(features);
    for (std::uint32_t f = 0; f < features; ++f) {
        names.push_back(r.str());
        mean.push_back(r.f64());
        stddev.push_back(r.f64());
        const auto n = r.u32();
        if (n > 1u << 16) throw StructuralError("model file: threshold count out of range");
        for (std::uint32_t i = 0; i < n; ++i) cuts[f].push_back(r.f64());
    }
    const auto n_bins = static_cast<int>(r.u32());
    ModelBundle bundle{std::move(machine), Preprocessor(), {}};
    try {
        bundle.preprocessor = Preprocessor(std::move(names), Standardizer(std::move(mean), std::move(stddev)),
                                           QuantileBinner(n_bins, std::move(cuts)));
    } catch (const Error& e) {
        throw StructuralError(std::string("model file: invalid binarizer: ") + e.what());
    }
    const auto classes = r.u32();
    if (classes > 1u << 16) throw StructuralError("model file: class count out of range");
    for (std::uint32_t c = 0; c < classes; ++c) bundle.class_names.push_back(r.str());
    bundle.validate();
    return bundle;
}

std::string serialize_model(const ModelBundle& bundle) {
    std::ostringstream out(std::ios::binary);
    write_model(bundle, out);
    return std::move(out).str();
}

void save_model(const ModelBundle& bundle, const std::string& path) {
    bundle.validate();
    write_file_atomic(path, [&](std::ostream& out) { write_model(bundle, out); });
}

ModelBundle load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file '" + path + "'");
    return read_model(in);
}

nlohmann::json preprocessor_to_json(const Preprocessor& p) {
    nlohmann::json features = nlohmann::json::array();
    for (std::size_t f = 0; f < p.feature_names().size(); ++f) {
        const auto cuts = p.binner().thresholds(f);
        features.push_back({{"name", p.feature_names()[f]},
                            {"mean", p.standardizer().mean()[f]},
                            {"std", p.standardizer().stddev()[f]},
                            {"constant", p.standardizer().is_constant(f)},
                            {"thresholds", std::vector<double>(cuts.begin(), cuts.end())}});
    }
    return {{"n_bins", p.binner().n_bins()},
            {"std_convention", "population"},
            {"interval", "right-closed"},
            {"features", features}};
}

Preprocessor preprocessor_from_json(const nlohmann::json& j) {
    std::vector<std::string> names;
    std::vector<double> mean, stddev;
    std::vector<std::vector<double>> cuts;
    for (const auto& f : j.at("features")) {
        names.push_back(f.at("name").get<std::string>());
        mean.push_back(f.at("mean").get<double>());
        stddev.push_back(f.at("std").get<double>());
        cuts.push_back(f.at("thresholds").get<std::vector<double>>());
    }
    return Preprocessor(std::move(names), Standardizer(std::move(mean), std::move(stddev)),
                        QuantileBinner(j.at("n_bins").get<int>(), std::move(cuts)));
}

nlohmann::json model_to_json(const ModelBundle& bundle) {
    bundle.validate();
    const auto& m = bundle.machine;
    const auto& c = m.config();
    nlohmann::json classes = nlohmann::json::array();
    std::string hex(2 * m.literal_count(), '0');
    for (int cls = 0; cls < m.num_classes(); ++cls) {
        nlohmann::json clauses = nlohmann::json::array();
        for (int j = 0; j < m.clauses_per_class(); ++j) {
            for (std::size_t k = 0; k < m.literal_count(); ++k) {
                const auto v = static_cast<unsigned>(m.state(cls, j, k) - 1);
                hex[2 * k] = kHex[v >> 4];
                hex[2 * k + 1] = kHex[v & 15];
            }
            clauses.push_back({{"polarity", m.polarity(j)}, {"included", m.clause(cls, j).included}, {"states_hex", hex}});
        }
        classes.push_back({{"name", bundle.class_names[static_cast<std::size_t>(cls)]}, {"clauses", std::move(clauses)}});
    }
    return {{"format_version", kModelFormatVersion},
            {"config",
             {{"num_classes", c.num_classes},
              {"clauses_per_class", c.clauses_per_class},
              {"threshold", c.threshold},
              {"specificity", c.specificity},
              {"state_depth", c.state_depth},
              {"sparse", c.sparse},
              {"max_included_literals", c.max_included_literals},
              {"epochs", c.epochs},
              {"rng_seed", c.rng_seed},
              {"feature_bits", m.feature_count()}}},
            {"state_encoding", "hex byte per automaton, value = state - 1"},
            {"binarizer", preprocessor_to_json(bundle.preprocessor)},
            {"classes", std::move(classes)}};
}

ModelBundle model_from_json(const nlohmann::json& j) {
    if (j.at("format_version").get<std::uint32_t>() != kModelFormatVersion)
        throw StructuralError("unsupported model JSON format version");
    const auto& jc = j.at("config");
    MachineConfig c;
    c.num_classes = jc.at("num_classes").get<int>();
    c.clauses_per_class = jc.at("clauses_per_class").get<int>();
    c.threshold = jc.at("threshold").get<int>();
    c.specificity = jc.at("specificity").get<double>();
    c.state_depth = jc.at("state_depth").get<int>();
    c.sparse = jc.at("sparse").get<bool>();
    c.max_included_literals = jc.at("max_included_literals").get<int>();
    c.epochs = jc.at("epochs").get<int>();
    c.rng_seed = jc.at("rng_seed").get<std::uint64_t>();
    TsetlinMachine machine(c, jc.at("feature_bits").get<std::size_t>());
    std::vector<std::string> names;
    const auto& classes = j.at("classes");
    if (static_cast<int>(classes.size()) != c.num_classes) throw StructuralError("model JSON: class count mismatch");
    for (int cls = 0; cls < c.num_classes; ++cls) {
        const auto& jcls = classes.at(static_cast<std::size_t>(cls));
        names.push_back(jcls.at("name").get<std::string>());
        const auto& clauses = jcls.at("clauses");
        if (static_cast<int>(clauses.size()) != c.clauses_per_class) throw StructuralError("model JSON: clause count mismatch");
        for (int k = 0; k < c.clauses_per_class; ++k) {
            const auto hex = clauses.at(static_cast<std::size_t>(k)).at("states_hex").get<std::string>();
            if (hex.size() != 2 * machine.literal_count()) throw StructuralError("model JSON: state string has wrong length");
            for (std::size_t lit = 0; lit < machine.literal_count(); ++lit)
                machine.set_state(cls, k, lit, hex_value(hex[2 * lit]) * 16 + hex_value(hex[2 * lit + 1]) + 1);
        }
    }
    if (c.sparse) machine.validate_sparsity(c.max_included_literals);
    ModelBundle bundle{std::move(machine), preprocessor_from_json(j.at("binarizer")), std::move(names)};
    bundle.validate();
    return bundle;
}

}  // namespace tmids
