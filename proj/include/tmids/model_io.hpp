#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "tmids/binarize.hpp"
#include "tmids/machine.hpp"

namespace tmids {

/// Current model file format. Layout (all integers little-endian):
///   "TMIDSMDL" | u32 version | u32 flags
///   machine section (config echo, n, one byte per automaton: state - 1)
///   u32 feature count, then per feature: name, f64 mean, f64 std, u32 cut count, f64 cuts...
///   u32 n_bins | u32 class count, class names
/// Strings are u32 length + bytes.
inline constexpr std::uint32_t kModelFormatVersion = 1;
/// flags bit 0: population standard deviation.
inline constexpr std::uint32_t kFlagPopulationStd = 1u;

struct ModelBundle {
    TsetlinMachine machine;
    Preprocessor preprocessor;
    std::vector<std::string> class_names;

    /// Throws StructuralError if the machine width, binarizer and class list disagree.
    void validate() const;
};

void write_model(const ModelBundle& bundle, std::ostream& out);
ModelBundle read_model(std::istream& in);

/// Atomic file write (temp file + rename).
void save_model(const ModelBundle& bundle, const std::string& path);
ModelBundle load_model(const std::string& path);

std::string serialize_model(const ModelBundle& bundle);

nlohmann::json preprocessor_to_json(const Preprocessor& p);
Preprocessor preprocessor_from_json(const nlohmann::json& j);

/// Full textual equivalent of the model file, automaton states included.
nlohmann::json model_to_json(const ModelBundle& bundle);
ModelBundle model_from_json(const nlohmann::json& j);

}  // namespace tmids
