#pragma once

#include <string>

#include "spinlab/model.hpp"

namespace spinlab {

//! Parses a model configuration document (strict TOML subset, see README)
//! into a validated LatticeModel. Unknown keys are rejected; parse errors
//! carry the offending line number.
LatticeModel load_model(const std::string& text);

//! Reads the document from a file; table_path entries resolve relative to
//! the config file's directory.
LatticeModel load_model_file(const std::string& path);

//! Canonical document for the model; load_model(serialize_model(m)) == m.
std::string serialize_model(const LatticeModel& model);

//! Stable FNV-1a 64-bit digest of the canonicalized document, hex-encoded.
std::string config_digest(const LatticeModel& model);

} // namespace spinlab
