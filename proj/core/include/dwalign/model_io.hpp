#pragma once

// Versioned text model files. Every real number is written as a C99 hex
// float, so save -> load reproduces parameters bit for bit.

#include <functional>
#include <iosfwd>
#include <span>
#include <string>

#include "dwalign/corpus.hpp"
#include "dwalign/dwa.hpp"
#include "dwalign/fa_align.hpp"

namespace dwalign {

struct FaModelFile {
  Vocab src_vocab{VocabSide::Source};
  Vocab tgt_vocab{VocabSide::Target};
  fa::FaParams params;

  bool operator==(const FaModelFile&) const = default;
};

struct DwaModelFile {
  Vocab src_vocab{VocabSide::Source};
  Vocab tgt_vocab{VocabSide::Target};
  dwa::Model model;

  bool operator==(const DwaModelFile&) const = default;
};

enum class ModelKind { Fa, Dwa };

void write_fa_model(std::ostream& os, const FaModelFile& model);
FaModelFile read_fa_model(std::istream& is);
void write_dwa_model(std::ostream& os, const DwaModelFile& model);
DwaModelFile read_dwa_model(std::istream& is);

// Reads only the header line. Throws FormatError for unknown files.
ModelKind peek_model_kind(const std::string& path);
FaModelFile load_fa_model(const std::string& path);
DwaModelFile load_dwa_model(const std::string& path);

// Writes through a temporary file in the same directory and renames it into
// place once `write` returns; nothing is left behind on failure.
void write_file_atomically(const std::string& path,
                           const std::function<void(std::ostream&)>& write);

// `<count> <d>` header, then `word v1 ... vd` with 6 significant digits.
void write_embeddings_text(std::ostream& os, std::span<const std::string> words,
                           const RowMatrix& vectors);

std::string format_hex(double x);
double parse_hex(const std::string& s);

}  // namespace dwalign
