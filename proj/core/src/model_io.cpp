#include "dwalign/model_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "dwalign/error.hpp"

namespace dwalign {

namespace {

constexpr std::string_view kFaHeader = "#dwalign-fa-model v1";
constexpr std::string_view kDwaHeader = "#dwalign-dwa-model v1";

// Line-oriented reader that tracks the line number for error messages.
class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}

  std::string line() {
    std::string s;
    if (!std::getline(is_, s)) fail("unexpected end of file");
    ++line_no_;
    return s;
  }

  std::vector<std::string> fields() { return tokenize(line()); }

  // Expects `key value...` and returns the values.
  std::vector<std::string> keyed(std::string_view key, std::size_t count) {
    auto f = fields();
    if (f.size() != count + 1 || f[0] != key)
      fail("expected '" + std::string(key) + "' with " + std::to_string(count) +
           " value(s)");
    f.erase(f.begin());
    return f;
  }

  std::uint64_t integer(const std::string& s) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    fail("bad integer '" + s + "'");
  }

  double real(const std::string& s) {
    try {
      return parse_hex(s);
    } catch (const FormatError& e) {
      fail(e.what());
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError("model file line " + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::istream& is_;
  std::size_t line_no_ = 0;
};

void write_vocab(std::ostream& os, std::string_view name, const Vocab& vocab) {
  os << name << ' ' << vocab.size() << '\n';
  for (WordId id = 0; id < vocab.size(); ++id)
    os << vocab.token(id) << '\t' << vocab.freq(id) << '\n';
}

Vocab read_vocab(Reader& r, std::string_view name) {
  const auto n = r.integer(r.keyed(name, 1)[0]);
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  entries.reserve(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    const auto s = r.line();
    const auto tab = s.rfind('\t');
    if (tab == std::string::npos) r.fail("expected token<TAB>freq");
    entries.emplace_back(s.substr(0, tab), r.integer(s.substr(tab + 1)));
  }
  try {
    return Vocab::from_entries(entries);
  } catch (const FormatError& e) {
    r.fail(e.what());
  }
}

template <class M>
void write_block(std::ostream& os, std::string_view name, const M& m) {
  os << "block " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << format_hex(m(i, j));
    }
    os << '\n';
  }
}

template <class M>
void read_block(Reader& r, std::string_view name, M& m) {
  const auto head = r.fields();
  if (head.size() != 4 || head[0] != "block" || head[1] != name)
    r.fail("expected block '" + std::string(name) + "'");
  const auto rows = static_cast<Eigen::Index>(r.integer(head[2]));
  const auto cols = static_cast<Eigen::Index>(r.integer(head[3]));
  if constexpr (M::ColsAtCompileTime == 1) {
    if (cols != 1) r.fail("block '" + std::string(name) + "' must be a column vector");
    m.resize(rows);
  } else {
    m.resize(rows, cols);
  }
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto values = r.fields();
    if (static_cast<Eigen::Index>(values.size()) != cols)
      r.fail("block '" + std::string(name) + "' row has the wrong width");
    for (Eigen::Index j = 0; j < cols; ++j)
      m(i, j) = r.real(values[static_cast<std::size_t>(j)]);
  }
}

void expect_end(Reader& r) {
  if (r.line() != "end") r.fail("expected 'end'");
}

}  // namespace

std::string format_hex(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

double parse_hex(const std::string& s) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw FormatError("bad real number '" + s + "'");
  return v;
}

void write_fa_model(std::ostream& os, const FaModelFile& m) {
  const auto& p = m.params;
  os << kFaHeader << '\n';
  os << "lambda " << format_hex(p.lambda) << '\n';
  os << "p0 " << format_hex(p.p0) << '\n';
  os << "null_word " << p.null_word << '\n';
  write_vocab(os, "source_vocab", m.src_vocab);
  write_vocab(os, "target_vocab", m.tgt_vocab);
  os << "ttable " << p.ttable.src_size() << ' ' << p.ttable.tgt_size() << '\n';
  for (WordId e = 0; e < p.ttable.src_size(); ++e) {
    const auto& row = p.ttable.row(e);
    os << format_hex(row.unseen) << ' ' << row.entries.size();
    for (const auto& [f, prob] : row.entries) os << ' ' << f << ':' << format_hex(prob);
    os << '\n';
  }
  os << "end\n";
}

FaModelFile read_fa_model(std::istream& is) {
  Reader r(is);
  if (r.line() != kFaHeader) r.fail("not an FA model file");
  FaModelFile m;
  auto& p = m.params;
  p.lambda = r.real(r.keyed("lambda", 1)[0]);
  p.p0 = r.real(r.keyed("p0", 1)[0]);
  p.null_word = static_cast<WordId>(r.integer(r.keyed("null_word", 1)[0]));
  m.src_vocab = read_vocab(r, "source_vocab");
  m.tgt_vocab = read_vocab(r, "target_vocab");
  const auto dims = r.keyed("ttable", 2);
  const auto src_size = r.integer(dims[0]);
  const auto tgt_size = r.integer(dims[1]);
  if (src_size != m.src_vocab.size() || tgt_size != m.tgt_vocab.size())
    r.fail("translation table does not match the vocabularies");
  if (!m.src_vocab.null_id() || *m.src_vocab.null_id() != p.null_word)
    r.fail("null_word does not match the source vocabulary");
  p.ttable = fa::TranslationTable::uniform(src_size, tgt_size);
  for (WordId e = 0; e < src_size; ++e) {
    const auto f = r.fields();
    if (f.size() < 2) r.fail("bad translation table row");
    auto& row = p.ttable.mutable_row(e);
    row.unseen = r.real(f[0]);
    const auto nnz = r.integer(f[1]);
    if (f.size() != nnz + 2) r.fail("translation table row has the wrong entry count");
    row.entries.clear();
    for (std::size_t k = 0; k < nnz; ++k) {
      const auto& entry = f[k + 2];
      const auto colon = entry.find(':');
      if (colon == std::string::npos) r.fail("bad translation entry '" + entry + "'");
      const auto id = r.integer(entry.substr(0, colon));
      if (id >= tgt_size || (!row.entries.empty() && row.entries.back().first >= id))
        r.fail("translation entries must be increasing target ids");
      row.entries.emplace_back(static_cast<WordId>(id), r.real(entry.substr(colon + 1)));
    }
  }
  expect_end(r);
  return m;
}

void write_dwa_model(std::ostream& os, const DwaModelFile& file) {
  const auto& m = file.model;
  const auto& p = m.params;
  os << kDwaHeader << '\n';
  os << "lambda " << format_hex(m.lambda) << '\n';
  os << "p0 " << format_hex(m.p0) << '\n';
  os << "dim " << p.dim << '\n';
  os << "context " << p.context << '\n';
  write_vocab(os, "source_vocab", file.src_vocab);
  write_vocab(os, "target_vocab", file.tgt_vocab);
  os << "classes " << m.classes.num_classes() << '\n';
  for (const auto& members : m.classes.members) {
    os << members.size();
    for (auto w : members) os << ' ' << w;
    os << '\n';
  }
  write_block(os, "source_embeddings", p.src_embed);
  write_block(os, "target_embeddings", p.tgt_embed);
  for (const auto& t : p.word_transform) write_block(os, "word_transform", t);
  write_block(os, "repr_bias", p.repr_bias);
  write_block(os, "word_bias", p.word_bias);
  write_block(os, "class_embeddings", p.class_embed);
  for (const auto& t : p.class_transform) write_block(os, "class_transform", t);
  write_block(os, "class_repr_bias", p.class_repr_bias);
  write_block(os, "class_bias", p.class_bias);
  write_block(os, "null_weights", p.null_weights);
  os << "end\n";
}

DwaModelFile read_dwa_model(std::istream& is) {
  Reader r(is);
  if (r.line() != kDwaHeader) r.fail("not a DWA model file");
  DwaModelFile file;
  auto& m = file.model;
  m.lambda = r.real(r.keyed("lambda", 1)[0]);
  m.p0 = r.real(r.keyed("p0", 1)[0]);
  const auto dim = r.integer(r.keyed("dim", 1)[0]);
  const auto context = r.integer(r.keyed("context", 1)[0]);
  file.src_vocab = read_vocab(r, "source_vocab");
  file.tgt_vocab = read_vocab(r, "target_vocab");
  const auto num_classes = r.integer(r.keyed("classes", 1)[0]);
  std::vector<std::vector<WordId>> members(num_classes);
  for (auto& c : members) {
    const auto f = r.fields();
    if (f.empty() || f.size() != r.integer(f[0]) + 1) r.fail("bad class line");
    for (std::size_t k = 1; k < f.size(); ++k)
      c.push_back(static_cast<WordId>(r.integer(f[k])));
  }
  try {
    m.classes = ClassPartition::from_members(std::move(members), file.tgt_vocab.size());
  } catch (const FormatError& e) {
    r.fail(e.what());
  }

  auto& p = m.params;
  p = lbl::DwaParams::zeros({file.src_vocab.size(), file.tgt_vocab.size(),
                             m.classes.num_classes(), dim, context});
  read_block(r, "source_embeddings", p.src_embed);
  read_block(r, "target_embeddings", p.tgt_embed);
  for (auto& t : p.word_transform) read_block(r, "word_transform", t);
  read_block(r, "repr_bias", p.repr_bias);
  read_block(r, "word_bias", p.word_bias);
  read_block(r, "class_embeddings", p.class_embed);
  for (auto& t : p.class_transform) read_block(r, "class_transform", t);
  read_block(r, "class_repr_bias", p.class_repr_bias);
  read_block(r, "class_bias", p.class_bias);
  read_block(r, "null_weights", p.null_weights);
  expect_end(r);
  if (p.shape().src_vocab != file.src_vocab.size() ||
      p.shape().tgt_vocab != file.tgt_vocab.size() ||
      p.num_classes() != m.classes.num_classes() ||
      static_cast<std::size_t>(p.word_bias.size()) != file.tgt_vocab.size() ||
      static_cast<std::size_t>(p.null_weights.size()) != file.tgt_vocab.size() ||
      static_cast<std::size_t>(p.class_bias.size()) != m.classes.num_classes() ||
      static_cast<std::size_t>(p.src_embed.cols()) != dim ||
      static_cast<std::size_t>(p.tgt_embed.cols()) != dim ||
      static_cast<std::size_t>(p.class_embed.cols()) != dim)
    r.fail("parameter blocks do not match the declared dimensions");
  for (std::size_t s = 0; s < p.window(); ++s)
    if (static_cast<std::size_t>(p.word_transform[s].rows()) != dim ||
        static_cast<std::size_t>(p.word_transform[s].cols()) != dim ||
        static_cast<std::size_t>(p.class_transform[s].rows()) != dim ||
        static_cast<std::size_t>(p.class_transform[s].cols()) != dim)
      r.fail("transform blocks do not match the declared dimensions");
  return file;
}

ModelKind peek_model_kind(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  std::string header;
  std::getline(in, header);
  if (header == kFaHeader) return ModelKind::Fa;
  if (header == kDwaHeader) return ModelKind::Dwa;
  throw FormatError(path + ": unrecognized model header '" + header + "'");
}

FaModelFile load_fa_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return read_fa_model(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

DwaModelFile load_dwa_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return read_dwa_model(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_file_atomically(const std::string& path,
                           const std::function<void(std::ostream&)>& write) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw FormatError("cannot write " + tmp.string());
      write(out);
      out.flush();
      if (!out) throw FormatError("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

void write_embeddings_text(std::ostream& os, std::span<const std::string> words,
                           const RowMatrix& vectors) {
  if (static_cast<std::size_t>(vectors.rows()) != words.size())
    throw std::invalid_argument("embedding export: word and vector counts differ");
  os << words.size() << ' ' << vectors.cols() << '\n';
  char buf[64];
  for (std::size_t n = 0; n < words.size(); ++n) {
    os << words[n];
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
      std::snprintf(buf, sizeof buf, " %.6g", vectors(static_cast<Eigen::Index>(n), c));
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace dwalign
