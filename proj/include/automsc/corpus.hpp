#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace automsc {

/// Coarse-grained subject number, the leading two digits of an MSC code.
using Subject = int;

/// Eight-digit document identifier.
using DocId = std::uint32_t;

inline constexpr DocId kMaxDocId = 99'999'999;

/// A validated 5-character MSC code such as "68T50" or "05-xx".
class MscCode {
 public:
  /// Parses and validates `s`. Characters 3-5 are uppercased except a
  /// lowercase 'x', which is kept as a wildcard. Throws Error(MalformedCode).
  static MscCode parse(std::string_view s);

  const std::string& raw() const noexcept { return raw_; }
  Subject subject() const noexcept { return (raw_[0] - '0') * 10 + (raw_[1] - '0'); }
  char mid() const noexcept { return raw_[2]; }
  std::string_view leaf() const noexcept { return std::string_view(raw_).substr(3, 2); }

  friend bool operator==(const MscCode&, const MscCode&) = default;
  friend auto operator<=>(const MscCode&, const MscCode&) = default;

 private:
  explicit MscCode(std::string raw) : raw_(std::move(raw)) {}
  std::string raw_;
};

inline MscCode parse_msc_code(std::string_view s) { return MscCode::parse(s); }
inline Subject primary_subject(const MscCode& c) noexcept { return c.subject(); }

using Reference = std::vector<MscCode>;

struct ArticleRecord {
  DocId de = 0;
  std::vector<MscCode> labels;  // labels[0] is the primary code
  std::string title;
  std::string text;
  std::vector<Reference> ref_mscs;

  Subject primary() const { return labels.front().subject(); }

  friend bool operator==(const ArticleRecord&, const ArticleRecord&) = default;
};

/// How parse_ref_mscs reacts to a malformed reference segment.
enum class RefPolicy {
  SkipReference,  // drop the segment and log a warning
  Reject,         // throw Error(MalformedField)
};

/// Decodes the reference field: comma-separated references, each a run of
/// concatenated fixed-width codes ("68T5003B70,81Q05" -> [[68T50,03B70],[81Q05]]).
std::vector<Reference> parse_ref_mscs(std::string_view field,
                                      RefPolicy policy = RefPolicy::Reject,
                                      std::size_t* skipped = nullptr);

/// Inverse of parse_ref_mscs for well-formed input.
std::string format_ref_mscs(const std::vector<Reference>& refs);

struct ReadOptions {
  /// Reject records whose reference field is malformed instead of skipping
  /// the bad references.
  bool strict = false;
};

/// Reads the article CSV (header `de,labels,title,text,mscs`).
std::vector<ArticleRecord> read_articles(std::istream& in, const ReadOptions& options = {});
void write_articles(const std::vector<ArticleRecord>& records, std::ostream& out);

/// Zero-padded eight-digit rendering of a document id.
std::string format_de(DocId de);
DocId parse_de(std::string_view s);

/// Five-character run identifier, space-padded on the right ("refs ").
std::string pad_method_id(std::string_view id);

struct PredictionRecord {
  DocId de = 0;
  std::string method;  // exactly five characters
  int pos = 1;
  Subject coarse = 0;
  std::optional<MscCode> fine;
  std::optional<double> score;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

/// Writes `de,method,pos,coarse,fine,score`. Throws Error(DuplicateKey) if
/// (de, method, pos) repeats; nothing is written in that case.
void write_predictions(const std::vector<PredictionRecord>& preds, std::ostream& out);
std::vector<PredictionRecord> read_predictions(std::istream& in);

struct HeldOutIds {
  std::vector<DocId> test_ids;
};

struct RandomFraction {
  double test_fraction = 0.1;
  std::uint64_t seed = 0;
};

using SplitPolicy = std::variant<HeldOutIds, RandomFraction>;

struct CorpusSplit {
  std::vector<ArticleRecord> train;
  std::vector<ArticleRecord> test;
};

/// Deterministic train/test partition. Input order is preserved within
/// each side. Throws Error(UnknownId) for held-out ids not in `records`.
CorpusSplit split_corpus(const std::vector<ArticleRecord>& records, const SplitPolicy& policy);

}  // namespace automsc
