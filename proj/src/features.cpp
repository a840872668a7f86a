#include "automsc/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cwctype>
#include <locale.h>
#include <map>
#include <set>
#include <wctype.h>

#include "automsc/error.hpp"

namespace automsc {

namespace variants {
const MethodVariant titer{"titer", true, true, true};
const MethodVariant refs{"refs", false, false, true};
const MethodVariant titls{"titls", true, false, false};
const MethodVariant texts{"texts", false, true, false};
const MethodVariant tite{"tite", true, true, false};
const MethodVariant tiref{"tiref", true, false, true};
const MethodVariant teref{"teref", false, true, true};
}  // namespace variants

std::span<const MethodVariant> all_variants() {
  static const std::array<MethodVariant, 7> all = {variants::titer, variants::refs,  variants::titls,
                                                   variants::texts, variants::tite,  variants::tiref,
                                                   variants::teref};
  return all;
}

std::optional<MethodVariant> find_variant(std::string_view id) {
  while (!id.empty() && id.back() == ' ') id.remove_suffix(1);
  while (!id.empty() && id.front() == ' ') id.remove_prefix(1);
  for (const auto& v : all_variants()) {
    if (v.id == id) return v;
  }
  return std::nullopt;
}

std::string compose_source(const ArticleRecord& a, const MethodVariant& v, const Preprocessing& pre) {
  std::string out;
  auto append = [&out](std::string_view part) {
    if (part.empty()) return;
    if (!out.empty()) out.push_back(' ');
    out.append(part);
  };
  if (v.uses_title) append(pre.strip_math ? strip_math(a.title) : a.title);
  if (v.uses_text) append(pre.strip_math ? strip_math(a.text) : a.text);
  if (v.uses_mscs) append(format_ref_mscs(a.ref_mscs));
  return out;
}

std::string strip_math(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    std::string_view close;
    std::size_t open_len = 0;
    if (s[i] == '\\' && i + 1 < s.size()) {
      const char next = s[i + 1];
      if (next == '(') {
        close = "\\)";
        open_len = 2;
      } else if (next == '[') {
        close = "\\]";
        open_len = 2;
      } else {
        // Any other escape (including "\$") is ordinary text.
        out.push_back(s[i]);
        out.push_back(next);
        i += 2;
        continue;
      }
    } else if (s[i] == '$') {
      const bool display = i + 1 < s.size() && s[i + 1] == '$';
      close = display ? "$$" : "$";
      open_len = display ? 2 : 1;
    } else {
      out.push_back(s[i]);
      ++i;
      continue;
    }

    std::size_t j = i + open_len;
    std::size_t end = s.size();
    while (j < s.size()) {
      if (s[j] == '\\' && j + 1 < s.size() && close[0] == '$') {
        j += 2;  // escaped character inside $-math
        continue;
      }
      if (s.compare(j, close.size(), close) == 0) {
        end = j + close.size();
        break;
      }
      ++j;
    }
    out.push_back(' ');
    i = end;
  }
  return out;
}

namespace {

locale_t utf8_locale() {
  static const locale_t loc = [] {
    locale_t l = newlocale(LC_CTYPE_MASK, "C.UTF-8", static_cast<locale_t>(0));
    if (l == static_cast<locale_t>(0)) l = newlocale(LC_CTYPE_MASK, "C.utf8", static_cast<locale_t>(0));
    return l;
  }();
  return loc;
}

// Decodes one code point starting at s[i]; returns the number of bytes
// consumed, or 0 for an invalid sequence (the caller skips one byte).
std::size_t decode_utf8(std::string_view s, std::size_t i, char32_t& cp) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    cp = b0;
    return 1;
  }
  std::size_t len = 0;
  char32_t min = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
    min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
    min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
    min = 0x10000;
  } else {
    return 0;
  }
  if (i + len > s.size()) return 0;
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
  return len;
}

void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_alnum(char32_t cp, locale_t loc) {
  if (cp < 0x80) {
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  }
  return loc != static_cast<locale_t>(0) && iswalnum_l(static_cast<wint_t>(cp), loc);
}

char32_t to_lower(char32_t cp, locale_t loc) {
  if (cp < 0x80) return (cp >= 'A' && cp <= 'Z') ? cp + ('a' - 'A') : cp;
  if (loc == static_cast<locale_t>(0)) return cp;
  return static_cast<char32_t>(towlower_l(static_cast<wint_t>(cp), loc));
}

}  // namespace

std::vector<std::string> tokenize(std::string_view s) {
  const locale_t loc = utf8_locale();
  std::vector<std::string> tokens;
  std::string current;
  std::size_t current_len = 0;

  auto flush = [&] {
    if (current_len >= 2) tokens.push_back(current);
    current.clear();
    current_len = 0;
  };

  std::size_t i = 0;
  while (i < s.size()) {
    char32_t cp = 0;
    const std::size_t n = decode_utf8(s, i, cp);
    if (n == 0) {
      flush();
      ++i;
      continue;
    }
    i += n;
    if (is_alnum(cp, loc)) {
      encode_utf8(to_lower(cp, loc), current);
      ++current_len;
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::int64_t> df,
                       std::int64_t n_docs, Eigen::VectorXd idf)
    : terms_(std::move(terms)), df_(std::move(df)), n_docs_(n_docs), idf_(std::move(idf)) {
  if (df_.size() != terms_.size() || static_cast<std::size_t>(idf_.size()) != terms_.size()) {
    throw Error(ErrorKind::CorruptFile, "vocabulary arrays disagree in length");
  }
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (i > 0 && !(terms_[i - 1] < terms_[i])) {
      throw Error(ErrorKind::CorruptFile, "vocabulary terms are not strictly increasing");
    }
    index_.emplace(terms_[i], static_cast<Eigen::Index>(i));
  }
}

std::optional<Eigen::Index> Vocabulary::index_of(std::string_view term) const {
  const auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary fit_vocabulary(std::span<const std::string> docs, const VocabularyOptions& options) {
  if (docs.empty()) throw Error(ErrorKind::EmptyCorpus, "cannot fit a vocabulary on zero documents");

  std::map<std::string, std::int64_t> df;
  for (const auto& doc : docs) {
    auto tokens = tokenize(doc);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (auto& t : tokens) ++df[std::move(t)];
  }

  const auto n_docs = static_cast<std::int64_t>(docs.size());
  std::vector<std::string> terms;
  std::vector<std::int64_t> counts;
  for (auto& [term, count] : df) {
    if (count < options.min_df) continue;
    terms.push_back(term);
    counts.push_back(count);
  }
  Eigen::VectorXd idf(static_cast<Eigen::Index>(terms.size()));
  for (std::size_t i = 0; i < terms.size(); ++i) {
    idf[static_cast<Eigen::Index>(i)] =
        std::log(static_cast<double>(1 + n_docs) / static_cast<double>(1 + counts[i])) + 1.0;
  }
  return Vocabulary(std::move(terms), std::move(counts), n_docs, std::move(idf));
}

FeatureVector encode(std::string_view doc, const Vocabulary& voc) {
  std::map<Eigen::Index, double> counts;
  for (const auto& tok : tokenize(doc)) {
    if (const auto idx = voc.index_of(tok)) counts[*idx] += 1.0;
  }
  FeatureVector x(static_cast<Eigen::Index>(voc.size()));
  x.reserve(static_cast<Eigen::Index>(counts.size()));
  double norm_sq = 0.0;
  for (const auto& [idx, count] : counts) {
    const double v = count * voc.idf()[idx];
    norm_sq += v * v;
    x.insertBack(idx) = v;
  }
  if (norm_sq > 0.0) x /= std::sqrt(norm_sq);
  return x;
}

FeatureMatrix<double> encode_all(std::span<const std::string> docs, const Vocabulary& voc) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t r = 0; r < docs.size(); ++r) {
    const FeatureVector x = encode(docs[r], voc);
    for (FeatureVector::InnerIterator it(x); it; ++it) {
      triplets.emplace_back(static_cast<int>(r), static_cast<int>(it.index()), it.value());
    }
  }
  FeatureMatrix<double> m(static_cast<Eigen::Index>(docs.size()), static_cast<Eigen::Index>(voc.size()));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

}  // namespace automsc
