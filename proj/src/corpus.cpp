#include "automsc/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "automsc/csv.hpp"
#include "automsc/error.hpp"
#include "automsc/log.hpp"
#include "automsc/random.hpp"

namespace automsc {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

char upper_keep_x(char c) {
  if (c == 'x') return c;
  if (c >= 'a' && c <= 'z') return static_cast<char>(c - 'a' + 'A');
  return c;
}

std::string_view trim_spaces(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

const csv::Row kArticleHeader = {"de", "labels", "title", "text", "mscs"};
const csv::Row kPredictionHeader = {"de", "method", "pos", "coarse", "fine", "score"};

std::unordered_map<std::string, std::size_t> column_index(const csv::Record& header,
                                                          const csv::Row& required) {
  std::unordered_map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < header.fields.size(); ++i) idx.emplace(header.fields[i], i);
  for (const auto& name : required) {
    if (!idx.contains(name)) {
      throw Error(ErrorKind::CsvSyntax, "line " + std::to_string(header.line) +
                                            ": header is missing column '" + name + "'");
    }
  }
  return idx;
}

const std::string& field_at(const csv::Record& rec, std::size_t column, const char* name) {
  if (column >= rec.fields.size()) {
    throw Error(ErrorKind::CsvSyntax, "line " + std::to_string(rec.line) + ": missing field '" +
                                          name + "'");
  }
  return rec.fields[column];
}

std::string where(const csv::Record& rec) { return "line " + std::to_string(rec.line) + ": "; }

}  // namespace

MscCode MscCode::parse(std::string_view s) {
  if (s.size() != 5) {
    throw Error(ErrorKind::MalformedCode,
                "'" + std::string(s) + "' has length " + std::to_string(s.size()) + ", expected 5");
  }
  std::string raw(s);
  for (std::size_t i = 2; i < 5; ++i) raw[i] = upper_keep_x(raw[i]);

  const bool ok = is_digit(raw[0]) && is_digit(raw[1]) && (is_upper(raw[2]) || raw[2] == '-') &&
                  std::all_of(raw.begin() + 3, raw.end(), [](char c) {
                    return is_digit(c) || is_upper(c) || c == 'x';
                  });
  if (!ok) throw Error(ErrorKind::MalformedCode, "'" + std::string(s) + "' is not an MSC code");
  return MscCode(std::move(raw));
}

std::vector<Reference> parse_ref_mscs(std::string_view field, RefPolicy policy,
                                      std::size_t* skipped) {
  std::vector<Reference> refs;
  if (skipped) *skipped = 0;
  if (trim_spaces(field).empty()) return refs;

  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = field.find(',', start);
    const std::string_view segment =
        trim_spaces(field.substr(start, comma == std::string_view::npos ? field.npos : comma - start));
    try {
      if (segment.size() % 5 != 0) {
        throw Error(ErrorKind::MalformedField,
                    "reference segment '" + std::string(segment) + "' is not a multiple of 5 characters");
      }
      Reference ref;
      ref.reserve(segment.size() / 5);
      for (std::size_t i = 0; i < segment.size(); i += 5) {
        try {
          ref.push_back(MscCode::parse(segment.substr(i, 5)));
        } catch (const Error& e) {
          throw Error(ErrorKind::MalformedField, e.what());
        }
      }
      refs.push_back(std::move(ref));
    } catch (const Error& e) {
      if (policy == RefPolicy::Reject) throw;
      if (skipped) ++*skipped;
      spdlog::warn("skipping reference: {}", e.what());
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return refs;
}

std::string format_ref_mscs(const std::vector<Reference>& refs) {
  std::string out;
  for (std::size_t r = 0; r < refs.size(); ++r) {
    if (r) out.push_back(',');
    for (const auto& code : refs[r]) out += code.raw();
  }
  return out;
}

std::string format_de(DocId de) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08u", static_cast<unsigned>(de));
  return buf;
}

DocId parse_de(std::string_view s) {
  s = trim_spaces(s);
  if (s.empty() || s.size() > 8 || !std::all_of(s.begin(), s.end(), is_digit)) {
    throw Error(ErrorKind::CsvSyntax, "invalid document id '" + std::string(s) + "'");
  }
  DocId value = 0;
  std::from_chars(s.data(), s.data() + s.size(), value);
  return value;
}

std::string pad_method_id(std::string_view id) {
  if (id.empty() || id.size() > 5) {
    throw Error(ErrorKind::Usage, "method id '" + std::string(id) + "' must have 1 to 5 characters");
  }
  std::string out(id);
  out.resize(5, ' ');
  return out;
}

std::vector<ArticleRecord> read_articles(std::istream& in, const ReadOptions& options) {
  csv::Reader reader(in);
  csv::Record rec;
  std::vector<ArticleRecord> records;
  if (!reader.next(rec)) return records;
  const auto cols = column_index(rec, kArticleHeader);
  const std::size_t c_de = cols.at("de"), c_labels = cols.at("labels"), c_title = cols.at("title"),
                    c_text = cols.at("text"), c_mscs = cols.at("mscs");

  std::unordered_set<DocId> seen;
  std::size_t skipped_total = 0;
  while (reader.next(rec)) {
    ArticleRecord a;
    try {
      a.de = parse_de(field_at(rec, c_de, "de"));
    } catch (const Error& e) {
      throw Error(ErrorKind::CsvSyntax, where(rec) + e.what());
    }
    if (!seen.insert(a.de).second) {
      throw Error(ErrorKind::DuplicateId, where(rec) + "document " + format_de(a.de) + " repeats");
    }

    std::string_view labels = field_at(rec, c_labels, "labels");
    std::size_t pos = 0;
    while (pos < labels.size()) {
      const std::size_t end = labels.find_first_of(" ,\t", pos);
      const std::string_view tok = labels.substr(pos, end == labels.npos ? labels.npos : end - pos);
      if (!tok.empty()) {
        try {
          a.labels.push_back(MscCode::parse(tok));
        } catch (const Error& e) {
          throw Error(ErrorKind::MalformedCode, where(rec) + e.what());
        }
      }
      if (end == labels.npos) break;
      pos = end + 1;
    }
    if (a.labels.empty()) {
      throw Error(ErrorKind::EmptyLabels, where(rec) + "document " + format_de(a.de) + " has no labels");
    }

    a.title = field_at(rec, c_title, "title");
    a.text = field_at(rec, c_text, "text");
    std::size_t skipped = 0;
    try {
      a.ref_mscs = parse_ref_mscs(field_at(rec, c_mscs, "mscs"),
                                  options.strict ? RefPolicy::Reject : RefPolicy::SkipReference,
                                  &skipped);
    } catch (const Error& e) {
      throw Error(ErrorKind::MalformedField, where(rec) + e.what());
    }
    skipped_total += skipped;
    records.push_back(std::move(a));
  }
  if (skipped_total > 0) {
    spdlog::warn("skipped {} malformed reference segment(s) while reading articles", skipped_total);
  }
  return records;
}

void write_articles(const std::vector<ArticleRecord>& records, std::ostream& out) {
  csv::write_row(out, kArticleHeader);
  for (const auto& a : records) {
    std::string labels;
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
      if (i) labels.push_back(' ');
      labels += a.labels[i].raw();
    }
    csv::write_row(out, {format_de(a.de), labels, a.title, a.text, format_ref_mscs(a.ref_mscs)});
  }
}

void write_predictions(const std::vector<PredictionRecord>& preds, std::ostream& out) {
  std::set<std::tuple<DocId, std::string, int>> keys;
  for (const auto& p : preds) {
    if (!keys.emplace(p.de, p.method, p.pos).second) {
      throw Error(ErrorKind::DuplicateKey, "(" + format_de(p.de) + ", '" + p.method + "', " +
                                               std::to_string(p.pos) + ") appears twice");
    }
  }
  std::ostringstream buf;
  csv::write_row(buf, kPredictionHeader);
  char score[32];
  char coarse[8];
  for (const auto& p : preds) {
    std::snprintf(coarse, sizeof coarse, "%d", p.coarse);
    if (p.score) std::snprintf(score, sizeof score, "%.6f", *p.score);
    csv::write_row(buf, {format_de(p.de), p.method, std::to_string(p.pos), coarse,
                         p.fine ? p.fine->raw() : std::string(), p.score ? score : ""});
  }
  out << buf.str();
}

std::vector<PredictionRecord> read_predictions(std::istream& in) {
  csv::Reader reader(in);
  csv::Record rec;
  std::vector<PredictionRecord> preds;
  if (!reader.next(rec)) return preds;
  const auto cols = column_index(rec, kPredictionHeader);
  std::set<std::tuple<DocId, std::string, int>> keys;

  auto parse_int = [&](const std::string& s, const char* name) {
    int v = 0;
    const auto t = trim_spaces(s);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
      throw Error(ErrorKind::CsvSyntax, where(rec) + "invalid " + name + " '" + s + "'");
    }
    return v;
  };

  while (reader.next(rec)) {
    PredictionRecord p;
    try {
      p.de = parse_de(field_at(rec, cols.at("de"), "de"));
    } catch (const Error& e) {
      throw Error(ErrorKind::CsvSyntax, where(rec) + e.what());
    }
    p.method = field_at(rec, cols.at("method"), "method");
    p.pos = parse_int(field_at(rec, cols.at("pos"), "pos"), "pos");
    p.coarse = parse_int(field_at(rec, cols.at("coarse"), "coarse"), "coarse");
    if (p.pos < 1 || p.coarse < 0 || p.coarse > 99) {
      throw Error(ErrorKind::CsvSyntax, where(rec) + "pos or coarse out of range");
    }
    if (const auto& fine = field_at(rec, cols.at("fine"), "fine"); !fine.empty()) {
      p.fine = MscCode::parse(fine);
    }
    if (const auto& score = field_at(rec, cols.at("score"), "score"); !score.empty()) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(score.data(), score.data() + score.size(), v);
      if (ec != std::errc() || ptr != score.data() + score.size() || !std::isfinite(v)) {
        throw Error(ErrorKind::CsvSyntax, where(rec) + "invalid score '" + score + "'");
      }
      p.score = v;
    }
    if (!keys.emplace(p.de, p.method, p.pos).second) {
      throw Error(ErrorKind::DuplicateKey, where(rec) + "(" + format_de(p.de) + ", '" + p.method +
                                               "', " + std::to_string(p.pos) + ") appears twice");
    }
    preds.push_back(std::move(p));
  }
  return preds;
}

CorpusSplit split_corpus(const std::vector<ArticleRecord>& records, const SplitPolicy& policy) {
  std::vector<bool> is_test(records.size(), false);

  if (const auto* ids = std::get_if<HeldOutIds>(&policy)) {
    std::unordered_map<DocId, std::size_t> index;
    for (std::size_t i = 0; i < records.size(); ++i) index.emplace(records[i].de, i);
    for (DocId de : ids->test_ids) {
      const auto it = index.find(de);
      if (it == index.end()) {
        throw Error(ErrorKind::UnknownId, "held-out id " + format_de(de) + " is not in the corpus");
      }
      is_test[it->second] = true;
    }
  } else {
    const auto& frac = std::get<RandomFraction>(policy);
    if (!(frac.test_fraction >= 0.0 && frac.test_fraction <= 1.0)) {
      throw Error(ErrorKind::Usage, "test fraction must lie in [0, 1]");
    }
    const auto n_test =
        static_cast<std::size_t>(std::llround(frac.test_fraction * static_cast<double>(records.size())));
    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(frac.seed);
    portable_shuffle(std::span(order), rng);
    for (std::size_t i = 0; i < n_test; ++i) is_test[order[i]] = true;
  }

  CorpusSplit split;
  for (std::size_t i = 0; i < records.size(); ++i) {
    (is_test[i] ? split.test : split.train).push_back(records[i]);
  }
  return split;
}

}  // namespace automsc
