/* Copyright 2026 The MTGRU Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "mtgru/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "stopwords_data.hpp"

namespace mtgru {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_punct(char c) {
  return static_cast<unsigned char>(c) < 0x80 && std::ispunct(static_cast<unsigned char>(c));
}

bool is_ascii_letter(char c) {
  return static_cast<unsigned char>(c) < 0x80 && std::isalpha(static_cast<unsigned char>(c));
}

bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : trim(s)) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

// A backslash escapes the next character; "\\" is itself escaped.
bool is_escaped(std::string_view s, std::size_t pos) {
  std::size_t slashes = 0;
  while (pos > slashes && s[pos - 1 - slashes] == '\\') ++slashes;
  return slashes % 2 == 1;
}

std::string strip_comments(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && !is_escaped(s, i)) {
      // A comment swallows its line end and the next line's leading blanks.
      while (i < s.size() && s[i] != '\n') ++i;
      if (i < s.size()) ++i;
      while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
      --i;
      continue;
    }
    out += s[i];
  }
  return out;
}

// Index of the brace closing the group opened at `open`, or npos.
std::size_t matching_brace(std::string_view s, std::size_t open, char lhs = '{', char rhs = '}') {
  int depth = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    if (s[i] == '\\') {
      ++i;
      continue;
    }
    if (s[i] == lhs) ++depth;
    if (s[i] == rhs && --depth == 0) return i;
  }
  return std::string_view::npos;
}

std::size_t skip_blanks(std::string_view s, std::size_t i) {
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return i;
}

// Skips any [optional] arguments starting at i.
std::size_t skip_optional_args(std::string_view s, std::size_t i) {
  for (;;) {
    std::size_t j = skip_blanks(s, i);
    if (j >= s.size() || s[j] != '[') return i;
    std::size_t close = matching_brace(s, j, '[', ']');
    if (close == std::string_view::npos) return i;
    i = close + 1;
  }
}

// Replaces every \begin{name}…\end{name} block (with nesting) by `replacement`.
std::string replace_environment(std::string_view s, std::string_view name,
                                std::string_view replacement) {
  const std::string open = "\\begin{" + std::string(name) + "}";
  const std::string close = "\\end{" + std::string(name) + "}";
  std::string out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t start = s.find(open, pos);
    if (start == std::string_view::npos) break;
    out.append(s.substr(pos, start - pos));
    int depth = 0;
    std::size_t i = start;
    std::size_t end = std::string_view::npos;
    while (i < s.size()) {
      if (s.compare(i, open.size(), open) == 0) {
        ++depth;
        i += open.size();
      } else if (s.compare(i, close.size(), close) == 0) {
        i += close.size();
        if (--depth == 0) {
          end = i;
          break;
        }
      } else {
        ++i;
      }
    }
    out.append(replacement);
    if (end == std::string_view::npos) return out;  // unterminated: drop the rest
    pos = end;
  }
  if (pos < s.size()) out.append(s.substr(pos));
  return out;
}

std::string replace_inline_math(std::string_view s) {
  std::string out;
  const std::string math = " " + std::string(kMathToken) + " ";
  std::size_t i = 0;
  while (i < s.size()) {
    auto delimited = [&](std::string_view lhs, std::string_view rhs) -> bool {
      if (s.compare(i, lhs.size(), lhs) != 0 || is_escaped(s, i)) return false;
      std::size_t j = i + lhs.size();
      while (j < s.size()) {
        if (s.compare(j, rhs.size(), rhs) == 0 && !is_escaped(s, j)) break;
        ++j;
      }
      if (j >= s.size()) return false;
      out += math;
      i = j + rhs.size();
      return true;
    };
    if (delimited("$$", "$$") || delimited("\\[", "\\]") || delimited("\\(", "\\)") ||
        delimited("$", "$")) {
      continue;
    }
    out += s[i++];
  }
  return out;
}

const std::set<std::string, std::less<>>& cite_commands() {
  static const std::set<std::string, std::less<>> names = {
      "cite",      "citep",      "citet",    "citealp",  "citealt",   "citeauthor",
      "citeyear",  "newcite",    "shortcite", "parencite", "textcite", "autocite",
      "footcite",  "citenum"};
  return names;
}

const std::set<std::string, std::less<>>& ref_commands() {
  static const std::set<std::string, std::less<>> names = {
      "ref", "eqref", "autoref", "cref", "Cref", "pageref", "vref", "nameref", "Autoref"};
  return names;
}

// Commands whose arguments are not visible text.
const std::set<std::string, std::less<>>& dropped_commands() {
  static const std::set<std::string, std::less<>> names = {
      "label",     "includegraphics", "vspace",      "hspace",     "bibliographystyle",
      "bibliography", "input",        "include",     "usepackage", "documentclass",
      "newcommand", "renewcommand",   "providecommand", "setlength", "addtolength",
      "thispagestyle", "pagestyle",   "todo",        "url",        "href",
      "color",     "pagenumbering",   "setcounter",  "addcontentsline", "hypersetup",
      "newtheorem", "graphicspath",   "footnote",    "footnotemark", "linewidth",  "textwidth",
      "columnwidth"};
  return names;
}

const std::set<std::string, std::less<>>& sectioning_commands() {
  static const std::set<std::string, std::less<>> names = {
      "part", "chapter", "section", "subsection", "subsubsection", "paragraph", "subparagraph"};
  return names;
}

int section_level(std::string_view name) {
  static const std::array<std::string_view, 7> order = {
      "part", "chapter", "section", "subsection", "subsubsection", "paragraph", "subparagraph"};
  for (std::size_t i = 0; i < order.size(); ++i)
    if (order[i] == name) return static_cast<int>(i);
  return -1;
}

constexpr std::array<std::string_view, 10> kFloatEnvironments = {
    "figure", "figure*", "table", "table*", "wrapfigure", "algorithm", "algorithm*",
    "tabular", "thebibliography", "lstlisting"};

constexpr std::array<std::string_view, 16> kMathEnvironments = {
    "equation", "equation*", "align",   "align*",     "eqnarray", "eqnarray*",
    "gather",   "gather*",   "multline", "multline*", "displaymath", "math",
    "flalign",  "flalign*",  "split",   "alignat"};

// Expands commands, keeping visible text. Input has no comments or math.
std::string strip_commands(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (c == '\\') {
      if (i + 1 >= s.size()) break;
      const char next = s[i + 1];
      if (!is_ascii_letter(next)) {
        switch (next) {
          case '%': case '&': case '_': case '#': case '$': case '{': case '}':
            out += next;
            break;
          case '\\':
            out += ' ';
            break;
          default:
            out += ' ';
            break;
        }
        i += 2;
        continue;
      }
      std::size_t j = i + 1;
      while (j < s.size() && is_ascii_letter(s[j])) ++j;
      std::string name(s.substr(i + 1, j - i - 1));
      if (j < s.size() && s[j] == '*') ++j;

      auto skip_groups = [&](std::size_t from, bool keep) {
        std::size_t k = skip_optional_args(s, from);
        for (;;) {
          std::size_t b = skip_blanks(s, k);
          if (b >= s.size() || s[b] != '{') break;
          std::size_t close = matching_brace(s, b);
          if (close == std::string_view::npos) break;
          if (keep) {
            out += strip_commands(s.substr(b + 1, close - b - 1));
            out += ' ';
          }
          k = skip_optional_args(s, close + 1);
        }
        return k;
      };

      if (cite_commands().count(name)) {
        out += ' ';
        out += kCiteToken;
        out += ' ';
        i = skip_groups(j, false);
      } else if (ref_commands().count(name)) {
        out += ' ';
        out += kRefToken;
        out += ' ';
        i = skip_groups(j, false);
      } else if (dropped_commands().count(name) || name == "begin" || name == "end") {
        out += ' ';
        i = skip_groups(j, false);
      } else if (sectioning_commands().count(name)) {
        out += "\n\n";
        i = skip_groups(j, false);
      } else if (name == "item") {
        out += ' ';
        i = skip_optional_args(s, j);
      } else if (name == "par") {
        out += "\n\n";
        i = j;
      } else {
        i = skip_groups(j, true);
      }
      continue;
    }
    if (c == '{' || c == '}') {
      ++i;
      continue;
    }
    if (c == '~') {
      out += ' ';
      ++i;
      continue;
    }
    if ((c == '`' || c == '\'') && i + 1 < s.size() && s[i + 1] == c) {
      out += '"';
      i += 2;
      continue;
    }
    out += c;
    ++i;
  }
  return out;
}

struct SectionMark {
  std::size_t start = 0;       // position of the backslash
  std::size_t body_start = 0;  // just after the title group
  int level = 0;
  std::string title;
};

std::vector<SectionMark> find_sections(std::string_view s) {
  std::vector<SectionMark> marks;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || is_escaped(s, i)) continue;
    std::size_t j = i + 1;
    while (j < s.size() && is_ascii_letter(s[j])) ++j;
    const std::string_view name = s.substr(i + 1, j - i - 1);
    const int level = section_level(name);
    if (level < 0) continue;
    if (j < s.size() && s[j] == '*') ++j;
    std::size_t k = skip_optional_args(s, j);
    k = skip_blanks(s, k);
    if (k >= s.size() || s[k] != '{') continue;
    const std::size_t close = matching_brace(s, k);
    if (close == std::string_view::npos) continue;
    marks.push_back({i, close + 1, level, std::string(s.substr(k + 1, close - k - 1))});
    i = close;
  }
  return marks;
}

const std::set<std::string, std::less<>>& abbreviations() {
  static const std::set<std::string, std::less<>> words = {
      "al.",  "fig.", "figs.", "eq.",  "eqs.", "i.e.",   "e.g.",  "sec.", "secs.",
      "tab.", "cf.",  "vs.",   "dr.",  "mr.",  "mrs.",   "ms.",   "prof.", "no.",
      "resp.", "approx.", "ref.", "refs.", "ch.", "viz.", "st.",  "thm.", "def.",
      "lemma.", "eqn.", "alg.", "appx."};
  return words;
}

}  // namespace

bool is_placeholder(std::string_view token) {
  return token == kMathToken || token == kCiteToken || token == kRefToken || token == kNumToken;
}

std::string clean_latex(std::string_view fragment) {
  std::string s = strip_comments(fragment);
  for (std::string_view env : kFloatEnvironments) s = replace_environment(s, env, " ");
  const std::string math = " " + std::string(kMathToken) + " ";
  for (std::string_view env : kMathEnvironments) s = replace_environment(s, env, math);
  s = replace_inline_math(s);
  return strip_commands(s);
}

DocumentRecord extract_sections(std::string_view latex_source, std::string doc_id) {
  const std::string src = strip_comments(latex_source);
  const std::string_view s = src;

  DocumentRecord rec;
  rec.doc_id = std::move(doc_id);
  const std::string_view abs_open = "\\begin{abstract}";
  const std::string_view abs_close = "\\end{abstract}";
  const std::size_t a0 = s.find(abs_open);
  const std::size_t a1 = a0 == std::string_view::npos ? a0 : s.find(abs_close, a0);
  if (a0 == std::string_view::npos || a1 == std::string_view::npos) {
    throw ExtractionError("missing section: abstract");
  }
  rec.abstract_text =
      collapse_whitespace(clean_latex(s.substr(a0 + abs_open.size(), a1 - a0 - abs_open.size())));
  if (rec.abstract_text.empty()) throw ExtractionError("missing section: abstract (empty)");

  const std::vector<SectionMark> marks = find_sections(s);
  auto intro = std::find_if(marks.begin(), marks.end(), [](const SectionMark& m) {
    return to_lower_ascii(m.title).find("introduction") != std::string::npos;
  });
  if (intro == marks.end()) throw ExtractionError("missing section: introduction");

  std::size_t end = s.size();
  for (auto it = intro + 1; it != marks.end(); ++it) {
    if (it->level <= intro->level) {
      end = it->start;
      break;
    }
  }
  for (std::string_view stop : {"\\end{document}", "\\appendix", "\\bibliography{",
                                "\\begin{thebibliography}"}) {
    const std::size_t p = s.find(stop, intro->body_start);
    if (p != std::string_view::npos) end = std::min(end, p);
  }

  for (const std::string& p :
       split_paragraphs(clean_latex(s.substr(intro->body_start, end - intro->body_start)))) {
    std::string para = collapse_whitespace(p);
    if (!para.empty()) rec.intro_paragraphs.push_back(std::move(para));
  }
  if (rec.intro_paragraphs.empty()) throw ExtractionError("missing section: introduction (empty)");
  return rec;
}

std::vector<std::string> split_paragraphs(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    std::string_view t = trim(current);
    if (!t.empty()) out.emplace_back(t);
    current.clear();
  };
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    if (trim(line).empty()) {
      flush();
    } else {
      if (!current.empty()) current += '\n';
      current.append(line);
    }
    pos = nl + 1;
  }
  flush();
  return out;
}

std::vector<std::string> split_sentences(std::string_view paragraph) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < paragraph.size(); ++i) {
    const char c = paragraph[i];
    if (c != '.' && c != '!' && c != '?') continue;
    const std::size_t after = i + 1;
    if (after < paragraph.size() && !is_space(paragraph[after])) continue;
    std::size_t k = after;
    while (k < paragraph.size() && is_space(paragraph[k])) ++k;
    if (k < paragraph.size() && !(paragraph[k] >= 'A' && paragraph[k] <= 'Z')) continue;
    if (c == '.') {
      std::size_t w = i;
      while (w > start && !is_space(paragraph[w - 1])) --w;
      std::string_view word = paragraph.substr(w, i + 1 - w);
      while (!word.empty() && (word.front() == '(' || word.front() == '[')) word.remove_prefix(1);
      if (abbreviations().count(to_lower_ascii(word))) continue;
    }
    const std::string_view sentence = trim(paragraph.substr(start, after - start));
    if (!sentence.empty()) out.emplace_back(sentence);
    start = after;
  }
  const std::string_view rest = trim(paragraph.substr(std::min(start, paragraph.size())));
  if (!rest.empty()) out.emplace_back(rest);
  return out;
}

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    std::string_view chunk = text.substr(i, j - i);
    i = j;
    if (chunk.empty()) continue;

    std::size_t lead = 0;
    while (lead < chunk.size() && is_ascii_punct(chunk[lead])) ++lead;
    std::size_t trail = chunk.size();
    while (trail > lead && is_ascii_punct(chunk[trail - 1])) --trail;

    for (std::size_t k = 0; k < lead; ++k) out.emplace_back(1, chunk[k]);
    const std::string_view core = chunk.substr(lead, trail - lead);
    if (!core.empty()) {
      if (is_placeholder(core)) {
        out.emplace_back(core);
      } else {
        const bool has_digit = std::any_of(core.begin(), core.end(), is_ascii_digit);
        const bool has_letter =
            std::any_of(core.begin(), core.end(),
                        [](char c) { return is_ascii_letter(c) || static_cast<unsigned char>(c) >= 0x80; });
        out.push_back(has_digit && !has_letter ? std::string(kNumToken) : to_lower_ascii(core));
      }
    }
    for (std::size_t k = trail; k < chunk.size(); ++k) out.emplace_back(1, chunk[k]);
  }
  return out;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary()
    : Vocabulary(std::vector<std::string>{std::string(kPadToken), std::string(kGoToken),
                                          std::string(kEosToken), std::string(kUnkToken)}) {}

Vocabulary::Vocabulary(std::vector<std::string> id_to_token) : id_to_token_(std::move(id_to_token)) {
  if (id_to_token_.size() < kNumSpecialTokens || id_to_token_[kPad] != kPadToken ||
      id_to_token_[kGo] != kGoToken || id_to_token_[kEos] != kEosToken ||
      id_to_token_[kUnk] != kUnkToken) {
    throw std::invalid_argument("vocabulary must start with _PAD _GO _EOS _UNK");
  }
  for (std::size_t i = 0; i < id_to_token_.size(); ++i) {
    if (!token_to_id_.emplace(id_to_token_[i], static_cast<TokenId>(i)).second) {
      throw std::invalid_argument("vocabulary: duplicate token '" + id_to_token_[i] + "'");
    }
  }
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  return it == token_to_id_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id >= id_to_token_.size()) throw std::out_of_range("token id out of range");
  return id_to_token_[id];
}

bool Vocabulary::contains(std::string_view token) const {
  return token_to_id_.count(std::string(token)) != 0;
}

TokenSeq Vocabulary::encode(std::span<const std::string> tokens) const {
  TokenSeq out;
  out.reserve(tokens.size());
  for (const std::string& t : tokens) out.push_back(id(t));
  return out;
}

Tokens Vocabulary::decode(std::span<const TokenId> ids) const {
  Tokens out;
  for (TokenId i : ids)
    if (i >= kNumSpecialTokens) out.push_back(token(i));
  return out;
}

Vocabulary build_vocab(std::span<const Tokens> streams, std::size_t max_size) {
  if (max_size <= kNumSpecialTokens) throw std::invalid_argument("build_vocab: max_size must exceed 4");
  std::map<std::string, std::size_t> counts;
  for (const Tokens& s : streams)
    for (const std::string& t : s) ++counts[t];
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary base;
  std::vector<std::string> ids = base.tokens();
  for (const auto& [token, count] : ranked) {
    if (ids.size() >= max_size) break;
    ids.push_back(token);
  }
  return Vocabulary(std::move(ids));
}

void write_vocab(std::ostream& out, const Vocabulary& vocab) {
  for (const std::string& t : vocab.tokens()) out << t << '\n';
}

Vocabulary read_vocab(std::istream& in) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) tokens.push_back(line);
  return Vocabulary(std::move(tokens));
}

// ---------------------------------------------------------------------------
// TF-IDF

double CorpusStats::idf(const std::string& token) const {
  if (document_count == 0) return 0.0;
  auto it = document_frequency.find(token);
  const std::size_t df = it == document_frequency.end() ? 0 : it->second;
  return std::log(static_cast<double>(document_count) / static_cast<double>(std::max<std::size_t>(df, 1)));
}

CorpusStats build_stats(std::span<const DocumentRecord> documents, IdfUnit unit) {
  CorpusStats stats;
  for (const DocumentRecord& doc : documents) {
    std::set<std::string> article_terms;
    for (const std::string& p : doc.intro_paragraphs) {
      const Tokens tokens = tokenize(p);
      if (unit == IdfUnit::Paragraph) {
        for (const std::string& t : std::set<std::string>(tokens.begin(), tokens.end()))
          ++stats.document_frequency[t];
        ++stats.document_count;
      } else {
        article_terms.insert(tokens.begin(), tokens.end());
      }
    }
    if (unit == IdfUnit::Article) {
      for (const std::string& t : article_terms) ++stats.document_frequency[t];
      ++stats.document_count;
    }
  }
  return stats;
}

void write_stats(std::ostream& out, const CorpusStats& stats) {
  out << "# document_count " << stats.document_count << '\n';
  for (const auto& [token, df] : stats.document_frequency) out << token << '\t' << df << '\n';
}

const std::vector<std::string>& stopwords() {
  static const std::vector<std::string> words = [] {
    std::vector<std::string> w;
    std::istringstream in{std::string(detail::kStopwordsText)};
    std::string line;
    while (std::getline(in, line)) {
      const std::string_view t = trim(line);
      if (!t.empty() && t.front() != '#') w.emplace_back(t);
    }
    std::sort(w.begin(), w.end());
    return w;
  }();
  return words;
}

bool is_stopword(std::string_view token) {
  const auto& words = stopwords();
  return std::binary_search(words.begin(), words.end(), token,
                            [](std::string_view a, std::string_view b) { return a < b; });
}

bool is_content_token(std::string_view token) {
  if (is_placeholder(token) || is_stopword(token)) return false;
  return std::any_of(token.begin(), token.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || static_cast<unsigned char>(c) >= 0x80;
  });
}

std::vector<double> tfidf_sentence_scores(std::span<const std::string> sentences,
                                          const CorpusStats& stats) {
  std::vector<Tokens> tokenized;
  std::unordered_map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const std::string& s : sentences) {
    tokenized.push_back(tokenize(s));
    for (const std::string& t : tokenized.back()) ++counts[t];
    total += tokenized.back().size();
  }
  std::vector<double> scores;
  scores.reserve(sentences.size());
  for (const Tokens& tokens : tokenized) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const std::string& t : tokens) {
      if (!is_content_token(t)) continue;
      const double tf = static_cast<double>(counts[t]) / static_cast<double>(total);
      sum += tf * stats.idf(t);
      ++n;
    }
    scores.push_back(n ? sum / static_cast<double>(n) : 0.0);
  }
  return scores;
}

SalientSentence tfidf_salient(std::span<const std::string> sentences, const CorpusStats& stats) {
  if (sentences.empty()) throw std::invalid_argument("tfidf_salient: empty sentence list");
  const std::vector<double> scores = tfidf_sentence_scores(sentences, stats);
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return {best, sentences[best], scores[best]};
}

// ---------------------------------------------------------------------------
// Pairs and files

PairSet make_pairs(std::span<const DocumentRecord> documents, const CorpusStats& stats,
                   std::span<const Bucket> buckets) {
  PairSet out;
  for (const DocumentRecord& doc : documents) {
    for (std::size_t i = 0; i < doc.intro_paragraphs.size(); ++i) {
      ++out.paragraphs;
      const std::string& paragraph = doc.intro_paragraphs[i];
      const SalientSentence best = tfidf_salient(split_sentences(paragraph), stats);
      TrainingPair pair{doc.doc_id, i, tokenize(paragraph), tokenize(best.sentence)};
      if (!assign_bucket(pair.source.size(), pair.target.size() + 1, buckets)) {
        ++out.overflow;
        continue;
      }
      out.pairs.push_back(std::move(pair));
    }
  }
  return out;
}

void write_pairs(std::ostream& out, std::span<const TrainingPair> pairs) {
  for (const TrainingPair& p : pairs) {
    out << p.doc_id << '\t' << p.paragraph_index << '\t' << join_tokens(p.source) << '\t'
        << join_tokens(p.target) << '\n';
  }
}

std::vector<TrainingPair> read_pairs(std::istream& in) {
  std::vector<TrainingPair> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
      const std::size_t tab = line.find('\t', pos);
      fields.push_back(line.substr(pos, tab == std::string::npos ? std::string::npos : tab - pos));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    if (fields.size() != 4) {
      throw std::runtime_error("pair file line " + std::to_string(line_no) + ": expected 4 fields, got " +
                               std::to_string(fields.size()));
    }
    TrainingPair p;
    p.doc_id = fields[0];
    try {
      p.paragraph_index = std::stoul(fields[1]);
    } catch (const std::exception&) {
      throw std::runtime_error("pair file line " + std::to_string(line_no) + ": bad paragraph index");
    }
    std::istringstream src(fields[2]), tgt(fields[3]);
    for (std::string t; src >> t;) p.source.push_back(t);
    for (std::string t; tgt >> t;) p.target.push_back(t);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<std::string> read_manifest(std::istream& in) {
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    ids.emplace_back(t);
  }
  return ids;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace mtgru
