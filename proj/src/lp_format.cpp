#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "priceopt/error.hpp"
#include "priceopt/milp.hpp"

namespace priceopt {

namespace {

constexpr std::size_t kWrapColumn = 250;

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* sense_token(RowSense sense) {
  switch (sense) {
    case RowSense::LessEqual: return "<=";
    case RowSense::Equal: return "=";
    case RowSense::GreaterEqual: return ">=";
  }
  return "=";
}

// Writes " name: t1 + t2 ..." wrapping long expressions onto indented lines.
class LineWriter {
 public:
  explicit LineWriter(std::ostream& out) : out_(out) {}

  void start(const std::string& head) {
    line_ = " " + head;
  }
  void piece(const std::string& text) {
    if (line_.size() + 1 + text.size() > kWrapColumn && line_.size() > 4) {
      out_ << line_ << '\n';
      line_ = "   " + text;
    } else {
      line_ += " " + text;
    }
  }
  void finish() {
    out_ << line_ << '\n';
    line_.clear();
  }

 private:
  std::ostream& out_;
  std::string line_;
};

// Returns false when every coefficient is zero.
bool write_terms(LineWriter& w, const MilpModel& model, const std::vector<MilpTerm>& terms) {
  bool first = true;
  for (const auto& t : terms) {
    if (t.coefficient == 0.0) continue;
    const std::string name = model.variable_name(t.variable);
    if (first) {
      w.piece(format_number(t.coefficient) + " " + name);
    } else {
      w.piece((t.coefficient < 0.0 ? "- " : "+ ") + format_number(std::abs(t.coefficient)) + " " + name);
    }
    first = false;
  }
  return !first;
}

// A row needs at least one term to stay well formed.
void write_expression(LineWriter& w, const MilpModel& model, const std::vector<MilpTerm>& terms) {
  if (!write_terms(w, model, terms) && model.variable_count() > 0) w.piece("0 " + model.variable_name(0));
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

Error parse_error(const std::string& what) { return Error(ErrorCode::Parse, "LP: " + what); }

bool parse_number(const std::string& token, double& value) {
  if (token.empty()) return false;
  const char c = token[0];
  if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+')) return false;
  char* end = nullptr;
  value = std::strtod(token.c_str(), &end);
  return end == token.c_str() + token.size();
}

bool is_sense(const std::string& t) {
  return t == "<=" || t == "=<" || t == "<" || t == ">=" || t == "=>" || t == ">" || t == "=";
}

RowSense to_sense(const std::string& t) {
  if (t == "=") return RowSense::Equal;
  if (t[0] == '<' || t == "=<") return RowSense::LessEqual;
  return RowSense::GreaterEqual;
}

struct RawTerm {
  std::string name;
  double coefficient;
};

// Parses "[+|-] [coef] name ..." from tokens[pos] until a sense token or end.
std::vector<RawTerm> parse_expression(const std::vector<std::string>& tokens, std::size_t& pos) {
  std::vector<RawTerm> terms;
  double sign = 1.0;
  std::optional<double> coef;
  while (pos < tokens.size() && !is_sense(tokens[pos])) {
    const std::string& t = tokens[pos];
    if (!t.empty() && t.back() == ':') break;
    double v = 0.0;
    if (t == "+") {
      sign = 1.0;
    } else if (t == "-") {
      sign = -1.0;
    } else if (parse_number(t, v)) {
      if (coef) throw parse_error("two coefficients in a row near '" + t + "'");
      coef = v;
    } else {
      terms.push_back({t, sign * coef.value_or(1.0)});
      sign = 1.0;
      coef.reset();
    }
    ++pos;
  }
  if (coef) throw parse_error("dangling coefficient");
  return terms;
}

enum class Section { None, Objective, Constraints, Bounds, Binary, End };

Section section_of(const std::string& line) {
  const std::string l = lower(line);
  if (l == "maximize" || l == "maximum" || l == "max") return Section::Objective;
  if (l == "minimize" || l == "minimum" || l == "min") {
    throw parse_error("only maximization models are supported");
  }
  if (l == "subject to" || l == "such that" || l == "st" || l == "s.t.") return Section::Constraints;
  if (l == "bounds" || l == "bound") return Section::Bounds;
  if (l == "binary" || l == "binaries" || l == "bin") return Section::Binary;
  if (l == "end") return Section::End;
  if (l == "general" || l == "generals" || l == "gen" || l == "semi-continuous") {
    throw parse_error("section '" + line + "' is not supported");
  }
  return Section::None;
}

// Splits "name:" glued or separated from the following text.
std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string t;
  while (is >> t) {
    const auto colon = t.find(':');
    if (colon != std::string::npos && colon + 1 < t.size()) {
      out.push_back(t.substr(0, colon + 1));
      out.push_back(t.substr(colon + 1));
    } else if (t == ":" && !out.empty()) {
      out.back() += ":";
    } else {
      out.push_back(t);
    }
  }
  return out;
}

// Recovers (kind, i, j) from z_i / zb_i_j.
bool decode_name(const std::string& name, bool& pair, std::size_t& i, std::size_t& j) {
  unsigned long a = 0, b = 0;
  char tail = 0;
  if (std::sscanf(name.c_str(), "zb_%lu_%lu%c", &a, &b, &tail) == 2 && a >= 1 && b > a) {
    pair = true;
    i = a - 1;
    j = b - 1;
    return name == "zb_" + std::to_string(a) + "_" + std::to_string(b);
  }
  if (std::sscanf(name.c_str(), "z_%lu%c", &a, &tail) == 1 && a >= 1) {
    pair = false;
    i = a - 1;
    j = 0;
    return name == "z_" + std::to_string(a);
  }
  return false;
}

}  // namespace

void export_lp(const MilpModel& model, std::ostream& out) {
  if (model.objective.size() != model.variable_count()) {
    throw Error(ErrorCode::InvalidArgument, "objective length differs from the variable count");
  }
  out << "\\ " << model.binaries << " binary and " << model.pairs.size()
      << " continuous product variables\n";
  const bool constant = std::all_of(model.objective.begin(), model.objective.end(),
                                    [](double v) { return v == 0.0; });
  if (constant) out << "\\ objective is the constant 0\n";
  out << "Maximize\n";
  LineWriter w(out);
  w.start("obj:");
  std::vector<MilpTerm> objective_terms;
  for (std::size_t v = 0; v < model.objective.size(); ++v) {
    if (model.objective[v] != 0.0) objective_terms.push_back({v, model.objective[v]});
  }
  write_terms(w, model, objective_terms);
  w.finish();
  out << "Subject To\n";
  for (const auto& row : model.rows) {
    w.start(row.name + ":");
    write_expression(w, model, row.terms);
    w.piece(std::string(sense_token(row.sense)) + " " + format_number(row.rhs));
    w.finish();
  }
  out << "Bounds\n";
  for (std::size_t v = 0; v < model.variable_count(); ++v) {
    if (v < model.binaries) {
      out << " 0 <= " << model.variable_name(v) << " <= 1\n";
    } else {
      out << ' ' << model.variable_name(v) << " >= 0\n";
    }
  }
  if (model.binaries > 0) {
    out << "Binary\n";
    for (std::size_t v = 0; v < model.binaries; ++v) out << ' ' << model.variable_name(v) << '\n';
  }
  out << "End\n";
}

void export_lp(const MilpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  export_lp(model, out);
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

MilpModel parse_lp(std::istream& in) {
  std::map<Section, std::string> text;
  std::vector<std::string> bound_lines;
  Section current = Section::None;
  std::string line;
  bool saw_end = false;
  while (std::getline(in, line)) {
    const auto comment = line.find('\\');
    if (comment != std::string::npos) line.erase(comment);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string trimmed = line.substr(first, last - first + 1);
    const Section s = section_of(trimmed);
    if (s != Section::None) {
      current = s;
      if (s == Section::End) saw_end = true;
      continue;
    }
    if (current == Section::None || current == Section::End) {
      throw parse_error("text outside any section: '" + trimmed + "'");
    }
    if (current == Section::Bounds) bound_lines.push_back(trimmed);
    text[current] += trimmed + "\n";
  }
  if (!saw_end) throw parse_error("missing End");

  MilpModel model;
  std::vector<std::string> order;
  std::map<std::string, std::size_t> index;
  for (const auto& b : bound_lines) {
    const auto tokens = tokenize(b);
    std::string name;
    for (const auto& t : tokens) {
      double v = 0.0;
      if (!is_sense(t) && !parse_number(t, v)) name = t;
    }
    bool pair = false;
    std::size_t i = 0, j = 0;
    if (name.empty() || !decode_name(name, pair, i, j)) throw parse_error("bad bound line '" + b + "'");
    if (index.count(name)) throw parse_error("variable " + name + " bounded twice");
    const std::string expected = pair ? name + " >= 0" : "0 <= " + name + " <= 1";
    if (b != expected) throw parse_error("unsupported bound '" + b + "'");
    if (pair) {
      model.pairs.emplace_back(i, j);
    } else {
      if (!model.pairs.empty() || i != model.binaries) {
        throw parse_error("binary variables must come first and in order");
      }
      ++model.binaries;
    }
    index[name] = order.size();
    order.push_back(name);
  }
  for (const auto& [i, j] : model.pairs) {
    if (j >= model.binaries) throw parse_error("pair variable refers to an unknown binary");
  }
  auto resolve = [&](const std::string& name) {
    const auto it = index.find(name);
    if (it == index.end()) throw parse_error("variable " + name + " has no bound declaration");
    return it->second;
  };

  {
    const auto tokens = tokenize(text[Section::Binary]);
    if (tokens.size() != model.binaries) throw parse_error("Binary section does not list every z variable");
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      if (resolve(tokens[k]) != k) throw parse_error("Binary section out of order");
    }
  }

  model.objective.assign(model.variable_count(), 0.0);
  {
    const auto tokens = tokenize(text[Section::Objective]);
    std::size_t pos = 0;
    if (pos < tokens.size() && tokens[pos].back() == ':') ++pos;
    for (const auto& t : parse_expression(tokens, pos)) model.objective[resolve(t.name)] += t.coefficient;
    if (pos != tokens.size()) throw parse_error("unexpected token in objective");
  }
  {
    const auto tokens = tokenize(text[Section::Constraints]);
    std::size_t pos = 0;
    std::size_t unnamed = 0;
    while (pos < tokens.size()) {
      MilpRow row;
      if (tokens[pos].back() == ':') {
        row.name = tokens[pos].substr(0, tokens[pos].size() - 1);
        ++pos;
      } else {
        row.name = "R" + std::to_string(++unnamed);
      }
      for (const auto& t : parse_expression(tokens, pos)) {
        if (t.coefficient != 0.0) row.terms.push_back({resolve(t.name), t.coefficient});
      }
      if (pos >= tokens.size() || !is_sense(tokens[pos])) throw parse_error("row " + row.name + " has no sense");
      row.sense = to_sense(tokens[pos++]);
      if (pos >= tokens.size() || !parse_number(tokens[pos], row.rhs)) {
        throw parse_error("row " + row.name + " has no right-hand side");
      }
      ++pos;
      model.rows.push_back(std::move(row));
    }
  }
  return model;
}

}  // namespace priceopt
