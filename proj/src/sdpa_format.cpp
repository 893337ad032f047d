#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "priceopt/sdp.hpp"

namespace priceopt {

namespace {

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_entries(std::ostream& out, std::size_t matno, const SparseSymMatrix& mat) {
  SparseSymMatrix sorted = mat;
  sorted.compress();
  for (const auto& e : sorted.entries()) {
    out << matno << " 1 " << (e.row + 1) << ' ' << (e.col + 1) << ' ' << format_value(e.value) << '\n';
  }
}

std::string strip_punctuation(std::string line) {
  for (char& c : line) {
    if (c == ',' || c == '{' || c == '}' || c == '(' || c == ')') c = ' ';
  }
  return line;
}

Error parse_error(const std::string& what) { return Error(ErrorCode::Parse, "SDPA: " + what); }

}  // namespace

void write_sdpa(const SdpProblem& prob, std::ostream& out, std::string_view comment) {
  prob.validate();
  const std::size_t n = prob.dim;
  const std::size_t p = prob.inequalities.size();
  const std::size_t m = prob.constraint_count();
  out << "\"" << (comment.empty() ? std::string_view("priceopt SDP") : comment) << '\n';
  out << m << '\n';
  out << (p > 0 ? 2 : 1) << '\n';
  out << n;
  if (p > 0) out << ' ' << -static_cast<long long>(p);
  out << '\n';
  const char* sep = "";
  for (const auto& c : prob.equalities) {
    out << sep << format_value(c.rhs);
    sep = " ";
  }
  for (const auto& c : prob.inequalities) {
    out << sep << format_value(c.rhs);
    sep = " ";
  }
  out << '\n';

  SparseSymMatrix objective;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      const double v = prob.objective(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      if (v != 0.0) objective.add(a, b, v);
    }
  }
  write_entries(out, 0, objective);
  std::size_t matno = 1;
  for (const auto& c : prob.equalities) write_entries(out, matno++, c.matrix);
  for (std::size_t l = 0; l < p; ++l) {
    write_entries(out, matno, prob.inequalities[l].matrix);
    out << matno << " 2 " << (l + 1) << ' ' << (l + 1) << " 1\n";
    ++matno;
  }
}

SdpProblem read_sdpa(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '"' || line[first] == '*') continue;
    lines.push_back(strip_punctuation(line));
  }
  std::size_t cursor = 0;
  auto next_line = [&]() -> std::istringstream {
    if (cursor >= lines.size()) throw parse_error("unexpected end of input");
    return std::istringstream(lines[cursor++]);
  };

  long long m = 0;
  long long nblocks = 0;
  if (!(next_line() >> m) || m <= 0) throw parse_error("bad constraint count");
  if (!(next_line() >> nblocks) || nblocks < 1 || nblocks > 2) {
    throw parse_error("only one SDP block plus an optional LP block is supported");
  }
  std::vector<long long> sizes(static_cast<std::size_t>(nblocks));
  {
    auto is = next_line();
    for (auto& s : sizes) {
      if (!(is >> s) || s == 0) throw parse_error("bad block structure");
    }
  }
  if (sizes[0] < 0) throw parse_error("first block must be a semidefinite block");
  const long long lp_size = nblocks == 2 ? sizes[1] : 0;
  if (lp_size > 0) throw parse_error("second block must be an LP block");
  const auto p = static_cast<std::size_t>(-lp_size);

  std::vector<double> c(static_cast<std::size_t>(m));
  {
    std::istringstream is;
    std::size_t read = 0;
    while (read < c.size()) {
      is = next_line();
      while (read < c.size() && (is >> c[read])) ++read;
    }
  }

  SdpProblem prob;
  prob.dim = static_cast<std::size_t>(sizes[0]);
  const auto n = static_cast<Eigen::Index>(prob.dim);
  prob.objective = Eigen::MatrixXd::Zero(n, n);
  std::vector<SparseSymMatrix> mats(static_cast<std::size_t>(m));
  std::map<std::size_t, std::size_t> slack_of;  // constraint -> LP index
  std::vector<int> lp_users(p, 0);
  while (cursor < lines.size()) {
    auto is = next_line();
    long long matno = 0, blk = 0, i = 0, j = 0;
    double v = 0.0;
    if (!(is >> matno >> blk >> i >> j >> v)) throw parse_error("bad entry line: " + lines[cursor - 1]);
    if (matno < 0 || matno > m || blk < 1 || blk > nblocks || i < 1 || j < 1) {
      throw parse_error("entry out of range: " + lines[cursor - 1]);
    }
    if (i > j) std::swap(i, j);
    if (blk == 1) {
      if (j > sizes[0]) throw parse_error("entry outside the semidefinite block");
      if (matno == 0) {
        prob.objective(i - 1, j - 1) += v;
        if (i != j) prob.objective(j - 1, i - 1) += v;
      } else {
        mats[static_cast<std::size_t>(matno - 1)].add(static_cast<std::size_t>(i - 1),
                                                      static_cast<std::size_t>(j - 1), v);
      }
    } else {
      if (matno == 0 || i != j || static_cast<std::size_t>(i) > p || v != 1.0) {
        throw parse_error("LP block entries must be unit slack coefficients");
      }
      const auto con = static_cast<std::size_t>(matno - 1);
      if (slack_of.count(con) || lp_users[static_cast<std::size_t>(i - 1)]++) {
        throw parse_error("each slack must belong to exactly one constraint");
      }
      slack_of[con] = static_cast<std::size_t>(i - 1);
    }
  }
  if (slack_of.size() != p) throw parse_error("unused LP slack");

  std::vector<SdpConstraint> inequalities(p);
  for (std::size_t k = 0; k < mats.size(); ++k) {
    mats[k].compress();
    SdpConstraint con{std::move(mats[k]), c[k], {}};
    const auto it = slack_of.find(k);
    if (it == slack_of.end()) {
      prob.equalities.push_back(std::move(con));
    } else {
      inequalities[it->second] = std::move(con);
    }
  }
  prob.inequalities = std::move(inequalities);
  prob.validate();
  return prob;
}

}  // namespace priceopt
