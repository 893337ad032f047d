#include "priceopt/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "priceopt/error.hpp"

namespace priceopt {

namespace {

using nlohmann::json;

Error parse_error(const std::string& what) { return Error(ErrorCode::Parse, what); }

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\"");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\"");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& cell, std::size_t line, const std::string& column) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size()) {
    throw parse_error("line " + std::to_string(line) + ", column " + column + ": '" + cell +
                      "' is not a number");
  }
  return v;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json parse_json(std::istream& in, const char* what) {
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw parse_error(std::string(what) + ": " + e.what());
  }
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json mask_to_json(const BoolMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(static_cast<bool>(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw parse_error(what + ": expected " + std::to_string(rows) + " rows");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw parse_error(what + ": row " + std::to_string(i + 1) + " must have " + std::to_string(cols) + " entries");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!row[static_cast<std::size_t>(c)].is_number()) throw parse_error(what + ": non-numeric entry");
      m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

BoolMatrix mask_from_json(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw parse_error(what + ": expected " + std::to_string(rows) + " rows");
  }
  BoolMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw parse_error(what + ": row " + std::to_string(i + 1) + " has the wrong length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<bool>();
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json& j, Eigen::Index size, const std::string& what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != size) {
    throw parse_error(what + ": expected " + std::to_string(size) + " entries");
  }
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

// Rows of a bare array or of doc[key]; ragged input is an error.
Eigen::MatrixXd rows_from_json(const json& doc, const char* key) {
  const json& rows = doc.is_object() ? doc.at(key) : doc;
  if (!rows.is_array() || rows.empty() || !rows[0].is_array()) {
    throw parse_error(std::string(key) + ": expected a non-empty array of rows");
  }
  return matrix_from_json(rows, static_cast<Eigen::Index>(rows.size()),
                          static_cast<Eigen::Index>(rows[0].size()), key);
}

template <typename F>
auto wrap_json(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw parse_error(std::string(what) + ": " + e.what());
  }
}

}  // namespace

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_csv(line);
      break;
    }
  }
  if (header.empty()) throw parse_error("dataset is empty");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;

  auto count_prefix = [&](const std::string& prefix) {
    std::size_t n = 0;
    while (col.count(prefix + std::to_string(n + 1))) ++n;
    return n;
  };
  const std::size_t M = std::max(count_prefix("p_"), count_prefix("q_"));
  if (M == 0) throw parse_error("missing column p_1");
  for (std::size_t m = 1; m <= M; ++m) {
    for (const char* prefix : {"p_", "q_"}) {
      const std::string name = prefix + std::to_string(m);
      if (!col.count(name)) throw parse_error("missing column " + name);
    }
  }
  const std::size_t D = count_prefix("g_");
  const bool has_t = col.count("t") > 0;
  const bool has_date = col.count("date") > 0;

  std::vector<std::vector<double>> p, q, g;
  Dataset data;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() < header.size()) {
      throw parse_error("line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                        " fields, expected " + std::to_string(header.size()));
    }
    std::vector<double> prow(M), qrow(M), grow(D);
    for (std::size_t m = 0; m < M; ++m) {
      const std::string pn = "p_" + std::to_string(m + 1);
      const std::string qn = "q_" + std::to_string(m + 1);
      prow[m] = to_double(cells[col[pn]], line_no, pn);
      qrow[m] = to_double(cells[col[qn]], line_no, qn);
    }
    for (std::size_t d = 0; d < D; ++d) {
      const std::string gn = "g_" + std::to_string(d + 1);
      grow[d] = to_double(cells[col[gn]], line_no, gn);
    }
    if (has_t) {
      const double t = to_double(cells[col["t"]], line_no, "t");
      if (t < 1 || t != static_cast<int>(t)) {
        throw parse_error("line " + std::to_string(line_no) + ": time step must be a positive integer");
      }
      data.time_steps.push_back(static_cast<int>(t));
    }
    if (has_date) data.dates.push_back(cells[col["date"]]);
    p.push_back(std::move(prow));
    q.push_back(std::move(qrow));
    g.push_back(std::move(grow));
  }
  if (p.empty()) throw parse_error("dataset has a header but no rows");
  const auto N = static_cast<Eigen::Index>(p.size());
  data.prices.resize(N, static_cast<Eigen::Index>(M));
  data.quantities.resize(N, static_cast<Eigen::Index>(M));
  data.externals.resize(N, static_cast<Eigen::Index>(D));
  for (Eigen::Index n = 0; n < N; ++n) {
    for (std::size_t m = 0; m < M; ++m) {
      data.prices(n, static_cast<Eigen::Index>(m)) = p[static_cast<std::size_t>(n)][m];
      data.quantities(n, static_cast<Eigen::Index>(m)) = q[static_cast<std::size_t>(n)][m];
    }
    for (std::size_t d = 0; d < D; ++d) data.externals(n, static_cast<Eigen::Index>(d)) = g[static_cast<std::size_t>(n)][d];
  }
  data.validate();
  return data;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  const std::size_t M = data.products();
  const std::size_t D = data.external_dim();
  std::vector<std::string> head;
  if (!data.dates.empty()) head.push_back("date");
  if (!data.time_steps.empty()) head.push_back("t");
  for (std::size_t m = 1; m <= M; ++m) head.push_back("p_" + std::to_string(m));
  for (std::size_t m = 1; m <= M; ++m) head.push_back("q_" + std::to_string(m));
  for (std::size_t d = 1; d <= D; ++d) head.push_back("g_" + std::to_string(d));
  for (std::size_t i = 0; i < head.size(); ++i) out << (i ? "," : "") << head[i];
  out << '\n';
  for (std::size_t n = 0; n < data.size(); ++n) {
    const auto row = static_cast<Eigen::Index>(n);
    std::vector<std::string> cells;
    if (!data.dates.empty()) cells.push_back(data.dates[n]);
    if (!data.time_steps.empty()) cells.push_back(std::to_string(data.time_steps[n]));
    for (std::size_t m = 0; m < M; ++m) cells.push_back(num(data.prices(row, static_cast<Eigen::Index>(m))));
    for (std::size_t m = 0; m < M; ++m) cells.push_back(num(data.quantities(row, static_cast<Eigen::Index>(m))));
    for (std::size_t d = 0; d < D; ++d) cells.push_back(num(data.externals(row, static_cast<Eigen::Index>(d))));
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  }
}

void write_model_json(std::ostream& out, const DemandModel& model) {
  json doc;
  doc["format"] = "priceopt-demand-model";
  doc["version"] = 1;
  doc["transforms"] = model.bank().names();
  doc["products"] = model.products();
  doc["external_dim"] = model.external_dim();
  json steps = json::array();
  for (std::size_t t = 0; t < model.horizon(); ++t) {
    const auto& s = model.step(t);
    json step;
    step["alpha"] = matrix_to_json(s.alpha.transpose())[0];
    step["beta"] = matrix_to_json(s.beta);
    step["gamma"] = matrix_to_json(s.gamma);
    step["beta_active"] = mask_to_json(s.beta_active);
    step["gamma_active"] = mask_to_json(s.gamma_active);
    steps.push_back(std::move(step));
  }
  doc["steps"] = std::move(steps);
  out << doc.dump(1) << '\n';
}

DemandModel read_model_json(std::istream& in) {
  const json doc = parse_json(in, "model");
  return wrap_json("model", [&] {
    if (doc.value("format", "") != "priceopt-demand-model") throw parse_error("model: unknown format tag");
    const auto names = doc.at("transforms").get<std::vector<std::string>>();
    const auto M = doc.at("products").get<std::size_t>();
    const auto D = doc.at("external_dim").get<std::size_t>();
    const json& steps = doc.at("steps");
    if (!steps.is_array() || steps.empty()) throw parse_error("model: needs at least one step");
    DemandModel model(FeatureBank::from_names(names, D), M, steps.size());
    const auto rows = static_cast<Eigen::Index>(M);
    const auto MD = static_cast<Eigen::Index>(M * names.size());
    const auto E = static_cast<Eigen::Index>(D);
    for (std::size_t t = 0; t < steps.size(); ++t) {
      const json& s = steps[t];
      auto& step = model.step(t);
      step.alpha = vector_from_json(s.at("alpha"), rows, "alpha");
      step.beta = matrix_from_json(s.at("beta"), rows, MD, "beta");
      step.gamma = E > 0 ? matrix_from_json(s.at("gamma"), rows, E, "gamma") : Eigen::MatrixXd(rows, 0);
      step.beta_active = mask_from_json(s.at("beta_active"), rows, MD, "beta_active");
      step.gamma_active = E > 0 ? mask_from_json(s.at("gamma_active"), rows, E, "gamma_active") : BoolMatrix(rows, 0);
    }
    model.validate();
    return model;
  });
}

void write_bqp_json(std::ostream& out, const BqpProblem& prob) {
  json doc;
  doc["format"] = "priceopt-bqp";
  doc["Q"] = matrix_to_json(prob.Q);
  doc["r"] = matrix_to_json(prob.r.transpose())[0];
  doc["blocks"] = prob.blocks;
  auto rows = [](const std::vector<LinearConstraint>& list) {
    json arr = json::array();
    for (const auto& c : list) {
      arr.push_back({{"label", c.label}, {"coefficients", matrix_to_json(c.coefficients.transpose())[0]}, {"rhs", c.rhs}});
    }
    return arr;
  };
  doc["equalities"] = rows(prob.equalities);
  doc["inequalities"] = rows(prob.inequalities);
  out << doc.dump(1) << '\n';
}

BqpProblem read_bqp_json(std::istream& in) {
  const json doc = parse_json(in, "bqp");
  return wrap_json("bqp", [&] {
    BqpProblem prob;
    const auto n = static_cast<Eigen::Index>(doc.at("r").size());
    prob.r = vector_from_json(doc.at("r"), n, "r");
    prob.Q = n > 0 ? matrix_from_json(doc.at("Q"), n, n, "Q") : Eigen::MatrixXd(0, 0);
    prob.blocks = doc.at("blocks").get<std::vector<std::vector<std::size_t>>>();
    auto rows = [&](const char* key) {
      std::vector<LinearConstraint> list;
      if (!doc.contains(key)) return list;
      for (const auto& c : doc.at(key)) {
        list.push_back({vector_from_json(c.at("coefficients"), n, key), c.at("rhs").get<double>(),
                        c.value("label", std::string())});
      }
      return list;
    };
    prob.equalities = rows("equalities");
    prob.inequalities = rows("inequalities");
    prob.validate();
    return prob;
  });
}

std::vector<BusinessConstraint> read_constraints_json(std::istream& in) {
  const json doc = parse_json(in, "constraints");
  return wrap_json("constraints", [&] {
    const json& list = doc.is_object() ? doc.at("constraints") : doc;
    if (!list.is_array()) throw parse_error("constraints: expected an array");
    std::vector<BusinessConstraint> out;
    for (const auto& c : list) {
      const auto type = c.at("type").get<std::string>();
      const auto label = c.value("label", std::string());
      if (type == "max_discount") {
        const auto L = c.at("L").get<long long>();
        if (L < 0) throw parse_error("constraints: L must be nonnegative");
        auto bc = BusinessConstraint::max_discount_count(static_cast<std::size_t>(L));
        if (!label.empty()) bc.label = label;
        out.push_back(std::move(bc));
        continue;
      }
      std::vector<BusinessConstraint::Term> terms;
      for (const auto& t : c.at("terms")) {
        const auto product = t.at("product").get<long long>();
        const auto candidate = t.at("candidate").get<long long>();
        if (product < 1 || candidate < 1) {
          throw parse_error("constraints: product and candidate indices are 1-based");
        }
        terms.push_back({static_cast<std::size_t>(product - 1), static_cast<std::size_t>(candidate - 1),
                         t.value("coefficient", 1.0)});
      }
      const double rhs = c.at("rhs").get<double>();
      if (type == "eq") {
        out.push_back(BusinessConstraint::linear_eq(std::move(terms), rhs, label));
      } else if (type == "le") {
        out.push_back(BusinessConstraint::linear_ineq(std::move(terms), rhs, label));
      } else if (type == "ge") {
        for (auto& t : terms) t.coefficient = -t.coefficient;
        out.push_back(BusinessConstraint::linear_ineq(std::move(terms), -rhs, label));
      } else {
        throw parse_error("constraints: unknown type '" + type + "'");
      }
    }
    return out;
  });
}

Eigen::MatrixXd read_grid_json(std::istream& in) {
  const json doc = parse_json(in, "grid");
  return wrap_json("grid", [&] { return rows_from_json(doc, "grid"); });
}

Eigen::MatrixXd read_externals_json(std::istream& in) {
  const json doc = parse_json(in, "externals");
  return wrap_json("externals", [&] { return rows_from_json(doc, "externals"); });
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

}  // namespace priceopt
