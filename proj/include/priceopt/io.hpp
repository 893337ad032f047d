#pragma once

// File formats used by the command-line tool.
//
// Dataset CSV: header with p_1..p_M and q_1..q_M, optionally g_1..g_D',
// t (1-based time step) and date. Other columns are ignored.
//
// JSON documents: demand models, BQP instances (0-based blocks), business
// constraints (1-based product/candidate), price grids and externals.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "priceopt/bqp.hpp"
#include "priceopt/demand.hpp"
#include "priceopt/profit.hpp"

namespace priceopt {

Dataset read_dataset_csv(std::istream& in);
void write_dataset_csv(std::ostream& out, const Dataset& data);

void write_model_json(std::ostream& out, const DemandModel& model);
DemandModel read_model_json(std::istream& in);

void write_bqp_json(std::ostream& out, const BqpProblem& prob);
BqpProblem read_bqp_json(std::istream& in);

/// {"constraints": [{"type": "max_discount", "L": 3},
///                  {"type": "eq" | "le", "rhs": 1, "label": "...",
///                   "terms": [{"product": 1, "candidate": 2, "coefficient": 1}]}]}
std::vector<BusinessConstraint> read_constraints_json(std::istream& in);

/// Either a bare array of rows or {"grid": [[...], ...]}.
Eigen::MatrixXd read_grid_json(std::istream& in);

/// Either a bare array of rows or {"externals": [[...], ...]}; one row per time step.
Eigen::MatrixXd read_externals_json(std::istream& in);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace priceopt
