#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "imuqp/qp_problem.hpp"

namespace imuqp {

/**
 * Plain-text QP: sections `n`, `p`, `E`, `F`, `M`, `gamma`, each a keyword
 * followed by whitespace-separated numbers (matrices row-major). `n` and `p`
 * come first; `M` and `gamma` may be omitted when p = 0. `#` starts a comment.
 *
 *   n 1
 *   p 1
 *   E 2
 *   F 2
 *   M 1
 *   gamma -2
 */
struct QpFileDocument {
  Index n = 0;
  Index p = 0;
  Eigen::MatrixXd e;
  Eigen::VectorXd f;
  Eigen::MatrixXd m;
  Eigen::VectorXd gamma;
};

class ParseError : public Error {
 public:
  ParseError(int line, int column, const std::string& msg)
      : Error(Errc::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

QpFileDocument parse_qp_document(std::istream& in);
QpFileDocument parse_qp_document(const std::string& text);
QpFileDocument read_qp_file(const std::string& path);

/// Writes every number with 17 significant digits, so parsing the output
/// reproduces the document exactly.
void write_qp_document(std::ostream& os, const QpFileDocument& doc);

QpProblem<double> to_problem(const QpFileDocument& doc);
QpFileDocument from_problem(const QpProblem<double>& prob);

}  // namespace imuqp
