#include "imuqp/qp_file.hpp"

#include <cctype>
#include <cmath>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "imuqp/benchmark.hpp"

namespace imuqp {

namespace {

struct Token {
  std::string text;
  int line = 0;
  int column = 0;
};

class Lexer {
 public:
  explicit Lexer(std::istream& in) : in_(in) {}

  bool next(Token& tok) {
    for (;;) {
      while (pos_ < cur_.size() && std::isspace(static_cast<unsigned char>(cur_[pos_]))) ++pos_;
      if (pos_ < cur_.size() && cur_[pos_] != '#') break;
      if (!std::getline(in_, cur_)) {
        cur_.clear();
        pos_ = 0;
        return false;
      }
      ++line_;
      pos_ = 0;
    }
    const std::size_t start = pos_;
    while (pos_ < cur_.size() && !std::isspace(static_cast<unsigned char>(cur_[pos_])) && cur_[pos_] != '#') ++pos_;
    tok.text = cur_.substr(start, pos_ - start);
    tok.line = line_;
    tok.column = static_cast<int>(start) + 1;
    return true;
  }

  int line() const { return line_; }

 private:
  std::istream& in_;
  std::string cur_;
  std::size_t pos_ = 0;
  int line_ = 0;
};

double to_number(const Token& tok) {
  const char* s = tok.text.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s, &end);
  if (end == s || *end != '\0' || errno == ERANGE) {
    throw ParseError(tok.line, tok.column, "expected a number, found '" + tok.text + "'");
  }
  return v;
}

Index to_count(const Token& tok) {
  const char* s = tok.text.c_str();
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(s, &end, 10);
  if (end == s || *end != '\0' || errno == ERANGE || v < 0) {
    throw ParseError(tok.line, tok.column, "expected a non-negative integer, found '" + tok.text + "'");
  }
  return static_cast<Index>(v);
}

}  // namespace

QpFileDocument parse_qp_document(std::istream& in) {
  Lexer lex(in);
  QpFileDocument doc;
  bool have_n = false, have_p = false, have_e = false, have_f = false, have_m = false, have_g = false;
  Token tok;
  std::vector<Token> e_tokens;

  auto read_values = [&](const Token& key, Index count, double* out, std::vector<Token>* where = nullptr) {
    for (Index i = 0; i < count; ++i) {
      Token v;
      if (!lex.next(v)) {
        throw ParseError(lex.line(), 1, "section '" + key.text + "' expects " + std::to_string(count) +
                                            " numbers, found " + std::to_string(i));
      }
      out[i] = to_number(v);
      if (where) where->push_back(v);
    }
  };
  auto need_dims = [&](const Token& key) {
    if (!have_n || !have_p) throw ParseError(key.line, key.column, "'n' and 'p' must precede '" + key.text + "'");
  };
  auto once = [&](bool& flag, const Token& key) {
    if (flag) throw ParseError(key.line, key.column, "duplicate section '" + key.text + "'");
    flag = true;
  };

  while (lex.next(tok)) {
    if (tok.text == "n" || tok.text == "p") {
      once(tok.text == "n" ? have_n : have_p, tok);
      Token v;
      if (!lex.next(v)) throw ParseError(lex.line(), 1, "missing value for '" + tok.text + "'");
      (tok.text == "n" ? doc.n : doc.p) = to_count(v);
      if (tok.text == "n" && doc.n < 1) throw ParseError(v.line, v.column, "n must be at least 1");
    } else if (tok.text == "E") {
      need_dims(tok);
      once(have_e, tok);
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> e(doc.n, doc.n);
      read_values(tok, doc.n * doc.n, e.data(), &e_tokens);
      doc.e = e;
    } else if (tok.text == "F") {
      need_dims(tok);
      once(have_f, tok);
      doc.f.resize(doc.n);
      read_values(tok, doc.n, doc.f.data());
    } else if (tok.text == "M") {
      need_dims(tok);
      once(have_m, tok);
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(doc.p, doc.n);
      read_values(tok, doc.p * doc.n, m.data());
      doc.m = m;
    } else if (tok.text == "gamma") {
      need_dims(tok);
      once(have_g, tok);
      doc.gamma.resize(doc.p);
      read_values(tok, doc.p, doc.gamma.data());
    } else {
      throw ParseError(tok.line, tok.column, "unexpected token '" + tok.text + "'");
    }
  }

  const int end_line = lex.line() + 1;
  if (!have_n || !have_p) throw ParseError(end_line, 1, "missing 'n' or 'p'");
  if (!have_e) throw ParseError(end_line, 1, "missing section 'E'");
  if (!have_f) throw ParseError(end_line, 1, "missing section 'F'");
  if (doc.p > 0 && (!have_m || !have_g)) throw ParseError(end_line, 1, "missing section 'M' or 'gamma'");
  if (!have_m) doc.m.resize(0, doc.n);
  if (!have_g) doc.gamma.resize(0);

  const double scale = doc.e.cwiseAbs().maxCoeff();
  for (Index i = 1; i < doc.n; ++i) {
    for (Index j = 0; j < i; ++j) {
      if (std::abs(doc.e(i, j) - doc.e(j, i)) > kSymmetryTolerance * scale) {
        const Token& at = e_tokens[static_cast<std::size_t>(i * doc.n + j)];
        throw ParseError(at.line, at.column,
                         "E is not symmetric: E(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ") = " +
                             at.text + " differs from E(" + std::to_string(j + 1) + "," + std::to_string(i + 1) + ")");
      }
    }
  }
  return doc;
}

QpFileDocument parse_qp_document(const std::string& text) {
  std::istringstream in(text);
  return parse_qp_document(in);
}

QpFileDocument read_qp_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::InvalidArgument, "cannot open '" + path + "'");
  return parse_qp_document(in);
}

void write_qp_document(std::ostream& os, const QpFileDocument& doc) {
  auto row = [&](const auto& vec) {
    for (Index i = 0; i < vec.size(); ++i) os << (i ? " " : "") << format_double(vec(i));
    os << '\n';
  };
  os << "n " << doc.n << "\np " << doc.p << "\nE\n";
  for (Index r = 0; r < doc.e.rows(); ++r) row(doc.e.row(r));
  os << "F\n";
  row(doc.f);
  if (doc.p > 0) {
    os << "M\n";
    for (Index r = 0; r < doc.m.rows(); ++r) row(doc.m.row(r));
    os << "gamma\n";
    row(doc.gamma);
  }
}

QpProblem<double> to_problem(const QpFileDocument& doc) {
  return QpProblem<double>(doc.e, doc.f, doc.m, doc.gamma);
}

QpFileDocument from_problem(const QpProblem<double>& prob) {
  QpFileDocument doc;
  doc.n = prob.num_variables();
  doc.p = prob.num_constraints();
  doc.e = prob.hessian();
  doc.f = prob.grad();
  doc.m = prob.constraints();
  doc.gamma = prob.bounds();
  return doc;
}

}  // namespace imuqp
