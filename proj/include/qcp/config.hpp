#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcp/cstar.hpp"

namespace qcp {

/// Run parameters shared by the CLI suites.  A fixed config (including the
/// seed) produces byte-identical reports.
struct RunConfig {
  int n = 2;
  std::string q_text = "1/2";
  int unilateral = 8;   // N
  int bilateral = 8;    // M
  int margin = 3;       // d
  std::vector<double> fibers = {0.6, 0.9, 1.0};
  double tolerance = 1e-10;
  std::vector<int> sweep = {4, 6, 8, 10};
  std::uint64_t seed = 12345;
  bool suite_symbolic = true;
  bool suite_rep = true;
  bool suite_cstar = true;

  double q_value() const {
    const auto slash = q_text.find('/');
    double v = 0.0;
    try {
      if (slash == std::string::npos) {
        v = std::stod(q_text);
      } else {
        const double num = std::stod(q_text.substr(0, slash));
        const double den = std::stod(q_text.substr(slash + 1));
        v = num / den;
      }
    } catch (const std::exception&) {
      throw std::invalid_argument("cannot parse q value: " + q_text);
    }
    if (!(v > 0.0 && v < 1.0))
      throw std::invalid_argument("q must lie in (0,1), got " + q_text);
    return v;
  }

  TruncationSpec truncation() const {
    return TruncationSpec(n, q_value(), unilateral, bilateral, margin);
  }

  FiberSpectrum filtered_fibers() const {
    FiberSpectrum f = FiberSpectrum::filtered(fibers, q_value());
    if (f.samples.empty())
      throw std::invalid_argument("no fiber samples survive the (q,1] filter");
    return f;
  }

  void set(const std::string& key, const std::string& value) {
    const auto parse_list_d = [](const std::string& s) {
      std::vector<double> out;
      std::istringstream is(s);
      std::string tok;
      while (std::getline(is, tok, ','))
        if (!tok.empty()) out.push_back(std::stod(tok));
      return out;
    };
    const auto parse_list_i = [](const std::string& s) {
      std::vector<int> out;
      std::istringstream is(s);
      std::string tok;
      while (std::getline(is, tok, ','))
        if (!tok.empty()) out.push_back(std::stoi(tok));
      return out;
    };
    try {
      if (key == "n")
        n = std::stoi(value);
      else if (key == "q")
        q_text = value;
      else if (key == "N")
        unilateral = std::stoi(value);
      else if (key == "M")
        bilateral = std::stoi(value);
      else if (key == "d")
        margin = std::stoi(value);
      else if (key == "fibers")
        fibers = parse_list_d(value);
      else if (key == "tol")
        tolerance = std::stod(value);
      else if (key == "sweep")
        sweep = parse_list_i(value);
      else if (key == "seed")
        seed = std::stoull(value);
      else if (key == "suites") {
        suite_symbolic = value.find("symbolic") != std::string::npos;
        suite_rep = value.find("rep") != std::string::npos;
        suite_cstar = value.find("cstar") != std::string::npos;
      } else
        throw std::invalid_argument("unknown config key: " + key);
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("bad value for config key " + key + ": " + value);
    }
  }

  /// Plain-text key=value file; '#' starts a comment.
  static RunConfig from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    RunConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto strip = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
      };
      line = strip(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": expected key=value");
      cfg.set(strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
    }
    return cfg;
  }
};

/// Generator-term definition file: one record per non-comment line,
///   l= <n integers> ; f= <expression in r1..rn, q, sqrt, exp, chi(m,j)>
inline std::vector<GeneratorTerm> load_generator_terms(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open term file: " + path);
  std::vector<GeneratorTerm> terms;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto semi = line.find(';');
    const auto lpos = line.find("l=");
    const auto fpos = line.find("f=");
    if (semi == std::string::npos || lpos == std::string::npos ||
        fpos == std::string::npos || fpos < semi)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 'l= ... ; f= ...'");
    std::istringstream ls(line.substr(lpos + 2, semi - lpos - 2));
    std::vector<int> l;
    int v = 0;
    while (ls >> v) l.push_back(v);
    if (static_cast<int>(l.size()) != n)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(n) + " shift entries");
    FunctionExpr f = parse_function(line.substr(fpos + 2), n);
    terms.push_back(GeneratorTerm{std::move(f), std::move(l)});
  }
  return terms;
}

}  // namespace qcp
