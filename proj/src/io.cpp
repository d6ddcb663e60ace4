#include "amis/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "amis/errors.hpp"

namespace amis {

using nlohmann::json;

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void dump_rec(const json& j, int indent, int depth, std::string& out) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string pad_close = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? fmt17(v) : "null";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      out += nl;
      bool first = true;
      for (const auto& e : j) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad;
        dump_rec(e, indent, depth + 1, out);
      }
      out += nl;
      out += pad_close + "]";
      return;
    }
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad + json(it.key()).dump() + (indent > 0 ? ": " : ":");
        dump_rec(it.value(), indent, depth + 1, out);
      }
      out += nl;
      out += pad_close + "}";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump_json(const json& j, int indent) {
  std::string out;
  dump_rec(j, indent, 0, out);
  if (indent > 0) out += "\n";
  return out;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string q = "\"";
  for (char c : field) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw InputError("csv: unterminated quoted field");
  fields.push_back(cur);
  return fields;
}

std::string history_to_csv(const History& h) {
  std::ostringstream os;
  os << "i";
  for (std::size_t d = 0; d < h.dim(); ++d) os << ",theta_" << d + 1;
  os << ",psi_value,proposal_params\n";
  std::vector<std::string> params;
  for (const auto& p : h.proposals()) params.push_back(csv_quote(p->to_json().dump()));
  for (std::size_t i = 0; i < h.size(); ++i) {
    os << i + 1;
    for (double t : h.theta(i)) os << ',' << fmt17(t);
    os << ',' << fmt17(h.psi(i)) << ',' << params[h.proposal_index(i)] << '\n';
  }
  return os.str();
}

History history_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw InputError("history csv: empty input");
  const auto header = csv_split(line);
  if (header.size() < 4 || header.front() != "i" || header[header.size() - 2] != "psi_value" ||
      header.back() != "proposal_params")
    throw InputError("history csv: unexpected header");
  const std::size_t dim = header.size() - 3;
  History h(dim);
  std::map<std::string, DensityPtr> cache;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = csv_split(line);
    ++row;
    if (f.size() != header.size()) throw InputError("history csv: wrong field count on row " + std::to_string(row));
    if (std::stoull(f[0]) != row) throw InputError("history csv: rows must be numbered 1, 2, ...");
    Point theta(dim);
    for (std::size_t d = 0; d < dim; ++d) theta[d] = std::stod(f[1 + d]);
    const double psi = std::stod(f[1 + dim]);
    auto it = cache.find(f.back());
    if (it == cache.end())
      it = cache.emplace(f.back(), std::make_shared<const Density>(Density::from_json(json::parse(f.back())))).first;
    h.append(theta, psi, it->second);
  }
  return h;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write file '" + path + "'");
  out << text;
  if (!out) throw InputError("failed writing file '" + path + "'");
}

}  // namespace amis
