#include "dcfac/instances.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "json.hpp"

#include "dcfac/rng.hpp"

namespace dcfac {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kSchemaId = "dcfac-instance-v1";

[[noreturn]] void fail_line(int line_no, const std::string& what) {
  throw std::runtime_error("line " + std::to_string(line_no) + ": " + what);
}

bool is_comment_or_blank(const std::string& line) {
  for (char ch : line) {
    if (std::isspace(static_cast<unsigned char>(ch))) continue;
    return ch == '#' || ch == '%';
  }
  return true;
}

/// Walks the non-comment, non-blank lines of a text file, tokenized by
/// whitespace, remembering 1-based line numbers for error messages.
class LineCursor {
 public:
  explicit LineCursor(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
      ++no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (is_comment_or_blank(line)) continue;
      std::vector<std::string> toks;
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) toks.push_back(tok);
      lines_.emplace_back(no, std::move(toks));
    }
  }

  bool done() const { return pos_ == lines_.size(); }
  int last_line() const { return lines_.empty() ? 0 : lines_.back().first; }
  int current_line() const { return done() ? last_line() : lines_[pos_].first; }

  const std::vector<std::string>& next(const char* what, int& line_no) {
    if (done()) {
      throw std::runtime_error(std::string("unexpected end of file: expected ") + what);
    }
    line_no = lines_[pos_].first;
    return lines_[pos_++].second;
  }

 private:
  std::vector<std::pair<int, std::vector<std::string>>> lines_;
  std::size_t pos_ = 0;
};

long long parse_int_token(const std::string& tok, int line_no, const char* what) {
  long long out = 0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto res = std::from_chars(first, last, out);
  if (res.ec != std::errc{} || res.ptr != last) {
    fail_line(line_no, std::string("expected integer ") + what + ", got '" + tok + "'");
  }
  return out;
}

double parse_real_token(const std::string& tok, int line_no, const char* what) {
  double out = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto res = std::from_chars(first, last, out);
  if (res.ec != std::errc{} || res.ptr != last) {
    fail_line(line_no, std::string("expected number ") + what + ", got '" + tok + "'");
  }
  return out;
}

int parse_index_token(const std::string& tok, int line_no, const char* what, int n) {
  long long raw = parse_int_token(tok, line_no, what);
  if (raw < 1 || raw > n) {
    fail_line(line_no, std::string(what) + " " + tok + " out of range [1, " + std::to_string(n) +
                           "]");
  }
  return static_cast<int>(raw - 1);  // to 0-based
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const char* kind_token(ProblemKind k) {
  switch (k) {
    case ProblemKind::MaxCut: return "maxcut";
    case ProblemKind::Ubqp: return "ubqp";
    case ProblemKind::Product: return "product";
  }
  return "?";
}

ProblemKind kind_from_token(const std::string& s) {
  if (s == "maxcut") return ProblemKind::MaxCut;
  if (s == "ubqp") return ProblemKind::Ubqp;
  if (s == "product") return ProblemKind::Product;
  throw std::runtime_error("canonical instance: field 'kind' has unknown value '" + s + "'");
}

[[noreturn]] void field_fail(const std::string& field, const char* expect) {
  throw std::runtime_error("canonical instance: field '" + field + "' " + expect);
}

const ordered_json& require_field(const ordered_json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end()) field_fail(field, "is missing");
  return *it;
}

std::string require_string(const ordered_json& j, const char* field) {
  const auto& f = require_field(j, field);
  if (!f.is_string()) field_fail(field, "must be a string");
  return f.get<std::string>();
}

double require_real(const ordered_json& j, const char* field) {
  const auto& f = require_field(j, field);
  if (!f.is_number()) field_fail(field, "must be a number");
  return f.get<double>();
}

int require_count(const ordered_json& j, const char* field) {
  const auto& f = require_field(j, field);
  if (!f.is_number_integer()) field_fail(field, "must be an integer");
  long long v = f.get<long long>();
  if (v < 0 || v > (1LL << 31) - 1) field_fail(field, "is out of range");
  return static_cast<int>(v);
}

/// Reads an array of [i, j, v] rows; bounds and ordering are checked by the
/// caller-supplied predicate.
std::vector<Triplet> require_triplets(const ordered_json& j, const std::string& field, int dim,
                                      bool strict_upper) {
  auto it = j.find(field);
  if (it == j.end()) field_fail(field, "is missing");
  if (!it->is_array()) field_fail(field, "must be an array");
  std::vector<Triplet> out;
  out.reserve(it->size());
  for (const auto& row : *it) {
    if (!row.is_array() || row.size() != 3 || !row[0].is_number_integer() ||
        !row[1].is_number_integer() || !row[2].is_number()) {
      field_fail(field, "entries must be [i, j, value] rows");
    }
    Triplet t{row[0].get<int>(), row[1].get<int>(), row[2].get<double>()};
    bool order_ok = strict_upper ? (t.i < t.j) : (t.i <= t.j);
    if (t.i < 0 || t.j >= dim || !order_ok) {
      field_fail(field, strict_upper ? "entries must satisfy 0 <= i < j < n"
                                     : "entries must satisfy 0 <= i <= j < n");
    }
    out.push_back(t);
  }
  return out;
}

ordered_json triplets_to_json(const std::vector<Triplet>& ts) {
  ordered_json arr = ordered_json::array();
  for (const auto& t : ts) arr.push_back(ordered_json::array({t.i, t.j, t.v}));
  return arr;
}

/// Symmetric matrix from a dense row-major buffer.
SparseSymMatrix sym_from_dense(int dim, const std::vector<double>& m) {
  SymBuilder b(dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      double v = m[static_cast<std::size_t>(i) * dim + j];
      if (v == 0.0) continue;
      if (i == j) {
        b.add_raw(i, i, v);
      } else {
        b.add(i, j, v);
      }
    }
  }
  return b.build();
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

EdgeList parse_edgelist(const std::string& text) {
  LineCursor cur(text);
  int ln = 0;
  const auto& head = cur.next("header 'n m'", ln);
  if (head.size() != 2) fail_line(ln, "expected header 'n m'");
  long long n = parse_int_token(head[0], ln, "vertex count");
  long long m = parse_int_token(head[1], ln, "edge count");
  if (n < 1) fail_line(ln, "vertex count must be at least 1");
  if (m < 0) fail_line(ln, "edge count must be nonnegative");

  std::map<std::pair<int, int>, double> acc;  // parallel edges summed
  for (long long e = 0; e < m; ++e) {
    const auto& toks = cur.next("edge line 'i j w'", ln);
    if (toks.size() != 3) fail_line(ln, "expected edge line 'i j w'");
    int i = parse_index_token(toks[0], ln, "vertex index", static_cast<int>(n));
    int j = parse_index_token(toks[1], ln, "vertex index", static_cast<int>(n));
    if (i == j) fail_line(ln, "self-loop on vertex " + toks[0]);
    double w = parse_real_token(toks[2], ln, "edge weight");
    acc[{std::min(i, j), std::max(i, j)}] += w;
  }
  if (!cur.done()) fail_line(cur.current_line(), "unexpected content after the last edge");

  EdgeList g;
  g.n = static_cast<int>(n);
  g.edges.reserve(acc.size());
  for (const auto& [key, w] : acc) g.edges.push_back({key.first, key.second, w});
  return g;
}

std::vector<OrlibProblem> parse_orlib(const std::string& text) {
  LineCursor cur(text);
  int ln = 0;
  const auto& head = cur.next("problem count", ln);
  if (head.size() != 1) fail_line(ln, "expected a single problem count");
  long long count = parse_int_token(head[0], ln, "problem count");
  if (count < 0) fail_line(ln, "problem count must be nonnegative");

  std::vector<OrlibProblem> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long long pi = 0; pi < count; ++pi) {
    const auto& dims = cur.next("problem header 'n m'", ln);
    if (dims.size() != 2) fail_line(ln, "expected problem header 'n m'");
    long long n = parse_int_token(dims[0], ln, "variable count");
    long long m = parse_int_token(dims[1], ln, "entry count");
    if (n < 1) fail_line(ln, "variable count must be at least 1");
    if (m < 0) fail_line(ln, "entry count must be nonnegative");

    // File entries assign cells: (i,i,q) sets A_ii = q, (i,j,q) with i != j
    // sets both A_ij and A_ji to q, so z^T A z counts the pair twice.
    std::map<std::pair<int, int>, double> cells;
    for (long long e = 0; e < m; ++e) {
      const auto& toks = cur.next("entry line 'i j q'", ln);
      if (toks.size() != 3) fail_line(ln, "expected entry line 'i j q'");
      int i = parse_index_token(toks[0], ln, "index", static_cast<int>(n));
      int j = parse_index_token(toks[1], ln, "index", static_cast<int>(n));
      double q = parse_real_token(toks[2], ln, "entry value");
      cells[{std::min(i, j), std::max(i, j)}] = q;
    }

    OrlibProblem prob;
    prob.n = static_cast<int>(n);
    for (const auto& [key, q] : cells) {
      prob.entries.push_back({key.first, key.second, q});
      if (key.first != key.second) prob.entries.push_back({key.second, key.first, q});
    }
    out.push_back(std::move(prob));
  }
  if (!cur.done()) fail_line(cur.current_line(), "unexpected content after the last problem");
  return out;
}

std::string write_orlib(const std::vector<OrlibProblem>& problems) {
  std::ostringstream out;
  out << problems.size() << "\n";
  for (const auto& p : problems) {
    std::vector<Triplet> upper;
    for (const auto& t : p.entries) {
      if (t.i <= t.j) upper.push_back(t);
    }
    std::sort(upper.begin(), upper.end(),
              [](const Triplet& a, const Triplet& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
    out << p.n << " " << upper.size() << "\n";
    for (const auto& t : upper) {
      out << (t.i + 1) << " " << (t.j + 1) << " " << format_real(t.v) << "\n";
    }
  }
  return out.str();
}

CanonicalInstance canonical_from_edgelist(const EdgeList& g, std::string name,
                                          std::optional<double> known_best) {
  CanonicalInstance inst;
  inst.kind = ProblemKind::MaxCut;
  inst.name = std::move(name);
  inst.known_best = known_best;
  inst.n = g.n;
  inst.entries = g.edges;
  return inst;
}

CanonicalInstance canonical_from_orlib(const OrlibProblem& p, std::string name,
                                       std::optional<double> known_best) {
  CanonicalInstance inst;
  inst.kind = ProblemKind::Ubqp;
  inst.name = std::move(name);
  inst.known_best = known_best;
  inst.n = p.n;
  for (const auto& t : p.entries) {
    if (t.i <= t.j) inst.entries.push_back(t);
  }
  std::sort(inst.entries.begin(), inst.entries.end(),
            [](const Triplet& a, const Triplet& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
  return inst;
}

CanonicalInstance gen_product_random(int l, std::uint64_t seed) {
  if (l < 1) throw std::invalid_argument("gen_product_random: block size must be at least 1");
  Rng rng(seed);

  CanonicalInstance inst;
  inst.kind = ProblemKind::Product;
  inst.name = "product-random-l" + std::to_string(l) + "-seed" + std::to_string(seed);
  inst.n = 2 * l;
  inst.l = l;
  inst.provenance = SeedProvenance{Rng::kGeneratorId, seed, "product-random"};

  for (int fi = 0; fi < 2; ++fi) {
    // Draw order is part of the format: factor 1's matrix then its scalar,
    // then factor 2's. Upper-triangle entries are drawn row by row and
    // mirrored.
    std::vector<double> m(static_cast<std::size_t>(l) * l, 0.0);
    for (int i = 0; i < l; ++i) {
      for (int j = i; j < l; ++j) {
        double v = rng.normal();
        m[static_cast<std::size_t>(i) * l + j] = v;
        m[static_cast<std::size_t>(j) * l + i] = v;
      }
    }
    double omega = rng.normal();

    double s = spectral_norm(sym_from_dense(l, m));
    if (s == 0.0) s = 1.0;  // an all-zero draw cannot happen; keep the scale finite

    // Q = D / 4 with D = M / ||M||; c = 2 Q e; a = e^T Q e + omega.
    CanonicalFactor f;
    f.c.assign(l, 0.0);
    double total = 0.0;
    for (int i = 0; i < l; ++i) {
      double row_sum = 0.0;
      for (int j = 0; j < l; ++j) {
        double q = 0.25 * m[static_cast<std::size_t>(i) * l + j] / s;
        row_sum += q;
        if (j >= i) f.q_entries.push_back({i, j, q});
      }
      f.c[i] = 2.0 * row_sum;
      total += row_sum;
    }
    f.a = total + omega;
    inst.factors.push_back(std::move(f));
  }
  return inst;
}

CanonicalInstance gen_product_maxcut(const EdgeList& g1, const EdgeList& g2, std::string name) {
  if (g1.n != g2.n) {
    throw std::invalid_argument("gen_product_maxcut: vertex counts differ (" +
                                std::to_string(g1.n) + " vs " + std::to_string(g2.n) + ")");
  }
  const int l = g1.n;

  CanonicalInstance inst;
  inst.kind = ProblemKind::Product;
  inst.name = std::move(name);
  inst.n = 2 * l;
  inst.l = l;

  const EdgeList* graphs[2] = {&g1, &g2};
  for (int fi = 0; fi < 2; ++fi) {
    SymBuilder b(l);
    for (const auto& e : graphs[fi]->edges) b.add(e.i, e.j, e.v);
    SparseSymMatrix w = b.build();
    double s = spectral_norm(w);
    if (s == 0.0) s = 1.0;  // zero graph: factor is identically zero

    // Factor 1 carries Q = -Wbar/4 and a = +e^T Wbar e / 4, so its value at a
    // sign vector is exactly the cut of the normalized weights; factor 2 flips
    // both signs and contributes the negated cut. The product objective then
    // reports -f = cut1 * cut2.
    double qsign = (fi == 0) ? -0.25 : 0.25;
    CanonicalFactor f;
    f.c.assign(l, 0.0);
    double total = 0.0;
    for (const auto& e : graphs[fi]->edges) {
      double wbar = e.v / s;
      f.q_entries.push_back({e.i, e.j, qsign * wbar});
      total += 2.0 * wbar;  // both triangles of e^T Wbar e
    }
    f.a = -qsign * total;
    inst.factors.push_back(std::move(f));
  }
  return inst;
}

std::string write_canonical(const CanonicalInstance& inst) {
  ordered_json j;
  j["schema"] = kSchemaId;
  j["kind"] = kind_token(inst.kind);
  j["name"] = inst.name;
  j["n"] = inst.n;
  if (inst.known_best) j["known_best"] = *inst.known_best;
  if (inst.provenance) {
    j["seed_provenance"] = ordered_json{{"generator", inst.provenance->generator},
                                        {"seed", inst.provenance->seed},
                                        {"family", inst.provenance->family}};
  }
  switch (inst.kind) {
    case ProblemKind::MaxCut:
      j["edges"] = triplets_to_json(inst.entries);
      break;
    case ProblemKind::Ubqp:
      j["entries"] = triplets_to_json(inst.entries);
      break;
    case ProblemKind::Product: {
      j["l"] = inst.l;
      j["sign_convention"] = "negated-product";
      ordered_json factors = ordered_json::array();
      for (const auto& f : inst.factors) {
        ordered_json jf;
        jf["a"] = f.a;
        jf["c"] = f.c;
        jf["q_entries"] = triplets_to_json(f.q_entries);
        factors.push_back(std::move(jf));
      }
      j["factors"] = std::move(factors);
      break;
    }
  }
  return j.dump(2) + "\n";
}

CanonicalInstance read_canonical(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw std::runtime_error(std::string("canonical instance: not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::runtime_error("canonical instance: top level must be an object");
  auto schema = j.find("schema");
  if (schema == j.end() || !schema->is_string() || schema->get<std::string>() != kSchemaId) {
    throw std::runtime_error(std::string("canonical instance: unknown schema version (expected '") +
                             kSchemaId + "')");
  }

  CanonicalInstance inst;
  inst.kind = kind_from_token(require_string(j, "kind"));
  inst.name = require_string(j, "name");
  inst.n = require_count(j, "n");
  if (inst.n < 1) field_fail("n", "must be at least 1");
  if (auto it = j.find("known_best"); it != j.end()) {
    if (!it->is_number()) field_fail("known_best", "must be a number");
    inst.known_best = it->get<double>();
  }
  if (auto it = j.find("seed_provenance"); it != j.end()) {
    if (!it->is_object()) field_fail("seed_provenance", "must be an object");
    SeedProvenance prov;
    prov.generator = require_string(*it, "generator");
    const auto& seed = require_field(*it, "seed");
    if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
      field_fail("seed", "must be an integer");
    }
    prov.seed = seed.get<std::uint64_t>();
    prov.family = require_string(*it, "family");
    inst.provenance = std::move(prov);
  }

  switch (inst.kind) {
    case ProblemKind::MaxCut:
      inst.entries = require_triplets(j, "edges", inst.n, /*strict_upper=*/true);
      break;
    case ProblemKind::Ubqp:
      inst.entries = require_triplets(j, "entries", inst.n, /*strict_upper=*/false);
      break;
    case ProblemKind::Product: {
      inst.l = require_count(j, "l");
      if (inst.l < 1) field_fail("l", "must be at least 1");
      if (require_string(j, "sign_convention") != "negated-product") {
        field_fail("sign_convention", "must be 'negated-product'");
      }
      auto it = j.find("factors");
      if (it == j.end() || !it->is_array()) field_fail("factors", "must be an array");
      if (it->size() < 2) field_fail("factors", "must hold at least two factors");
      for (const auto& jf : *it) {
        if (!jf.is_object()) field_fail("factors", "entries must be objects");
        CanonicalFactor f;
        f.a = require_real(jf, "a");
        const auto& c = require_field(jf, "c");
        if (!c.is_array() || static_cast<int>(c.size()) != inst.l) {
          field_fail("c", "must be an array of length l");
        }
        for (const auto& v : c) {
          if (!v.is_number()) field_fail("c", "entries must be numbers");
          f.c.push_back(v.get<double>());
        }
        f.q_entries = require_triplets(jf, "q_entries", inst.l, /*strict_upper=*/false);
        inst.factors.push_back(std::move(f));
      }
      if (inst.n != inst.l * static_cast<int>(inst.factors.size())) {
        field_fail("n", "must equal l times the factor count");
      }
      break;
    }
  }
  return inst;
}

std::pair<Objective, Instance> realize(const CanonicalInstance& inst) {
  switch (inst.kind) {
    case ProblemKind::MaxCut: {
      SymBuilder b(inst.n);
      for (const auto& e : inst.entries) b.add(e.i, e.j, e.v);
      return build_maxcut(b.build(), inst.name, inst.known_best);
    }
    case ProblemKind::Ubqp: {
      SymBuilder b(inst.n);
      for (const auto& t : inst.entries) {
        if (t.i == t.j) {
          b.add_raw(t.i, t.i, t.v);
        } else {
          b.add(t.i, t.j, t.v);
        }
      }
      return build_ubqp(b.build(), inst.name, inst.known_best);
    }
    case ProblemKind::Product: {
      std::vector<ProductFactor> parts;
      parts.reserve(inst.factors.size());
      for (const auto& f : inst.factors) {
        SymBuilder b(inst.l);
        for (const auto& t : f.q_entries) {
          if (t.i == t.j) {
            b.add_raw(t.i, t.i, t.v);
          } else {
            b.add(t.i, t.j, t.v);
          }
        }
        parts.push_back(ProductFactor{b.build(), f.c, f.a});
      }
      return build_product(parts, inst.name, inst.known_best);
    }
  }
  throw std::logic_error("realize: unreachable");
}

std::vector<ManifestRow> parse_manifest(const std::string& text) {
  std::vector<ManifestRow> rows;
  std::istringstream in(text);
  std::string line;
  int no = 0;
  auto trim = [](std::string s) {
    auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && issp(s.front())) s.erase(s.begin());
    while (!s.empty() && issp(s.back())) s.pop_back();
    return s;
  };
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_comment_or_blank(line)) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(trim(field));
    if (fields.size() < 3 || fields.size() > 5) {
      fail_line(no, "expected 'path, format, kind[, bval[, index]]'");
    }
    ManifestRow row;
    row.path = fields[0];
    row.format = fields[1];
    row.kind = fields[2];
    if (row.path.empty()) fail_line(no, "empty path");
    if (row.format != "edgelist" && row.format != "orlib" && row.format != "canonical") {
      fail_line(no, "unknown format '" + row.format + "'");
    }
    if (row.kind != "maxcut" && row.kind != "ubqp" && row.kind != "product") {
      fail_line(no, "unknown kind '" + row.kind + "'");
    }
    if (fields.size() >= 4 && !fields[3].empty()) {
      row.bval = parse_real_token(fields[3], no, "best known value");
    }
    if (fields.size() == 5 && !fields[4].empty()) {
      long long idx = parse_int_token(fields[4], no, "problem index");
      if (idx < 0) fail_line(no, "problem index must be nonnegative");
      row.index = static_cast<int>(idx);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace dcfac
