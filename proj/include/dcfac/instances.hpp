#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dcfac/model.hpp"

namespace dcfac {

/// Weighted edge list; 1-based in files, 0-based here. Parallel edges are
/// summed on load.
struct EdgeList {
  int n = 0;
  std::vector<Triplet> edges;  // i < j
};

/// Parses "n m" followed by m lines "i j w" (1 <= i, j <= n, i != j).
/// Lines starting with '#' or '%' and blank lines are skipped. Errors carry
/// the offending line number.
EdgeList parse_edgelist(const std::string& text);

/// One problem from an OR-Library style file: max z^T A z over {0,1}^n.
struct OrlibProblem {
  int n = 0;
  std::vector<Triplet> entries;  // full symmetric description of A
};

/// Parses a file holding P problems: a count line, then per problem "n m"
/// and m lines "i j q" where a diagonal line sets A_ii = q and an off-diagonal
/// line sets A_ij = A_ji = q.
std::vector<OrlibProblem> parse_orlib(const std::string& text);

/// Serializes problems back into the same file format (upper-triangle lines);
/// parse(write(parse(text))) must reproduce the matrices exactly.
std::string write_orlib(const std::vector<OrlibProblem>& problems);

struct SeedProvenance {
  std::string generator;
  std::uint64_t seed = 0;
  std::string family;
};

struct CanonicalFactor {
  std::vector<Triplet> q_entries;  // upper triangle of Q, i <= j
  std::vector<double> c;
  double a = 0.0;
};

/// Self-describing instance container behind the canonical on-disk format;
/// read/write round-trips are lossless.
struct CanonicalInstance {
  ProblemKind kind = ProblemKind::MaxCut;
  std::string name;
  std::optional<double> known_best;
  int n = 0;                     // binary variable count
  std::vector<Triplet> entries;  // maxcut: edges (i < j); ubqp: A upper (i <= j)
  int l = 0;                     // product: block size
  std::vector<CanonicalFactor> factors;
  std::optional<SeedProvenance> provenance;
};

CanonicalInstance canonical_from_edgelist(const EdgeList& g, std::string name,
                                          std::optional<double> known_best = std::nullopt);
CanonicalInstance canonical_from_orlib(const OrlibProblem& p, std::string name,
                                       std::optional<double> known_best = std::nullopt);

/// Product of two random normalized quadratics over disjoint blocks of size l:
/// symmetric standard-normal M_i scaled to unit spectral norm, Q_i = D_i / 4,
/// c_i = 2 Q_i e, a_i = e^T Q_i e + w_i with standard normal w_i.
CanonicalInstance gen_product_random(int l, std::uint64_t seed);

/// Product of the two normalized cut quadratics of a pair of graphs on the
/// same vertex count; the reported objective is the product of the two
/// normalized cut values.
CanonicalInstance gen_product_maxcut(const EdgeList& g1, const EdgeList& g2, std::string name);

std::string write_canonical(const CanonicalInstance& inst);
CanonicalInstance read_canonical(const std::string& text);

/// Builds the solvable objective/instance pair.
std::pair<Objective, Instance> realize(const CanonicalInstance& inst);

struct ManifestRow {
  std::string path;
  std::string format;  // edgelist | orlib | canonical
  std::string kind;    // maxcut | ubqp | product
  std::optional<double> bval;
  int index = 0;  // problem index inside multi-problem (orlib) files
};

/// Comma-separated rows "path, format, kind[, bval[, index]]"; '#'/'%'
/// comments and blank lines are skipped.
std::vector<ManifestRow> parse_manifest(const std::string& text);

std::string read_text_file(const std::string& path);

}  // namespace dcfac
