#include "ssx/catalog.hpp"

#include <algorithm>

#include "ssx/errors.hpp"

namespace ssx {

namespace {

void need_dim(const Complex& c, int n, const char* what) {
  if (n < 1 || n > c.max_dim())
    throw ValidationError(std::string(what) + " dimension out of range");
}

void need_index(int i, int hi, const char* what) {
  if (i < 0 || i > hi)
    throw ValidationError(std::string(what) + " face index out of range");
}

}  // namespace

Relation empty_relation(const Complex& c) { return Relation({}, c.uid()); }

Relation identity_relation(const Complex& c) {
  std::vector<SidPair> p;
  p.reserve(static_cast<size_t>(c.size()));
  for (int n = 0; n <= c.max_dim(); ++n)
    for (int64_t s = 0; s < c.size(n); ++s)
      p.emplace_back(Sid{n, s}, Sid{n, s});
  return Relation(std::move(p), c.uid());
}

Relation generator(const Complex& c, int n, int i) {
  need_dim(c, n, "generator");
  need_index(i, n, "generator");
  std::vector<SidPair> p;
  p.reserve(static_cast<size_t>(c.size(n)));
  for (int64_t s = 0; s < c.size(n); ++s)
    p.emplace_back(Sid{n - 1, c.face(n, s, i)}, Sid{n, s});
  return Relation(std::move(p), c.uid());
}

Relation boundary(const Complex& c, int n) {
  need_dim(c, n, "boundary");
  Relation acc = empty_relation(c);
  for (int i = 0; i <= n; ++i) acc = union_(acc, converse(generator(c, n, i)));
  return acc;
}

Relation coboundary(const Complex& c, int n) {
  need_dim(c, n + 1, "coboundary");
  Relation acc = empty_relation(c);
  for (int i = 0; i <= n + 1; ++i) acc = union_(acc, generator(c, n + 1, i));
  return acc;
}

Relation lower(const Complex& c, int n, int i, int j) {
  need_dim(c, n, "lower");
  need_index(i, n, "lower");
  need_index(j, n, "lower");
  return compose(converse(generator(c, n, i)), generator(c, n, j));
}

Relation upper(const Complex& c, int n, int i, int j) {
  need_dim(c, n + 1, "upper");
  need_index(i, n + 1, "upper");
  need_index(j, n + 1, "upper");
  return compose(generator(c, n + 1, i), converse(generator(c, n + 1, j)));
}

Relation lower_all(const Complex& c, int n) {
  need_dim(c, n, "lower_all");
  Relation acc = empty_relation(c);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) acc = union_(acc, lower(c, n, i, j));
  return acc;
}

Relation upper_all(const Complex& c, int n) {
  need_dim(c, n + 1, "upper_all");
  Relation acc = empty_relation(c);
  for (int i = 0; i <= n + 1; ++i)
    for (int j = 0; j <= n + 1; ++j)
      if (i != j) acc = union_(acc, upper(c, n, i, j));
  return acc;
}

Relation r_in(const Complex& c) { return upper(c, 0, 0, 1); }
Relation r_out(const Complex& c) { return upper(c, 0, 1, 0); }
Relation r_sym(const Complex& c) { return union_(r_in(c), r_out(c)); }
Relation r_rc(const Complex& c) { return intersect(r_in(c), r_out(c)); }

Relation c02(const Complex& c) {
  if (c.max_dim() < 2) return empty_relation(c);
  return compose(coboundary(c, 0), coboundary(c, 1));
}

TernaryRelation ternary_lower(const Complex& c, int n, int i, int j) {
  TernaryRelation mid = join(converse(generator(c, n, i)), generator(c, n, j));
  TernaryRelation out;
  out.host_uid = mid.host_uid;
  out.triples.reserve(mid.triples.size());
  for (const auto& [sigma, kappa, tau] : mid.triples)
    out.triples.emplace_back(sigma, tau, kappa);
  std::sort(out.triples.begin(), out.triples.end());
  return out;
}

namespace {

std::vector<int> parse_args(const std::string& spec, size_t open) {
  if (spec.back() != ')') throw ValidationError("malformed relation spec");
  std::vector<int> args;
  size_t pos = open + 1;
  size_t end = spec.size() - 1;
  while (pos <= end) {
    size_t comma = spec.find(',', pos);
    if (comma == std::string::npos || comma > end) comma = end;
    std::string tok = spec.substr(pos, comma - pos);
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
      throw ValidationError("malformed relation spec");
    args.push_back(std::stoi(tok));
    pos = comma + 1;
  }
  return args;
}

}  // namespace

Relation derive(const Complex& c, const std::string& spec) {
  if (spec == "r_in") return r_in(c);
  if (spec == "r_out") return r_out(c);
  if (spec == "r_sym") return r_sym(c);
  if (spec == "rc") return r_rc(c);
  size_t open = spec.find('(');
  if (open == std::string::npos || spec.size() < open + 2)
    throw ValidationError("unknown relation spec: " + spec);
  std::string name = spec.substr(0, open);
  std::vector<int> args = parse_args(spec, open);
  if (name == "boundary" && args.size() == 1) return boundary(c, args[0]);
  if (name == "coboundary" && args.size() == 1) return coboundary(c, args[0]);
  if (name == "lower_all" && args.size() == 1) return lower_all(c, args[0]);
  if (name == "upper_all" && args.size() == 1) return upper_all(c, args[0]);
  if (name == "lower" && args.size() == 3)
    return lower(c, args[0], args[1], args[2]);
  if (name == "upper" && args.size() == 3)
    return upper(c, args[0], args[1], args[2]);
  throw ValidationError("unknown relation spec: " + spec);
}

std::vector<NamedRelation> relation_family(const Complex& c, char family) {
  if (family != 'U' && family != 'D')
    throw ValidationError("relation family must be 'U' or 'D'");
  int de = c.dim();  // effective dimension: highest nonempty table
  std::vector<NamedRelation> out;
  auto num = [](int v) { return std::to_string(v); };
  for (int n = 1; n <= de; ++n)
    out.push_back({"boundary(" + num(n) + ")", boundary(c, n)});
  for (int n = 0; n + 1 <= de; ++n)
    out.push_back({"coboundary(" + num(n) + ")", coboundary(c, n)});
  if (family == 'U') {
    for (int n = 1; n <= de; ++n)
      out.push_back({"lower_all(" + num(n) + ")", lower_all(c, n)});
    for (int n = 0; n + 1 <= de; ++n)
      out.push_back({"upper_all(" + num(n) + ")", upper_all(c, n)});
  } else {
    for (int n = 1; n <= de; ++n)
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
          out.push_back({"lower(" + num(n) + "," + num(i) + "," + num(j) + ")",
                         lower(c, n, i, j)});
    for (int n = 0; n + 1 <= de; ++n)
      for (int i = 0; i <= n + 1; ++i)
        for (int j = 0; j <= n + 1; ++j)
          if (i != j)
            out.push_back(
                {"upper(" + num(n) + "," + num(i) + "," + num(j) + ")",
                 upper(c, n, i, j)});
  }
  return out;
}

}  // namespace ssx
