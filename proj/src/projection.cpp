#include "srcfuse/projection.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "srcfuse/errors.hpp"
#include "srcfuse/rng.hpp"
#include "srcfuse/sparse_solver.hpp"

namespace srcfuse {

const char* to_string(ProjectionMethod m) {
  switch (m) {
    case ProjectionMethod::gaussian: return "gaussian";
    case ProjectionMethod::svd_random_columns: return "svd_random_columns";
    case ProjectionMethod::svd_top_singular: return "svd_top_singular";
  }
  return "unknown";
}

ProjectionMatrix gaussian_projection(int d, int n, std::uint64_t seed) {
  if (d <= 0 || d >= n) {
    throw ParameterError("gaussian_projection: need 0 < d < n, got d=" +
                         std::to_string(d) + ", n=" + std::to_string(n));
  }
  Rng rng(seed);
  ProjectionMatrix p;
  p.r.resize(d, n);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < n; ++j) p.r(i, j) = rng.normal();
  for (int i = 0; i < d; ++i) p.r.row(i).normalize();
  p.method = ProjectionMethod::gaussian;
  p.d = d;
  p.n = n;
  p.seed = seed;
  return p;
}

ProjectionMatrix svd_projection(const Dictionary& dict, int d,
                                const SvdSelection& selection) {
  if (d <= 0) throw ParameterError("svd_projection: d must be positive");
  const Eigen::MatrixXd raw = dict.raw_matrix();
  const SvdFactors f = svd(raw);
  const int rank = numeric_rank(f, static_cast<int>(raw.rows()),
                                static_cast<int>(raw.cols()));
  if (d > rank) {
    throw ParameterError("svd_projection: d=" + std::to_string(d) +
                         " exceeds dictionary rank " + std::to_string(rank));
  }

  ProjectionMatrix p;
  p.n = static_cast<int>(raw.rows());
  p.d = d;
  if (selection.kind == SvdSelection::Kind::top_singular) {
    p.r = f.u.leftCols(d).transpose();
    p.method = ProjectionMethod::svd_top_singular;
    p.seed = 0;
  } else {
    Rng rng(selection.seed);
    const auto cols =
        rng.sample_without_replacement(static_cast<int>(f.u.cols()), d);
    p.r.resize(d, p.n);
    for (int i = 0; i < d; ++i) p.r.row(i) = f.u.col(cols[i]).transpose();
    p.method = ProjectionMethod::svd_random_columns;
    p.seed = selection.seed;
  }
  return p;
}

double signal_power(const ProjectionMatrix& r, const Dictionary& dict) {
  if (r.n != dict.dim()) {
    throw ParameterError("signal_power: projection expects n=" +
                         std::to_string(r.n) + " but dictionary dim is " +
                         std::to_string(dict.dim()));
  }
  return (r.r * dict.raw_matrix()).squaredNorm();
}

void save_projection_csv(const ProjectionMatrix& r,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write projection file: " + path.string());
  out << "# method=" << to_string(r.method) << ",d=" << r.d << ",n=" << r.n
      << ",seed=" << r.seed << "\n";
  out.precision(17);
  for (int i = 0; i < r.d; ++i) {
    for (int j = 0; j < r.n; ++j) {
      if (j) out << ',';
      out << r.r(i, j);
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing projection file: " + path.string());
}

ProjectionMatrix load_projection_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open projection file: " + path.string());
  std::string header;
  std::getline(in, header);
  ProjectionMatrix p;
  {
    std::map<std::string, std::string> fields;
    std::string body = header;
    if (body.rfind("# ", 0) == 0) body.erase(0, 2);
    std::stringstream ss(body);
    std::string pair;
    while (std::getline(ss, pair, ',')) {
      const auto eq = pair.find('=');
      if (eq != std::string::npos) fields[pair.substr(0, eq)] = pair.substr(eq + 1);
    }
    const auto grab = [&](const std::string& key) -> std::string {
      const auto it = fields.find(key);
      if (it == fields.end())
        throw FormatError("projection header missing " + key + ": " +
                          path.string());
      return it->second;
    };
    const std::string method = grab("method");
    if (method == "gaussian") p.method = ProjectionMethod::gaussian;
    else if (method == "svd_random_columns") p.method = ProjectionMethod::svd_random_columns;
    else if (method == "svd_top_singular") p.method = ProjectionMethod::svd_top_singular;
    else throw FormatError("unknown projection method: " + method);
    p.d = std::stoi(grab("d"));
    p.n = std::stoi(grab("n"));
    p.seed = std::stoull(grab("seed"));
  }
  if (p.d <= 0 || p.n <= 0)
    throw FormatError("bad projection dimensions in " + path.string());
  p.r.resize(p.d, p.n);
  std::string line;
  for (int i = 0; i < p.d; ++i) {
    if (!std::getline(in, line))
      throw FormatError("projection file truncated at row " +
                        std::to_string(i) + ": " + path.string());
    std::stringstream ss(line);
    std::string cell;
    for (int j = 0; j < p.n; ++j) {
      if (!std::getline(ss, cell, ','))
        throw FormatError("projection row " + std::to_string(i) +
                          " too short: " + path.string());
      try {
        p.r(i, j) = std::stod(cell);
      } catch (const std::exception&) {
        throw FormatError("bad number in projection row " + std::to_string(i) +
                          ": " + path.string());
      }
    }
  }
  return p;
}

}  // namespace srcfuse
