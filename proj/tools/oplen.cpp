// oplen: build and check factorization certificates from the command line.
//
// Exit codes: 0 pass, 1 verification or bound failure, 2 input/usage error.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "oplength/io.hpp"
#include "oplength/oplength.hpp"

namespace {

using namespace oplength;
using io::json;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

void emit(const json& j, const std::string& out) {
  if (out.empty())
    std::cout << j.dump(2) << '\n';
  else
    io::write_json_file(out, j);
}

std::vector<Index> parse_range(const std::string& s) {
  std::vector<Index> out;
  const auto colon = s.find(':');
  if (colon != std::string::npos) {
    const Index lo = std::stol(s.substr(0, colon));
    const Index hi = std::stol(s.substr(colon + 1));
    for (Index v = lo; v <= hi; ++v) out.push_back(v);
  } else {
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) out.push_back(std::stol(item));
  }
  if (out.empty()) throw PreconditionError("empty range '" + s + "'");
  for (Index v : out)
    if (v < 1) throw PreconditionError("range values must be positive");
  return out;
}

// identity:K | diag:a,b,... | random:K:SEED
AlgebraElement parse_xi(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "identity") return AlgebraElement::identity(std::stol(rest));
  if (kind == "diag") {
    std::vector<double> v;
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
    if (v.empty()) throw PreconditionError("diag: needs at least one value");
    CMatrix m = CMatrix::Zero(static_cast<Index>(v.size()), static_cast<Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Index>(i), static_cast<Index>(i)) = v[i];
    return AlgebraElement(std::move(m));
  }
  if (kind == "random") {
    const auto c2 = rest.find(':');
    const Index k = std::stol(rest.substr(0, c2));
    const std::uint64_t seed = c2 == std::string::npos ? 0 : std::stoull(rest.substr(c2 + 1));
    Rng rng = make_rng(seed);
    return AlgebraElement(CMatrix::Identity(k, k) + 0.5 * gaussian_matrix(k, k, rng));
  }
  throw PreconditionError("unknown xi spec '" + spec + "' (identity:K, diag:a,b,..., random:K:SEED)");
}

struct GenArgs {
  Index n = 2, k = 2;
  std::uint64_t seed = 0;
  std::string distribution = "gaussian";
  double noise = 0.0;
  double scale = 0.0;
  std::string out;
};

int cmd_gen(const GenArgs& a) {
  BlockMatrix x = random_block_matrix(a.n, a.k, a.seed, parse_distribution(a.distribution), a.noise);
  if (a.scale > 0.0) x = x * Complex(a.scale / operator_norm(x));
  emit(io::instance_to_json(x), a.out);
  return kPass;
}

struct FactorArgs {
  std::string instance;
  std::string construction = "length1";
  Index r = 1, s = 1;
  int depth = 0;
  double tol = kVerifyTol;
  std::string out;
  std::string target_out;
};

int cmd_factor(const FactorArgs& a) {
  const BlockMatrix x = io::read_instance(a.instance);
  const Construction c = parse_construction(a.construction);
  auto result = run_construction(c, x, {a.r - 1, a.s - 1});
  if (a.depth > 0) result.certificate = pad_to(result.certificate, a.depth);
  const auto report = verify(result.certificate, result.target, a.tol);
  if (!a.out.empty()) io::write_certificate(a.out, result.certificate);
  if (!a.target_out.empty()) io::write_instance(a.target_out, result.target);
  json j = io::to_json(report);
  j["construction"] = std::string(to_string(c));
  j["depth"] = result.certificate.depth();
  j["widths"] = result.certificate.widths();
  j["input_norm"] = operator_norm(x);
  std::cout << j.dump(2) << '\n';
  return report.pass ? kPass : kFail;
}

struct VerifyArgs {
  std::string instance;
  std::string cert;
  double tol = kVerifyTol;
};

int cmd_verify(const VerifyArgs& a) {
  const BlockMatrix x = io::read_instance(a.instance);
  const auto cert = io::read_certificate(a.cert);
  const auto report = verify(cert, x, a.tol);
  json j = io::to_json(report);
  j["depth"] = cert.depth();
  j["claimed_cost"] = cert.claimed_cost();
  std::cout << j.dump(2) << '\n';
  return report.pass ? kPass : kFail;
}

struct BenchArgs {
  std::string n_range = "2:4";
  Index k = 2;
  int trials = 3;
  std::uint64_t seed = 0;
  bool timing = false;
  std::string out;
};

int cmd_bench(const BenchArgs& a) {
  if (a.trials < 1) throw PreconditionError("bench: trials must be positive");
  const auto ns = parse_range(a.n_range);
  std::ostringstream os;
  os << std::setprecision(17);
  os << "construction,n,k,trial,cost,norm,ratio" << (a.timing ? ",runtime_ms" : "") << '\n';
  bool ok = true;
  for (Construction c : {Construction::universal, Construction::corner, Construction::ampliation})
    for (Index n : ns)
      for (int t = 0; t < a.trials; ++t) {
        const std::uint64_t seed = a.seed * 1000003ULL + static_cast<std::uint64_t>(n) * 1009ULL + static_cast<std::uint64_t>(t);
        const BlockMatrix x = random_block_matrix(n, a.k, seed);
        const auto start = std::chrono::steady_clock::now();
        const auto result = run_construction(c, x);
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        const double cst = cost(result.certificate);
        const double nrm = operator_norm(x);
        const double ratio = nrm > 0.0 ? cst / nrm : 0.0;
        const double limit = c == Construction::universal ? static_cast<double>(n * n) : 1.0 + 1e-9;
        ok = ok && ratio <= limit;
        os << to_string(c) << ',' << n << ',' << a.k << ',' << t << ',' << cst << ',' << nrm << ',' << ratio;
        if (a.timing) os << ',' << ms;
        os << '\n';
      }
  if (a.out.empty()) {
    std::cout << os.str();
  } else {
    std::ofstream f(a.out);
    if (!f) throw PreconditionError("cannot write '" + a.out + "'");
    f << os.str();
  }
  return ok ? kPass : kFail;
}

struct CbArgs {
  std::string xi_spec = "diag:2,1";
  Index level = 0;
  int restarts = 50;
  std::uint64_t seed = 0;
};

int cmd_cb(const CbArgs& a) {
  const AlgebraElement xi = parse_xi(a.xi_spec);
  const Index level = a.level > 0 ? a.level : xi.order();
  const auto rep = haagerup_check(xi, level, a.restarts, a.seed);
  json j = io::to_json(rep);
  j["xi_spec"] = a.xi_spec;
  std::cout << j.dump(2) << '\n';
  const bool ok = rep.consistent && (!rep.target_applies || rep.target_met);
  return ok ? kPass : kFail;
}

struct UniformityArgs {
  std::string construction = "length1";
  Index n = 2, k = 2;
  int trials = 10;
  std::uint64_t seed = 0;
  Index r = 1, s = 1;
};

int cmd_uniformity(const UniformityArgs& a) {
  const auto rep = uniformity_check(parse_construction(a.construction), a.n, a.k, a.trials, a.seed, {a.r - 1, a.s - 1});
  std::cout << io::to_json(rep).dump(2) << '\n';
  return rep.identical ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oplen: factorization certificates over matrix algebras"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a random instance");
  g->add_option("--n", gen.n, "Block matrix size")->check(CLI::PositiveNumber);
  g->add_option("--k", gen.k, "Order of the base algebra M_k")->check(CLI::PositiveNumber);
  g->add_option("--seed", gen.seed, "Random seed");
  g->add_option("--distribution", gen.distribution, "gaussian | unitary | block-diagonal");
  g->add_option("--noise", gen.noise, "Noise level for block-diagonal instances");
  g->add_option("--scale", gen.scale, "Rescale to this operator norm (0 keeps the raw draw)");
  g->add_option("--out", gen.out, "Output file (stdout when omitted)");

  FactorArgs fac;
  auto* f = app.add_subcommand("factor", "Build and verify a certificate");
  f->add_option("--instance", fac.instance, "Instance file")->required();
  f->add_option("--construction", fac.construction, "length1 | lemma5 | sub18 | sub19 | t13");
  f->add_option("--r", fac.r, "Corner row index (1-based) for sub18");
  f->add_option("--s", fac.s, "Corner column index (1-based) for sub18");
  f->add_option("--d", fac.depth, "Pad the certificate to this depth");
  f->add_option("--tol", fac.tol, "Relative reconstruction tolerance");
  f->add_option("--out", fac.out, "Write the certificate here");
  f->add_option("--target-out", fac.target_out, "Write the certified target matrix here");

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "Verify a certificate against an instance");
  v->add_option("--instance", ver.instance, "Instance file")->required();
  v->add_option("--cert", ver.cert, "Certificate file")->required();
  v->add_option("--tol", ver.tol, "Relative reconstruction tolerance");

  BenchArgs ben;
  std::string bench_format = "csv";
  auto* b = app.add_subcommand("bench", "Cost / norm ratios as CSV");
  b->add_option("--n-range", ben.n_range, "lo:hi or comma list");
  b->add_option("--k", ben.k, "Order of the base algebra")->check(CLI::PositiveNumber);
  b->add_option("--trials", ben.trials, "Trials per (construction, n)");
  b->add_option("--seed", ben.seed, "Random seed");
  b->add_flag("--timing", ben.timing, "Add a runtime column (output no longer byte-reproducible)");
  b->add_option("--format", bench_format, "csv")->check(CLI::IsMember({"csv"}));
  b->add_option("--out", ben.out, "Output file (stdout when omitted)");

  CbArgs cb;
  auto* c = app.add_subcommand("cb", "Lower-bound the cb norm of x -> xi^-1 x xi");
  c->add_option("--xi-spec", cb.xi_spec, "identity:K | diag:a,b,... | random:K:SEED");
  c->add_option("--level", cb.level, "Amplification level (default: order of xi)");
  c->add_option("--restarts", cb.restarts, "Random restarts per level");
  c->add_option("--seed", cb.seed, "Random seed");

  UniformityArgs uni;
  auto* u = app.add_subcommand("uniformity", "Check that scalar factors do not depend on the input");
  u->add_option("--construction", uni.construction, "length1 | lemma5 | sub18 | sub19 | t13");
  u->add_option("--n", uni.n, "Block matrix size")->check(CLI::PositiveNumber);
  u->add_option("--k", uni.k, "Order of the base algebra")->check(CLI::PositiveNumber);
  u->add_option("--trials", uni.trials, "Number of random inputs");
  u->add_option("--seed", uni.seed, "Random seed");
  u->add_option("--r", uni.r, "Corner row index (1-based) for sub18");
  u->add_option("--s", uni.s, "Corner column index (1-based) for sub18");

  for (auto* sub : {g, f, v, c, u}) sub->add_option("--format", "json (the only report format)")->check(CLI::IsMember({"json", "json-like"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*g) return cmd_gen(gen);
    if (*f) return cmd_factor(fac);
    if (*v) return cmd_verify(ver);
    if (*b) return cmd_bench(ben);
    if (*c) return cmd_cb(cb);
    if (*u) return cmd_uniformity(uni);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const io::json::exception& e) {
    std::cerr << "error: malformed input: " << e.what() << '\n';
    return kUsage;
  } catch (const std::logic_error& e) {  // std::stol and friends
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
