#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "epstein/epstein.hpp"
#include "epstein/io.hpp"

using namespace epstein;

namespace {

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

std::vector<double> parse_grid(const std::string& spec) {
  double a = 0, b = 0, step = 0;
  char tail = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf%c", &a, &b, &step, &tail) != 3 || !(step > 0.0) || b < a)
    throw Error(ErrorKind::parse, "grid must look like a:b:step with step > 0");
  std::vector<double> xs;
  const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9));
  for (long i = 0; i <= count; ++i) xs.push_back(a + static_cast<double>(i) * step);
  return xs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Epstein zeta and lattice stability toolkit"};
  app.require_subcommand(1);

  std::string lattice_path, fn = "zeta";
  double s = 0.0, q = 0.0, tau = 1.0, rel_tol = 1e-12;
  auto* eval = app.add_subcommand("eval", "evaluate a lattice sum");
  eval->add_option("--lattice", lattice_path, "lattice JSON")->required();
  eval->add_option("--fn", fn, "theta | zeta | zetaq | zetaq-psf")
      ->check(CLI::IsMember({"theta", "zeta", "zetaq", "zetaq-psf"}));
  eval->add_option("--s", s);
  eval->add_option("--q", q);
  eval->add_option("--tau", tau);
  eval->add_option("--rel-tol", rel_tol);

  double alpha = 2.0;
  std::string grid = "0.5:5:0.5";
  auto* btable = app.add_subcommand("bessel-table", "tabulate K_alpha and Kbar_alpha");
  btable->add_option("--alpha", alpha)->required();
  btable->add_option("--x-grid", grid, "a:b:step")->required();

  auto* check = app.add_subcommand("check-stable", "certify stability");
  check->add_option("--lattice", lattice_path)->required();

  std::string out_path, transform_path;
  auto* stab = app.add_subcommand("stabilize", "contract a semi-stable lattice to a stable one");
  stab->add_option("--lattice", lattice_path)->required();
  stab->add_option("--out", out_path);
  stab->add_option("--transform", transform_path);

  auto* dec = app.add_subcommand("decompose", "split into indecomposable orthogonal summands");
  dec->add_option("--lattice", lattice_path)->required();

  std::string l1_path, l2_path;
  bool fd_check = false;
  auto* lap = app.add_subcommand("laplacian", "trace-free Laplacian of zeta' along L2");
  lap->add_option("--l1", l1_path)->required();
  lap->add_option("--l2", l2_path)->required();
  lap->add_option("--s", s)->required();
  lap->add_option("--q", q)->required();
  lap->add_flag("--fd-check", fd_check);

  Index n = 2;
  std::size_t count = 100;
  std::uint64_t seed = 1;
  bool explore_q = false, csv = false;
  auto* ver = app.add_subcommand("verify", "check zeta'_q(L) <= zeta'_q(Z^n) on random stable lattices");
  ver->add_option("--n", n)->required();
  ver->add_option("--s", s)->required();
  ver->add_option("--q", q)->required();
  ver->add_option("--count", count);
  ver->add_option("--seed", seed);
  ver->add_flag("--explore-q", explore_q);
  ver->add_option("--out", out_path);
  ver->add_flag("--csv", csv);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*eval) {
      LatticeBasis b = read_lattice(lattice_path);
      SummationResult r;
      if (fn == "theta")
        r = theta(b, tau, rel_tol);
      else if (fn == "zeta")
        r = zeta_prime_direct(b, s, q, rel_tol);
      else if (fn == "zetaq")
        r = zeta_q(b, s, q, rel_tol);
      else
        r = zeta_q_psf(b, s, q, rel_tol);
      print(to_json(r));
    } else if (*btable) {
      std::cout.precision(17);
      std::cout << "x,K_alpha,Kbar_alpha,recurrence_gap\n";
      for (double x : parse_grid(grid)) {
        std::cout << x << ',';
        if (x > 0.0)
          std::cout << bessel_k(alpha, x);
        else
          std::cout << "inf";
        std::cout << ',' << kbar(alpha, x) << ',';
        if (alpha > 1.0)
          std::cout << kbar_recurrence_gap(alpha, x);
        else
          std::cout << "nan";
        std::cout << '\n';
      }
    } else if (*check) {
      print(to_json(is_stable(read_lattice(lattice_path))));
    } else if (*stab) {
      StabilizeResult r = stabilize(read_lattice(lattice_path));
      json lat = lattice_to_json(r.lattice);
      json tr = matrix_to_json(r.transform);
      if (!out_path.empty()) write_json_file(out_path, lat);
      if (!transform_path.empty()) write_json_file(transform_path, tr);
      if (out_path.empty()) print({{"lattice", lat}, {"transform", tr}});
    } else if (*dec) {
      LatticeBasis b = read_lattice(lattice_path);
      print(to_json(decompose(b), is_isomorphic_to_Zn(b)));
    } else if (*lap) {
      SplitLattice split(read_lattice(l1_path), read_lattice(l2_path));
      SummationResult r = laplacian_S0(split, s, q);
      json j = {{"closed_form", r.value}, {"tail_bound", r.tail_bound}};
      if (fd_check) {
        const double fd = laplacian_S0_fd(split, s, q);
        j["fd_value"] = fd;
        j["relative_gap"] = std::abs(fd - r.value) / std::max(std::abs(r.value), 1e-300);
      }
      print(j);
    } else if (*ver) {
      VerificationReport rep = verify_theorem(n, s, q, count, seed, explore_q);
      if (csv) {
        if (out_path.empty())
          std::cout << to_csv(rep);
        else {
          std::ofstream f(out_path);
          f << to_csv(rep);
        }
      } else if (out_path.empty()) {
        print(to_json(rep));
      } else {
        write_json_file(out_path, to_json(rep));
      }
      return rep.violations > 0 ? 2 : 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
