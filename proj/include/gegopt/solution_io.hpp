#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "gegopt/adaptive.hpp"
#include "gegopt/problem.hpp"

namespace gegopt {

/// On-disk solution record: mesh in original time, per-element spectral
/// coefficients (state-major), objective, iteration trace, warnings.
struct SolutionFile {
  int version = 1;
  std::string problem;
  int n_x = 0, n_u = 0;
  double t0 = 0.0, tf = 1.0;
  double alpha = 0.5;
  std::vector<double> interfaces_t;  // K+1 original-time mesh points

  struct ElementRecord {
    int N = 0, Lx = 0, Lu = 0, M = 0, Mbar = 0;
    Eigen::MatrixXd a;  // (Lx+1) x n_x
    Eigen::MatrixXd b;  // (Lu+1) x n_u
  };
  std::vector<ElementRecord> elements;

  double objective = 0.0;
  std::vector<std::string> trace;
  std::vector<std::string> warnings;
};

SolutionFile make_solution_file(const std::string& problem, const AdaptiveResult& result);

/// Rebuild a samplable solution from a file record.
SpectralSolution to_spectral_solution(const SolutionFile& file);

/// Sectioned text, reals at 17 significant digits (round-trip exact).
void write_solution(const SolutionFile& file, const std::string& path);
SolutionFile read_solution(const std::string& path);

/// Flat CSV: header t,x1..,u1.., one row per sample; each element contributes
/// the configured number of linearly spaced samples including its endpoints.
void write_csv_samples(const SpectralSolution& sol, int samples_per_element,
                       const std::string& path);

struct SweepRow {
  double alpha = 0.0;
  int N = 0;
  int L = 0;
  double objective = 0.0;
  SolveStatus status = SolveStatus::max_iter;
  std::vector<double> x_last;  // per element, max |last state coefficient|
  std::vector<double> u_last;  // per element, max |last control coefficient|
};

/// CSV table sorted by (alpha, N).
void write_sweep_table(const std::vector<SweepRow>& rows, const std::string& path);

}  // namespace gegopt
