#pragma once

// Reference results for the three benchmark cases (theta = 2, x0 = 1,
// Milstein, 100 replicates): published mean and standard deviation of the
// estimator per (n, alpha) cell. The table subcommand prints them beside
// fresh runs; they are comparison data, not tolerances.

namespace driftmle::tables {

struct RefCell {
    int n;
    double alpha;
    double mean;
    double std;
};

struct RefCase {
    int index;          // 1-based case number
    const char* a;
    const char* b;
    double theta;
    double x0;
    RefCell cells[18];  // 3 alphas x 6 ns, alpha-major, n ascending
};

inline constexpr int kNs[6] = {50, 100, 500, 1000, 2000, 5000};
inline constexpr double kAlphas[3] = {0.1, 0.5, 0.9};

inline constexpr RefCase kReference[3] = {
    {1,
     "1-x",
     "2+sin(x)",
     2.0,
     1.0,
     {{50, 0.1, 3.05812, 2.06388},   {100, 0.1, 2.97626, 2.00007},
      {500, 0.1, 2.73973, 1.43273},  {1000, 0.1, 2.58453, 1.34689},
      {2000, 0.1, 2.55888, 1.26920}, {5000, 0.1, 2.53879, 1.22077},
      {50, 0.5, 2.11065, 0.62613},   {100, 0.5, 2.15066, 0.56038},
      {500, 0.5, 2.08157, 0.31621},  {1000, 0.5, 2.05626, 0.28909},
      {2000, 0.5, 2.03686, 0.22875}, {5000, 0.5, 2.03479, 0.18187},
      {50, 0.9, 2.02509, 0.27874},   {100, 0.9, 2.01702, 0.19589},
      {500, 0.9, 2.02024, 0.09995},  {1000, 0.9, 2.01308, 0.06918},
      {2000, 0.9, 2.00626, 0.04850}, {5000, 0.9, 2.00289, 0.03028}}},
    {2,
     "-atan(x)",
     "1",
     2.0,
     1.0,
     {{50, 0.1, 2.69321, 2.03142},   {100, 0.1, 2.66637, 2.06075},
      {500, 0.1, 2.65053, 1.82903},  {1000, 0.1, 2.66356, 1.73034},
      {2000, 0.1, 2.59903, 1.68212}, {5000, 0.1, 2.46685, 1.50186},
      {50, 0.5, 2.12190, 0.85304},   {100, 0.5, 2.10459, 0.69484},
      {500, 0.5, 2.01048, 0.48803},  {1000, 0.5, 1.99535, 0.37807},
      {2000, 0.5, 2.01712, 0.31746}, {5000, 0.5, 1.99517, 0.25846},
      {50, 0.9, 1.95538, 0.35057},   {100, 0.9, 1.97446, 0.26796},
      {500, 0.9, 1.98035, 0.12235},  {1000, 0.9, 1.99565, 0.09050},
      {2000, 0.9, 2.00266, 0.06496}, {5000, 0.9, 2.00290, 0.04533}}},
    {3,
     "-x/(1+x^2)",
     "1",
     2.0,
     1.0,
     {{50, 0.1, 1.99507, 2.44248},   {100, 0.1, 1.99813, 2.53060},
      {500, 0.1, 1.97122, 2.17322},  {1000, 0.1, 1.99255, 2.13403},
      {2000, 0.1, 1.98366, 2.05527}, {5000, 0.1, 1.94811, 1.80128},
      {50, 0.5, 1.87038, 1.01932},   {100, 0.5, 1.87897, 0.89315},
      {500, 0.5, 1.89022, 0.54811},  {1000, 0.5, 1.92593, 0.49005},
      {2000, 0.5, 1.94964, 0.41787}, {5000, 0.5, 1.96624, 0.33855},
      {50, 0.9, 1.90341, 0.47656},   {100, 0.9, 1.92162, 0.33693},
      {500, 0.9, 2.00240, 0.18136},  {1000, 0.9, 2.00068, 0.13173},
      {2000, 0.9, 2.00491, 0.09595}, {5000, 0.9, 1.99347, 0.07033}}},
};

}  // namespace driftmle::tables
