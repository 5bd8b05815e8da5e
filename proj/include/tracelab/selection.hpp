#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "tracelab/manifest.hpp"

namespace tracelab {

// Symmetric nonnegative pairwise Euclidean distances, zero diagonal.
Eigen::MatrixXd distance_matrix(const std::vector<Eigen::VectorXd>& features);

struct MedoidSolution {
    std::vector<int> medoids;  // distinct, ascending
    double total_deviation = 0.0;
    int swap_passes = 0;
};

// PAM: greedy BUILD then steepest-descent SWAP with cached nearest and
// second-nearest medoid distances, plus seeded random restarts to escape the
// occasional local optimum of single-start SWAP. Deterministic for a fixed
// seed; ties break to the lowest index.
MedoidSolution kmedoids(const Eigen::MatrixXd& dist, int k, std::uint64_t seed = 0);

double total_deviation(const Eigen::MatrixXd& dist, const std::vector<int>& medoids);

struct SparseSelection {
    DatasetManifest manifest;
    std::vector<MedoidSolution> per_set;  // one per input manifest
};

// Algorithm: embed each constructed set, run k-medoids per set independently,
// return the union of the 3k selected fakes plus their k-matched real
// counterparts.
SparseSelection select_sparse(const std::vector<DatasetManifest>& manifests, int k,
                              std::uint64_t seed, const std::filesystem::path& out_dir);

}  // namespace tracelab
