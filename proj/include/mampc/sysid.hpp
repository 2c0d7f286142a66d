#pragma once

#include <Eigen/Dense>

#include "mampc/lti.hpp"

namespace mampc {

/// Input-output record for identification. Models are estimated on
/// deviation variables; the removed column means are kept so controllers
/// can translate back at the plant boundary.
struct IoDataset {
  Eigen::MatrixXd u;  // T x m
  Eigen::MatrixXd y;  // T x l
  double dt = 1.0;
  Eigen::VectorXd mean_u;
  Eigen::VectorXd mean_y;
};

/// Removes (and records) the column means of raw input-output data.
IoDataset detrend(const Eigen::MatrixXd& u, const Eigen::MatrixXd& y, double dt);

struct SubspaceOptions {
  int order = 0;       // 0: pick by largest singular-value gap
  int block_rows = 0;  // 0: 2*order + 2
  int max_order = 10;  // search range for automatic order selection
};

struct SubspaceResult {
  LtiModel model;
  Eigen::VectorXd singular_values;  // of the projected data matrix
  int order = 0;
};

/// Deterministic subspace identification: block-Hankel data matrices, an LQ
/// factorization, the oblique projection of future outputs onto past data
/// along future inputs, SVD for the extended observability matrix (C and,
/// by shift invariance, A), then B, D and the initial state by linear least
/// squares on the simulated response.
SubspaceResult subspace_identify(const IoDataset& data, const SubspaceOptions& opts = {});

/// First `count` Markov parameters D, CB, CAB, ... stacked as count blocks
/// of l x m; the similarity-invariant fingerprint used to compare models.
Eigen::MatrixXd markov_parameters(const LtiModel& model, int count);

/// Simulates the model against recorded data with the initial state fitted
/// by least squares; returns the variance-accounted-for in percent, pooled
/// over outputs.
double simulation_fit(const LtiModel& model, const Eigen::MatrixXd& u,
                      const Eigen::MatrixXd& y);

}  // namespace mampc
