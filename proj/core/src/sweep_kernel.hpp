#pragma once

// Per-clique elimination steps shared by the centralized eigensolver and the
// simulated distributed runtime. Both drive exactly these functions in the
// same order, which is what makes their results bit-identical.
//
// State at level k (cliques processed from the last one down to k+1):
//   A_k = Q_k + F_k Dbar_k F_k^T - shift * I   on H_k,
// where Q_k is K plus the Schur corrections received so far (sparse, held as
// per-clique correction blocks), F_k is the deflation factor (rows held per
// clique) and Dbar_k is a small dense matrix passed along the sequence.
// Eliminating R_k produces the deflated message
//   M_U = G (A_bb)^-1 G^T,   G = [Q_{S,R}; Dbar F_R^T],
// which is folded back into a sparse S x S correction, a correction to the
// factor rows on S and the next Dbar, so the factor keeps j-1 columns.

#include <span>
#include <vector>

#include "dpca/graph.hpp"
#include "dpca/linalg.hpp"

namespace dpca::detail {

/// Static local view of one clique.
struct CliquePlan {
  int index = 0;
  int parent = -1;
  IndexSet clique;
  IndexSet separator;
  IndexSet residual;
  std::vector<int> sep_pos;  // separator positions inside the clique
  std::vector<int> res_pos;  // residual positions inside the clique
};

std::vector<CliquePlan> make_plan(const DecomposableGraph& g);

/// Node-local data: its block of K and its rows of the deflation basis.
struct NodeData {
  Matrix block;  // K restricted to C_k
  Matrix basis;  // U restricted to C_k (|C_k| x rank, possibly zero columns)
};

/// Corrections received from children, kept apart from the base data so that
/// only deltas are forwarded.
struct NodeWork {
  Matrix corr;      // |C| x |C|
  Matrix row_corr;  // |C| x width, right-aligned with the current factor
};

NodeWork fresh_work(const NodeData& data);

/// What a clique sends to its parent after eliminating its residual.
struct UpdatePayload {
  int source = 0;
  IndexSet indices;  // S_k, global ids
  Matrix corr;       // |S| x |S| additive correction
  Matrix rows;       // |S| x w additive correction of the factor rows
  int message_dim = 0;  // dimension of M_U(t): |S| + rank
};

/// Adds a child's payload into the work of the clique whose local positions
/// for payload.indices are `pos`.
void absorb(NodeWork& work, std::span<const int> pos, const UpdatePayload& payload);

enum class StepMode { Feasibility, NullSpace };

struct StepResult {
  bool passed = false;      // feasibility: shift < eig_min(A_bb); null space: A_bb nonsingular
  double block_value = 0;   // eig_min of A_bb (feasibility) or min |eig| of A_bb - shift (null space)
  UpdatePayload payload;
  Matrix next_dbar;
  bool folded = true;       // false when the factor had to grow by |S| columns

  // retained for back-substitution (null-space mode)
  Matrix evecs;   // eigenvectors of A_bb - shift
  Vector evals;
  Matrix q_rs;    // Q_{R,S}
  Matrix f_r;     // F rows on R (level width)
  Matrix dbar;    // Dbar at this level
  Matrix fold;    // P: |S| x width, correction of the factor rows on S
};

/// Current A block on the whole clique (with the factor widened to dbar).
Matrix clique_matrix(const NodeData& data, NodeWork& work, const Matrix& dbar);

/// Factor rows of the clique padded to `width` columns.
Matrix factor_rows(const NodeData& data, NodeWork& work, Eigen::Index width);

StepResult eliminate(const NodeData& data, NodeWork& work, const CliquePlan& plan, double shift,
                     const Matrix& dbar, StepMode mode, double null_scale,
                     double lambda_tol = 0.0);

/// Singularity threshold used for null-space decisions on a block.
double null_threshold(const Matrix& shifted_block, double scale);

/// Null vector of the block where elimination stopped, plus z = F^T u over
/// the history at that level.
struct TerminalSolution {
  Vector local;  // on C_0 for the root, on R_k for a singular residual block
  Vector z;
  double sigma = 0.0;  // signed eig of least magnitude of the shifted root block (root only)
  double tau = 0.0;    // null threshold of the shifted root block (root only)
};

TerminalSolution solve_root(const NodeData& data, NodeWork& work, const Matrix& dbar, double shift,
                            double null_scale);
TerminalSolution solve_singular(const StepResult& step);

/// Recovers u on R_k from u on S_k and z of the level below; returns the
/// z of this level through `z`.
Vector back_substitute(const StepResult& step, const Vector& u_s, Vector& z);

/// Message size of a sweep payload in bytes (optionally carrying Dbar).
std::size_t payload_bytes(const UpdatePayload& payload, const Matrix* dbar);

}  // namespace dpca::detail
