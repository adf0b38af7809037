#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spanreg/graph.hpp"
#include "spanreg/regularity.hpp"
#include "spanreg/rng.hpp"
#include "spanreg/solvers.hpp"
#include "spanreg/verifier.hpp"

namespace spanreg {

// Maximum matching on a general graph via blossom contraction, O(V^3).
// Intended for cluster-scale inputs; returns pairs with first < second.
std::vector<std::pair<int, int>> maximum_matching(const Graph& g);

struct PipelineConstants {
  Rat alpha{3, 100};  // extremality bar
  Rat beta{1, 100};   // degree slack below n/2 the pipeline tolerates
  Rat d{1, 20};       // density floor for reduced edges
  Rat nu{1, 50};      // absorptions between path resets, as a fraction of n
  Rat eps{1, 100};    // regularity parameter
};

struct PipelineOptions {
  PipelineConstants constants;
  int ell = 20;                       // target cluster count
  std::uint64_t seed = 1;
  int embed_attempts = 6;             // completion restarts per pair
  long long embed_budget = 4'000'000; // node budget per completion embedding
  // completion first extends each path until at most this many live
  // vertices remain per cluster side; spanning search stays tractable
  int embed_target = 24;
};

// Thinning of the complete join between consecutive tuples of a blow-up
// path. minus_upper keeps the positional pair (0,0); minus_zero drops
// only it. Both appear in the shifted section of the odd-degree endgame.
enum class JoinKind { full, minus_matching, minus_upper, minus_zero };

struct BlowupPath {
  std::vector<std::vector<int>> tuples;  // front and back are the live ends
  std::vector<JoinKind> joins;           // joins[k] sits between tuples[k], tuples[k+1]
  std::vector<Edge> extra;               // degree-r fans of endgame-absorbed vertices
};

std::vector<Edge> path_edges(const BlowupPath& p);

// Matched cluster pair. Live vertex sets stay in the pipeline's per-cluster
// store; the pair itself is just the (X, Y) cluster assignment.
struct PairState {
  int xc = -1;
  int yc = -1;
};

// Two cluster families with no reduced-graph edge between them, emitted
// when routing between consecutive pairs fails. Checkable: the density
// between the families, recomputed from the reduced graph, sits under
// alpha/2, which is exactly what the non-extremality assumption forbids.
struct SparseCutWitness {
  std::vector<int> side_a, side_b;  // cluster indices
  Rat density{0, 1};
};

struct AbsorbStats {
  int single = 0;        // one-vertex absorptions opening a surplus chain
  int chain = 0;         // chain steps shifting surplus between pairs
  int balance = 0;       // double-walk closures cancelling a full chain
  int endgame_even = 0;  // degree-r fan attachments across a removed matching
  int endgame_odd = 0;   // paired shifted-join attachments
  int resets = 0;        // path re-regularisation rounds
  int reabsorbed = 0;    // vertices re-absorbed during resets
};

// Dense-case solver: regularity partition, cluster matching, connected
// system of blow-up paths, super-regularisation, absorption of the
// exceptional set, then per-pair spanning completions stitched into one
// r-regular r-connected certificate. Stages can be stepped one at a time;
// every public step leaves the state consistent or throws logic_error.
class NonExtremalPipeline {
 public:
  NonExtremalPipeline(const Graph& g, int r, PipelineOptions opt = {});

  // Stage steps, in order. Each returns false on a stage failure and
  // records the reason; stepping past a failed stage throws.
  bool regularise();
  // Alternative first step: adopt a prepared partition instead of
  // computing one. Validates cluster coverage against the host.
  bool begin_with_partition(Partition part);
  bool build_cluster_matching();
  bool connect_pairs();
  bool super_regularize_matching();
  bool absorb_exceptional();
  bool complete_spanning();

  // Verifies and assembles the result; run() drives all stages.
  SolveResult finish();
  SolveResult run();

  // Inspection.
  const Partition& partition() const { return part_; }
  const std::vector<PairState>& pairs() const { return pairs_; }
  const std::vector<BlowupPath>& paths() const { return paths_; }
  const std::vector<int>& cluster_live(int c) const { return live_[c]; }
  const std::vector<int>& pair_x(int p) const { return live_[pairs_[p].xc]; }
  const std::vector<int>& pair_y(int p) const { return live_[pairs_[p].yc]; }
  int surplus(int p) const;
  const std::vector<int>& exceptional() const { return v0_; }
  const std::vector<int>& interiors_recent() const { return w0_; }   // since last reset
  const std::vector<int>& interiors_settled() const { return w_; }   // behind a reset
  // Signed count of absorptions whose balancing is still pending; the
  // ledger invariant keeps sum_i surplus(i) equal to this at all times.
  int in_flight() const { return in_flight_; }
  const AbsorbStats& absorb_stats() const { return stats_; }
  const std::vector<SolveStage>& stages() const { return stages_; }
  const std::optional<SparseCutWitness>& cut_witness() const { return cut_witness_; }
  int tuple_width() const { return s_; }
  int pair_count() const { return static_cast<int>(pairs_.size()); }

  // Full consistency check: vertex bookkeeping partitions 0..n-1, path
  // interiors have degree r and ends degree s, cluster sizes respect the
  // tuple width, the surplus ledger matches in_flight, live ends are
  // well-connected. Throws logic_error naming the violated condition.
  void assert_invariants() const;

 private:
  struct SlotSpec;
  struct WalkPlan;
  struct StagedWalk;

  bool fail(const std::string& stage, const std::string& detail);
  void pass(const std::string& stage, const std::string& detail);
  void require_stage(int idx) const;

  int prev_pair(int p) const;
  const std::vector<int>& x_end(int p) const;  // end tuple resident in X_p
  const std::vector<int>& y_end(int p) const;  // end tuple resident in Y_p
  std::vector<int> reserved_ends() const;
  int avail(int cluster) const;
  bool pair_usable(int p, int need_x, int need_y) const;
  int hv_degree(int v, int p) const;
  bool in_hv(int v, int p) const;
  bool well_connected(const std::vector<int>& tuple, int opposite_cluster) const;
  std::vector<JoinKind> alternating_joins(std::size_t count) const;

  bool stage_walk(int path, bool at_front, const WalkPlan& plan,
                  const std::vector<int>& claimed, StagedWalk* out, std::string* err) const;
  void commit_walk(const StagedWalk& st);
  bool stage_fresh_chain(const WalkPlan& plan, StagedWalk* out, std::string* err) const;
  void commit_new_path(int pair_idx, const StagedWalk& st);
  void retire(int v);  // move a vertex out of live/exceptional into w0

  bool absorb_batch(std::string* err);
  bool absorb_open(int v, int* pair_out, std::string* err);
  bool absorb_chain(int v, int prev, int step, int* pair_out, std::string* err);
  bool absorb_balance(int left, int right, std::string* err);
  bool endgame_even(int v, std::string* err);
  bool endgame_odd(int v, int u, std::string* err);
  bool reset_paths(std::string* err);
  bool reabsorb(int pair_idx, int vert, bool from_x, std::string* err);

  bool route_clusters(int from, int to, std::vector<int>* hops) const;
  std::string dump_state() const;
  void check_paths() const;

  const Graph* g_ = nullptr;
  int r_ = 0, s_ = 0;
  PipelineOptions opt_;
  mutable Rng rng_;

  Partition part_;
  std::vector<PairState> pairs_;
  std::vector<std::vector<int>> live_;  // per cluster, sorted
  std::vector<int> cluster_of_;         // -1 for exceptional vertices
  std::vector<BlowupPath> paths_;
  std::vector<int> v0_, w0_, w_;
  std::vector<Edge> completion_;        // seams and embeddings from the last stage
  int in_flight_ = 0;
  int wc_threshold_ = 1;
  int hv_threshold_ = 1;
  AbsorbStats stats_;
  std::vector<SolveStage> stages_;
  std::optional<SparseCutWitness> cut_witness_;
  int next_stage_ = 0;
  bool failed_ = false;
};

SolveResult solve_non_extremal(const Graph& g, int r, PipelineOptions opt = {});

}  // namespace spanreg
