#pragma once

#include <span>

#include "edgelab/attacks.hpp"

namespace edgelab {

// Privileged-access baselines. Neither mutates the graph topology; LTA
// temporarily rewrites candidate features and puts them back.

/// LSA-0: 1 - correlation distance between the posteriors of t and c.
LpsTable lsa0_scores(VictimService& svc, NodeId t, std::span<const NodeId> candidates);

/// LinkTeller: ||posterior(t) after scaling c's features by (1 - alpha) minus
/// posterior(t)|| / alpha.
LpsTable lta_scores(VictimService& svc, NodeId t, std::span<const NodeId> candidates, double alpha);

} // namespace edgelab
