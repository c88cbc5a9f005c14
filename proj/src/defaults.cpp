#include "gnas/search_space.hpp"

// Bundled config documents. data/topologies.json and data/operations.json
// mirror these strings byte for byte; a unit test keeps them in sync.

namespace gnas {

std::string_view builtin_topology_config_json() {
  static constexpr std::string_view text = R"gnascfg([
  {
    "id": "space-1",
    "comment": "chain: input -> op1 -> op2 -> op3 -> op4 -> output",
    "adjacency": [
      [0, 1, 0, 0, 0, 0],
      [0, 0, 1, 0, 0, 0],
      [0, 0, 0, 1, 0, 0],
      [0, 0, 0, 0, 1, 0],
      [0, 0, 0, 0, 0, 1],
      [0, 0, 0, 0, 0, 0]
    ]
  },
  {
    "id": "space-2",
    "comment": "op1 and op2 in parallel, merged by op3, refined by op4",
    "adjacency": [
      [0, 1, 1, 0, 0, 0],
      [0, 0, 0, 1, 0, 0],
      [0, 0, 0, 1, 0, 0],
      [0, 0, 0, 0, 1, 0],
      [0, 0, 0, 0, 0, 1],
      [0, 0, 0, 0, 0, 0]
    ]
  },
  {
    "id": "space-3",
    "comment": "chain with a skip edge from op1 to op4",
    "adjacency": [
      [0, 1, 0, 0, 0, 0],
      [0, 0, 1, 0, 1, 0],
      [0, 0, 0, 1, 0, 0],
      [0, 0, 0, 0, 1, 0],
      [0, 0, 0, 0, 0, 1],
      [0, 0, 0, 0, 0, 0]
    ]
  },
  {
    "id": "space-4",
    "comment": "diamond: op1 fans out to op2/op3, op4 merges",
    "adjacency": [
      [0, 1, 0, 0, 0, 0],
      [0, 0, 1, 1, 0, 0],
      [0, 0, 0, 0, 1, 0],
      [0, 0, 0, 0, 1, 0],
      [0, 0, 0, 0, 0, 1],
      [0, 0, 0, 0, 0, 0]
    ]
  },
  {
    "id": "space-5",
    "comment": "op1/op2/op3 in parallel from input, op4 merges",
    "adjacency": [
      [0, 1, 1, 1, 0, 0],
      [0, 0, 0, 0, 1, 0],
      [0, 0, 0, 0, 1, 0],
      [0, 0, 0, 0, 1, 0],
      [0, 0, 0, 0, 0, 1],
      [0, 0, 0, 0, 0, 0]
    ]
  },
  {
    "id": "space-6",
    "comment": "two independent two-op chains joined at the output",
    "adjacency": [
      [0, 1, 0, 1, 0, 0],
      [0, 0, 1, 0, 0, 0],
      [0, 0, 0, 0, 0, 1],
      [0, 0, 0, 0, 1, 0],
      [0, 0, 0, 0, 0, 1],
      [0, 0, 0, 0, 0, 0]
    ]
  },
  {
    "id": "space-7",
    "comment": "chain with skips op1->op3 and op2->op4",
    "adjacency": [
      [0, 1, 0, 0, 0, 0],
      [0, 0, 1, 1, 0, 0],
      [0, 0, 0, 1, 1, 0],
      [0, 0, 0, 0, 1, 0],
      [0, 0, 0, 0, 0, 1],
      [0, 0, 0, 0, 0, 0]
    ]
  },
  {
    "id": "space-8",
    "comment": "op1 broadcasts to op2/op3/op4, all feed the output",
    "adjacency": [
      [0, 1, 0, 0, 0, 0],
      [0, 0, 1, 1, 1, 0],
      [0, 0, 0, 0, 0, 1],
      [0, 0, 0, 0, 0, 1],
      [0, 0, 0, 0, 0, 1],
      [0, 0, 0, 0, 0, 0]
    ]
  },
  {
    "id": "space-9",
    "comment": "complete DAG over the node order, all forward edges",
    "adjacency": [
      [0, 1, 1, 1, 1, 1],
      [0, 0, 1, 1, 1, 1],
      [0, 0, 0, 1, 1, 1],
      [0, 0, 0, 0, 1, 1],
      [0, 0, 0, 0, 0, 1],
      [0, 0, 0, 0, 0, 0]
    ]
  }
]
)gnascfg";
  return text;
}

std::string_view builtin_operation_config_json() {
  static constexpr std::string_view text = R"gnascfg([
  {
    "name": "GCN",
    "aliases": ["graph_convolution"],
    "description": "Graph convolution with symmetric normalization: x_i' = Theta * sum_{j in N(i) u {i}} x_j / sqrt(deg(i) * deg(j))."
  },
  {
    "name": "GAT",
    "aliases": ["attention"],
    "description": "Graph attention: x_i' = alpha_{i,i} * Theta * x_i + sum_{j in N(i)} alpha_{i,j} * Theta * x_j, where alpha_{i,j} = exp(LeakyReLU(a^T [Theta x_i || Theta x_j])) / sum_{k in N(i) u {i}} exp(LeakyReLU(a^T [Theta x_i || Theta x_k]))."
  },
  {
    "name": "GraphSAGE",
    "aliases": ["sage"],
    "description": "Sampled neighborhood aggregation: x_i' = W1 * x_i + W2 * mean_{j in N(i)} x_j."
  },
  {
    "name": "GIN",
    "aliases": ["isomorphism"],
    "description": "Graph isomorphism layer with injective sum aggregation: x_i' = MLP((1 + eps) * x_i + sum_{j in N(i)} x_j)."
  },
  {
    "name": "ChebNet",
    "aliases": ["cheb", "chebyshev"],
    "description": "Chebyshev spectral convolution: x' = sum_{k=0}^{K-1} Theta_k * T_k(L_scaled) * x over the scaled graph Laplacian."
  },
  {
    "name": "ARMA",
    "aliases": ["arma_conv"],
    "description": "Auto-regressive moving-average filter: stacked recursions x^(t+1) = L_scaled * x^(t) * W + x * V, approximating rational spectral filters."
  },
  {
    "name": "k-GNN",
    "aliases": ["kgnn", "k_gnn", "graph_conv"],
    "description": "Higher-order propagation in graph-conv form: x_i' = W1 * x_i + W2 * sum_{j in N(i)} x_j."
  },
  {
    "name": "Skip-Connection",
    "aliases": ["skip", "residual", "skip_connection", "skip connection", "identity"],
    "description": "Identity pass-through; forwards its input unchanged."
  },
  {
    "name": "Fully-Connected",
    "aliases": ["fc", "linear", "fully_connected", "fully connected", "mlp"],
    "description": "Linear layer applied nodewise, x_i' = W * x_i; ignores graph structure."
  }
]
)gnascfg";
  return text;
}

}  // namespace gnas
