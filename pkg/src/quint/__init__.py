"""Binary node sketches for sparse graphs and estimators over them."""

from .graph import (
    Graph,
    GraphFormatError,
    common_neighbors_exact,
    load_edge_list,
    matrix_power_entry_exact,
    max_degree,
    save_edge_list,
)
from .embedding import (
    EmbeddingSet,
    NodeMapper,
    Sketch,
    TableMapper,
    apply_edge_update,
    compute_dimension,
    embed_graph,
    embed_graph_rho,
    embed_node,
    load_embeddings,
    merge_sketches,
    save_embeddings,
)
from .estimators import (
    CnEstimate,
    empirical_loss,
    estimate_common_neighbors,
    estimate_degree,
    estimate_edge,
    estimate_power4,
    estimate_power_2t,
    inner_product,
    popcount,
    sketch_similarity,
)

__version__ = "0.1.0"
