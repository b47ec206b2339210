"""portnet: ports-network reconstruction, centrality scoring, and
Shapley-based explanation of port importance."""

__version__ = "0.1.0"
