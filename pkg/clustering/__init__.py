"""
ADAptation Clustering
Spherical k-means over unit embeddings and the centroid angles used by the
uncertainty score.
"""

from .projection import sphere_projection_3d
from .spherical_kmeans import (
    CLUSTER_KIND,
    ClusterConfig,
    ClusterModel,
    angles_to_centroids,
    fit,
    load_cluster_model,
    save_cluster_model,
)

__all__ = [
    "CLUSTER_KIND",
    "ClusterConfig",
    "ClusterModel",
    "angles_to_centroids",
    "fit",
    "load_cluster_model",
    "save_cluster_model",
    "sphere_projection_3d",
]
