"""Localisation estimators: EPnP, trilateration, 2-means and the four pipelines."""

from .epnp import PnPSolution, epnp, project, reprojection_error
from .kmeans import KMeansResult, kmeans2
from .pipelines import (
    METHODS,
    EstimateResult,
    keypoints_pipeline,
    reflectors_pipeline,
    rfid_pipeline,
    uwb_pipeline,
)
from .trilateration import TrilaterationResult, trilaterate

__all__ = [
    "METHODS",
    "EstimateResult",
    "KMeansResult",
    "PnPSolution",
    "TrilaterationResult",
    "epnp",
    "keypoints_pipeline",
    "kmeans2",
    "project",
    "reflectors_pipeline",
    "reprojection_error",
    "rfid_pipeline",
    "trilaterate",
    "uwb_pipeline",
]
