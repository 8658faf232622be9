from .fit import Chain, MapConfig, MapResult, MHConfig, fit_map, fit_mh
from .model import (
    GroupKey,
    LocationRecord,
    Microcensus,
    ModelParams,
    log_joint,
    log_prior,
    mu_linear,
    mu_vector,
    simulate_counts,
    simulate_dataset,
    simulate_location,
    synthetic_design,
)
from .predict import chain_from_params, predict, predict_many

__all__ = [
    "Chain", "GroupKey", "LocationRecord", "MHConfig", "MapConfig", "MapResult",
    "Microcensus", "ModelParams", "chain_from_params", "fit_map", "fit_mh",
    "log_joint", "log_prior", "mu_linear", "mu_vector", "predict", "predict_many",
    "simulate_counts", "simulate_dataset", "simulate_location", "synthetic_design",
]
