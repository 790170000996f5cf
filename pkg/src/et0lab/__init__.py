"""Daily reference evapotranspiration: FAO-56 Penman-Monteith labels and
cross-validated ANN/DNN regressors trained on them."""

__version__ = "0.1.0"
