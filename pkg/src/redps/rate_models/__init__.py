from redps.rate_models.base import RateModel
from redps.rate_models.gaussian import GaussianModel
from redps.rate_models.increments import NormalMinusExpSumModel

__all__ = ["RateModel", "GaussianModel", "NormalMinusExpSumModel"]
